// End-to-end checks of the CLI surface: exit-code categories, the missing-key
// message, and output laydown. The binary path arrives as argv[1] (set by
// ctest); a plain `test_cli <path>` works too.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

std::string g_cli;
int g_failures = 0;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    std::fprintf(stderr, "FAILED: %s\n", what.c_str());
    ++g_failures;
  }
}

struct RunResult {
  int exit_code = -1;
  std::string stderr_text;
};

RunResult run(const std::string& args) {
  const fs::path err = fs::temp_directory_path() / "alloylab_cli_test_stderr.txt";
  const std::string cmd = g_cli + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.stderr_text = buf.str();
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <alloylab-binary>\n");
    return 2;
  }
  g_cli = argv[1];
  const fs::path work = fs::temp_directory_path() / "alloylab_cli_test";
  fs::remove_all(work);
  fs::create_directories(work);

  const fs::path good = work / "good.cfg";
  {
    std::ofstream out(good);
    out << "d = 1\nl = 8\nbc = dirichlet\nomega_plus = 1\ngamma = 0 1\na = 1 -0.5\n";
  }
  const fs::path missing_bc = work / "missing.cfg";
  {
    std::ofstream out(missing_bc);
    out << "d = 1\nl = 8\nomega_plus = 1\ngamma = 0 1\na = 1 -0.5\n";
  }

  // Success path writes the table and the manifest.
  const RunResult ok =
      run("spectrum --config " + good.string() + " --out " + (work / "s").string() + " --seed 3");
  expect(ok.exit_code == 0, "spectrum exits 0");
  expect(fs::exists(work / "s" / "spectrum.csv"), "spectrum.csv exists");
  expect(fs::exists(work / "s" / "manifest.json"), "manifest.json exists");
  expect(fs::file_size(work / "s" / "spectrum.csv") > 0, "spectrum.csv non-empty");

  // Missing config key: exit 2 and the key name in the message.
  const RunResult missing =
      run("spectrum --config " + missing_bc.string() + " --out " + (work / "m").string());
  expect(missing.exit_code == 2, "missing key exits 2");
  expect(missing.stderr_text.find("bc") != std::string::npos, "message names the missing key");

  // Unknown flag value: parse error.
  const RunResult badset = run("wegner --config " + good.string() + " --out " +
                               (work / "b").string() + " --set center=oops --samples 5");
  expect(badset.exit_code == 2, "unparsable override exits 2");

  // Precondition violation: lifshitz refuses sign-indefinite sites, exit 3.
  const RunResult indefinite = run("lifshitz --config " + good.string() + " --out " +
                                   (work / "l").string() + " --samples 5");
  expect(indefinite.exit_code == 3, "sign-indefinite lifshitz exits 3");
  expect(indefinite.stderr_text.find("precondition") != std::string::npos,
         "error category is machine readable");

  // Matrix exports: spectrum dumps the Hamiltonian triplets, toeplitz-check
  // dumps A and B.
  const RunResult exports =
      run("toeplitz-check --config " + good.string() + " --out " + (work / "t").string() +
          " --set sizes=4,8 --set export_matrices=1");
  expect(exports.exit_code == 0, "toeplitz-check with exports exits 0");
  expect(fs::exists(work / "t" / "toeplitz_a.csv") && fs::exists(work / "t" / "toeplitz_b.csv"),
         "A and B triplet files exist");
  expect(fs::exists(work / "t" / "symbol.csv"), "symbol sweep exists");

  // Resource cap via the environment: exit 5.
  const RunResult capped = run("spectrum --config " + good.string() + " --out " +
                               (work / "r").string() + " --set l=64");
  expect(capped.exit_code == 0, "l = 64 fits the default cap");
  setenv("ALLOYLAB_MAX_DIM", "16", 1);
  const RunResult over = run("spectrum --config " + good.string() + " --out " +
                             (work / "r2").string() + " --set l=64");
  unsetenv("ALLOYLAB_MAX_DIM");
  expect(over.exit_code == 5, "dimension cap exits 5");

  fs::remove_all(work);
  if (g_failures == 0) std::printf("test_cli: all checks passed\n");
  return g_failures == 0 ? 0 : 1;
}
