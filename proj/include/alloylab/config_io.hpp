#pragma once

// Key-value config files for the model:
//
//   # d=1 benchmark
//   d = 1
//   l = 8
//   bc = dirichlet
//   r = 1
//   omega_plus = 1.0
//   gamma = 0 1          (d >= 2: comma tuples, e.g. "0,0 1,0 0,1 1,1")
//   a = 1 -0.5
//   kappa = 1.0
//   v0 = 0.0             (r^d values; omit for zero background)
//   w = 1.0              (r^d values; omit for the default step bump)
//
// '#' starts a comment, keys d, l, bc, omega_plus, gamma and a are required.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "alloylab/csv.hpp"
#include "alloylab/errors.hpp"
#include "alloylab/model.hpp"

namespace alloylab {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse '" + s + "' as a number for " + what);
  }
}

inline long parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse '" + s + "' as an integer for " + what);
  }
}

inline std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split_ws(s)) out.push_back(parse_double(tok, what));
  return out;
}

// Lattice points: "0 1 3" in d=1, "0,0 1,0" in higher d.
inline std::vector<Pt> parse_point_list(const std::string& s, int d, const std::string& what) {
  std::vector<Pt> out;
  for (const auto& tok : split_ws(s)) {
    Pt p{0, 0, 0};
    std::istringstream in(tok);
    std::string part;
    int i = 0;
    while (std::getline(in, part, ',')) {
      if (i >= d) throw ParseError("point '" + tok + "' has more than d coordinates in " + what);
      p[i++] = static_cast<int>(parse_int(part, what));
    }
    if (i != d) throw ParseError("point '" + tok + "' has fewer than d coordinates in " + what);
    out.push_back(p);
  }
  return out;
}

inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + " is not 'key = value'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline ModelConfig config_from_key_values(const std::map<std::string, std::string>& kv) {
  auto require = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("missing config key '" + key + "'");
    return it->second;
  };
  auto optional = [&](const std::string& key, const std::string& fallback) -> std::string {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  static const char* known[] = {"d", "l", "bc", "r", "omega_plus", "gamma", "a", "kappa", "v0", "w"};
  for (const auto& [key, value] : kv) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ParseError("unknown config key '" + key + "'");
  }

  ModelConfig cfg;
  cfg.d = static_cast<int>(parse_int(require("d"), "d"));
  cfg.l = static_cast<int>(parse_int(require("l"), "l"));
  cfg.bc = boundary_from_name(require("bc"));
  cfg.r = static_cast<int>(parse_int(optional("r", "1"), "r"));
  cfg.omega_plus = parse_double(require("omega_plus"), "omega_plus");
  cfg.site.gamma = parse_point_list(require("gamma"), cfg.d, "gamma");
  cfg.site.a = parse_double_list(require("a"), "a");
  cfg.site.kappa = parse_double(optional("kappa", "1"), "kappa");
  cfg.v0 = parse_double_list(optional("v0", ""), "v0");
  cfg.site.w = parse_double_list(optional("w", ""), "w");
  validate(cfg);
  return cfg;
}

inline ModelConfig parse_config(const std::string& text) {
  return config_from_key_values(parse_key_values(text));
}

inline ModelConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline std::string serialize_config(const ModelConfig& cfg) {
  std::ostringstream out;
  out << "d = " << cfg.d << "\n";
  out << "l = " << cfg.l << "\n";
  out << "bc = " << boundary_name(cfg.bc) << "\n";
  out << "r = " << cfg.r << "\n";
  out << "omega_plus = " << format_double(cfg.omega_plus) << "\n";
  out << "gamma =";
  for (const Pt& p : cfg.site.gamma) {
    out << " " << p[0];
    for (int i = 1; i < cfg.d; ++i) out << "," << p[i];
  }
  out << "\n";
  out << "a =";
  for (double c : cfg.site.a) out << " " << format_double(c);
  out << "\n";
  out << "kappa = " << format_double(cfg.site.kappa) << "\n";
  if (!cfg.v0.empty()) {
    out << "v0 =";
    for (double c : cfg.v0) out << " " << format_double(c);
    out << "\n";
  }
  if (!cfg.site.w.empty()) {
    out << "w =";
    for (double c : cfg.site.w) out << " " << format_double(c);
    out << "\n";
  }
  return out.str();
}

// Applies a --set style override; returns false if the key is not a model key.
inline bool apply_model_override(std::map<std::string, std::string>& kv, const std::string& key,
                                 const std::string& value) {
  static const char* known[] = {"d", "l", "bc", "r", "omega_plus", "gamma", "a", "kappa", "v0", "w"};
  for (const char* k : known) {
    if (key == k) {
      kv[key] = value;
      return true;
    }
  }
  return false;
}

}  // namespace alloylab
