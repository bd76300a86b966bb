#include "xdiff/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace xdiff {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"model",
       {"name", "n", "alpha", "beta", "mu1", "mu2", "delta", "mu", "pks_beta", "d", "k",
        "full_interaction", "d1", "d2"}},
      {"grid",
       {"dim", "cells", "dt", "dt_snap", "snapshots", "extent_x", "extent_y", "t_start"}},
      {"solver",
       {"newton_tol", "newton_max_iters", "fd_step", "damping_max_halvings",
        "positivity_margin"}},
      {"entropy", {"epsilon", "lambda_target", "resolution", "subspace"}},
      {"probe",
       {"radii", "epsilon0", "epsilon1", "p", "tau", "stride", "t0", "trajectory", "x0", "y0"}},
      {"initial", {"kind", "value", "amplitude", "mode"}},
      {"output", {"prefix"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section header",
                          line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (schema().find(section) == schema().end())
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown section [" +
                              section + "]",
                          line_no, section);
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value",
                        line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key '" + key +
                            "' outside any section",
                        line_no, key);
    const auto& keys = schema().at(section);
    if (keys.find(key) == keys.end())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key +
                            "' in section [" + section + "]",
                        line_no, key);
    if (cfg.sections_[section].count(key))
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'",
                        line_no, key);
    cfg.sections_[section][key] = Entry{value, line_no};
  }
  return cfg;
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  auto sit = sections_.find(section);
  if (sit == sections_.end()) return nullptr;
  auto kit = sit->second.find(key);
  if (kit == sit->second.end()) return nullptr;
  return &kit->second;
}

const Config::Entry& Config::require(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e)
    throw ConfigError(origin_ + ": missing required key '" + key + "' in section [" + section +
                          "]",
                      0, key);
  return *e;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  return require(section, key).raw;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->raw : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  try {
    size_t pos = 0;
    double v = std::stod(e.raw, &pos);
    if (pos != e.raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                          "' is not a number: '" + e.raw + "'",
                      e.line, key);
  }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  return find(section, key) ? get_double(section, key) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  try {
    size_t pos = 0;
    int v = std::stoi(e.raw, &pos);
    if (pos != e.raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                          "' is not an integer: '" + e.raw + "'",
                      e.line, key);
  }
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  return find(section, key) ? get_int(section, key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::string v = e->raw;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": key '" + key +
                        "' is not a boolean: '" + e->raw + "'",
                    e->line, key);
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  std::vector<double> out;
  std::istringstream in(e.raw);
  std::string tok;
  while (in >> tok) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                            "' has a non-numeric entry: '" + tok + "'",
                        e.line, key);
    }
  }
  if (out.empty())
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key + "' is empty",
                      e.line, key);
  return out;
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
  return find(section, key) ? get_list(section, key) : fallback;
}

}  // namespace xdiff
