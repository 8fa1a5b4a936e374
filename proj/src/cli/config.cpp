#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "polaron/cli.hpp"

namespace polaron::cli {
namespace {

RawConfig flatten(const boost::property_tree::ptree& tree) {
  RawConfig out;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      // Keys outside any section.
      out["." + name] = node.data();
      continue;
    }
    for (const auto& [key, leaf] : node) {
      if (!leaf.empty())
        throw ValidationError("config nesting too deep at [" + name + "] " + key);
      out[name + "." + key] = leaf.data();
    }
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
    throw ValidationError(key + ": expected a finite number, got '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string pretty(const std::string& key) {
  const auto dot = key.find('.');
  if (dot == 0) return "'" + key.substr(1) + "' (outside any section)";
  return "'" + key.substr(dot + 1) + "' in [" + key.substr(0, dot) + "]";
}

}  // namespace

RawConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("config parse error: ") + e.message() +
                          " at line " + std::to_string(e.line()));
  }
  return flatten(tree);
}

RawConfig read_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

Config::Config(std::string command, RawConfig raw)
    : command_(std::move(command)), raw_(std::move(raw)) {
  if (std::find(commands().begin(), commands().end(), command_) == commands().end())
    throw ValidationError("unknown command '" + command_ + "'");
}

const std::string* Config::find(const std::string& key) const {
  used_[key] = true;
  const auto it = raw_.find(key);
  return it == raw_.end() ? nullptr : &it->second;
}

double Config::real(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v ? parse_real(key, *v) : fallback;
}

double Config::real_required(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ValidationError(key + ": required for " + command_);
  return parse_real(key, *v);
}

int Config::integer(const std::string& key, int fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  const std::string t = trim(*v);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ValidationError(key + ": expected an integer, got '" + *v + "'");
  return out;
}

std::string Config::word(const std::string& key, const std::string& fallback,
                         const std::vector<std::string>& allowed) const {
  const std::string* v = find(key);
  const std::string w = v ? trim(*v) : fallback;
  if (std::find(allowed.begin(), allowed.end(), w) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw ValidationError(key + ": '" + w + "' is not one of " + list);
  }
  return w;
}

std::vector<double> Config::reals(const std::string& key,
                                  const std::vector<double>& fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& w : split_list(*v)) out.push_back(parse_real(key, w));
  if (out.empty()) throw ValidationError(key + ": empty list");
  return out;
}

Vec3 Config::vec3(const std::string& key, const Vec3& fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  const auto words = split_list(*v);
  if (words.size() != 3) throw ValidationError(key + ": expected three numbers");
  return {parse_real(key, words[0]), parse_real(key, words[1]), parse_real(key, words[2])};
}

void Config::reject_unused() const {
  for (const auto& [key, value] : raw_)
    if (!used_.count(key))
      throw ValidationError("unknown key " + pretty(key) + " for command " + command_);
}

}  // namespace polaron::cli
