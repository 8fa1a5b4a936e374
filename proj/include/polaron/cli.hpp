#pragma once
// Configuration-driven runner behind the `polaron` executable.
//
// Configs are INI files: shared sections [grid], [fields], [solver] plus one
// section named after the command. All quantities are dimensionless (hbar = 1,
// m = 1/2). Unknown sections and keys are rejected by name.

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "polaron/pekar.hpp"
#include "polaron/potentials.hpp"

namespace polaron::cli {

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{
      "pekar-solve", "pekar-scan", "scaling",      "concavity",
      "diamagnetic", "weak-field", "binding",      "threshold",
      "bound-budget", "sandwich",  "fock"};
  return c;
}

// Flat view of an INI file: "section.key" -> raw value.
using RawConfig = std::map<std::string, std::string>;

RawConfig read_config(const std::filesystem::path& path);
RawConfig parse_config(const std::string& text);

// Typed access with documented defaults; every accessor marks its key as used.
class Config {
 public:
  Config(std::string command, RawConfig raw);

  const std::string& command() const { return command_; }
  const RawConfig& raw() const { return raw_; }

  double real(const std::string& key, double fallback) const;
  double real_required(const std::string& key) const;
  int integer(const std::string& key, int fallback) const;
  std::string word(const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed) const;
  std::vector<double> reals(const std::string& key,
                            const std::vector<double>& fallback) const;
  Vec3 vec3(const std::string& key, const Vec3& fallback) const;
  bool has(const std::string& key) const { return raw_.count(key) > 0; }

  // Throws ValidationError naming the first key no accessor asked for.
  void reject_unused() const;

 private:
  const std::string* find(const std::string& key) const;
  std::string command_;
  RawConfig raw_;
  mutable std::map<std::string, bool> used_;
};

std::string sha256_hex(const std::string& data);

// Canonical text of the fields, hexfloat-exact, used in cache keys.
std::string describe_fields(const PotentialPair& pair);

// One file per key under root, filename = hex SHA-256 of the key text.
// Entries carry a checksum; unreadable ones are evicted and recomputed.
class PekarCache {
 public:
  explicit PekarCache(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  struct Lookup {
    pekar::PekarSolution solution;
    bool hit = false;
  };

  // key text covers fields, coupling, grid and solver options.
  static std::string key_text(const pekar::PekarProblem& problem,
                              const pekar::MinimizeOptions& opts);

  Lookup get_or_solve(const pekar::PekarProblem& problem,
                      const pekar::MinimizeOptions& opts);

  std::filesystem::path path_for(const std::string& key_text) const;
  std::optional<pekar::PekarSolution> load(const std::string& key_text,
                                           const Grid3D& grid);
  void store(const std::string& key_text, const pekar::PekarSolution& s) const;

  const std::vector<std::string>& warnings() const { return warnings_; }
  int solves() const { return solves_; }

 private:
  void warn(const std::string& w);

  std::filesystem::path root_;
  std::vector<std::string> warnings_;
  int solves_ = 0;
  std::mutex mu_;
};

// Cache root: POLARON_CACHE_DIR if set, else <out>/cache.
std::filesystem::path cache_root(const std::filesystem::path& out);

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Writes <dir>/<name>.csv with 17 significant digits; throws ValidationError
// for an empty table and IoError when the file cannot be written.
std::filesystem::path emit_csv(const std::filesystem::path& dir, const Table& t);
std::string format_real(double v);

struct RunOptions {
  std::string command;
  std::filesystem::path config;
  std::filesystem::path out = "polaron-out";
  std::uint64_t seed = 0;
  int threads = 1;
};

enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kNotConverged = 3,
  kIo = 4,
};

struct RunResult {
  int exit_code = kOk;
  std::filesystem::path record;  // <out>/<command>.json
  std::vector<std::filesystem::path> artifacts;
  std::string message;
};

// Runs one command end to end and writes the CSV and JSON record. Errors are
// mapped to exit codes; nothing is thrown.
RunResult run(const RunOptions& opts);

}  // namespace polaron::cli
