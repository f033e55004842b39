#pragma once

// Flat `key = value` run configuration.
//
// One entry per line, `#` starts a comment, keys are dotted (`synthetic.n`).
// Every command owns a schema of known keys with defaults; anything else is
// rejected. The resolved config (defaults, file values and flag overrides)
// is written next to the outputs and can be fed back verbatim.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msl/core.hpp"
#include "msl/experiment.hpp"
#include "msl/penalties.hpp"
#include "msl/solver.hpp"

namespace msl::cli {

enum class Command { kFit, kSimulate, kScaling, kRademacher };

std::string command_name(Command c);

class RunConfig {
 public:
  explicit RunConfig(Command command);

  Command command() const noexcept { return command_; }

  /// Merges `key = value` lines. Unknown or repeated keys throw InvalidInput
  /// with "source:line: ..." diagnostics.
  void load(std::istream& in, const std::string& source);
  void load_file(const std::filesystem::path& path);
  /// Overrides one key; throws on unknown keys.
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  const std::string& raw(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  /// Typed views. Each validates what it builds.
  SyntheticSpec synthetic() const;
  WeightConfig weights() const;
  std::vector<PenaltyFamily> penalty_families() const;
  PenaltyFamily penalty_family() const;  // exactly one family required
  SolverConfig solver() const;
  std::filesystem::path out_dir() const;

  /// Resolved `key = value` lines in key order.
  void write(std::ostream& out) const;

 private:
  Command command_;
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> seen_in_file_;
};

}  // namespace msl::cli
