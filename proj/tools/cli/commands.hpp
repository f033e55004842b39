#pragma once

#include <iosfwd>

#include "config.hpp"

namespace msl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitNotConverged = 3;

/// Entry point behind `mslc`. Never throws; errors become exit codes with a
/// diagnostic on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// The commands proper. They throw InvalidInput on bad configuration.
int cmd_fit(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_scaling(const RunConfig& cfg, std::ostream& out);
int cmd_rademacher(const RunConfig& cfg, std::ostream& out);

}  // namespace msl::cli
