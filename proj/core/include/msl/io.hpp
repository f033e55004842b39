#pragma once

// File formats.
//
// Dataset CSV: header row `y,x1,...,xd`, then one sample per line with an
// integer label in 1..L followed by d reals.
//
// Coefficient CSV: d lines of L comma-separated reals, no header. The JSON
// sidecar carries {"d", "L", "centered", "penalty", ...}.
//
// All reals are written in shortest round-trip form, so identical values
// always produce identical bytes.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "msl/core.hpp"

namespace msl {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Parses a dataset CSV. `num_classes` defaults to the largest label seen.
/// Throws InvalidInput naming the offending line.
Dataset parse_dataset_csv(std::istream& in, std::optional<int> num_classes = std::nullopt,
                          const std::string& source = "<input>");
Dataset read_dataset_csv(const std::filesystem::path& path,
                         std::optional<int> num_classes = std::nullopt);
void write_dataset_csv(const Dataset& data, std::ostream& out);

void write_coefficients_csv(const Matrix& b, std::ostream& out);
Matrix parse_coefficients_csv(std::istream& in, const std::string& source = "<input>");

struct CoefficientMetadata {
  Index d = 0;
  Index num_classes = 0;
  bool centered = false;
  std::string penalty;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

std::string coefficient_metadata_json(const CoefficientMetadata& meta);
CoefficientMetadata parse_coefficient_metadata_json(const std::string& text);

/// Writes `<stem>.csv` and `<stem>.json` next to each other.
void write_coefficients(const std::filesystem::path& csv_path, const CoefficientMatrix& b,
                        const CoefficientMetadata& meta);
/// Reads a coefficient CSV and its sidecar (path with extension .json).
CoefficientMatrix read_coefficients(const std::filesystem::path& csv_path);

}  // namespace msl
