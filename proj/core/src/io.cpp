#include "msl/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace msl {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  std::ostringstream os;
  os << source << ":" << line << ": " << msg;
  throw InvalidInput(os.str());
}

double parse_real(const std::string& s, const std::string& source, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail(source, line, "'" + s + "' is not a finite number");
  }
  return v;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Dataset parse_dataset_csv(std::istream& in, std::optional<int> num_classes,
                          const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) fail(source, lineno, "missing header");
  if (header.size() < 2 || header[0] != "y") {
    fail(source, lineno, "header must read y,x1,...,xd");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != "x" + std::to_string(j)) {
      fail(source, lineno, "header column " + std::to_string(j + 1) + " must be x" +
                               std::to_string(j));
    }
  }
  const std::size_t d = header.size() - 1;

  std::vector<int> labels;
  std::vector<double> values;
  int max_label = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != d + 1) {
      fail(source, lineno,
           "expected " + std::to_string(d + 1) + " fields, found " + std::to_string(fields.size()));
    }
    int label = 0;
    {
      const auto& s = fields[0];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), label);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        fail(source, lineno, "label '" + s + "' is not an integer");
      }
    }
    if (label < 1) fail(source, lineno, "labels must be >= 1");
    if (num_classes && label > *num_classes) {
      fail(source, lineno, "label exceeds the number of classes");
    }
    max_label = std::max(max_label, label);
    labels.push_back(label - 1);
    for (std::size_t j = 1; j <= d; ++j) values.push_back(parse_real(fields[j], source, lineno));
  }
  if (labels.empty()) fail(source, lineno, "no samples");
  const int L = num_classes ? *num_classes : std::max(max_label, 2);
  Matrix x(static_cast<Index>(labels.size()), static_cast<Index>(d));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      x(i, j) = values[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(j)];
    }
  }
  return Dataset(std::move(x), std::move(labels), L);
}

Dataset read_dataset_csv(const std::filesystem::path& path, std::optional<int> num_classes) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open dataset " + path.string());
  return parse_dataset_csv(in, num_classes, path.string());
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  out << "y";
  for (Index j = 1; j <= data.d(); ++j) out << ",x" << j;
  out << "\n";
  for (Index i = 0; i < data.n(); ++i) {
    out << data.labels()[static_cast<std::size_t>(i)] + 1;
    for (Index j = 0; j < data.d(); ++j) out << "," << format_double(data.features()(i, j));
    out << "\n";
  }
}

void write_coefficients_csv(const Matrix& b, std::ostream& out) {
  for (Index j = 0; j < b.rows(); ++j) {
    for (Index l = 0; l < b.cols(); ++l) {
      if (l > 0) out << ",";
      out << format_double(b(j, l));
    }
    out << "\n";
  }
}

Matrix parse_coefficients_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    std::vector<double> row;
    for (const auto& f : split_csv_line(line)) row.push_back(parse_real(f, source, lineno));
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(source, lineno, "ragged coefficient row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(source, lineno, "no coefficient rows");
  Matrix b(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index j = 0; j < b.rows(); ++j) {
    for (Index l = 0; l < b.cols(); ++l) {
      b(j, l) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
    }
  }
  return b;
}

std::string coefficient_metadata_json(const CoefficientMetadata& meta) {
  nlohmann::ordered_json j;
  j["d"] = meta.d;
  j["L"] = meta.num_classes;
  j["centered"] = meta.centered;
  j["penalty"] = meta.penalty;
  j["objective"] = meta.objective;
  j["iterations"] = meta.iterations;
  j["converged"] = meta.converged;
  return j.dump(2) + "\n";
}

CoefficientMetadata parse_coefficient_metadata_json(const std::string& text) {
  CoefficientMetadata m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.d = j.at("d").get<Index>();
    m.num_classes = j.at("L").get<Index>();
    m.centered = j.at("centered").get<bool>();
    m.penalty = j.value("penalty", std::string());
    m.objective = j.value("objective", 0.0);
    m.iterations = j.value("iterations", 0);
    m.converged = j.value("converged", false);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad coefficient metadata: ") + e.what());
  }
  return m;
}

void write_coefficients(const std::filesystem::path& csv_path, const CoefficientMatrix& b,
                        const CoefficientMetadata& meta) {
  {
    std::ofstream out(csv_path);
    if (!out) throw InvalidInput("cannot write " + csv_path.string());
    write_coefficients_csv(b.values(), out);
  }
  auto json_path = csv_path;
  json_path.replace_extension(".json");
  std::ofstream out(json_path);
  if (!out) throw InvalidInput("cannot write " + json_path.string());
  out << coefficient_metadata_json(meta);
}

CoefficientMatrix read_coefficients(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw InvalidInput("cannot open " + csv_path.string());
  Matrix b = parse_coefficients_csv(in, csv_path.string());
  auto json_path = csv_path;
  json_path.replace_extension(".json");
  std::ifstream jin(json_path);
  if (!jin) throw InvalidInput("cannot open " + json_path.string());
  std::stringstream ss;
  ss << jin.rdbuf();
  const CoefficientMetadata meta = parse_coefficient_metadata_json(ss.str());
  if (meta.d != b.rows() || meta.num_classes != b.cols()) {
    throw InvalidInput("coefficient metadata does not match the CSV shape");
  }
  return CoefficientMatrix(std::move(b), meta.centered);
}

}  // namespace msl
