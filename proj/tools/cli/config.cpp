#include "config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace msl::cli {

namespace {

using Schema = std::map<std::string, std::string>;

void add_synthetic(Schema& s) {
  s["synthetic.n"] = "200";
  s["synthetic.d"] = "20";
  s["synthetic.L"] = "3";
  s["synthetic.structure"] = "global-row-sparse";
  s["synthetic.d0"] = "2";
  s["synthetic.m"] = "2";
  s["synthetic.r0"] = "1";
  s["synthetic.signal_scale"] = "1";
  s["synthetic.delta"] = "0.05";
  s["synthetic.feature_law"] = "gaussian";
  s["synthetic.ar1_rho"] = "0";
  s["synthetic.dof"] = "5";
}

void add_penalty(Schema& s) {
  s["penalty.family"] = "group-slope";
  s["penalty.c0"] = "1";
  s["penalty.c1"] = "1";
  s["penalty.c2"] = "1";
  s["penalty.c_nuclear"] = "1";
  s["penalty.lambda_scale"] = "1";
}

void add_solver(Schema& s) {
  s["solver.max_iter"] = "5000";
  s["solver.grad_map_tol"] = "1e-7";
  s["solver.backtrack_factor"] = "0.5";
  s["solver.initial_step"] = "auto";
  s["solver.enforce_centering"] = "true";
  s["solver.prox_tol"] = "1e-9";
}

Schema schema_for(Command c) {
  Schema s;
  s["run.seed"] = "0";
  s["output.dir"] = ".";
  add_penalty(s);
  switch (c) {
    case Command::kFit:
      add_solver(s);
      s["data.path"] = "";
      s["data.L"] = "auto";
      break;
    case Command::kSimulate:
      add_synthetic(s);
      add_solver(s);
      s["eval.test_size"] = "5000";
      s["eval.mc_samples"] = "5000";
      break;
    case Command::kScaling:
      add_synthetic(s);
      add_solver(s);
      s["grid.n"] = "";
      s["run.replicates"] = "1";
      s["run.threads"] = "1";
      s["eval.test_size"] = "5000";
      s["eval.mc_samples"] = "5000";
      s["eval.record_timing"] = "false";
      break;
    case Command::kRademacher:
      add_synthetic(s);
      s["rademacher.draws"] = "200";
      break;
  }
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& v, const char* what) {
  throw InvalidInput("config key '" + key + "': '" + v + "' is not " + what);
}

template <class T>
T parse_number(const std::string& key, const std::string& v, const char* what) {
  T out{};
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (v.empty() || ec != std::errc() || ptr != last) bad_value(key, v, what);
  return out;
}

}  // namespace

std::string command_name(Command c) {
  switch (c) {
    case Command::kFit:
      return "fit";
    case Command::kSimulate:
      return "simulate";
    case Command::kScaling:
      return "scaling";
    case Command::kRademacher:
      return "rademacher";
  }
  return "?";
}

RunConfig::RunConfig(Command command) : command_(command), values_(schema_for(command)) {}

void RunConfig::load(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw InvalidInput(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!values_.count(key)) {
      throw InvalidInput(where + "unknown key '" + key + "' for command " +
                         command_name(command_));
    }
    if (seen_in_file_[key]) throw InvalidInput(where + "duplicate key '" + key + "'");
    seen_in_file_[key] = true;
    values_[key] = value;
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  load(in, path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) {
    throw InvalidInput("unknown key '" + key + "' for command " + command_name(command_));
  }
  values_[key] = trim(value);
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& RunConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("unknown key '" + key + "'");
  return it->second;
}

std::string RunConfig::get_string(const std::string& key) const { return raw(key); }

double RunConfig::get_double(const std::string& key) const {
  return parse_number<double>(key, raw(key), "a real number");
}

int RunConfig::get_int(const std::string& key) const {
  return parse_number<int>(key, raw(key), "an integer");
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  return parse_number<std::uint64_t>(key, raw(key), "an unsigned 64-bit integer");
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto& v = raw(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream ss(raw(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

SyntheticSpec RunConfig::synthetic() const {
  SyntheticSpec s;
  s.n = get_int("synthetic.n");
  s.d = get_int("synthetic.d");
  s.num_classes = get_int("synthetic.L");
  s.signal_scale = get_double("synthetic.signal_scale");
  s.delta = get_double("synthetic.delta");
  s.seed = get_u64("run.seed");

  const std::string structure = get_string("synthetic.structure");
  if (structure == "global-row-sparse") {
    s.structure = GlobalRowSparse{get_int("synthetic.d0")};
  } else if (structure == "double-row-sparse") {
    const int d0 = get_int("synthetic.d0");
    std::vector<int> m;
    for (const auto& item : get_list("synthetic.m")) {
      m.push_back(parse_number<int>("synthetic.m", item, "an integer"));
    }
    if (m.size() == 1 && d0 > 1) m.assign(static_cast<std::size_t>(std::max(d0, 0)), m.front());
    s.structure = DoubleRowSparse{d0, m};
  } else if (structure == "low-rank") {
    s.structure = LowRank{get_int("synthetic.r0")};
  } else {
    bad_value("synthetic.structure", structure,
              "one of global-row-sparse, double-row-sparse, low-rank");
  }

  const std::string law = get_string("synthetic.feature_law");
  if (law == "gaussian") {
    const double rho = get_double("synthetic.ar1_rho");
    GaussianLaw g;
    if (rho != 0.0) g.covariance = ar1_covariance(s.d, rho);
    s.feature_law = g;
  } else if (law == "rademacher") {
    s.feature_law = RademacherLaw{};
  } else if (law == "student-t") {
    s.feature_law = StudentTLaw{get_double("synthetic.dof")};
  } else {
    bad_value("synthetic.feature_law", law, "one of gaussian, rademacher, student-t");
  }
  s.validate();
  return s;
}

WeightConfig RunConfig::weights() const {
  WeightConfig w;
  w.c0 = get_double("penalty.c0");
  w.c1 = get_double("penalty.c1");
  w.c2 = get_double("penalty.c2");
  w.c_nuclear = get_double("penalty.c_nuclear");
  w.validate();
  return w;
}

std::vector<PenaltyFamily> RunConfig::penalty_families() const {
  std::vector<PenaltyFamily> out;
  for (const auto& name : get_list("penalty.family")) out.push_back(parse_penalty_family(name));
  return out;
}

PenaltyFamily RunConfig::penalty_family() const {
  const auto all = penalty_families();
  if (all.size() != 1) throw InvalidInput("penalty.family must name exactly one penalty");
  return all.front();
}

SolverConfig RunConfig::solver() const {
  SolverConfig c;
  c.max_iter = get_int("solver.max_iter");
  c.grad_map_tol = get_double("solver.grad_map_tol");
  c.backtrack_factor = get_double("solver.backtrack_factor");
  if (raw("solver.initial_step") != "auto") c.initial_step = get_double("solver.initial_step");
  c.enforce_centering = get_bool("solver.enforce_centering");
  c.prox_tol = get_double("solver.prox_tol");
  c.validate();
  return c;
}

std::filesystem::path RunConfig::out_dir() const { return get_string("output.dir"); }

void RunConfig::write(std::ostream& out) const {
  out << "# mslc " << command_name(command_) << " resolved configuration\n";
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
}

}  // namespace msl::cli
