#include "nmg/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "nmg/vec.hpp"

namespace nmg {

namespace {

template <class T>
T get(const nlohmann::json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

void reject_unknown(const nlohmann::json& j, const std::string& path, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw ConfigError(path + "." + key + ": unknown field");
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

template <class F>
auto rethrow_as_config(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.rfind(path, 0) == 0 ? msg : path + ": " + msg);
  }
}

}  // namespace

nlohmann::json to_json(const ProblemSpec& s) {
  return {{"dimension", s.dimension},
          {"n", s.n},
          {"alpha", s.alpha},
          {"kernel_sigma", s.kernel_sigma},
          {"sigma_units", to_string(s.sigma_units)},
          {"regularization", to_string(s.regularization)},
          {"boundary", to_string(s.boundary)}};
}

ProblemSpec problem_from_json(const nlohmann::json& j, ProblemSpec s) {
  reject_unknown(j, "problem", {"dimension", "n", "alpha", "kernel_sigma", "sigma_units", "regularization", "boundary"});
  s.dimension = get(j, "problem", "dimension", s.dimension);
  s.n = get(j, "problem", "n", s.n);
  s.alpha = get(j, "problem", "alpha", s.alpha);
  s.kernel_sigma = get(j, "problem", "kernel_sigma", s.kernel_sigma);
  rethrow_as_config("problem.sigma_units", [&] {
    if (j.contains("sigma_units")) s.sigma_units = sigma_units_from_string(get<std::string>(j, "problem", "sigma_units", ""));
    return 0;
  });
  rethrow_as_config("problem.regularization", [&] {
    if (j.contains("regularization"))
      s.regularization = regularization_from_string(get<std::string>(j, "problem", "regularization", ""));
    return 0;
  });
  rethrow_as_config("problem.boundary", [&] {
    if (j.contains("boundary")) s.boundary = kernel_boundary_from_string(get<std::string>(j, "problem", "boundary", ""));
    return 0;
  });
  rethrow_as_config("problem", [&] {
    s.validate();
    return 0;
  });
  return s;
}

void ExperimentConfig::validate() const {
  rethrow_as_config("problem", [&] {
    problem.validate();
    return 0;
  });
  if (num_rhs < 1) throw ConfigError("num_rhs: must be >= 1");
  const auto& m = solver.method;
  if (m != "nmg" && m != "mg" && m != "cg") throw ConfigError("solver.method: must be nmg, mg or cg");
  if (!(solver.tol > 0.0)) throw ConfigError("solver.tol: must be positive");
  if (solver.max_cycles < 1) throw ConfigError("solver.max_cycles: must be >= 1");
  if (solver.levels < 2) throw ConfigError("solver.levels: must be >= 2");
  if (solver.coarsest < 0 || (solver.coarsest != 0 && solver.coarsest < 2))
    throw ConfigError("solver.coarsest: must be 0 or >= 2");
  if (train) rethrow_as_config("train", [&] {
      train->validate();
      return 0;
    });
  for (const auto& b : bench.methods)
    if (b != "nmg" && b != "mg" && b != "cg") throw ConfigError("bench.methods: unknown method '" + b + "'");
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  reject_unknown(j, "config",
                 {"problem", "train", "solver", "num_rhs", "rhs_seed", "output_dir", "checkpoint", "bench",
                  "acceptance"});  // "acceptance" belongs to the acceptance runner
  ExperimentConfig c;
  if (j.contains("problem")) c.problem = problem_from_json(j["problem"]);
  if (j.contains("train"))
    c.train = rethrow_as_config("train", [&] { return train_config_from_json(j["train"]); });
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    reject_unknown(s, "solver", {"method", "coarsest", "levels", "tol", "max_cycles", "pre_smooth", "post_smooth", "omega"});
    c.solver.method = get(s, "solver", "method", c.solver.method);
    c.solver.coarsest = get(s, "solver", "coarsest", c.solver.coarsest);
    c.solver.levels = get(s, "solver", "levels", c.solver.levels);
    c.solver.tol = get(s, "solver", "tol", c.solver.tol);
    c.solver.max_cycles = get(s, "solver", "max_cycles", c.solver.max_cycles);
    c.solver.mg.pre_smooth = get(s, "solver", "pre_smooth", c.solver.mg.pre_smooth);
    c.solver.mg.post_smooth = get(s, "solver", "post_smooth", c.solver.mg.post_smooth);
    c.solver.mg.omega = get(s, "solver", "omega", c.solver.mg.omega);
  }
  c.num_rhs = get(j, "config", "num_rhs", c.num_rhs);
  c.rhs_seed = get(j, "config", "rhs_seed", c.rhs_seed);
  c.output_dir = get(j, "config", "output_dir", c.output_dir);
  c.checkpoint = get(j, "config", "checkpoint", c.checkpoint);
  if (j.contains("bench")) {
    const auto& b = j["bench"];
    reject_unknown(b, "bench", {"n", "alpha", "methods", "coarsest"});
    c.bench.n = get(b, "bench", "n", c.bench.n);
    c.bench.alpha = get(b, "bench", "alpha", c.bench.alpha);
    c.bench.methods = get(b, "bench", "methods", c.bench.methods);
    c.bench.coarsest = get(b, "bench", "coarsest", c.bench.coarsest);
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);  // comments allowed
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  return experiment_from_json(j);
}

std::vector<double> make_rhs(const LinearOperator& op, std::uint64_t seed, std::vector<double>* x_true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(op.size());
  for (double& v : x) v = normal(rng);
  auto y = op.apply(x);
  if (x_true) *x_true = std::move(x);
  return y;
}

std::string checkpoint_path(const std::string& pattern, std::size_t n, double alpha) {
  std::string out = pattern;
  const auto sub = [&](const std::string& key, const std::string& value) {
    for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size()))
      out.replace(pos, key.size(), value);
  };
  sub("{n}", std::to_string(n));
  sub("{alpha}", shortest(alpha));
  return out;
}

SolveReport run_solver(const SolverConfig& solver, const ProblemSpec& spec, std::span<const double> y,
                       const NeuralHierarchy* nh) {
  if (solver.method == "nmg") {
    if (!nh) throw ConfigError("checkpoint: nmg needs trained smoothers");
    return nmg_solve(*nh, y, solver.coarsest, solver.tol, solver.max_cycles);
  }
  if (solver.method == "mg") {
    const LevelHierarchy hier(build_problem(spec), solver.levels);
    MgParams p = solver.mg;
    p.coarsest = solver.coarsest;
    return mg_solve(hier, y, p, solver.tol, solver.max_cycles);
  }
  if (solver.method == "cg") return cg_solve(*build_problem(spec), y, solver.tol, solver.max_cycles);
  throw ConfigError("solver.method: unknown method '" + solver.method + "'");
}

Checkpoint make_checkpoint(const NeuralHierarchy& nh, const ProblemSpec& spec, const TrainConfig& cfg) {
  Checkpoint c = to_checkpoint(nh, spec.hash(), spec.canonical(), cfg.seed);
  c.extra["problem"] = to_json(spec);
  c.extra["train"] = to_json(cfg);
  return c;
}

std::optional<ProblemSpec> checkpoint_problem(const Checkpoint& ckpt) {
  if (!ckpt.extra.contains("problem")) return std::nullopt;
  return problem_from_json(ckpt.extra["problem"]);
}

NeuralHierarchy load_neural_hierarchy(const std::string& path, const ProblemSpec& spec, std::ostream* warn) {
  const auto ckpt = load_checkpoint(path, spec.hash(), HashCheck::warn, warn);
  const bool filtered = ckpt.extra.value("filtered", true);
  auto base = build_hierarchy(spec, ckpt.hierarchy_levels);
  return neural_hierarchy_from_checkpoint(base, ckpt, filtered);
}

double sample_mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = sample_mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::vector<TableRow> summarize(const std::vector<BenchResult>& results) {
  std::vector<TableRow> rows;
  for (const auto& r : results) {
    if (r.cycles.empty()) throw std::invalid_argument("bench result without samples");
    std::vector<double> c(r.cycles.begin(), r.cycles.end());
    rows.push_back({r.method, r.n, r.alpha, r.coarsest, sample_mean(c), sample_std(c), sample_mean(r.seconds)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const TableRow& a, const TableRow& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.n != b.n) return a.n < b.n;
    if (a.alpha != b.alpha) return a.alpha > b.alpha;
    return a.coarsest < b.coarsest;
  });
  return rows;
}

void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows) {
  os << "method,n,alpha,L',mean_cycles,std_cycles,mean_seconds\n";
  for (const auto& r : rows)
    os << r.method << ',' << r.n << ',' << shortest(r.alpha) << ',' << r.coarsest << ',' << shortest(r.mean_cycles)
       << ',' << shortest(r.std_cycles) << ',' << shortest(r.mean_seconds) << '\n';
}

std::vector<TableRow> read_table_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "method,n,alpha,L',mean_cycles,std_cycles,mean_seconds")
    throw std::invalid_argument("table csv: unexpected header");
  std::vector<TableRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw std::invalid_argument("table csv: expected 7 columns in '" + line + "'");
    TableRow r;
    r.method = f[0];
    r.n = std::stoull(f[1]);
    r.alpha = std::stod(f[2]);
    r.coarsest = std::stoi(f[3]);
    r.mean_cycles = std::stod(f[4]);
    r.std_cycles = std::stod(f[5]);
    r.mean_seconds = std::stod(f[6]);
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json table_to_json(const std::vector<TableRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"method", r.method},
                   {"n", r.n},
                   {"alpha", r.alpha},
                   {"L'", r.coarsest},
                   {"mean_cycles", r.mean_cycles},
                   {"std_cycles", r.std_cycles},
                   {"mean_seconds", r.mean_seconds}});
  return arr;
}

}  // namespace nmg
