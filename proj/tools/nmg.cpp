// nmg: train, solve and benchmark neural multigrid solvers from the shell.
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include <json.hpp>

#include "nmg/experiment.hpp"
#include "nmg/masks.hpp"
#include "nmg/vec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nmg;

namespace {

enum Exit { kOk = 0, kError = 1, kConfig = 2, kNumerical = 3 };

// Shared problem/solver flags; unset flags leave the config file untouched.
struct CommonFlags {
  std::string config;
  int dimension = 1;
  std::size_t n = 0;
  double alpha = 0.0;
  double sigma = 0.0;
  std::string regularization, boundary, units;
  std::string out;
  std::string checkpoint;
  CLI::App* app = nullptr;

  void attach(CLI::App* sub) {
    app = sub;
    sub->add_option("-c,--config", config, "JSON experiment config");
    sub->add_option("--dimension", dimension, "1 or 2");
    sub->add_option("--n", n, "cells per axis (power of two)");
    sub->add_option("--alpha", alpha, "regularization weight");
    sub->add_option("--sigma", sigma, "Gaussian kernel width");
    sub->add_option("--units", units, "kernel width units: mesh | physical");
    sub->add_option("--regularization", regularization, "tikhonov | anisotropic | pde");
    sub->add_option("--boundary", boundary, "circulant | toeplitz-zero");
    sub->add_option("--checkpoint", checkpoint, "checkpoint file");
    sub->add_option("-o,--out", out, "output file or directory");
  }
  bool given(const std::string& name) const { return app->count(name) > 0; }

  json document() const {
    json j = json::object();
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw ConfigError("config: cannot open '" + config + "'");
      try {
        j = json::parse(in, nullptr, true, true);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
      }
      if (!j.is_object()) throw ConfigError("config: expected an object");
    }
    auto& p = j["problem"];
    if (p.is_null()) p = json::object();
    if (given("--dimension")) p["dimension"] = dimension;
    if (given("--n")) p["n"] = n;
    if (given("--alpha")) p["alpha"] = alpha;
    if (given("--sigma")) p["kernel_sigma"] = sigma;
    if (given("--units")) p["sigma_units"] = units;
    if (given("--regularization")) p["regularization"] = regularization;
    if (given("--boundary")) p["boundary"] = boundary;
    if (given("--checkpoint")) j["checkpoint"] = checkpoint;
    return j;
  }
};

// Problem keys missing from the config are taken from the checkpoint metadata.
void fill_problem_from_checkpoint(json& j) {
  const std::string path = j.value("checkpoint", "");
  if (path.empty() || path.find('{') != std::string::npos || !fs::exists(path)) return;
  const auto ck = load_checkpoint(path, std::nullopt, HashCheck::ignore);
  if (!ck.extra.contains("problem")) return;
  json merged = ck.extra["problem"];
  for (const auto& [k, v] : j["problem"].items()) merged[k] = v;
  j["problem"] = merged;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  file.open(path);
  if (!file) throw ConfigError("out: cannot write '" + path + "'");
  file.precision(17);
  return file;
}

NeuralHierarchy load_smoothers(const ExperimentConfig& cfg, const ProblemSpec& spec) {
  const std::string path = checkpoint_path(cfg.checkpoint, spec.n, spec.alpha);
  if (cfg.checkpoint.empty()) throw ConfigError("checkpoint: nmg needs --checkpoint");
  if (!fs::exists(path)) throw ConfigError("checkpoint: file '" + path + "' not found");
  return load_neural_hierarchy(path, spec, &std::cerr);
}

int cmd_train(const CommonFlags& f, int epochs, double lr, int levels, const std::vector<double>& curriculum,
              const std::string& loss, std::uint64_t seed, bool seed_given, const std::string& log_path) {
  json j = f.document();
  auto& t = j["train"];
  if (t.is_null()) t = json::object();
  if (epochs >= 0) t["epochs"] = epochs;
  if (lr > 0.0) t["learning_rates"] = lr;
  if (levels > 0) t["levels"] = levels;
  if (!curriculum.empty()) t["curriculum"] = curriculum;
  if (!loss.empty()) t["loss"] = loss;
  if (seed_given) t["seed"] = seed;
  const auto cfg = experiment_from_json(j);
  const TrainConfig& tc = *cfg.train;

  const fs::path dir = f.out.empty() ? fs::path(cfg.output_dir) : fs::path(f.out);
  fs::create_directories(dir);
  const std::string ck_pattern = cfg.checkpoint.empty() ? (dir / "checkpoint.nmg").string() : cfg.checkpoint;
  const std::string log_file = log_path.empty() ? (dir / "train_log.jsonl").string() : log_path;
  std::ofstream log(log_file);
  if (!log) throw ConfigError("out: cannot write '" + log_file + "'");

  const auto result = train(cfg.problem, tc, [&](const EpochRecord& r) {
    log << to_json(r).dump() << '\n';
    log.flush();
  });

  json summary = {{"log", log_file}, {"checkpoints", json::array()}};
  for (std::size_t s = 0; s < result.stages.size(); ++s) {
    const bool last = s + 1 == result.stages.size();
    const bool per_stage = ck_pattern.find("{alpha}") != std::string::npos;
    if (!last && !per_stage) continue;
    ProblemSpec spec = cfg.problem;
    spec.alpha = result.stages[s].alpha;
    NeuralHierarchy nh = result.hierarchy;
    nh.params = result.stages[s].params;
    const std::string path = checkpoint_path(ck_pattern, spec.n, spec.alpha);
    save_checkpoint(path, make_checkpoint(nh, spec, tc));
    summary["checkpoints"].push_back({{"alpha", spec.alpha}, {"path", path}});
  }
  if (!result.log.records.empty()) summary["final_loss"] = result.log.records.back().losses;
  std::cout << summary.dump() << '\n';
  return kOk;
}

int cmd_solve(const CommonFlags& f, json solver_overrides, int rhs_index) {
  json j = f.document();
  fill_problem_from_checkpoint(j);
  for (const auto& [k, v] : solver_overrides.items()) j["solver"][k] = v;
  const auto cfg = experiment_from_json(j);
  std::unique_ptr<NeuralHierarchy> nh;
  if (cfg.solver.method == "nmg") nh = std::make_unique<NeuralHierarchy>(load_smoothers(cfg, cfg.problem));
  const auto op = build_problem(cfg.problem);
  const auto y = make_rhs(*op, cfg.rhs_seed + static_cast<std::uint64_t>(rhs_index));
  const auto report = run_solver(cfg.solver, cfg.problem, y, nh.get());
  std::ofstream file;
  open_out(f.out, file) << to_json(report) << '\n';
  return report.converged ? kOk : kNumerical;
}

int cmd_bench(const CommonFlags& f, json solver_overrides, std::vector<std::size_t> ns, std::vector<double> alphas,
              std::vector<std::string> methods, std::vector<int> coarsest, int num_rhs) {
  json j = f.document();
  for (const auto& [k, v] : solver_overrides.items()) j["solver"][k] = v;
  if (num_rhs > 0) j["num_rhs"] = num_rhs;
  auto& b = j["bench"];
  if (b.is_null()) b = json::object();
  if (!ns.empty()) b["n"] = ns;
  if (!alphas.empty()) b["alpha"] = alphas;
  if (!methods.empty()) b["methods"] = methods;
  if (!coarsest.empty()) b["coarsest"] = coarsest;
  const auto cfg = experiment_from_json(j);

  const auto grid_n = cfg.bench.n.empty() ? std::vector<std::size_t>{cfg.problem.n} : cfg.bench.n;
  const auto grid_a = cfg.bench.alpha.empty() ? std::vector<double>{cfg.problem.alpha} : cfg.bench.alpha;
  const auto grid_m = cfg.bench.methods.empty() ? std::vector<std::string>{cfg.solver.method} : cfg.bench.methods;
  const auto grid_c = cfg.bench.coarsest.empty() ? std::vector<int>{cfg.solver.coarsest} : cfg.bench.coarsest;

  std::vector<BenchResult> results;
  for (const auto& method : grid_m)
    for (std::size_t n : grid_n)
      for (double alpha : grid_a) {
        ProblemSpec spec = cfg.problem;
        spec.n = n;
        spec.alpha = alpha;
        spec.validate();
        const auto op = build_problem(spec);
        std::unique_ptr<NeuralHierarchy> nh;
        if (method == "nmg") nh = std::make_unique<NeuralHierarchy>(load_smoothers(cfg, spec));
        const auto levels = method == "cg" ? std::vector<int>{0} : grid_c;
        for (int lc : levels) {
          SolverConfig s = cfg.solver;
          s.method = method;
          s.coarsest = lc;
          BenchResult r{method, n, alpha, lc, {}, {}, {}};
          for (int i = 0; i < cfg.num_rhs; ++i) {
            const auto y = make_rhs(*op, cfg.rhs_seed + static_cast<std::uint64_t>(i));
            const auto rep = run_solver(s, spec, y, nh.get());
            r.cycles.push_back(rep.iterations);
            r.seconds.push_back(rep.wall_time);
            r.converged.push_back(rep.converged);
          }
          std::cerr << method << " n=" << n << " alpha=" << alpha << " L'=" << lc << " done\n";
          results.push_back(std::move(r));
        }
      }
  const auto rows = summarize(results);
  const fs::path dir = f.out.empty() ? fs::path(cfg.output_dir) : fs::path(f.out);
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "bench.csv");
    write_table_csv(csv, rows);
  }
  json out = {{"rows", table_to_json(rows)}, {"raw", json::array()}};
  for (const auto& r : results)
    out["raw"].push_back({{"method", r.method},
                          {"n", r.n},
                          {"alpha", r.alpha},
                          {"L'", r.coarsest},
                          {"cycles", r.cycles},
                          {"seconds", r.seconds},
                          {"converged", r.converged}});
  std::ofstream(dir / "bench.json") << out.dump(2) << '\n';
  write_table_csv(std::cout, rows);
  return kOk;
}

int cmd_spectra(const CommonFlags& f, int rhs_index) {
  json j = f.document();
  fill_problem_from_checkpoint(j);
  const auto cfg = experiment_from_json(j);
  const auto nh = load_smoothers(cfg, cfg.problem);
  std::vector<double> x;
  const auto y = make_rhs(*nh.base->op(1), cfg.rhs_seed + static_cast<std::uint64_t>(rhs_index), &x);
  std::ofstream file;
  write_spectra_csv(open_out(f.out, file), error_spectra(nh, x, y));
  return kOk;
}

int cmd_smoothing(const std::string& out, double alpha, double omega, int samples, const std::vector<double>& phis) {
  if (!(alpha >= 0.0)) throw ConfigError("alpha: must be >= 0");
  if (!(omega > 0.0)) throw ConfigError("omega: must be positive");
  if (samples < 2) throw ConfigError("samples: must be >= 2");
  std::vector<double> grid = phis;
  if (grid.empty())
    for (int i = 0; i < samples; ++i)
      grid.push_back(-std::numbers::pi + 2.0 * std::numbers::pi * i / (samples - 1));
  std::ofstream file;
  auto& os = open_out(out, file);
  os.precision(17);
  os << "phi,reduction\n";
  for (double phi : grid) os << phi << ',' << jacobi_reduction_factor(phi, alpha, omega) << '\n';
  return kOk;
}

int cmd_eigs(const CommonFlags& f, int count) {
  const auto cfg = experiment_from_json(f.document());
  const auto op = build_problem(cfg.problem);
  const auto eig = eig_sym(op->densify());
  const std::size_t n = eig.values.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(count, 1)), n);
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < k; ++i) cols.push_back(i);
  for (std::size_t i = 0; i < k; ++i) cols.push_back(n - 1 - i);
  std::ofstream file;
  auto& os = open_out(f.out, file);
  os.precision(17);
  os << "row";
  for (std::size_t i = 0; i < k; ++i) os << ",smallest_" << i;
  for (std::size_t i = 0; i < k; ++i) os << ",largest_" << i;
  os << "\neigenvalue";
  for (auto c : cols) os << ',' << eig.values[c];
  os << '\n';
  for (std::size_t r = 0; r < n; ++r) {
    os << r;
    for (auto c : cols) os << ',' << eig.vectors(r, c);
    os << '\n';
  }
  return kOk;
}

int cmd_masks(const std::string& out, int dims, std::size_t n, int level, int levels, const std::string& variant) {
  if (dims != 1 && dims != 2) throw ConfigError("dimension: must be 1 or 2");
  if (variant != "fine" && variant != "level") throw ConfigError("variant: must be fine or level");
  if (levels < 2 || level < 1 || level > levels) throw ConfigError("level: must lie in [1, levels]");
  const auto v = variant == "fine" ? MaskVariant::fine : MaskVariant::level;
  std::size_t rows = n;
  if (v == MaskVariant::level) rows = n >> (level - 1);
  const auto mask = dims == 1 ? make_mask_1d(level, levels, rows, v) : make_mask_2d(level, levels, rows, rows, v);
  std::ofstream file;
  write_mask_csv(open_out(out, file), mask);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural multigrid solvers for convolution-type integral equations"};
  app.require_subcommand(1);

  CommonFlags train_f, solve_f, bench_f, spectra_f, eigs_f;

  auto* train_cmd = app.add_subcommand("train", "train level smoothers, write checkpoint and log");
  train_f.attach(train_cmd);
  int epochs = -1, levels = 0;
  double lr = 0.0;
  std::vector<double> curriculum;
  std::string loss, log_path;
  std::uint64_t seed = 0;
  train_cmd->add_option("--epochs", epochs, "epochs per curriculum stage");
  train_cmd->add_option("--lr", lr, "Adam step size for every level");
  train_cmd->add_option("--levels", levels, "hierarchy depth L");
  train_cmd->add_option("--curriculum", curriculum, "decreasing alpha list");
  train_cmd->add_option("--loss", loss, "levelwise | combined");
  train_cmd->add_option("--seed", seed, "training seed");
  train_cmd->add_option("--log", log_path, "JSON-lines log path");

  json solver_overrides = json::object();
  std::string method;
  int coarsest = 0, max_cycles = 0, rhs_index = 0, solver_levels = 0, num_rhs = 0;
  double tol = 0.0;
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--method", method, "nmg | mg | cg");
    sub->add_option("--coarsest", coarsest, "coarsest level L' (0 = L)");
    sub->add_option("--tol", tol, "relative residual tolerance");
    sub->add_option("--max-cycles", max_cycles, "cycle / iteration cap");
    sub->add_option("--levels", solver_levels, "hierarchy depth for classical multigrid");
  };
  auto collect_solver = [&](CLI::App* sub) {
    if (sub->count("--method")) solver_overrides["method"] = method;
    if (sub->count("--coarsest")) solver_overrides["coarsest"] = coarsest;
    if (sub->count("--tol")) solver_overrides["tol"] = tol;
    if (sub->count("--max-cycles")) solver_overrides["max_cycles"] = max_cycles;
    if (sub->count("--levels")) solver_overrides["levels"] = solver_levels;
  };

  auto* solve_cmd = app.add_subcommand("solve", "solve one seeded system and print the report");
  solve_f.attach(solve_cmd);
  add_solver(solve_cmd);
  solve_cmd->add_option("--rhs-index", rhs_index, "right-hand side index");

  auto* bench_cmd = app.add_subcommand("bench", "table of mean/std cycles over an (n, alpha) grid");
  bench_f.attach(bench_cmd);
  add_solver(bench_cmd);
  std::vector<std::size_t> ns;
  std::vector<double> alphas;
  std::vector<std::string> methods;
  std::vector<int> coarsest_list;
  bench_cmd->add_option("--ns", ns, "grid sizes");
  bench_cmd->add_option("--alphas", alphas, "alpha values");
  bench_cmd->add_option("--methods", methods, "methods");
  bench_cmd->add_option("--coarsest-list", coarsest_list, "L' values");
  bench_cmd->add_option("--num-rhs", num_rhs, "right-hand sides per cell");

  auto* spectra_cmd = app.add_subcommand("spectra", "error magnitude spectra of one cycle");
  spectra_f.attach(spectra_cmd);
  spectra_cmd->add_option("--rhs-index", rhs_index, "test problem index");

  auto* smooth_cmd = app.add_subcommand("smoothing-factor", "weighted Jacobi reduction factor 1 - mu_phi");
  double s_alpha = 1e-4, s_omega = 0.5;
  int samples = 257;
  std::vector<double> phis;
  std::string s_out;
  smooth_cmd->add_option("--alpha", s_alpha, "regularization weight");
  smooth_cmd->add_option("--omega", s_omega, "damping");
  smooth_cmd->add_option("--samples", samples, "uniform samples over [-pi, pi]");
  smooth_cmd->add_option("--phi", phis, "explicit frequencies");
  smooth_cmd->add_option("-o,--out", s_out, "CSV path");

  auto* eigs_cmd = app.add_subcommand("eigs", "extreme eigenpairs of a small dense system");
  eigs_f.attach(eigs_cmd);
  int count = 2;
  eigs_cmd->add_option("--count", count, "eigenpairs at each end");

  auto* masks_cmd = app.add_subcommand("masks", "frequency mask values");
  int m_dims = 1, m_level = 1, m_levels = 4;
  std::size_t m_n = 256;
  std::string m_variant = "fine", m_out;
  masks_cmd->add_option("--dimension", m_dims, "1 or 2");
  masks_cmd->add_option("--n", m_n, "finest grid size");
  masks_cmd->add_option("--level", m_level, "level l");
  masks_cmd->add_option("--levels", m_levels, "hierarchy depth L");
  masks_cmd->add_option("--variant", m_variant, "fine | level");
  masks_cmd->add_option("-o,--out", m_out, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return kConfig;
  }

  try {
    if (*train_cmd)
      return cmd_train(train_f, epochs, lr, levels, curriculum, loss, seed, train_cmd->count("--seed") > 0, log_path);
    if (*solve_cmd) {
      collect_solver(solve_cmd);
      return cmd_solve(solve_f, solver_overrides, rhs_index);
    }
    if (*bench_cmd) {
      collect_solver(bench_cmd);
      return cmd_bench(bench_f, solver_overrides, ns, alphas, methods, coarsest_list, num_rhs);
    }
    if (*spectra_cmd) return cmd_spectra(spectra_f, rhs_index);
    if (*smooth_cmd) return cmd_smoothing(s_out, s_alpha, s_omega, samples, phis);
    if (*eigs_cmd) return cmd_eigs(eigs_f, count);
    if (*masks_cmd) return cmd_masks(m_out, m_dims, m_n, m_level, m_levels, m_variant);
  } catch (const NumericalFailure& e) {
    std::cerr << "error: numerical: " << e.what() << '\n';
    return kNumerical;
  } catch (const CheckpointError& e) {
    std::cerr << "error: checkpoint: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return kError;
  }
  return kOk;
}
