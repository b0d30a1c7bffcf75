// Acceptance suite: one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nmg/experiment.hpp"
#include "nmg/masks.hpp"
#include "nmg/vec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nmg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<double> normal_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

double rel_err(std::span<const double> a, std::span<const double> b) {
  const double nb = norm2(b);
  return norm2(subtract(a, b)) / (nb > 0.0 ? nb : 1.0);
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

// ---------------------------------------------------------------- recipe

struct Recipe {
  ProblemSpec problem;
  TrainConfig train;
  std::vector<double> solve_alphas;  // criterion 5
  double spectra_alpha = 1e-4;       // criteria 8, 9
  int num_rhs = 10;
  std::uint64_t rhs_seed = 1000;
  double tol = 1e-6;
  int max_cycles = 1000;
  int bound_epochs = 100;  // criterion 7
};

Recipe load_recipe(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("recipe: cannot open '" + path + "'");
  const json j = json::parse(in, nullptr, true, true);
  Recipe r;
  r.problem = problem_from_json(j.at("problem"));
  r.train = train_config_from_json(j.at("train"));
  const auto& a = j.at("acceptance");
  r.solve_alphas = a.at("solve_alphas").get<std::vector<double>>();
  r.spectra_alpha = a.at("spectra_alpha").get<double>();
  r.num_rhs = a.value("num_rhs", r.num_rhs);
  r.rhs_seed = a.value("rhs_seed", r.rhs_seed);
  r.tol = a.value("tol", r.tol);
  r.max_cycles = a.value("max_cycles", r.max_cycles);
  r.bound_epochs = a.value("bound_epochs", r.bound_epochs);
  return r;
}

// Trained smoothers per curriculum alpha, cached on disk between runs.
struct Trained {
  std::map<double, std::vector<FnoParams>> stages;
  std::vector<EpochRecord> log;
  double seconds = 0.0;
  bool cached = false;
  std::shared_ptr<const LevelHierarchy> base_for(const ProblemSpec& spec, int levels) const {
    return build_hierarchy(spec, levels);
  }
};

Trained train_cached(const ProblemSpec& spec, const TrainConfig& cfg, const std::string& tag, const fs::path& cache) {
  const std::string key = spec.canonical() + "|" + to_json(cfg).dump();
  const fs::path meta_path = cache / (tag + ".meta.json");
  Trained t;
  if (!cache.empty() && fs::exists(meta_path)) {
    const json meta = json::parse(std::ifstream(meta_path));
    if (meta.value("key", "") == key) {
      for (const auto& s : meta.at("stages")) {
        const auto ck = load_checkpoint(s.at("path").get<std::string>());
        std::vector<FnoParams> params;
        for (const auto& lv : ck.levels) params.push_back(lv.params);
        t.stages[s.at("alpha").get<double>()] = std::move(params);
      }
      std::ifstream log(cache / (tag + ".jsonl"));
      for (std::string line; std::getline(log, line);) {
        const json r = json::parse(line);
        EpochRecord e;
        e.stage = r.at("stage");
        e.alpha = r.at("alpha");
        e.epoch = r.at("epoch");
        e.losses = r.at("loss").get<std::vector<double>>();
        e.max_bound_violation = r.at("max_bound_violation");
        t.log.push_back(e);
      }
      t.seconds = meta.at("seconds");
      t.cached = true;
      return t;
    }
  }
  const auto t0 = Clock::now();
  std::size_t last_stage = 0;
  auto result = train(spec, cfg, [&](const EpochRecord& r) {
    if (r.epoch % 100 == 0 || static_cast<std::size_t>(r.stage) != last_stage) {
      std::cerr << "  [" << tag << "] alpha=" << r.alpha << " epoch " << r.epoch << " loss";
      for (double l : r.losses) std::cerr << ' ' << fmt(l);
      std::cerr << '\n';
      last_stage = static_cast<std::size_t>(r.stage);
    }
  });
  t.seconds = seconds_since(t0);
  t.log = result.log.records;
  for (const auto& s : result.stages) t.stages[s.alpha] = s.params;
  if (!cache.empty()) {
    fs::create_directories(cache);
    json meta = {{"key", key}, {"seconds", t.seconds}, {"stages", json::array()}};
    for (const auto& s : result.stages) {
      ProblemSpec ps = spec;
      ps.alpha = s.alpha;
      NeuralHierarchy nh = result.hierarchy;
      nh.params = s.params;
      const std::string path = (cache / (tag + "_" + fmt(s.alpha, 17) + ".nmg")).string();
      save_checkpoint(path, make_checkpoint(nh, ps, cfg));
      meta["stages"].push_back({{"alpha", s.alpha}, {"path", path}});
    }
    std::ofstream log(cache / (tag + ".jsonl"));
    result.log.write_jsonl(log);
    std::ofstream(meta_path) << meta.dump(2);
  }
  return t;
}

NeuralHierarchy attach(const Trained& t, const ProblemSpec& spec, const TrainConfig& cfg) {
  auto nh = make_neural_hierarchy(build_hierarchy(spec, cfg.levels), cfg.smoother_config, cfg.seed);
  nh.params = t.stages.at(spec.alpha);
  return nh;
}

struct CycleStats {
  std::vector<double> cycles;
  int failures = 0;
  double mean() const { return sample_mean(cycles); }
  double std() const { return sample_std(cycles); }
};

CycleStats solve_many(const NeuralHierarchy& nh, const Recipe& r, int coarsest) {
  CycleStats s;
  for (int i = 0; i < r.num_rhs; ++i) {
    const auto y = make_rhs(*nh.base->op(1), r.rhs_seed + static_cast<std::uint64_t>(i));
    try {
      const auto rep = nmg_solve(nh, y, coarsest, r.tol, r.max_cycles);
      if (!rep.converged) ++s.failures;
      s.cycles.push_back(rep.iterations);
    } catch (const NumericalFailure&) {
      ++s.failures;
      s.cycles.push_back(r.max_cycles);
    }
  }
  return s;
}

// ---------------------------------------------------------------- criteria

Outcome criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> size(1, 64);
  double worst_t = 0.0, worst_k = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = size(rng);
    auto col = normal_vector(n, rng), row = normal_vector(n, rng);
    row[0] = col[0];
    const ToeplitzKernel t(col, row);
    const auto x = normal_vector(n, rng);
    std::vector<double> dense(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) dense[i] += t.at(i, j) * x[j];
    worst_t = std::max(worst_t, rel_err(toeplitz_matvec(t, x), dense));

    // Kronecker product of two Toeplitz factors against the explicit sum.
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 64)(rng);
    auto c2 = normal_vector(m, rng), r2 = normal_vector(m, rng), c3 = normal_vector(m, rng), r3 = normal_vector(m, rng);
    r2[0] = c2[0];
    r3[0] = c3[0];
    const ToeplitzOperator a(ToeplitzKernel(c2, r2), Grid::line(m, GridBoundary::zero), false);
    const ToeplitzOperator b(ToeplitzKernel(c3, r3), Grid::line(m, GridBoundary::zero), false);
    const auto xm = normal_vector(m * m, rng);
    const auto got = kron_matvec(a, b, xm);
    std::vector<double> expect(m * m, 0.0);
    const auto& ka = a.kernel();
    const auto& kb = b.kernel();
    for (std::size_t jj = 0; jj < m; ++jj)
      for (std::size_t ii = 0; ii < m; ++ii) {
        double s = 0.0;
        for (std::size_t l = 0; l < m; ++l)
          for (std::size_t k = 0; k < m; ++k) s += ka.at(jj, l) * kb.at(ii, k) * xm[k + l * m];
        expect[ii + jj * m] = s;
      }
    worst_k = std::max(worst_k, rel_err(got, expect));
  }
  const double secs = seconds_since(t0);
  return {worst_t <= 1e-12 && worst_k <= 1e-12 && secs < 5.0,
          "toeplitz max rel err " + fmt(worst_t) + ", kron max rel err " + fmt(worst_k) + ", " + fmt(secs) + " s"};
}

Outcome criterion2() {
  double worst_end = 0.0;
  for (double alpha : {1e-2, 1e-4, 1e-6}) {
    worst_end = std::max(worst_end, std::abs(jacobi_reduction_factor(0.0, alpha, 0.5) - alpha / (4 + 2 * alpha)));
    for (double phi : {std::numbers::pi, -std::numbers::pi})
      worst_end = std::max(worst_end,
                           std::abs(jacobi_reduction_factor(phi, alpha, 0.5) - (4 + alpha) / (4 + 2 * alpha)));
  }
  // Measured damping of single Fourier modes on tridiag(-1, 2 + alpha, -1), periodic.
  const std::size_t n = 32;
  const double alpha = 1e-2, omega = 0.5;
  const TridiagonalOperator a(std::vector<double>(n, -1.0), std::vector<double>(n, 2.0 + alpha),
                              std::vector<double>(n, -1.0), Grid::line(n), true, true, true);
  const std::vector<double> zero(n, 0.0);
  double worst_mode = 0.0;
  for (std::size_t k = 0; k < 16; ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / n;
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::cos(phi * static_cast<double>(i));
    const double before = norm2(e);
    weighted_jacobi(a, a.diagonal(), e, zero, 1, omega);
    worst_mode = std::max(worst_mode, std::abs(norm2(e) / before - (1.0 - jacobi_reduction_factor(phi, alpha, omega))));
  }
  return {worst_end <= 1e-12 && worst_mode <= 1e-8,
          "endpoint err " + fmt(worst_end) + ", mode damping err " + fmt(worst_mode) + " over 16 phi"};
}

Outcome criterion3() {
  bool pass = true;
  std::string detail;
  for (std::size_t n : {256u, 512u, 1024u}) {
    ProblemSpec s;
    s.n = n;
    s.alpha = 1e-4;
    s.regularization = Regularization::pde;
    const auto t0 = Clock::now();
    const LevelHierarchy h(build_problem(s), 4);
    MgParams p;
    p.pre_smooth = 5;
    p.post_smooth = 0;
    const auto y = make_rhs(*h.op(1), 7);
    const auto r = mg_solve(h, y, p, 1e-6, 1000);
    const double secs = seconds_since(t0);
    const bool ok = r.converged && r.iterations >= 5 && r.iterations <= 11 && secs < 2.0;
    pass = pass && ok;
    detail += "n=" + std::to_string(n) + ": " + std::to_string(r.iterations) + " cycles, res " +
              fmt(r.residual_history.back()) + ", " + fmt(secs) + " s; ";
  }
  return {pass, detail};
}

Outcome criterion4(double nmg_mean) {
  ProblemSpec s;
  s.n = 256;
  s.alpha = 1e-4;
  const auto t0 = Clock::now();
  const LevelHierarchy h(build_problem(s), 4);
  const auto y = make_rhs(*h.op(1), 1000);
  MgParams p;
  const auto r = mg_solve(h, y, p, 1e-6, 30000);
  const double secs = seconds_since(t0);
  const bool capped = !r.converged && r.iterations == 30000;
  const bool ratio = nmg_mean > 0.0 && r.iterations >= 100.0 * nmg_mean;
  return {(capped || ratio) && secs < 60.0,
          "classical MG " + std::to_string(r.iterations) + " cycles (" + (r.converged ? "converged" : "cap hit") +
              ", final res " + fmt(r.residual_history.back()) + ") vs neural MG mean " + fmt(nmg_mean) + ", " +
              fmt(secs) + " s"};
}

Outcome criterion6() {
  const auto t0 = Clock::now();
  FnoConfig cfg;
  cfg.rows = 16;
  cfg.channels = 4;
  cfg.modes = 4;
  cfg.layers = 2;
  cfg.kernel_size = 3;
  auto params = fno_init(cfg, 3);
  std::mt19937_64 rng(5);
  const auto v = normal_vector(16, rng);
  const auto w = normal_vector(16, rng);
  const auto loss = [&](const FnoParams& p) { return dot(w, fno_forward(p, cfg, v)); };
  FnoCache cache;
  fno_forward(params, cfg, v, &cache);
  auto grads = fno_zero_like(params);
  fno_backward(params, cfg, cache, w, grads);

  double worst = 0.0;
  std::string worst_name;
  const auto check = [&](FnoParams& p, const FnoParams& g, const std::function<double(const FnoParams&)>& f,
                         const std::string& prefix) {
    for (std::size_t t = 0; t < p.tensors.size(); ++t) {
      std::vector<double> fd(p.tensors[t].data.size());
      for (std::size_t k = 0; k < fd.size(); ++k) {
        double& x = p.tensors[t].data[k];
        const double x0 = x, h = 1e-5 * std::max(1.0, std::abs(x0));
        x = x0 + h;
        const double up = f(p);
        x = x0 - h;
        const double down = f(p);
        x = x0;
        fd[k] = (up - down) / (2 * h);
      }
      const auto& an = g.tensors[t].data;
      const double err = norm2(fd) < 1e-8 ? norm2(an) : rel_err(an, fd);
      if (err > worst) {
        worst = err;
        worst_name = prefix + p.tensors[t].name;
      }
    }
  };
  check(params, grads, loss, "fno/");

  // Level-wise loss on the tiny hierarchy, every level.
  ProblemSpec spec;
  spec.n = 16;
  spec.alpha = 1e-2;
  auto make = [&](int, const Grid& g) {
    FnoConfig c = cfg;
    c.rows = g.rows;
    c.modes = std::min<std::size_t>(4, g.rows / 2);
    return c;
  };
  auto nh = make_neural_hierarchy(build_hierarchy(spec, 3), make, 2);
  TrainConfig tc;
  tc.levels = 3;
  tc.batch_size = 3;
  tc.rollout_cap = 2;
  std::mt19937_64 brng(9);
  const auto batch = generate_batch(nh, tc, brng);
  for (int l = 1; l <= 2; ++l) {
    FnoParams g;
    levelwise_loss(l, nh, batch, &g);
    auto& p = nh.params[static_cast<std::size_t>(l - 1)];
    check(p, g,
          [&](const FnoParams&) { return levelwise_loss(l, nh, batch).value; },
          "levelwise" + std::to_string(l) + "/");
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 60.0,
          "worst rel err " + fmt(worst) + " (" + worst_name + "), " + fmt(secs) + " s"};
}

Outcome criterion7(const Recipe& r, const fs::path& cache) {
  TrainConfig cfg = r.train;
  cfg.epochs = r.bound_epochs;
  cfg.curriculum.clear();
  ProblemSpec spec = r.problem;
  spec.alpha = r.spectra_alpha;
  const auto t = train_cached(spec, cfg, "bound", cache);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& e : t.log) worst = std::max(worst, e.max_bound_violation);
  return {static_cast<int>(t.log.size()) == r.bound_epochs && worst <= 1e-10,
          std::to_string(t.log.size()) + " epochs, max(F_j - L/m_j^2) = " + fmt(worst) + " (bins with m_j > 1e-6)"};
}

Outcome criterion8(const NeuralHierarchy& nh, const Recipe& r) {
  const int levels = nh.levels();
  const Grid& g = nh.base->grid(1);
  double worst = 0.0;
  for (int i = 0; i < r.num_rhs; ++i) {
    std::vector<double> x;
    const auto y = make_rhs(*nh.base->op(1), r.rhs_seed + static_cast<std::uint64_t>(i), &x);
    const auto s = error_spectra(nh, x, y);
    for (int l = 1; l < levels; ++l) {
      const double before = band_energy(s.magnitudes[static_cast<std::size_t>(l - 1)], l, levels, g.dims, g.rows, g.cols);
      const double after = band_energy(s.magnitudes[static_cast<std::size_t>(l)], l, levels, g.dims, g.rows, g.cols);
      worst = std::max(worst, after / before);
    }
  }
  return {worst <= 0.5, "max band-energy ratio E(e_l, Phi_l) / E(e_(l-1), Phi_l) = " + fmt(worst) + " over " +
                            std::to_string(r.num_rhs) + " problems, l = 1.." + std::to_string(levels - 1)};
}

Outcome criterion9(const NeuralHierarchy& levelwise, const NeuralHierarchy& combined, const Recipe& r) {
  std::map<int, CycleStats> lw;
  for (int lc : {2, 3, 4}) lw[lc] = solve_many(levelwise, r, lc);
  const auto cb = solve_many(combined, r, 2);
  const bool converge = lw[2].failures == 0 && lw[3].failures == 0 && lw[4].failures == 0;
  const bool ratio = lw[2].mean() <= 3.0 * lw[4].mean() && lw[3].mean() <= 3.0 * lw[4].mean();
  const bool compare = cb.mean() >= lw[2].mean();
  std::string d = "levelwise L'=2/3/4: " + fmt(lw[2].mean()) + "+-" + fmt(lw[2].std()) + " / " + fmt(lw[3].mean()) +
                  "+-" + fmt(lw[3].std()) + " / " + fmt(lw[4].mean()) + "+-" + fmt(lw[4].std()) +
                  " (failures " + std::to_string(lw[2].failures + lw[3].failures + lw[4].failures) + ")" +
                  "; combined L'=2: " + fmt(cb.mean()) + "+-" + fmt(cb.std()) + " (failures " +
                  std::to_string(cb.failures) + ")";
  return {converge && ratio && compare, d};
}

Outcome criterion10() {
  const auto t0 = Clock::now();
  std::vector<int> counts;
  for (double alpha : {1e-3, 1e-4, 1e-5}) {
    const auto op = build_integral_2d(64, alpha);
    const auto y = make_rhs(*op, 1000);
    counts.push_back(cg_solve(*op, y, 1e-6, 100000).iterations);
  }
  const double secs = seconds_since(t0);
  const bool inc = counts[0] < counts[1] && counts[1] < counts[2];
  // Reference counts for n=256; reported, not gated.
  const int reference[] = {178, 472, 1193};
  std::string within;
  for (int i = 0; i < 3; ++i) {
    const double q = static_cast<double>(counts[static_cast<std::size_t>(i)]) / reference[i];
    within += (q >= 0.25 && q <= 4.0) ? "y" : "n";
  }
  return {inc && secs < 30.0, "CG iterations " + std::to_string(counts[0]) + " -> " + std::to_string(counts[1]) +
                                  " -> " + std::to_string(counts[2]) + " (within 4x of reference 178/472/1193 per alpha: " + within +
                                  "), " + fmt(secs) + " s"};
}

Outcome criterion11() {
  ProblemSpec s;
  s.n = 32;
  s.alpha = 1e-4;
  double worst = 0.0;
  for (int levels : {2, 3, 4}) {
    auto nh = make_neural_hierarchy(build_hierarchy(s, levels), default_smoother_config, 1);
    nh.smoother_override = exact_band_smoother(nh);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto y = make_rhs(*nh.base->op(1), seed);
      const auto x = nmg_cycle(nh, std::vector<double>(32, 0.0), y);
      worst = std::max(worst, norm2(subtract(y, nh.base->op(1)->apply(x))) / norm2(y));
    }
  }
  return {worst < 1e-8, "max relative residual after one cycle " + fmt(worst) + " (L = 2, 3, 4; 3 RHS each)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string recipe_path, cache_dir;
  std::vector<int> only;
  app.add_option("--recipe", recipe_path, "desk training recipe (JSON)")->required();
  app.add_option("--cache", cache_dir, "directory for trained checkpoints reused across runs");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected(only.begin(), only.end());
  const auto want = [&](int k) { return selected.empty() || selected.count(k) > 0; };
  const Recipe recipe = load_recipe(recipe_path);
  const fs::path cache = cache_dir;

  std::map<int, Outcome> results;
  const auto run = [&](int k, const std::function<Outcome()>& f) {
    if (!want(k)) return;
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    results[k] = o;
    std::cout << "CRITERION " << k << ": " << (o.pass ? "PASS" : "FAIL") << " | " << o.detail << std::endl;
  };

  run(1, criterion1);
  run(2, criterion2);
  run(3, criterion3);
  run(6, criterion6);
  run(10, criterion10);
  run(11, criterion11);
  run(7, [&] { return criterion7(recipe, cache); });

  // Desk-scale training shared by criteria 4, 5, 8, 9.
  const bool need_training = want(4) || want(5) || want(8) || want(9);
  if (need_training) {
    std::optional<Trained> lw;
    std::string train_error;
    try {
      lw = train_cached(recipe.problem, recipe.train, "levelwise", cache);
    } catch (const std::exception& e) {
      train_error = e.what();
    }
    const auto spec_at = [&](double alpha) {
      ProblemSpec s = recipe.problem;
      s.alpha = alpha;
      return s;
    };
    std::map<double, CycleStats> stats;
    run(5, [&] {
      if (!lw) return Outcome{false, "training failed: " + train_error};
      bool pass = lw->seconds <= 1800.0;
      std::string d = "training " + fmt(lw->seconds, 4) + " s" + (lw->cached ? " (cached)" : "") + "; ";
      for (double a : recipe.solve_alphas) {
        const auto nh = attach(*lw, spec_at(a), recipe.train);
        const auto s = solve_many(nh, recipe, 0);
        stats[a] = s;
        pass = pass && s.failures == 0 && s.mean() <= 50.0 && s.std() <= 10.0;
        d += "alpha=" + fmt(a) + ": " + fmt(s.mean()) + "+-" + fmt(s.std()) + " cycles (failures " +
             std::to_string(s.failures) + "); ";
      }
      return Outcome{pass, d};
    });
    run(4, [&] {
      if (!lw) return Outcome{false, "training failed: " + train_error};
      auto it = stats.find(1e-4);
      double mean = 0.0;
      if (it != stats.end()) {
        mean = it->second.mean();
      } else {
        mean = solve_many(attach(*lw, spec_at(1e-4), recipe.train), recipe, 0).mean();
      }
      return criterion4(mean);
    });
    run(8, [&] {
      if (!lw) return Outcome{false, "training failed: " + train_error};
      return criterion8(attach(*lw, spec_at(recipe.spectra_alpha), recipe.train), recipe);
    });
    run(9, [&] {
      if (!lw) return Outcome{false, "training failed: " + train_error};
      // Combined loss with the same curriculum prefix and epochs as the level-wise smoothers at spectra_alpha.
      TrainConfig cc = recipe.train;
      cc.loss = LossKind::combined;
      std::vector<double> prefix;
      for (double a : recipe.train.curriculum) {
        prefix.push_back(a);
        if (a == recipe.spectra_alpha) break;
      }
      cc.curriculum = prefix;
      const auto cb = train_cached(recipe.problem, cc, "combined", cache);
      return criterion9(attach(*lw, spec_at(recipe.spectra_alpha), recipe.train),
                        attach(cb, spec_at(recipe.spectra_alpha), cc), recipe);
    });
  }

  int failed = 0;
  for (const auto& [k, o] : results) failed += o.pass ? 0 : 1;
  std::cout << "SUMMARY: " << results.size() - static_cast<std::size_t>(failed) << "/" << results.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
