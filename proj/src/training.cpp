#include "nmg/training.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "nmg/adam.hpp"
#include "nmg/masks.hpp"
#include "nmg/vec.hpp"

namespace nmg {

std::string to_string(LossKind k) { return k == LossKind::levelwise ? "levelwise" : "combined"; }

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "levelwise") return LossKind::levelwise;
  if (s == "combined") return LossKind::combined;
  throw std::invalid_argument("train.loss: unknown loss '" + s + "' (expected levelwise or combined)");
}

void TrainConfig::validate() const {
  if (levels < 2) throw std::invalid_argument("train.levels: must be >= 2");
  if (batch_size < 1) throw std::invalid_argument("train.batch_size: must be >= 1");
  if (rollout_cap < 1) throw std::invalid_argument("train.rollout_cap: must be >= 1");
  if (epochs < 0) throw std::invalid_argument("train.epochs: must be >= 0");
  if (lr_halving_every < 0) throw std::invalid_argument("train.lr_halving_every: must be >= 0");
  if (learning_rates.empty()) throw std::invalid_argument("train.learning_rates: must not be empty");
  if (learning_rates.size() != 1 && learning_rates.size() != static_cast<std::size_t>(levels - 1))
    throw std::invalid_argument("train.learning_rates: need 1 or L-1 entries");
  for (double lr : learning_rates)
    if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("train.learning_rates: must be positive");
  if (distribution != "normal") throw std::invalid_argument("train.distribution: only 'normal' is supported");
  for (std::size_t i = 0; i < curriculum.size(); ++i) {
    if (!(curriculum[i] > 0.0)) throw std::invalid_argument("train.curriculum: alphas must be positive");
    if (i > 0 && !(curriculum[i] < curriculum[i - 1]))
      throw std::invalid_argument("train.curriculum: alphas must be strictly decreasing");
  }
  if (!smoother_config) throw std::invalid_argument("train.smoother_config: missing");
}

double TrainConfig::learning_rate(int level) const {
  return learning_rates.size() == 1 ? learning_rates[0] : learning_rates.at(static_cast<std::size_t>(level - 1));
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"levels", cfg.levels},
          {"batch_size", cfg.batch_size},
          {"rollout_cap", cfg.rollout_cap},
          {"epochs", cfg.epochs},
          {"learning_rates", cfg.learning_rates},
          {"lr_halving_every", cfg.lr_halving_every},
          {"seed", cfg.seed},
          {"distribution", cfg.distribution},
          {"curriculum", cfg.curriculum},
          {"loss", to_string(cfg.loss)}};
}

namespace {

template <class T>
T field(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("train.") + key + ": wrong type");
  }
}

}  // namespace

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base) {
  if (!j.is_object()) throw std::invalid_argument("train: expected an object");
  static const char* known[] = {"levels",   "batch_size",   "rollout_cap", "epochs", "learning_rates",
                                "lr_halving_every", "seed", "distribution", "curriculum", "loss",
                                "channels", "layers",       "modes",       "kernel_size"};
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("train." + key + ": unknown field");
  }
  base.levels = field(j, "levels", base.levels);
  base.batch_size = field(j, "batch_size", base.batch_size);
  base.rollout_cap = field(j, "rollout_cap", base.rollout_cap);
  base.epochs = field(j, "epochs", base.epochs);
  if (j.contains("learning_rates") && j["learning_rates"].is_number())
    base.learning_rates = {j["learning_rates"].get<double>()};
  else
    base.learning_rates = field(j, "learning_rates", base.learning_rates);
  base.lr_halving_every = field(j, "lr_halving_every", base.lr_halving_every);
  base.seed = field(j, "seed", base.seed);
  base.distribution = field(j, "distribution", base.distribution);
  base.curriculum = field(j, "curriculum", base.curriculum);
  if (j.contains("loss")) base.loss = loss_kind_from_string(field<std::string>(j, "loss", ""));

  const bool arch = j.contains("channels") || j.contains("layers") || j.contains("modes") || j.contains("kernel_size");
  if (arch) {
    const int channels = field(j, "channels", 16);
    const int layers = field(j, "layers", 3);
    const int modes = field(j, "modes", 0);  // 0: n_l / 4
    const int kernel = field(j, "kernel_size", 5);
    if (modes < 0) throw std::invalid_argument("train.modes: must be >= 0");
    base.smoother_config = [=](int level, const Grid& g) {
      FnoConfig c = default_smoother_config(level, g);
      c.channels = channels;
      c.layers = layers;
      c.kernel_size = kernel;
      if (modes > 0) c.modes = std::min<std::size_t>(static_cast<std::size_t>(modes), c.rows / 2);
      return c;
    };
  }
  base.validate();
  return base;
}

std::shared_ptr<const LevelHierarchy> build_hierarchy(const ProblemSpec& spec, int levels) {
  return std::make_shared<LevelHierarchy>(build_problem(spec), levels);
}

Batch generate_batch(const NeuralHierarchy& nh, const TrainConfig& cfg, std::mt19937_64& rng) {
  const auto& a = *nh.base->op(1);
  const std::size_t n = a.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> steps(1, cfg.rollout_cap);
  Batch batch;
  const std::vector<double> zero(n, 0.0);
  for (int i = 0; i < cfg.batch_size; ++i) {
    std::vector<double> x(n);
    for (double& v : x) v = normal(rng);
    auto y = a.apply(x);
    const int k = steps(rng);
    for (int s = 0; s < k; ++s) {
      axpy(-1.0, nmg_cycle(nh, zero, y), x);
      y = a.apply(x);
    }
    batch.x.push_back(std::move(x));
    batch.y.push_back(std::move(y));
    batch.rollout_steps.push_back(k);
  }
  return batch;
}

namespace {

ComplexVec spectrum(std::span<const double> v, const Grid& g) {
  ComplexVec s(v.begin(), v.end());
  if (g.dims == 1)
    dft1_inplace(s);
  else
    dft2_inplace(s, g.rows, g.cols);
  return s;
}

// D^H w for the unnormalized DFT D, real part.
std::vector<double> dft_adjoint_real(ComplexVec w, const Grid& g) {
  if (g.dims == 1)
    idft1_inplace(w);
  else
    idft2_inplace(w, g.rows, g.cols);
  const double n = static_cast<double>(w.size());
  std::vector<double> out(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) out[k] = n * w[k].real();
  return out;
}

// h = ||b|| N(b / ||b||), keeping the cache for a later backward pass.
struct SmootherEval {
  double norm = 0.0;
  std::vector<double> v;
  std::vector<double> out;  // N(v)
  std::vector<double> h;
  FnoCache cache;
};

SmootherEval eval_smoother(const NeuralHierarchy& nh, int level, std::span<const double> b) {
  SmootherEval s;
  s.norm = norm2(b);
  if (s.norm == 0.0) {
    s.h.assign(b.size(), 0.0);
    return s;
  }
  if (nh.smoother_override) {
    s.h = nh.smoother_override(level, b);
    return s;
  }
  const std::size_t k = static_cast<std::size_t>(level - 1);
  s.v.assign(b.begin(), b.end());
  for (double& x : s.v) x /= s.norm;
  s.out = fno_forward(nh.params.at(k), nh.configs.at(k), s.v, &s.cache);
  s.h = s.out;
  for (double& x : s.h) x *= s.norm;
  return s;
}

void check_batch(const NeuralHierarchy& nh, const Batch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
  const std::size_t n = nh.base->op(1)->size();
  for (std::size_t i = 0; i < batch.size(); ++i)
    if (batch.x[i].size() != n || batch.y[i].size() != n) throw std::invalid_argument("batch dimension mismatch");
}

}  // namespace

std::vector<LevelLoss> levelwise_losses(const NeuralHierarchy& nh, const Batch& batch, std::vector<FnoParams>* grads) {
  check_batch(nh, batch);
  const auto& hier = *nh.base;
  const int levels = hier.levels();
  const Grid& fine = hier.grid(1);
  const std::size_t n = fine.size();
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  std::vector<LevelLoss> losses(static_cast<std::size_t>(levels - 1));
  for (int l = 1; l < levels; ++l) {
    auto& ll = losses[static_cast<std::size_t>(l - 1)];
    ll.level = l;
    ll.bin_energy.assign(n, 0.0);
    ll.mask = cached_mask(fine.dims, l, levels, fine.rows, fine.cols, MaskVariant::fine)->natural;
  }
  if (grads) {
    grads->clear();
    for (const auto& p : nh.params) grads->push_back(fno_zero_like(p));
  }

  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::vector<double> y_l = batch.y[i];
    std::vector<double> correction(n, 0.0);  // sum_{k<l} I_k^1 F_k'(h_k)
    for (int l = 1; l < levels; ++l) {
      auto& ll = losses[static_cast<std::size_t>(l - 1)];
      auto s = eval_smoother(nh, l, y_l);
      auto e = subtract(batch.x[i], correction);
      axpy(-1.0, interpolate_to_fine(hier, l, s.h), e);
      auto spec = spectrum(e, fine);
      for (std::size_t j = 0; j < n; ++j) {
        const double p = std::norm(spec[j]);
        ll.bin_energy[j] += p * inv_batch;
        ll.value += ll.mask[j] * ll.mask[j] * p * inv_batch;
      }
      if (grads && s.norm > 0.0 && !nh.smoother_override) {
        for (std::size_t j = 0; j < n; ++j) spec[j] *= 2.0 * ll.mask[j] * ll.mask[j] * inv_batch;
        auto g_h = interpolate_to_fine_adjoint(hier, l, dft_adjoint_real(std::move(spec), fine));
        for (double& g : g_h) g *= -s.norm;
        fno_backward(nh.params[static_cast<std::size_t>(l - 1)], nh.configs[static_cast<std::size_t>(l - 1)], s.cache,
                     g_h, (*grads)[static_cast<std::size_t>(l - 1)]);
      }
      if (l + 1 < levels) {
        const auto u = nh.apply_filter(l, s.h);
        axpy(1.0, interpolate_to_fine(hier, l, u), correction);
        y_l = hier.transfer(l).restrict(subtract(y_l, hier.op(l)->apply(u)));
      }
    }
  }
  return losses;
}

LevelLoss levelwise_loss(int level, const NeuralHierarchy& nh, const Batch& batch, FnoParams* grad) {
  if (level < 1 || level >= nh.levels())
    throw std::out_of_range("levelwise loss: level " + std::to_string(level) + " must lie in [1, L-1]");
  std::vector<FnoParams> grads;
  auto all = levelwise_losses(nh, batch, grad ? &grads : nullptr);
  if (grad) *grad = std::move(grads[static_cast<std::size_t>(level - 1)]);
  return std::move(all[static_cast<std::size_t>(level - 1)]);
}

double loss_bound_violation(const LevelLoss& loss, double min_mask) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < loss.mask.size(); ++j) {
    const double m = loss.mask[j];
    if (m > min_mask) worst = std::max(worst, loss.bin_energy[j] - loss.value / (m * m));
  }
  return worst;
}

namespace {

// Forward tape of one cycle from x = 0 (x_l = 0 on every level, so b_l = y_l).
struct CycleTape {
  const NeuralHierarchy* nh = nullptr;
  int coarsest = 0;
  std::vector<SmootherEval> evals;  // per level 1..coarsest-1

  std::vector<double> forward(int level, std::vector<double> y) {
    const auto& hier = *nh->base;
    if (level == coarsest) return hier.coarse_solver(level).solve(y);
    auto& s = evals[static_cast<std::size_t>(level - 1)];
    s = eval_smoother(*nh, level, y);
    auto out = nh->apply_filter(level, s.h);
    const auto t = hier.transfer(level);
    const auto yc = t.restrict(subtract(y, hier.op(level)->apply(out)));
    axpy(1.0, t.interpolate(forward(level + 1, yc)), out);
    return out;
  }

  // Returns d loss / d y_level given d loss / d out_level.
  std::vector<double> backward(int level, const std::vector<double>& g_out, std::vector<FnoParams>& grads) {
    const auto& hier = *nh->base;
    if (level == coarsest) return hier.coarse_solver(level).solve_transpose(g_out);
    const auto t = hier.transfer(level);
    const auto g_yc = backward(level + 1, t.interpolate_adjoint(g_out), grads);
    auto g_r = t.interpolate(g_yc);
    for (double& g : g_r) g *= t.adjoint_scale();  // R^T = c P
    std::vector<double> g_u(g_out);
    std::vector<double> atg(g_r.size());
    hier.op(level)->apply_transpose(g_r, atg);
    axpy(-1.0, atg, g_u);
    auto g_y = g_r;
    const auto& s = evals[static_cast<std::size_t>(level - 1)];
    if (s.norm == 0.0 || nh->smoother_override) return g_y;
    const auto g_h = nh->apply_filter(level, g_u);  // the level filter is self-adjoint
    std::vector<double> scaled(g_h);
    for (double& g : scaled) g *= s.norm;
    const std::size_t k = static_cast<std::size_t>(level - 1);
    auto jt = fno_backward(nh->params[k], nh->configs[k], s.cache, scaled, grads[k]);
    for (double& g : jt) g /= s.norm;
    // h = ||b|| N(v), v = b / ||b||: g_b = v (o^T g_h) + (I - v v^T) J^T g_h.
    const double og = dot(s.out, g_h);
    const double vj = dot(s.v, jt);
    for (std::size_t j = 0; j < g_y.size(); ++j) g_y[j] += s.v[j] * og + jt[j] - s.v[j] * vj;
    return g_y;
  }
};

}  // namespace

double combined_loss(const NeuralHierarchy& nh, const Batch& batch, std::vector<FnoParams>* grads) {
  check_batch(nh, batch);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  if (grads) {
    grads->clear();
    for (const auto& p : nh.params) grads->push_back(fno_zero_like(p));
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CycleTape tape;
    tape.nh = &nh;
    tape.coarsest = nh.levels();
    tape.evals.resize(static_cast<std::size_t>(nh.levels() - 1));
    const auto out = tape.forward(1, batch.y[i]);
    const auto e = subtract(batch.x[i], out);
    loss += dot(e, e) * inv_batch;
    if (grads) {
      std::vector<double> g(e);
      for (double& v : g) v *= -2.0 * inv_batch;
      tape.backward(1, g, *grads);
    }
  }
  return loss;
}

nlohmann::json to_json(const EpochRecord& r) {
  return {{"stage", r.stage},     {"alpha", r.alpha},
          {"epoch", r.epoch},     {"loss", r.losses},
          {"lr", r.learning_rates}, {"batch_seed", r.batch_seed},
          {"max_bound_violation", r.max_bound_violation}};
}

void TrainLog::write_jsonl(std::ostream& os) const {
  for (const auto& r : records) os << to_json(r).dump() << '\n';
}

TrainResult train(const ProblemSpec& spec, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  spec.validate();
  const std::vector<double> alphas = cfg.curriculum.empty() ? std::vector<double>{spec.alpha} : cfg.curriculum;
  std::mt19937_64 master(cfg.seed);

  TrainResult result;
  for (std::size_t stage = 0; stage < alphas.size(); ++stage) {
    ProblemSpec s = spec;
    s.alpha = alphas[stage];
    auto base = build_hierarchy(s, cfg.levels);
    if (stage == 0) {
      result.hierarchy = make_neural_hierarchy(base, cfg.smoother_config, cfg.seed);
    } else {
      result.hierarchy.base = base;
      result.hierarchy.validate();
    }
    auto& nh = result.hierarchy;
    std::vector<AdamState> adam;
    for (const auto& p : nh.params) adam.push_back(adam_init(p));

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
      EpochRecord rec;
      rec.stage = static_cast<int>(stage);
      rec.alpha = s.alpha;
      rec.epoch = epoch;
      rec.batch_seed = master();
      std::mt19937_64 rng(rec.batch_seed);
      const Batch batch = generate_batch(nh, cfg, rng);

      std::vector<FnoParams> grads;
      if (cfg.loss == LossKind::levelwise) {
        const auto losses = levelwise_losses(nh, batch, &grads);
        rec.max_bound_violation = -std::numeric_limits<double>::infinity();
        for (const auto& ll : losses) {
          rec.losses.push_back(ll.value);
          rec.max_bound_violation = std::max(rec.max_bound_violation, loss_bound_violation(ll));
        }
      } else {
        rec.losses.push_back(combined_loss(nh, batch, &grads));
      }
      for (std::size_t k = 0; k < rec.losses.size(); ++k)
        if (!std::isfinite(rec.losses[k]))
          throw TrainingFailure("non-finite loss at stage " + std::to_string(stage) + ", epoch " +
                                std::to_string(epoch) + ", level " + std::to_string(k + 1));

      const double decay =
          cfg.lr_halving_every > 0 ? std::pow(0.5, static_cast<double>((epoch - 1) / cfg.lr_halving_every)) : 1.0;
      for (std::size_t k = 0; k < nh.params.size(); ++k) {
        const double lr = cfg.learning_rate(static_cast<int>(k) + 1) * decay;
        rec.learning_rates.push_back(lr);
        try {
          adam_step(adam[k], nh.params[k], grads[k], lr);
        } catch (const std::exception& ex) {
          throw TrainingFailure("stage " + std::to_string(stage) + ", epoch " + std::to_string(epoch) + ", level " +
                                std::to_string(k + 1) + ": " + ex.what());
        }
      }
      if (on_epoch) on_epoch(rec);
      result.log.records.push_back(std::move(rec));
    }
    result.stages.push_back({s.alpha, nh.params});
  }
  return result;
}

}  // namespace nmg
