#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmg/neural_mg.hpp"
#include "nmg/problems.hpp"

namespace nmg {

enum class LossKind { levelwise, combined };
std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

struct TrainConfig {
  int levels = 4;
  int batch_size = 20;
  int rollout_cap = 10;  // K
  int epochs = 500;      // per curriculum stage
  /// Adam step size per level 1..L-1; a single entry applies to every level.
  std::vector<double> learning_rates{1e-3};
  /// Step sizes are halved every this many epochs (0 disables the schedule).
  int lr_halving_every = 0;
  std::uint64_t seed = 0;
  std::string distribution = "normal";
  /// Strictly decreasing alphas; empty means "train at the problem's alpha".
  std::vector<double> curriculum;
  LossKind loss = LossKind::levelwise;
  /// Architecture of the level-l smoother.
  std::function<FnoConfig(int, const Grid&)> smoother_config = default_smoother_config;

  void validate() const;
  double learning_rate(int level) const;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Reads the keys present in `j` on top of `base`; throws std::invalid_argument
/// naming the offending field.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// Training pairs with y_i = A x_i.
struct Batch {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> y;
  std::vector<int> rollout_steps;
  std::size_t size() const { return x.size(); }
};

/// Standard-normal x_i, y_i = A x_i, then k_i ~ U{1..K} rollout steps
/// x_i <- x_i - cycle(0, y_i), y_i <- A x_i with the current smoothers.
Batch generate_batch(const NeuralHierarchy& nh, const TrainConfig& cfg, std::mt19937_64& rng);

/// Value of the level-l loss plus the batch-mean spectral energy
/// F_j = (1/N) sum_i |DFT(e_i)_j|^2 of the post-smoothing error (natural order).
struct LevelLoss {
  int level = 1;
  double value = 0.0;
  std::vector<double> bin_energy;
  std::vector<double> mask;  // m_l, natural order
};

/// Level-wise losses for levels 1..L-1 from one forward pass over the batch.
/// When `grads` is given it receives one gradient buffer per level; level l's
/// buffer holds d L_l / d theta_l only (lower smoothers are constants).
std::vector<LevelLoss> levelwise_losses(const NeuralHierarchy& nh, const Batch& batch,
                                        std::vector<FnoParams>* grads = nullptr);
LevelLoss levelwise_loss(int level, const NeuralHierarchy& nh, const Batch& batch, FnoParams* grad = nullptr);

/// (1/N) sum_i ||x_i - cycle(0, y_i)||^2 with gradients into every level.
double combined_loss(const NeuralHierarchy& nh, const Batch& batch, std::vector<FnoParams>* grads = nullptr);

/// Worst violation of F_j <= L_l / m_j^2 over bins with m_j > min_mask (<= 0 means the bound holds).
double loss_bound_violation(const LevelLoss& loss, double min_mask = 1e-6);

struct EpochRecord {
  int stage = 0;
  double alpha = 0.0;
  int epoch = 0;  // 1-based within the stage
  std::vector<double> losses;  // per level (levelwise) or one entry (combined)
  std::vector<double> learning_rates;
  std::uint64_t batch_seed = 0;
  double max_bound_violation = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> records;
  void write_jsonl(std::ostream& os) const;
};

nlohmann::json to_json(const EpochRecord& r);

struct TrainStage {
  double alpha = 0.0;
  std::vector<FnoParams> params;
};

struct TrainResult {
  NeuralHierarchy hierarchy;  // final stage
  std::vector<TrainStage> stages;
  TrainLog log;
};

/// Thrown when a loss or parameter becomes non-finite during training.
class TrainingFailure : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// Alg-5 training over the curriculum. Each stage starts from the previous
/// stage's parameters; `on_epoch` (optional) sees every record as it is made.
TrainResult train(const ProblemSpec& spec, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Hierarchy for `spec` with L levels and a dense coarsest solve.
std::shared_ptr<const LevelHierarchy> build_hierarchy(const ProblemSpec& spec, int levels);

}  // namespace nmg
