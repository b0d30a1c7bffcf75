#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmg/classical.hpp"
#include "nmg/problems.hpp"
#include "nmg/training.hpp"

namespace nmg {

/// Raised for schema violations; the message starts with the field path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SolverConfig {
  std::string method = "nmg";  // nmg | mg | cg
  int coarsest = 0;            // L' for nmg and mg; 0 means L
  int levels = 4;              // hierarchy depth for mg (nmg takes it from the checkpoint)
  double tol = 1e-6;
  int max_cycles = 30000;
  MgParams mg;
};

struct BenchGrid {
  std::vector<std::size_t> n;
  std::vector<double> alpha;
  std::vector<std::string> methods;
  std::vector<int> coarsest;  // L' values; empty means {0}
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::optional<TrainConfig> train;
  SolverConfig solver;
  int num_rhs = 10;
  std::uint64_t rhs_seed = 0;
  std::string output_dir = ".";
  /// Checkpoint path; "{n}" and "{alpha}" are substituted in bench runs.
  std::string checkpoint;
  BenchGrid bench;

  void validate() const;
};

nlohmann::json to_json(const ProblemSpec& spec);
ProblemSpec problem_from_json(const nlohmann::json& j, ProblemSpec base = {});
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment(const std::string& path);

/// Test system i: x standard normal from seed rhs_seed + i, y = A x.
std::vector<double> make_rhs(const LinearOperator& op, std::uint64_t seed, std::vector<double>* x_true = nullptr);

/// Checkpoint path with {n} and {alpha} replaced.
std::string checkpoint_path(const std::string& pattern, std::size_t n, double alpha);

/// One solve of `y` with the configured method. `nh` is required for nmg.
SolveReport run_solver(const SolverConfig& solver, const ProblemSpec& spec, std::span<const double> y,
                       const NeuralHierarchy* nh = nullptr);

/// Per-(method, n, alpha, L') cycle counts and times over the right-hand sides.
struct BenchResult {
  std::string method;
  std::size_t n = 0;
  double alpha = 0.0;
  int coarsest = 0;
  std::vector<int> cycles;
  std::vector<double> seconds;
  std::vector<bool> converged;
};

struct TableRow {
  std::string method;
  std::size_t n = 0;
  double alpha = 0.0;
  int coarsest = 0;
  double mean_cycles = 0.0;
  double std_cycles = 0.0;  // N - 1 denominator, 0 for one sample
  double mean_seconds = 0.0;
  friend bool operator==(const TableRow&, const TableRow&) = default;
};

/// Summary rows sorted by method, n, then alpha descending.
std::vector<TableRow> summarize(const std::vector<BenchResult>& results);
void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows);
std::vector<TableRow> read_table_csv(std::istream& is);
nlohmann::json table_to_json(const std::vector<TableRow>& rows);

/// Checkpoint for trained smoothers on `spec` (problem JSON and training
/// settings go into the metadata).
Checkpoint make_checkpoint(const NeuralHierarchy& nh, const ProblemSpec& spec, const TrainConfig& cfg);
/// Problem recorded in a checkpoint's metadata, if any.
std::optional<ProblemSpec> checkpoint_problem(const Checkpoint& ckpt);
/// Smoothers from `path` attached to a fresh hierarchy for `spec`. A problem
/// hash mismatch (e.g. solving at another alpha) is reported on `warn`.
NeuralHierarchy load_neural_hierarchy(const std::string& path, const ProblemSpec& spec, std::ostream* warn = nullptr);

double sample_mean(std::span<const double> v);
/// Standard deviation with the N - 1 denominator (0 for fewer than two samples).
double sample_std(std::span<const double> v);

}  // namespace nmg
