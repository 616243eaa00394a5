#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "xmcnn/data_io.hpp"
#include "xmcnn/errors.hpp"
#include "xmcnn/objective.hpp"

namespace xmcnn {

struct SolverConfig {
  int max_outer_iters = 200;
  int max_inner_iters = 50;
  double tol_lagrangian = 1e-6;  // relative change stopping threshold
  double tol_residual = 1e-4;    // max |Z - Zbar| stopping threshold
  std::uint64_t seed = 0;
  double init_scale = 0.1;  // filters start uniform on [-init_scale, init_scale]
  int threads = 1;

  void validate() const;
};

struct TraceEntry {
  double lagrangian = 0.0;
  double residual = 0.0;
  double v_grad_norm = 0.0;
};

struct SolveReport {
  enum class Termination { kConverged, kIterationCap };
  Termination reason = Termination::kIterationCap;
  int outer_iterations = 0;
  std::vector<TraceEntry> trace;  // one entry per outer iteration
};

// The augmented Lagrangian went non-finite; carries the trace up to the
// failing iteration.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, std::vector<TraceEntry> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

// Windowed, label-resolved view of a dataset: what the solver iterates over.
struct TrainingData {
  int modalities = 0;
  std::vector<WindowedSequence> windows;  // global order
  std::vector<int> modality;              // per sample, 1-based
  Eigen::VectorXd labels;                 // +1/-1
  std::vector<Eigen::Index> dims;         // per modality
  std::vector<Eigen::Index> offsets;
  std::vector<Eigen::Index> counts;

  Eigen::Index theta() const { return static_cast<Eigen::Index>(windows.size()); }
};

TrainingData prepareTrainingData(const Dataset& ds, const Hyperparams& hp);

// Filters uniform on [-init_scale, init_scale] (per-modality sub-streams),
// v = 0, Z = Zbar = current filter embeddings, A = 0.
std::pair<ModelParams, TrainState> initState(const TrainingData& data,
                                             const Hyperparams& hp,
                                             const SolverConfig& config);

// Closed-form ridge solve v* = (Z Z^T + lambda1 I)^{-1} Z eta.
Eigen::VectorXd updateV(const Eigen::MatrixXd& Z, const Eigen::VectorXd& labels,
                        double lambda1);

// Gradient of the v-subproblem at v; zero (to rounding) right after updateV.
Eigen::VectorXd classifierGradient(const Eigen::VectorXd& v,
                                   const Eigen::MatrixXd& Z,
                                   const Eigen::VectorXd& labels, double lambda1);

// d/dZ of the augmented Lagrangian:
// 2 v (v^T Z - eta^T) + 4 lambda2 Z L + A + beta (Z - Zbar).
Eigen::MatrixXd zGradient(const ModelParams& params, const TrainState& state,
                          const Eigen::VectorXd& labels, const GraphOperator& L,
                          const Hyperparams& hp);

// Diminishing-step gradient descent on Z (psi_t = 1/t) with halving
// backtracking; never increases the Lagrangian. Returns accepted steps.
int updateZ(const ModelParams& params, TrainState& state,
            const Eigen::VectorXd& labels, const GraphOperator& L,
            const Hyperparams& hp, const SolverConfig& config);

// Recompute indicators and Zbar for every (filter, sample) from the current
// banks. Thread-parallel across samples; bit-identical for any thread count.
void updateIndicators(const ModelParams& params, const TrainingData& data,
                      TrainState& state, int threads = 1);

// Fixed-indicator filter surrogate for filter k of modality j, and its
// gradient in w: lambda1 ||w||^2 + sum_i alpha_ik (z_ik - s_i(w))
//              + (beta/2) sum_i (z_ik - s_i(w))^2,  s_i = tanh(w . y_{i,tau_ik}).
double filterSubObjective(const Eigen::VectorXd& w, int modality, int k,
                          const TrainState& state, const TrainingData& data,
                          const Hyperparams& hp);
Eigen::VectorXd filterGradient(const Eigen::VectorXd& w, int modality, int k,
                               const TrainState& state, const TrainingData& data,
                               const Hyperparams& hp);

// The true (fresh-max-pool) value of the same block, used as the descent
// measure for updateFilters.
double filterBlockObjective(const Eigen::VectorXd& w, int modality, int k,
                            const TrainState& state, const TrainingData& data,
                            const Hyperparams& hp);

// Alternating indicator-refresh / safeguarded gradient steps, modality-major
// filter-minor order. Keeps the best iterate by the true block objective, so
// each filter's block value never increases. Leaves indicators and Zbar
// consistent with the returned banks.
void updateFilters(ModelParams& params, TrainState& state,
                   const TrainingData& data, const Hyperparams& hp,
                   const SolverConfig& config);

// A += beta (Z - Zbar); Zbar must already reflect the current filters.
void updateMultipliers(TrainState& state, double beta);

struct SolveResult {
  ModelParams params;
  TrainState state;
  SolveReport report;
};

SolveResult solve(const TrainingData& data, const RelevanceMatrix& S,
                  const Hyperparams& hp, const SolverConfig& config);
SolveResult solve(const Dataset& ds, const RelevanceMatrix& S,
                  const Hyperparams& hp, const SolverConfig& config);

// Max over coordinates of |central difference - analytic| / (|analytic| + 1e-12).
double finiteDiffCheck(const std::function<double(const Eigen::VectorXd&)>& f,
                       const Eigen::VectorXd& point,
                       const Eigen::VectorXd& analytic, double step = 1e-5);

}  // namespace xmcnn
