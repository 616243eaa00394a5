#include "xmcnn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "xmcnn/rng.hpp"

namespace xmcnn {

namespace {

// deriveSeed stream ids; distinct from the data_io streams (2xx/3xx/4xx).
constexpr std::uint64_t kFilterStreamBase = 100;

// Contiguous-chunk parallel map over [0, n). Chunks write disjoint output
// columns, so results are bit-identical for any thread count.
template <typename Fn>
void parallelFor(Eigen::Index n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2 * threads) {
    fn(Eigen::Index{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const Eigen::Index chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const Eigen::Index lo = t * chunk;
    const Eigen::Index hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

double relChange(double before, double after) {
  return (before - after) / std::max(1.0, std::abs(before));
}

// Re-pool filter k of modality j only: refreshes the (k, i) entries of the
// indicator matrix and Zbar for that modality's samples.
void refreshFilterRow(const Eigen::VectorXd& w, int modality, int k,
                      const TrainingData& data, TrainState& state) {
  const Eigen::Index lo = data.offsets[modality - 1];
  const Eigen::Index hi = lo + data.counts[modality - 1];
  for (Eigen::Index i = lo; i < hi; ++i) {
    const auto [value, tau] = convMaxPool(data.windows[i], w);
    state.Zbar(k, i) = value;
    state.indicators(k, i) = tau;
  }
}

void updateOneFilter(ModelParams& params, TrainState& state,
                     const TrainingData& data, const Hyperparams& hp,
                     const SolverConfig& config, int modality, int k) {
  auto& bank = params.banks[modality - 1];
  Eigen::VectorXd w = bank.filters.col(k);

  refreshFilterRow(w, modality, k, data, state);
  // Right after a refresh the surrogate equals the true block objective.
  double surrogate = filterSubObjective(w, modality, k, state, data, hp);
  Eigen::VectorXd best_w = w;
  double best_true = surrogate;

  for (int t = 1; t <= config.max_inner_iters; ++t) {
    const Eigen::VectorXd grad = filterGradient(w, modality, k, state, data, hp);
    double psi = 1.0 / t;
    bool accepted = false;
    Eigen::VectorXd w_try;
    double j_try = surrogate;
    for (int halving = 0; halving <= 20; ++halving) {
      w_try = w - psi * grad;
      j_try = filterSubObjective(w_try, modality, k, state, data, hp);
      if (std::isfinite(j_try) && j_try <= surrogate) {
        accepted = true;
        break;
      }
      psi *= 0.5;
    }
    if (!accepted) break;
    const double rel = relChange(surrogate, j_try);
    w = w_try;

    // Alternation: re-maximize the pooling windows for the moved filter.
    // That step can raise the true objective, so track the best iterate by
    // the fresh-indicator value and return that.
    refreshFilterRow(w, modality, k, data, state);
    surrogate = filterSubObjective(w, modality, k, state, data, hp);
    if (surrogate < best_true) {
      best_true = surrogate;
      best_w = w;
    }
    if (rel < config.tol_lagrangian) break;
  }

  bank.filters.col(k) = best_w;
  refreshFilterRow(best_w, modality, k, data, state);
}

}  // namespace

void SolverConfig::validate() const {
  if (max_outer_iters < 1 || max_inner_iters < 1)
    throw std::invalid_argument("solver config: iteration caps must be >= 1");
  if (!(tol_lagrangian >= 0.0) || !(tol_residual >= 0.0))
    throw std::invalid_argument("solver config: tolerances must be >= 0");
  if (!(init_scale > 0.0))
    throw std::invalid_argument("solver config: init_scale must be > 0");
  if (threads < 1)
    throw std::invalid_argument("solver config: threads must be >= 1");
}

TrainingData prepareTrainingData(const Dataset& ds, const Hyperparams& hp) {
  TrainingData data;
  data.modalities = ds.modalities;
  data.dims = ds.dims;
  data.offsets = ds.offsets;
  data.counts = ds.counts;
  data.windows.reserve(ds.samples.size());
  data.modality.reserve(ds.samples.size());
  data.labels.resize(ds.size());
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const auto& s = ds.samples[i];
    data.windows.push_back(makeWindows(s, hp.windowSize(s.modality)));
    data.modality.push_back(s.modality);
    data.labels[i] = s.label;
  }
  return data;
}

std::pair<ModelParams, TrainState> initState(const TrainingData& data,
                                             const Hyperparams& hp,
                                             const SolverConfig& config) {
  if (data.modalities < 1)
    throw std::invalid_argument("initState: no modalities");
  for (int j = 1; j <= data.modalities; ++j)
    if (data.counts[j - 1] < 1)
      throw std::invalid_argument("initState: modality " + std::to_string(j) +
                                  " has no samples");

  ModelParams params;
  params.banks.resize(data.modalities);
  for (int j = 1; j <= data.modalities; ++j) {
    const Eigen::Index rows = data.dims[j - 1] * hp.windowSize(j);
    auto& bank = params.banks[j - 1];
    bank.modality = j;
    bank.filters.resize(rows, hp.u);
    Rng rng(deriveSeed(config.seed, kFilterStreamBase + j));
    for (int k = 0; k < hp.u; ++k)
      for (Eigen::Index r = 0; r < rows; ++r)
        bank.filters(r, k) = rng.uniform(-config.init_scale, config.init_scale);
  }
  params.v = Eigen::VectorXd::Zero(hp.u);

  TrainState state;
  const Eigen::Index theta = data.theta();
  state.Zbar.resize(hp.u, theta);
  state.indicators.resize(hp.u, theta);
  updateIndicators(params, data, state, config.threads);
  state.Z = state.Zbar;
  state.A = Eigen::MatrixXd::Zero(hp.u, theta);
  return {params, state};
}

Eigen::VectorXd updateV(const Eigen::MatrixXd& Z, const Eigen::VectorXd& labels,
                        double lambda1) {
  if (labels.size() != Z.cols())
    throw std::invalid_argument("updateV: label count != sample count");
  Eigen::MatrixXd G = Z * Z.transpose();
  G.diagonal().array() += lambda1;
  const Eigen::VectorXd b = Z * labels;
  if (lambda1 <= 0.0) {
    // Without the ridge floor the Gram matrix may be singular.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    if (!lu.isInvertible())
      throw NumericalError("updateV: singular system (Z Z^T rank-deficient and lambda1 <= 0)");
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("updateV: factorization failed");
  Eigen::VectorXd v = ldlt.solve(b);
  v += ldlt.solve(b - G * v);  // one refinement step; tightens optimality
  if (!v.allFinite()) throw NumericalError("updateV: non-finite solution");
  return v;
}

Eigen::VectorXd classifierGradient(const Eigen::VectorXd& v,
                                   const Eigen::MatrixXd& Z,
                                   const Eigen::VectorXd& labels,
                                   double lambda1) {
  // d/dv [ sum_i (eta_i - v.z_i)^2 + lambda1 ||v||^2 ]
  return 2.0 * (Z * (Z.transpose() * v - labels) + lambda1 * v);
}

Eigen::MatrixXd zGradient(const ModelParams& params, const TrainState& state,
                          const Eigen::VectorXd& labels, const GraphOperator& L,
                          const Hyperparams& hp) {
  const Eigen::RowVectorXd residual =
      params.v.transpose() * state.Z - labels.transpose();
  Eigen::MatrixXd grad = 2.0 * params.v * residual;
  grad.noalias() += 4.0 * hp.lambda2 * L.applyRight(state.Z);
  grad += state.A + hp.beta * (state.Z - state.Zbar);
  return grad;
}

int updateZ(const ModelParams& params, TrainState& state,
            const Eigen::VectorXd& labels, const GraphOperator& L,
            const Hyperparams& hp, const SolverConfig& config) {
  double current = augmentedLagrangian(params, state, labels, L, hp);
  // Feasible points satisfy Z = Zbar with entries in (-1, 1): the graph term
  // makes the subproblem indefinite, so iterates outside the closed feasible
  // box are runaway, not progress. Steps are projected back onto the box;
  // boundary coordinates slide along its faces.
  const double bound =
      std::max(1.0, state.Z.size() > 0 ? state.Z.cwiseAbs().maxCoeff() : 1.0);
  int accepted = 0;
  for (int t = 1; t <= config.max_inner_iters; ++t) {
    const Eigen::MatrixXd grad = zGradient(params, state, labels, L, hp);
    const Eigen::MatrixXd z_entry = state.Z;
    double psi = 1.0 / t;
    bool ok = false;
    double tried = current;
    for (int halving = 0; halving <= 20; ++halving) {
      state.Z = (z_entry - psi * grad).cwiseMax(-bound).cwiseMin(bound);
      tried = augmentedLagrangian(params, state, labels, L, hp);
      if (std::isfinite(tried) && tried <= current) {
        ok = true;
        break;
      }
      psi *= 0.5;
    }
    if (!ok) {
      state.Z = z_entry;
      break;
    }
    ++accepted;
    const double rel = relChange(current, tried);
    current = tried;
    if (rel < config.tol_lagrangian) break;
  }
  return accepted;
}

void updateIndicators(const ModelParams& params, const TrainingData& data,
                      TrainState& state, int threads) {
  const Eigen::Index theta = data.theta();
  if (state.Zbar.cols() != theta || state.indicators.cols() != theta)
    throw std::invalid_argument("updateIndicators: state/data size mismatch");
  parallelFor(theta, threads, [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index i = lo; i < hi; ++i) {
      const auto& bank = params.banks[data.modality[i] - 1];
      const Embedding e = embedWindows(data.windows[i], bank);
      state.Zbar.col(i) = e.values;
      state.indicators.col(i) = e.indicators;
    }
  });
}

double filterSubObjective(const Eigen::VectorXd& w, int modality, int k,
                          const TrainState& state, const TrainingData& data,
                          const Hyperparams& hp) {
  const Eigen::Index lo = data.offsets[modality - 1];
  const Eigen::Index hi = lo + data.counts[modality - 1];
  double total = hp.lambda1 * w.squaredNorm();
  for (Eigen::Index i = lo; i < hi; ++i) {
    const int tau = state.indicators(k, i);  // 1-based
    const double s = activate(w.dot(data.windows[i].windows.col(tau - 1)));
    const double gap = state.Z(k, i) - s;
    total += state.A(k, i) * gap + 0.5 * hp.beta * gap * gap;
  }
  return total;
}

Eigen::VectorXd filterGradient(const Eigen::VectorXd& w, int modality, int k,
                               const TrainState& state, const TrainingData& data,
                               const Hyperparams& hp) {
  const Eigen::Index lo = data.offsets[modality - 1];
  const Eigen::Index hi = lo + data.counts[modality - 1];
  Eigen::VectorXd grad = 2.0 * hp.lambda1 * w;
  for (Eigen::Index i = lo; i < hi; ++i) {
    const int tau = state.indicators(k, i);
    const auto y = data.windows[i].windows.col(tau - 1);
    const double pre = w.dot(y);
    const double gap = state.Z(k, i) - activate(pre);
    // d/dw of alpha*gap + (beta/2)*gap^2 with gap = z - tanh(w.y)
    grad.noalias() -= (state.A(k, i) + hp.beta * gap) * activateGrad(pre) * y;
  }
  return grad;
}

double filterBlockObjective(const Eigen::VectorXd& w, int modality, int k,
                            const TrainState& state, const TrainingData& data,
                            const Hyperparams& hp) {
  const Eigen::Index lo = data.offsets[modality - 1];
  const Eigen::Index hi = lo + data.counts[modality - 1];
  double total = hp.lambda1 * w.squaredNorm();
  for (Eigen::Index i = lo; i < hi; ++i) {
    const double s = convMaxPool(data.windows[i], w).first;
    const double gap = state.Z(k, i) - s;
    total += state.A(k, i) * gap + 0.5 * hp.beta * gap * gap;
  }
  return total;
}

void updateFilters(ModelParams& params, TrainState& state,
                   const TrainingData& data, const Hyperparams& hp,
                   const SolverConfig& config) {
  for (int j = 1; j <= data.modalities; ++j)
    for (int k = 0; k < params.banks[j - 1].u(); ++k)
      updateOneFilter(params, state, data, hp, config, j, k);
}

void updateMultipliers(TrainState& state, double beta) {
  state.A += beta * (state.Z - state.Zbar);
}

SolveResult solve(const TrainingData& data, const RelevanceMatrix& S,
                  const Hyperparams& hp, const SolverConfig& config) {
  hp.validate();
  config.validate();
  if (data.theta() < 1) throw std::invalid_argument("solve: empty training data");
  if (S.size() != data.theta())
    throw std::invalid_argument("solve: relevance size != sample count");
  for (Eigen::Index i = 0; i < data.labels.size(); ++i)
    if (data.labels[i] != 1.0 && data.labels[i] != -1.0)
      throw std::invalid_argument("solve: labels must be +1 or -1");

  const GraphOperator L = laplacian(S);
  auto [params, state] = initState(data, hp, config);

  SolveReport report;
  double prev = augmentedLagrangian(params, state, data.labels, L, hp);
  if (!std::isfinite(prev))
    throw DivergedError("solve: non-finite objective at initialization", {});

  for (int outer = 1; outer <= config.max_outer_iters; ++outer) {
    state.outer_iter = outer;
    updateIndicators(params, data, state, config.threads);
    params.v = updateV(state.Z, data.labels, hp.lambda1);
    const double v_grad =
        classifierGradient(params.v, state.Z, data.labels, hp.lambda1).norm();
    updateZ(params, state, data.labels, L, hp, config);
    updateFilters(params, state, data, hp, config);
    updateIndicators(params, data, state, config.threads);
    updateMultipliers(state, hp.beta);

    const double lag = augmentedLagrangian(params, state, data.labels, L, hp);
    const double residual = constraintResidual(state);
    report.trace.push_back({lag, residual, v_grad});
    if (!std::isfinite(lag))
      throw DivergedError("solve: augmented Lagrangian diverged at outer iteration " +
                              std::to_string(outer),
                          report.trace);

    const double rel = std::abs(lag - prev) / std::max(1.0, std::abs(prev));
    prev = lag;
    if (rel < config.tol_lagrangian && residual < config.tol_residual) {
      report.reason = SolveReport::Termination::kConverged;
      break;
    }
  }
  report.outer_iterations = static_cast<int>(report.trace.size());
  return {std::move(params), std::move(state), std::move(report)};
}

SolveResult solve(const Dataset& ds, const RelevanceMatrix& S,
                  const Hyperparams& hp, const SolverConfig& config) {
  return solve(prepareTrainingData(ds, hp), S, hp, config);
}

double finiteDiffCheck(const std::function<double(const Eigen::VectorXd&)>& f,
                       const Eigen::VectorXd& point,
                       const Eigen::VectorXd& analytic, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finiteDiffCheck: step must be > 0");
  if (point.size() != analytic.size())
    throw std::invalid_argument("finiteDiffCheck: gradient length != point length");
  double worst = 0.0;
  Eigen::VectorXd x = point;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + step;
    const double fp = f(x);
    x[i] = xi - step;
    const double fm = f(x);
    x[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericalError("finiteDiffCheck: non-finite objective value");
    const double cd = (fp - fm) / (2.0 * step);
    const double rel = std::abs(cd - analytic[i]) / (std::abs(analytic[i]) + 1e-12);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace xmcnn
