#include "xmcnn/grad_check.hpp"

#include <stdexcept>
#include <string>

#include "xmcnn/rng.hpp"
#include "xmcnn/solver.hpp"

namespace xmcnn {

namespace {

constexpr std::uint64_t kGradStreamBase = 500;

struct Instance {
  TrainingData data;
  Hyperparams hp;
  ModelParams params;
  TrainState state;
  RelevanceMatrix S;
};

// Small random problem. Scales are kept moderate (|w.y| well below tanh
// saturation) so no true gradient coordinate is accidentally ~0, which would
// poison the relative-error denominator.
Instance makeInstance(Rng& rng) {
  Instance inst;
  auto& hp = inst.hp;
  hp.u = static_cast<int>(rng.uniformInt(2, 4));
  hp.lambda1 = rng.uniform(0.05, 0.5);
  hp.lambda2 = rng.uniform(0.05, 0.5);
  hp.beta = rng.uniform(0.5, 2.0);
  hp.h = {static_cast<int>(rng.uniformInt(1, 3)),
          static_cast<int>(rng.uniformInt(1, 3))};

  auto& data = inst.data;
  data.modalities = 2;
  data.dims = {rng.uniformInt(2, 3), rng.uniformInt(2, 3)};
  for (int j = 1; j <= 2; ++j) {
    const auto n = rng.uniformInt(2, 5);
    data.offsets.push_back(static_cast<Eigen::Index>(data.windows.size()));
    data.counts.push_back(n);
    for (std::int64_t i = 0; i < n; ++i) {
      SequenceSample s;
      s.modality = j;
      s.class_id = 1;
      const auto len = rng.uniformInt(1, 8);
      s.instances.resize(data.dims[j - 1], len);
      for (Eigen::Index c = 0; c < s.instances.cols(); ++c)
        for (Eigen::Index r = 0; r < s.instances.rows(); ++r)
          s.instances(r, c) = rng.uniform(-1.0, 1.0);
      data.windows.push_back(makeWindows(s, hp.h[j - 1]));
      data.modality.push_back(j);
    }
  }
  const Eigen::Index theta = data.theta();
  data.labels.resize(theta);
  for (Eigen::Index i = 0; i < theta; ++i)
    data.labels[i] = rng.uniformInt(0, 1) == 0 ? -1.0 : 1.0;

  inst.params.banks.resize(2);
  for (int j = 1; j <= 2; ++j) {
    auto& bank = inst.params.banks[j - 1];
    bank.modality = j;
    bank.filters.resize(data.dims[j - 1] * hp.h[j - 1], hp.u);
    for (Eigen::Index c = 0; c < bank.filters.cols(); ++c)
      for (Eigen::Index r = 0; r < bank.filters.rows(); ++r)
        bank.filters(r, c) = rng.uniform(-0.2, 0.2);
  }
  inst.params.v.resize(hp.u);
  for (int i = 0; i < hp.u; ++i) inst.params.v[i] = rng.uniform(-1.0, 1.0);

  auto& st = inst.state;
  st.Z.resize(hp.u, theta);
  st.A.resize(hp.u, theta);
  for (Eigen::Index c = 0; c < theta; ++c)
    for (int r = 0; r < hp.u; ++r) {
      st.Z(r, c) = rng.uniform(-0.9, 0.9);
      st.A(r, c) = rng.uniform(-0.5, 0.5);
    }
  st.Zbar.resize(hp.u, theta);
  st.indicators.resize(hp.u, theta);
  updateIndicators(inst.params, data, st);

  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(theta, theta);
  for (Eigen::Index i = 0; i < theta; ++i)
    for (Eigen::Index j = i + 1; j < theta; ++j)
      S(i, j) = S(j, i) = static_cast<double>(rng.uniformInt(-1, 1));
  inst.S = RelevanceMatrix::fromMatrix(S);
  return inst;
}

}  // namespace

GradCheckResult runGradCheck(const GradCheckOptions& opts) {
  if (opts.trials < 1) throw std::invalid_argument("gradCheck: trials must be >= 1");
  if (!(opts.step > 0.0)) throw std::invalid_argument("gradCheck: step must be > 0");
  if (!(opts.tolerance > 0.0))
    throw std::invalid_argument("gradCheck: tolerance must be > 0");

  GradCheckResult result;
  result.trials = opts.trials;
  for (int trial = 0; trial < opts.trials; ++trial) {
    Rng rng(deriveSeed(opts.seed, kGradStreamBase + static_cast<std::uint64_t>(trial)));
    Instance inst = makeInstance(rng);
    const GraphOperator L = laplacian(inst.S);
    const Eigen::Index theta = inst.data.theta();
    const int u = inst.hp.u;

    // Embedding block: d/dZ of the augmented Lagrangian.
    Eigen::MatrixXd analytic_z =
        zGradient(inst.params, inst.state, inst.data.labels, L, inst.hp);
    if (opts.inject_error) analytic_z(0, 0) += 1.0;
    const Eigen::VectorXd z0 =
        Eigen::Map<const Eigen::VectorXd>(inst.state.Z.data(), u * theta);
    const Eigen::VectorXd gz =
        Eigen::Map<const Eigen::VectorXd>(analytic_z.data(), u * theta);
    const double err_z = finiteDiffCheck(
        [&](const Eigen::VectorXd& zvec) {
          TrainState s = inst.state;
          s.Z = Eigen::Map<const Eigen::MatrixXd>(zvec.data(), u, theta);
          return augmentedLagrangian(inst.params, s, inst.data.labels, L, inst.hp);
        },
        z0, gz, opts.step);
    if (err_z > result.max_rel_error_z) {
      result.max_rel_error_z = err_z;
      if (err_z > result.max_rel_error_w)
        result.worst = "trial " + std::to_string(trial) + ": embedding gradient";
    }

    // Filter blocks: d/dw of the fixed-indicator surrogate, every filter.
    for (int j = 1; j <= inst.data.modalities; ++j) {
      for (int k = 0; k < u; ++k) {
        const Eigen::VectorXd w0 = inst.params.banks[j - 1].filters.col(k);
        Eigen::VectorXd gw =
            filterGradient(w0, j, k, inst.state, inst.data, inst.hp);
        if (opts.inject_error) gw[0] += 1.0;
        const double err_w = finiteDiffCheck(
            [&](const Eigen::VectorXd& w) {
              return filterSubObjective(w, j, k, inst.state, inst.data, inst.hp);
            },
            w0, gw, opts.step);
        if (err_w > result.max_rel_error_w) {
          result.max_rel_error_w = err_w;
          if (err_w > result.max_rel_error_z)
            result.worst = "trial " + std::to_string(trial) + ": filter gradient, modality " +
                           std::to_string(j) + " filter " + std::to_string(k + 1);
        }
      }
    }
  }
  result.passed = result.max_rel_error_z <= opts.tolerance &&
                  result.max_rel_error_w <= opts.tolerance;
  return result;
}

}  // namespace xmcnn
