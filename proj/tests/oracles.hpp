// Brute-force reference implementations, written straight from the scalar
// definitions with plain loops. Deliberately independent of the library code
// paths (no shared helpers beyond Eigen containers) so agreement is evidence,
// not tautology.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "xmcnn/conv_embed.hpp"
#include "xmcnn/objective.hpp"
#include "xmcnn/windowing.hpp"

namespace oracle {

inline Eigen::Index naiveWindowCount(Eigen::Index n, int h) {
  const Eigen::Index c = n - h + 1;
  return c < 1 ? 1 : c;
}

// Window tau (0-based) = concatenation of instances tau..tau+h-1, absent
// instances replaced by zero vectors.
inline std::vector<Eigen::VectorXd> naiveWindows(const xmcnn::SequenceSample& s,
                                                 int h) {
  const Eigen::Index d = s.instances.rows();
  const Eigen::Index n = s.instances.cols();
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index tau = 0; tau < naiveWindowCount(n, h); ++tau) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d * h);
    for (int step = 0; step < h; ++step) {
      if (tau + step >= n) break;
      for (Eigen::Index r = 0; r < d; ++r)
        w[step * d + r] = s.instances(r, tau + step);
    }
    out.push_back(std::move(w));
  }
  return out;
}

// (max over windows of tanh(w.y), 1-based first argmax).
inline std::pair<double, int> naiveConvMaxPool(
    const std::vector<Eigen::VectorXd>& windows, const Eigen::VectorXd& filter) {
  double best = -2.0;
  int best_tau = 0;
  for (std::size_t tau = 0; tau < windows.size(); ++tau) {
    double dot = 0.0;
    for (Eigen::Index r = 0; r < filter.size(); ++r) dot += filter[r] * windows[tau][r];
    const double val = std::tanh(dot);
    if (val > best) {
      best = val;
      best_tau = static_cast<int>(tau) + 1;
    }
  }
  return {best, best_tau};
}

inline std::pair<Eigen::VectorXd, Eigen::VectorXi> naiveEmbed(
    const xmcnn::SequenceSample& s, const xmcnn::FilterBank& bank, int h) {
  const auto windows = naiveWindows(s, h);
  Eigen::VectorXd values(bank.filters.cols());
  Eigen::VectorXi indicators(bank.filters.cols());
  for (Eigen::Index k = 0; k < bank.filters.cols(); ++k) {
    const auto [v, tau] = naiveConvMaxPool(windows, bank.filters.col(k));
    values[k] = v;
    indicators[k] = tau;
  }
  return {values, indicators};
}

// sum_ab S_ab ||z_a - z_b||^2 as the literal double sum.
inline double naivePenalty(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& S) {
  double total = 0.0;
  for (Eigen::Index a = 0; a < S.rows(); ++a)
    for (Eigen::Index b = 0; b < S.cols(); ++b)
      total += S(a, b) * (Z.col(a) - Z.col(b)).squaredNorm();
  return total;
}

// Term-by-term scalar augmented Lagrangian:
// sum_i (eta_i - v.z_i)^2 + l1 (||v||^2 + sum ||w||^2) + l2 * penalty
// + sum_ik A_ik (Z_ik - Zbar_ik) + (beta/2) sum_ik (Z_ik - Zbar_ik)^2.
inline double naiveLagrangian(const xmcnn::ModelParams& params,
                              const Eigen::MatrixXd& Z,
                              const Eigen::MatrixXd& Zbar,
                              const Eigen::MatrixXd& A,
                              const Eigen::VectorXd& labels,
                              const Eigen::MatrixXd& S,
                              const xmcnn::Hyperparams& hp) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < Z.cols(); ++i) {
    double pred = 0.0;
    for (Eigen::Index r = 0; r < Z.rows(); ++r) pred += params.v[r] * Z(r, i);
    loss += (labels[i] - pred) * (labels[i] - pred);
  }
  double ridge = params.v.squaredNorm();
  for (const auto& bank : params.banks)
    for (Eigen::Index k = 0; k < bank.filters.cols(); ++k)
      ridge += bank.filters.col(k).squaredNorm();
  double mult = 0.0, quad = 0.0;
  for (Eigen::Index i = 0; i < Z.cols(); ++i)
    for (Eigen::Index r = 0; r < Z.rows(); ++r) {
      const double gap = Z(r, i) - Zbar(r, i);
      mult += A(r, i) * gap;
      quad += gap * gap;
    }
  return loss + hp.lambda1 * ridge + hp.lambda2 * naivePenalty(Z, S) + mult +
         hp.beta / 2.0 * quad;
}

// Ascending squared-L2, ties toward the smaller id.
inline std::vector<int> naiveRank(const Eigen::VectorXd& query,
                                  const Eigen::MatrixXd& database) {
  std::vector<int> ids(database.cols());
  std::iota(ids.begin(), ids.end(), 0);
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    const double da = (database.col(a) - query).squaredNorm();
    const double db = (database.col(b) - query).squaredNorm();
    if (da != db) return da < db;
    return a < b;
  });
  return ids;
}

// delta = relevance flags in rank order.
inline int naiveHits(const std::vector<int>& delta, int k) {
  int c = 0;
  for (int i = 0; i < k; ++i) c += delta[i] ? 1 : 0;
  return c;
}

inline double naivePrecisionAt(const std::vector<int>& delta, int k) {
  return static_cast<double>(naiveHits(delta, k)) / k;
}

inline double naiveRecallAt(const std::vector<int>& delta, int k) {
  const int total = naiveHits(delta, static_cast<int>(delta.size()));
  return static_cast<double>(naiveHits(delta, k)) / total;
}

// (1/D) sum_k Prec@k * delta_k.
inline double naiveApDiluted(const std::vector<int>& delta) {
  const int D = static_cast<int>(delta.size());
  double sum = 0.0;
  for (int k = 1; k <= D; ++k)
    if (delta[k - 1]) sum += naivePrecisionAt(delta, k);
  return sum / D;
}

// Same numerator over the relevant count.
inline double naiveApStandard(const std::vector<int>& delta) {
  const int D = static_cast<int>(delta.size());
  const int R = naiveHits(delta, D);
  if (R == 0) return 0.0;
  double sum = 0.0;
  for (int k = 1; k <= D; ++k)
    if (delta[k - 1]) sum += naivePrecisionAt(delta, k);
  return sum / R;
}

// Prec@k* minimizing |Prec@k - Reca@k|, smallest k on ties. For D <= ~1e3 the
// double quotients are exact enough that unequal small-denominator rationals
// never collide, so a plain scan is a valid independent oracle.
inline double naiveBeprp(const std::vector<int>& delta) {
  const int D = static_cast<int>(delta.size());
  int best_k = 1;
  double best_diff = 1e300;
  for (int k = 1; k <= D; ++k) {
    const double diff = std::abs(naivePrecisionAt(delta, k) - naiveRecallAt(delta, k));
    if (diff < best_diff) {
      best_diff = diff;
      best_k = k;
    }
  }
  return naivePrecisionAt(delta, best_k);
}

}  // namespace oracle
