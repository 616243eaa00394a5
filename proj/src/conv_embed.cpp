#include "xmcnn/conv_embed.hpp"

#include <stdexcept>

namespace xmcnn {

std::pair<double, int> convMaxPool(const WindowedSequence& ws,
                                   const Eigen::VectorXd& filter) {
  if (ws.windows.cols() < 1)
    throw std::invalid_argument("convMaxPool: no windows");
  if (filter.size() != ws.windows.rows())
    throw std::invalid_argument("convMaxPool: filter length != window length");

  // Strict > keeps the first (smallest) window on exact ties.
  double best = -2.0;  // below the range of tanh
  Eigen::Index best_tau = 0;
  const Eigen::VectorXd dots = ws.windows.transpose() * filter;
  for (Eigen::Index tau = 0; tau < dots.size(); ++tau) {
    const double a = activate(dots[tau]);
    if (a > best) {
      best = a;
      best_tau = tau;
    }
  }
  return {best, static_cast<int>(best_tau) + 1};
}

Embedding embedWindows(const WindowedSequence& ws, const FilterBank& bank) {
  const int u = bank.u();
  if (u < 1) throw std::invalid_argument("embedWindows: empty filter bank");
  if (bank.filters.rows() != ws.windows.rows())
    throw std::invalid_argument("embedWindows: filter rows != window length");

  Embedding e;
  e.values.resize(u);
  e.indicators.resize(u);
  for (int k = 0; k < u; ++k) {
    const auto [value, tau] = convMaxPool(ws, bank.filters.col(k));
    e.values[k] = value;
    e.indicators[k] = tau;
  }
  return e;
}

Embedding embed(const SequenceSample& sample, const FilterBank& bank, int h) {
  return embedWindows(makeWindows(sample, h), bank);
}

double score(const Embedding& e, const Eigen::VectorXd& v) {
  if (v.size() != e.values.size())
    throw std::invalid_argument("score: classifier length != embedding length");
  return v.dot(e.values);
}

}  // namespace xmcnn
