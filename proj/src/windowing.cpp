#include "xmcnn/windowing.hpp"

#include <stdexcept>

namespace xmcnn {

Eigen::Index windowCount(Eigen::Index seq_len, int h) {
  if (seq_len < 1) throw std::invalid_argument("windowCount: empty sequence");
  if (h < 1) throw std::invalid_argument("windowCount: window size must be >= 1");
  return std::max<Eigen::Index>(1, seq_len - h + 1);
}

WindowedSequence makeWindows(const SequenceSample& sample, int h) {
  const Eigen::Index d = sample.instances.rows();
  const Eigen::Index n = sample.instances.cols();
  if (d < 1 || n < 1)
    throw std::invalid_argument("makeWindows: sample has no instances");
  if (h < 1) throw std::invalid_argument("makeWindows: window size must be >= 1");

  const Eigen::Index n_win = windowCount(n, h);
  WindowedSequence out;
  out.source_length = n;
  out.windows = Eigen::MatrixXd::Zero(d * h, n_win);
  for (Eigen::Index tau = 0; tau < n_win; ++tau) {
    // Stack instances tau..tau+h-1; a short sequence keeps the zero padding.
    const Eigen::Index have = std::min<Eigen::Index>(h, n - tau);
    out.windows.block(0, tau, d * have, 1) =
        Eigen::Map<const Eigen::VectorXd>(sample.instances.data() + tau * d,
                                          d * have);
  }
  return out;
}

}  // namespace xmcnn
