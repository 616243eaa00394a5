#pragma once

#include <Eigen/Dense>
#include <utility>

#include "xmcnn/windowing.hpp"

namespace xmcnn {

// The u convolution filters of one modality, one filter per column.
// Rows = d_j * h_j (instance dimension times window size).
struct FilterBank {
  int modality = 1;
  Eigen::MatrixXd filters;
  int u() const { return static_cast<int>(filters.cols()); }
};

// Common-space representation of one sample. values[k] = max over windows of
// tanh(w_k . y_tau); indicators[k] is the 1-based index of the first window
// attaining that max.
struct Embedding {
  Eigen::VectorXd values;
  Eigen::VectorXi indicators;
};

inline double activate(double x) { return std::tanh(x); }
inline double activateGrad(double x) {
  const double t = std::tanh(x);
  return 1.0 - t * t;
}

// One filter against one windowed sequence: (pooled value, 1-based window).
std::pair<double, int> convMaxPool(const WindowedSequence& ws,
                                   const Eigen::VectorXd& filter);

Embedding embedWindows(const WindowedSequence& ws, const FilterBank& bank);
Embedding embed(const SequenceSample& sample, const FilterBank& bank, int h);

// Classifier response v . z.
double score(const Embedding& e, const Eigen::VectorXd& v);

}  // namespace xmcnn
