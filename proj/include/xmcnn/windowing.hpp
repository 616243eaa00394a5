#pragma once

#include <Eigen/Dense>

namespace xmcnn {

// One data point: an ordered sequence of fixed-dimension instance vectors,
// one instance per column, plus its modality and class. `label` is the
// resolved binary target (+1/-1) or 0 while unresolved.
struct SequenceSample {
  int modality = 1;  // 1-based modality id
  int class_id = 0;  // 1-based class id
  int label = 0;     // +1, -1, or 0 (unresolved)
  Eigen::MatrixXd instances;  // d x |X|
};

// Sliding-window view: column tau (0-based here; the pooling indicators the
// embedder reports are 1-based) is the concatenation of instances
// tau..tau+h-1. A sequence shorter than h yields a single window, zero-padded
// on the right.
struct WindowedSequence {
  Eigen::MatrixXd windows;  // (d*h) x windowCount
  Eigen::Index source_length = 0;
};

// max(1, len - h + 1)
Eigen::Index windowCount(Eigen::Index seq_len, int h);

WindowedSequence makeWindows(const SequenceSample& sample, int h);

}  // namespace xmcnn
