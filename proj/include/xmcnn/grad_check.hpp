#pragma once

#include <cstdint>
#include <string>

namespace xmcnn {

struct GradCheckOptions {
  int trials = 20;
  std::uint64_t seed = 1;
  double step = 1e-5;
  double tolerance = 1e-5;
  // Negative control: adds 1.0 to one analytic coordinate per trial; the
  // check must then fail.
  bool inject_error = false;
};

struct GradCheckResult {
  bool passed = false;
  int trials = 0;
  double max_rel_error_z = 0.0;  // embedding-gradient worst case
  double max_rel_error_w = 0.0;  // filter-gradient worst case
  std::string worst;             // description of the worst coordinate
};

// Random small instances (mixed dims, window sizes, sequence lengths,
// multipliers, relevance patterns); compares zGradient and filterGradient
// against central differences of the objectives they claim to differentiate.
GradCheckResult runGradCheck(const GradCheckOptions& opts);

}  // namespace xmcnn
