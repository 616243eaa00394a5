#pragma once

#include <Eigen/Dense>
#include <vector>

#include "xmcnn/conv_embed.hpp"
#include "xmcnn/relevance.hpp"

namespace xmcnn {

struct Hyperparams {
  double lambda1 = 0.1;   // ridge weight on v and the filters
  double lambda2 = 0.01;  // cross-modal relevance weight
  double beta = 1.0;      // augmented-Lagrangian penalty
  int u = 8;              // filters per modality
  std::vector<int> h{2};  // window size(s); one entry = shared by all modalities

  // 1-based modality; a single h entry applies to every modality.
  int windowSize(int modality) const;
  void validate() const;
};

struct ModelParams {
  std::vector<FilterBank> banks;  // banks[j-1] = modality j
  Eigen::VectorXd v;              // shared classifier
};

// Solver state. Columns are samples in global order (modality-major).
// Z: free embeddings; Zbar: embeddings induced by the current filters;
// A: multipliers for Z = Zbar; indicators: 1-based argmax window per
// (filter row, sample column).
struct TrainState {
  Eigen::MatrixXd Z;
  Eigen::MatrixXd Zbar;
  Eigen::MatrixXd A;
  Eigen::MatrixXi indicators;
  int outer_iter = 0;
};

// sum_i (eta_i - v . z_i)^2
double classificationLoss(const Eigen::VectorXd& v, const Eigen::MatrixXd& Z,
                          const Eigen::VectorXd& labels);

// ||v||^2 + sum_j sum_k ||w_k^j||^2
double ridgeTerm(const Eigen::VectorXd& v, const std::vector<FilterBank>& banks);

// loss + lambda1 * ridge + lambda2 * penalty, evaluated on free embeddings Z.
double jointObjective(const ModelParams& params, const Eigen::MatrixXd& Z,
                      const Eigen::VectorXd& labels, const GraphOperator& L,
                      const Hyperparams& hp);

// jointObjective + <A, Z - Zbar> + (beta/2) ||Z - Zbar||_F^2.
double augmentedLagrangian(const ModelParams& params, const TrainState& state,
                           const Eigen::VectorXd& labels, const GraphOperator& L,
                           const Hyperparams& hp);

// max_ik |Z - Zbar| (infinity norm of the constraint violation).
double constraintResidual(const TrainState& state);

}  // namespace xmcnn
