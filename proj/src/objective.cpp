#include "xmcnn/objective.hpp"

#include <stdexcept>
#include <string>

namespace xmcnn {

int Hyperparams::windowSize(int modality) const {
  if (modality < 1) throw std::invalid_argument("windowSize: modality is 1-based");
  if (h.size() == 1) return h[0];
  if (static_cast<std::size_t>(modality) > h.size())
    throw std::invalid_argument("windowSize: no window size for modality " +
                                std::to_string(modality));
  return h[modality - 1];
}

void Hyperparams::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0))
    throw std::invalid_argument("hyperparams: lambda1 and lambda2 must be >= 0");
  if (!(beta > 0.0)) throw std::invalid_argument("hyperparams: beta must be > 0");
  if (u < 1) throw std::invalid_argument("hyperparams: u must be >= 1");
  if (h.empty()) throw std::invalid_argument("hyperparams: h must not be empty");
  for (int hi : h)
    if (hi < 1) throw std::invalid_argument("hyperparams: window sizes must be >= 1");
}

double classificationLoss(const Eigen::VectorXd& v, const Eigen::MatrixXd& Z,
                          const Eigen::VectorXd& labels) {
  if (v.size() != Z.rows())
    throw std::invalid_argument("classificationLoss: v length != embedding rows");
  if (labels.size() != Z.cols())
    throw std::invalid_argument("classificationLoss: label count != sample count");
  return (labels.transpose() - v.transpose() * Z).squaredNorm();
}

double ridgeTerm(const Eigen::VectorXd& v, const std::vector<FilterBank>& banks) {
  double total = v.squaredNorm();
  for (const auto& bank : banks) total += bank.filters.squaredNorm();
  return total;
}

double jointObjective(const ModelParams& params, const Eigen::MatrixXd& Z,
                      const Eigen::VectorXd& labels, const GraphOperator& L,
                      const Hyperparams& hp) {
  return classificationLoss(params.v, Z, labels) +
         hp.lambda1 * ridgeTerm(params.v, params.banks) +
         hp.lambda2 * penaltyValue(Z, L);
}

double augmentedLagrangian(const ModelParams& params, const TrainState& state,
                           const Eigen::VectorXd& labels, const GraphOperator& L,
                           const Hyperparams& hp) {
  if (state.Zbar.rows() != state.Z.rows() || state.Zbar.cols() != state.Z.cols() ||
      state.A.rows() != state.Z.rows() || state.A.cols() != state.Z.cols())
    throw std::invalid_argument("augmentedLagrangian: Z/Zbar/A shape mismatch");
  const Eigen::MatrixXd gap = state.Z - state.Zbar;
  return jointObjective(params, state.Z, labels, L, hp) +
         state.A.cwiseProduct(gap).sum() + 0.5 * hp.beta * gap.squaredNorm();
}

double constraintResidual(const TrainState& state) {
  if (state.Zbar.rows() != state.Z.rows() || state.Zbar.cols() != state.Z.cols())
    throw std::invalid_argument("constraintResidual: Z/Zbar shape mismatch");
  if (state.Z.size() == 0) return 0.0;
  return (state.Z - state.Zbar).cwiseAbs().maxCoeff();
}

}  // namespace xmcnn
