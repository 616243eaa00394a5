#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

namespace xmcnn {

// One cross-modal supervision entry: samples a and b (1-based global ids)
// are relevant (+1) or irrelevant (-1). Unlisted pairs are 0.
struct RelevanceTriple {
  std::int64_t a = 0;
  std::int64_t b = 0;
  int value = 0;
};

// theta x theta symmetric matrix over {-1, 0, +1} with zero diagonal.
// Dense storage up to kDenseLimit, coordinate-sparse beyond.
class RelevanceMatrix {
 public:
  static constexpr std::int64_t kDenseLimit = 5000;

  RelevanceMatrix() = default;  // empty (size 0)

  // S_ab = +1 if same class, -1 otherwise, 0 on the diagonal.
  static RelevanceMatrix fromLabels(const std::vector<int>& class_ids);

  // Unlisted pairs stay 0. Symmetrized; a triple listed both ways must
  // agree, and duplicate/contradictory entries are rejected.
  static RelevanceMatrix fromTriples(const std::vector<RelevanceTriple>& triples,
                                     std::int64_t size);

  // Validates entries, symmetry, zero diagonal.
  static RelevanceMatrix fromMatrix(const Eigen::MatrixXd& entries);

  std::int64_t size() const { return size_; }
  bool isDense() const { return dense_.size() > 0 || size_ == 0; }
  double at(std::int64_t i, std::int64_t j) const;

  const Eigen::MatrixXd& dense() const;
  const Eigen::SparseMatrix<double>& sparse() const;

  // 1^T S (= S 1 by symmetry): degree vector for the Laplacian.
  Eigen::VectorXd columnSums() const;

  // Copy with the -1 entries zeroed (positive-semidefinite ablation).
  RelevanceMatrix clampNegative() const;

 private:
  std::int64_t size_ = 0;
  Eigen::MatrixXd dense_;                // used when size_ <= kDenseLimit
  Eigen::SparseMatrix<double> sparse_;   // used otherwise
};

// Graph operator L = diag(1^T S) - S. Not guaranteed positive semidefinite:
// negative relevance makes rows sum to zero but allows negative off-diagonal
// structure either way, so downstream code never assumes PSD.
class GraphOperator {
 public:
  explicit GraphOperator(const RelevanceMatrix& S);

  std::int64_t size() const { return size_; }
  Eigen::MatrixXd applyRight(const Eigen::MatrixXd& Z) const;  // Z * L
  Eigen::VectorXd rowSums() const;         // exactly 0 by construction
  Eigen::MatrixXd denseMatrix() const;     // materialized (small sizes/tests)

 private:
  std::int64_t size_ = 0;
  bool dense_storage_ = true;
  Eigen::MatrixXd dense_;
  Eigen::SparseMatrix<double> sparse_;
};

GraphOperator laplacian(const RelevanceMatrix& S);

// sum_ab S_ab ||z_a - z_b||^2 = 2 tr(Z L Z^T), columns of Z are embeddings.
double penaltyValue(const Eigen::MatrixXd& Z, const GraphOperator& L);

// Text file of "a b value" triples, 1-based ids, '#' comments allowed.
std::vector<RelevanceTriple> loadRelevanceTriples(const std::string& path);

}  // namespace xmcnn
