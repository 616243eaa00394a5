#include "xmcnn/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "xmcnn/errors.hpp"

namespace xmcnn {

namespace {

bool isAllowedEntry(double v) { return v == -1.0 || v == 0.0 || v == 1.0; }

}  // namespace

RelevanceMatrix RelevanceMatrix::fromLabels(const std::vector<int>& class_ids) {
  const auto n = static_cast<std::int64_t>(class_ids.size());
  RelevanceMatrix out;
  out.size_ = n;
  if (n <= kDenseLimit) {
    out.dense_.setZero(n, n);
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = i + 1; j < n; ++j) {
        const double s = class_ids[i] == class_ids[j] ? 1.0 : -1.0;
        out.dense_(i, j) = s;
        out.dense_(j, i) = s;
      }
  } else {
    // Label-derived relevance is fully dense off the diagonal; building it
    // as triplets would defeat the storage switch, but the contract only
    // switches on theta, so store what we are given.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1));
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j) {
        if (i == j) continue;
        trips.emplace_back(i, j, class_ids[i] == class_ids[j] ? 1.0 : -1.0);
      }
    out.sparse_.resize(n, n);
    out.sparse_.setFromTriplets(trips.begin(), trips.end());
  }
  return out;
}

RelevanceMatrix RelevanceMatrix::fromTriples(
    const std::vector<RelevanceTriple>& triples, std::int64_t size) {
  if (size < 0) throw std::invalid_argument("relevance: negative size");
  // Normalize to (min, max) keys; detect contradictions across orderings.
  std::map<std::pair<std::int64_t, std::int64_t>, int> entries;
  for (const auto& t : triples) {
    if (t.a < 1 || t.a > size || t.b < 1 || t.b > size)
      throw std::invalid_argument("relevance: pair index out of range");
    if (t.a == t.b)
      throw InconsistencyError("relevance: diagonal pair (" +
                               std::to_string(t.a) + ", " + std::to_string(t.b) +
                               ") must stay 0");
    if (t.value != -1 && t.value != 0 && t.value != 1)
      throw std::invalid_argument("relevance: value must be -1, 0, or +1");
    const std::pair<std::int64_t, std::int64_t> key{std::min(t.a, t.b),
                                                    std::max(t.a, t.b)};
    auto [it, inserted] = entries.emplace(key, t.value);
    if (!inserted && it->second != t.value)
      throw InconsistencyError(
          "relevance: contradictory values for pair (" + std::to_string(key.first) +
          ", " + std::to_string(key.second) + ")");
  }

  RelevanceMatrix out;
  out.size_ = size;
  if (size <= kDenseLimit) {
    out.dense_.setZero(size, size);
    for (const auto& [key, v] : entries) {
      out.dense_(key.first - 1, key.second - 1) = v;
      out.dense_(key.second - 1, key.first - 1) = v;
    }
  } else {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(entries.size() * 2);
    for (const auto& [key, v] : entries) {
      if (v == 0) continue;
      trips.emplace_back(key.first - 1, key.second - 1, v);
      trips.emplace_back(key.second - 1, key.first - 1, v);
    }
    out.sparse_.resize(size, size);
    out.sparse_.setFromTriplets(trips.begin(), trips.end());
  }
  return out;
}

RelevanceMatrix RelevanceMatrix::fromMatrix(const Eigen::MatrixXd& entries) {
  if (entries.rows() != entries.cols())
    throw std::invalid_argument("relevance: matrix must be square");
  const std::int64_t n = entries.rows();
  for (std::int64_t i = 0; i < n; ++i) {
    if (entries(i, i) != 0.0)
      throw std::invalid_argument("relevance: diagonal must be zero");
    for (std::int64_t j = 0; j < n; ++j) {
      if (!isAllowedEntry(entries(i, j)))
        throw std::invalid_argument("relevance: entries must be -1, 0, or +1");
      if (entries(i, j) != entries(j, i))
        throw std::invalid_argument("relevance: matrix must be symmetric");
    }
  }
  RelevanceMatrix out;
  out.size_ = n;
  if (n <= kDenseLimit) {
    out.dense_ = entries;
  } else {
    out.sparse_ = entries.sparseView();
  }
  return out;
}

double RelevanceMatrix::at(std::int64_t i, std::int64_t j) const {
  if (i < 0 || i >= size_ || j < 0 || j >= size_)
    throw std::invalid_argument("relevance: index out of range");
  return isDense() ? dense_(i, j) : sparse_.coeff(i, j);
}

const Eigen::MatrixXd& RelevanceMatrix::dense() const {
  if (!isDense())
    throw std::invalid_argument("relevance: matrix is held in sparse storage");
  return dense_;
}

const Eigen::SparseMatrix<double>& RelevanceMatrix::sparse() const {
  if (isDense())
    throw std::invalid_argument("relevance: matrix is held in dense storage");
  return sparse_;
}

Eigen::VectorXd RelevanceMatrix::columnSums() const {
  if (isDense()) return dense_.colwise().sum();
  return Eigen::VectorXd(Eigen::RowVectorXd::Ones(size_) * sparse_);
}

RelevanceMatrix RelevanceMatrix::clampNegative() const {
  RelevanceMatrix out;
  out.size_ = size_;
  if (isDense()) {
    out.dense_ = dense_.cwiseMax(0.0);
  } else {
    out.sparse_ = sparse_;
    for (int k = 0; k < out.sparse_.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(out.sparse_, k); it; ++it)
        if (it.value() < 0.0) it.valueRef() = 0.0;
    out.sparse_.prune(0.0);
  }
  return out;
}

GraphOperator::GraphOperator(const RelevanceMatrix& S) : size_(S.size()) {
  const Eigen::VectorXd degrees = S.columnSums();
  if (S.isDense()) {
    dense_storage_ = true;
    dense_ = -S.dense();
    dense_.diagonal() += degrees;
  } else {
    dense_storage_ = false;
    Eigen::SparseMatrix<double> diag(size_, size_);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(size_);
    for (std::int64_t i = 0; i < size_; ++i)
      trips.emplace_back(i, i, degrees[i]);
    diag.setFromTriplets(trips.begin(), trips.end());
    sparse_ = diag - S.sparse();
  }
}

Eigen::MatrixXd GraphOperator::applyRight(const Eigen::MatrixXd& Z) const {
  if (Z.cols() != size_)
    throw std::invalid_argument("graph operator: Z has wrong column count");
  if (dense_storage_) return Z * dense_;
  return Z * sparse_;
}

Eigen::VectorXd GraphOperator::rowSums() const {
  if (dense_storage_) return dense_.rowwise().sum();
  return sparse_ * Eigen::VectorXd::Ones(size_);
}

Eigen::MatrixXd GraphOperator::denseMatrix() const {
  if (dense_storage_) return dense_;
  return Eigen::MatrixXd(sparse_);
}

GraphOperator laplacian(const RelevanceMatrix& S) { return GraphOperator(S); }

double penaltyValue(const Eigen::MatrixXd& Z, const GraphOperator& L) {
  if (Z.cols() != L.size())
    throw std::invalid_argument("penaltyValue: Z has wrong column count");
  // sum_ab S_ab ||z_a - z_b||^2 = 2 tr(Z L Z^T)
  return 2.0 * L.applyRight(Z).cwiseProduct(Z).sum();
}

std::vector<RelevanceTriple> loadRelevanceTriples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open relevance file");
  std::vector<RelevanceTriple> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    RelevanceTriple t;
    if (!(ls >> t.a)) continue;  // blank or comment-only line
    if (!(ls >> t.b >> t.value))
      throw ParseError(path, line_no, "expected 'a b value'");
    std::string extra;
    if (ls >> extra) throw ParseError(path, line_no, "trailing tokens");
    out.push_back(t);
  }
  return out;
}

}  // namespace xmcnn
