#include "xmcnn/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "xmcnn/errors.hpp"

namespace xmcnn {

namespace {

void checkJudgments(const RankedList& ranked, const Relevance& relevant) {
  if (relevant.size() != ranked.ids.size())
    throw std::invalid_argument("metrics: judgment count != database size");
}

std::size_t relevantCount(const Relevance& relevant) {
  std::size_t r = 0;
  for (unsigned char c : relevant) r += c ? 1 : 0;
  return r;
}

// Cumulative hits c_k for k = 1..D in ranked order.
std::vector<std::int64_t> cumulativeHits(const RankedList& ranked,
                                         const Relevance& relevant) {
  std::vector<std::int64_t> c(ranked.ids.size());
  std::int64_t hits = 0;
  for (std::size_t k = 0; k < ranked.ids.size(); ++k) {
    hits += relevant[static_cast<std::size_t>(ranked.ids[k])] ? 1 : 0;
    c[k] = hits;
  }
  return c;
}

}  // namespace

RankedList rank(const Eigen::VectorXd& query, const Eigen::MatrixXd& database) {
  if (database.cols() < 1) throw std::invalid_argument("rank: empty database");
  if (database.rows() != query.size())
    throw std::invalid_argument("rank: query dimension != database dimension");

  RankedList out;
  const auto n = static_cast<std::size_t>(database.cols());
  out.ids.resize(n);
  std::iota(out.ids.begin(), out.ids.end(), 0);
  Eigen::VectorXd d2(database.cols());
  for (Eigen::Index j = 0; j < database.cols(); ++j)
    d2[j] = (database.col(j) - query).squaredNorm();
  std::stable_sort(out.ids.begin(), out.ids.end(), [&](int a, int b) {
    if (d2[a] != d2[b]) return d2[a] < d2[b];
    return a < b;  // exact distance ties go to the lower id
  });
  out.distances.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.distances[k] = d2[out.ids[k]];
  return out;
}

double precisionAt(const RankedList& ranked, const Relevance& relevant, int k) {
  checkJudgments(ranked, relevant);
  if (k < 1 || static_cast<std::size_t>(k) > ranked.ids.size())
    throw std::invalid_argument("precisionAt: k out of range");
  std::int64_t hits = 0;
  for (int p = 0; p < k; ++p)
    hits += relevant[static_cast<std::size_t>(ranked.ids[p])] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double recallAt(const RankedList& ranked, const Relevance& relevant, int k) {
  checkJudgments(ranked, relevant);
  if (k < 1 || static_cast<std::size_t>(k) > ranked.ids.size())
    throw std::invalid_argument("recallAt: k out of range");
  const std::size_t total = relevantCount(relevant);
  if (total == 0)
    throw UndefinedMetricError("recallAt: no relevant items for this query");
  std::int64_t hits = 0;
  for (int p = 0; p < k; ++p)
    hits += relevant[static_cast<std::size_t>(ranked.ids[p])] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(total);
}

double averagePrecision(const RankedList& ranked, const Relevance& relevant) {
  checkJudgments(ranked, relevant);
  const auto c = cumulativeHits(ranked, relevant);
  const auto D = static_cast<double>(ranked.ids.size());
  double sum = 0.0;
  std::int64_t prev = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] > prev)  // position k+1 holds a relevant item
      sum += static_cast<double>(c[k]) / static_cast<double>(k + 1);
    prev = c[k];
  }
  return sum / D;
}

double averagePrecisionStandard(const RankedList& ranked,
                                const Relevance& relevant) {
  checkJudgments(ranked, relevant);
  const auto c = cumulativeHits(ranked, relevant);
  const std::size_t total = relevantCount(relevant);
  if (total == 0) return 0.0;
  double sum = 0.0;
  std::int64_t prev = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] > prev) sum += static_cast<double>(c[k]) / static_cast<double>(k + 1);
    prev = c[k];
  }
  return sum / static_cast<double>(total);
}

double breakEvenPrecision(const RankedList& ranked, const Relevance& relevant) {
  checkJudgments(ranked, relevant);
  const std::int64_t R = static_cast<std::int64_t>(relevantCount(relevant));
  if (R == 0)
    throw UndefinedMetricError("breakEvenPrecision: no relevant items for this query");
  const auto c = cumulativeHits(ranked, relevant);
  const auto D = static_cast<std::int64_t>(c.size());

  // |P@k - R@k| = |c_k/k - c_k/R| = c_k |R - k| / (k R). Comparing two
  // candidates k and j exactly: c_k |R-k| j  vs  c_j |R-j| k (R > 0 cancels).
  std::int64_t best_k = 1;
  auto gapNum = [&](std::int64_t k) { return c[k - 1] * std::llabs(R - k); };
  for (std::int64_t k = 2; k <= D; ++k) {
    const std::int64_t lhs = gapNum(k) * best_k;
    const std::int64_t rhs = gapNum(best_k) * k;
    if (lhs < rhs) best_k = k;  // strict: ties keep the smaller k
  }
  return static_cast<double>(c[best_k - 1]) / static_cast<double>(best_k);
}

double meanAveragePrecision(const std::vector<RankedList>& ranked,
                            const std::vector<Relevance>& relevant,
                            MapVariant variant, std::size_t* excluded) {
  if (ranked.size() != relevant.size())
    throw std::invalid_argument("meanAveragePrecision: query count mismatch");
  double sum = 0.0;
  std::size_t included = 0, skipped = 0;
  for (std::size_t q = 0; q < ranked.size(); ++q) {
    checkJudgments(ranked[q], relevant[q]);
    if (relevantCount(relevant[q]) == 0) {
      ++skipped;
      continue;
    }
    sum += variant == MapVariant::kDiluted
               ? averagePrecision(ranked[q], relevant[q])
               : averagePrecisionStandard(ranked[q], relevant[q]);
    ++included;
  }
  if (excluded) *excluded = skipped;
  return included == 0 ? 0.0 : sum / static_cast<double>(included);
}

}  // namespace xmcnn
