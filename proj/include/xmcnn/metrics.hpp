#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace xmcnn {

// Database items ordered by ascending squared Euclidean distance to the
// query; exact ties broken toward the lower id.
struct RankedList {
  std::vector<int> ids;            // 0-based database column ids
  std::vector<double> distances;   // squared L2, same order
};

// Query against database columns.
RankedList rank(const Eigen::VectorXd& query, const Eigen::MatrixXd& database);

// relevant[id] != 0 marks database item `id` as relevant to the query.
using Relevance = std::vector<unsigned char>;

double precisionAt(const RankedList& ranked, const Relevance& relevant, int k);
// Throws UndefinedMetricError when nothing is relevant.
double recallAt(const RankedList& ranked, const Relevance& relevant, int k);

// (1/D) sum_k Prec@k * delta_k  -- averaged over ALL list positions, so
// irrelevant tails dilute the score. 0 when nothing is relevant.
double averagePrecision(const RankedList& ranked, const Relevance& relevant);

// Conventional AP: same sum divided by the number of relevant items.
double averagePrecisionStandard(const RankedList& ranked, const Relevance& relevant);

// Precision at the k whose precision and recall are closest (smallest
// |Prec@k - Reca@k|, smallest such k on ties, decided in exact integer
// arithmetic). Throws UndefinedMetricError when nothing is relevant.
double breakEvenPrecision(const RankedList& ranked, const Relevance& relevant);

enum class MapVariant { kDiluted, kStandard };

// Mean AP over queries with at least one relevant item; queries with none
// are skipped and counted in *excluded. 0 if every query is excluded.
double meanAveragePrecision(const std::vector<RankedList>& ranked,
                            const std::vector<Relevance>& relevant,
                            MapVariant variant = MapVariant::kDiluted,
                            std::size_t* excluded = nullptr);

}  // namespace xmcnn
