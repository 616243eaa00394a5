#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xmcnn/data_io.hpp"
#include "xmcnn/metrics.hpp"
#include "xmcnn/solver.hpp"

namespace xmcnn {

struct EvalConfig {
  int n_folds = 10;
  std::vector<int> k_list{1, 5, 10};
  MapVariant map_variant = MapVariant::kDiluted;
  std::uint64_t seed = 0;
  bool clamp_negative_relevance = false;  // drop the -1 relevance entries
  std::vector<int> pos_classes{};         // labels for per-fold training
};

// Aggregated retrieval quality for one query->database modality direction.
struct DirectionMetrics {
  int query_modality = 0;
  int database_modality = 0;
  double map = 0.0;
  double beprp = 0.0;
  std::map<int, double> prec_at;
  std::size_t queries = 0;
  std::size_t excluded = 0;  // queries with no relevant database item
};

struct QueryRecord {
  int fold = 0;
  Eigen::Index query_id = 0;  // global id in the evaluated dataset
  int query_modality = 0;
  int database_modality = 0;
  double ap = 0.0;
  double beprp = 0.0;  // NaN when undefined (no relevant item)
  std::size_t relevant = 0;
  std::size_t database_size = 0;
};

struct EvalReport {
  std::vector<DirectionMetrics> directions;  // all ordered cross-modal pairs
  DirectionMetrics overall;                  // averaged over directions
  std::vector<QueryRecord> per_query;
};

// Embed every sample with the model; columns in global order.
Eigen::MatrixXd embedDataset(const Dataset& ds, const ModelParams& params,
                             const Hyperparams& hp);

// Stratified k-fold cross-modal retrieval. Queries come from the held-out
// fold; the database is everything else, restricted per direction to the
// database modality. When `fixed_model` is null a model is trained per fold
// on the retained samples; otherwise the given model scores every fold.
EvalReport evaluateCrossModal(const Dataset& ds, const Hyperparams& hp,
                              const SolverConfig& solver_config,
                              const EvalConfig& eval_config,
                              const ModelParams* fixed_model = nullptr);

std::string formatReport(const EvalReport& report);
void writePerQueryCsv(const EvalReport& report, const std::string& path);

// Whole-set cross-modal mean AP (every sample queries every other modality;
// no folds, no training). Convenience for regression baselines.
double crossModalMap(const Dataset& ds, const ModelParams& params,
                     const Hyperparams& hp,
                     MapVariant variant = MapVariant::kDiluted);

}  // namespace xmcnn
