#include "xmcnn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace xmcnn {

namespace {

struct DirectionAccum {
  double ap_sum = 0.0;
  double beprp_sum = 0.0;
  std::map<int, double> prec_sum;
  std::size_t included = 0;
  std::size_t excluded = 0;
  std::size_t queries = 0;
};

ModelParams trainFoldModel(const Dataset& ds,
                           const std::vector<char>& in_fold,
                           const Hyperparams& hp, const SolverConfig& solver_config,
                           const EvalConfig& eval_config) {
  std::vector<SequenceSample> retained;
  retained.reserve(ds.samples.size());
  for (Eigen::Index g = 0; g < ds.size(); ++g)
    if (!in_fold[static_cast<std::size_t>(g)]) retained.push_back(ds.samples[g]);
  Dataset sub = makeDataset(std::move(retained));
  if (!eval_config.pos_classes.empty()) {
    sub = withLabels(sub, eval_config.pos_classes);
  } else {
    for (const auto& s : sub.samples)
      if (s.label != 1 && s.label != -1)
        throw std::invalid_argument(
            "evaluate: samples lack labels; resolve them or pass positive classes");
  }
  RelevanceMatrix S = RelevanceMatrix::fromLabels(sub.classIds());
  if (eval_config.clamp_negative_relevance) S = S.clampNegative();
  return solve(sub, S, hp, solver_config).params;
}

}  // namespace

Eigen::MatrixXd embedDataset(const Dataset& ds, const ModelParams& params,
                             const Hyperparams& hp) {
  if (static_cast<int>(params.banks.size()) < ds.modalities)
    throw std::invalid_argument("embedDataset: model lacks banks for some modalities");
  Eigen::MatrixXd Z(params.v.size(), ds.size());
  for (Eigen::Index g = 0; g < ds.size(); ++g) {
    const auto& s = ds.samples[g];
    const Embedding e =
        embed(s, params.banks[s.modality - 1], hp.windowSize(s.modality));
    Z.col(g) = e.values;
  }
  return Z;
}

EvalReport evaluateCrossModal(const Dataset& ds, const Hyperparams& hp,
                              const SolverConfig& solver_config,
                              const EvalConfig& eval_config,
                              const ModelParams* fixed_model) {
  hp.validate();
  solver_config.validate();
  if (ds.modalities < 2)
    throw std::invalid_argument("evaluate: cross-modal retrieval needs >= 2 modalities");
  if (eval_config.k_list.empty())
    throw std::invalid_argument("evaluate: empty k list");
  for (int k : eval_config.k_list)
    if (k < 1) throw std::invalid_argument("evaluate: k values must be >= 1");

  const auto folds = makeFolds(ds, eval_config.n_folds, eval_config.seed);

  // Per-direction database sizes are smallest when a fold removes its share
  // of the database modality; verify every requested k fits every database.
  {
    std::vector<Eigen::Index> min_db(ds.modalities,
                                     std::numeric_limits<Eigen::Index>::max());
    for (std::size_t r = 0; r < folds.size(); ++r) {
      std::vector<Eigen::Index> removed(ds.modalities, 0);
      for (auto g : folds[r]) ++removed[ds.samples[g].modality - 1];
      for (int j = 0; j < ds.modalities; ++j)
        min_db[j] = std::min(min_db[j], ds.counts[j] - removed[j]);
    }
    const int max_k =
        *std::max_element(eval_config.k_list.begin(), eval_config.k_list.end());
    for (int j = 0; j < ds.modalities; ++j)
      if (max_k > min_db[j])
        throw std::invalid_argument(
            "evaluate: k=" + std::to_string(max_k) + " exceeds the smallest modality-" +
            std::to_string(j + 1) + " database (" + std::to_string(min_db[j]) + ")");
  }

  std::map<std::pair<int, int>, DirectionAccum> accum;
  EvalReport report;

  for (std::size_t r = 0; r < folds.size(); ++r) {
    std::vector<char> in_fold(static_cast<std::size_t>(ds.size()), 0);
    for (auto g : folds[r]) in_fold[static_cast<std::size_t>(g)] = 1;

    const ModelParams model =
        fixed_model ? *fixed_model
                    : trainFoldModel(ds, in_fold, hp, solver_config, eval_config);
    const Eigen::MatrixXd Z = embedDataset(ds, model, hp);

    for (int jd = 1; jd <= ds.modalities; ++jd) {
      std::vector<Eigen::Index> db_ids;
      for (Eigen::Index g = ds.offsets[jd - 1];
           g < ds.offsets[jd - 1] + ds.counts[jd - 1]; ++g)
        if (!in_fold[static_cast<std::size_t>(g)]) db_ids.push_back(g);
      Eigen::MatrixXd db(Z.rows(), static_cast<Eigen::Index>(db_ids.size()));
      for (std::size_t c = 0; c < db_ids.size(); ++c) db.col(c) = Z.col(db_ids[c]);

      for (int jq = 1; jq <= ds.modalities; ++jq) {
        if (jq == jd) continue;
        auto& acc = accum[{jq, jd}];
        for (auto q : folds[r]) {
          if (ds.samples[q].modality != jq) continue;
          Relevance rel(db_ids.size(), 0);
          std::size_t n_rel = 0;
          for (std::size_t c = 0; c < db_ids.size(); ++c)
            if (ds.samples[db_ids[c]].class_id == ds.samples[q].class_id) {
              rel[c] = 1;
              ++n_rel;
            }
          QueryRecord row;
          row.fold = static_cast<int>(r) + 1;
          row.query_id = q;
          row.query_modality = jq;
          row.database_modality = jd;
          row.relevant = n_rel;
          row.database_size = db_ids.size();
          ++acc.queries;
          if (n_rel == 0) {
            ++acc.excluded;
            row.ap = std::numeric_limits<double>::quiet_NaN();
            row.beprp = std::numeric_limits<double>::quiet_NaN();
          } else {
            const RankedList ranked = rank(Z.col(q), db);
            row.ap = eval_config.map_variant == MapVariant::kDiluted
                         ? averagePrecision(ranked, rel)
                         : averagePrecisionStandard(ranked, rel);
            row.beprp = breakEvenPrecision(ranked, rel);
            acc.ap_sum += row.ap;
            acc.beprp_sum += row.beprp;
            for (int k : eval_config.k_list)
              acc.prec_sum[k] += precisionAt(ranked, rel, k);
            ++acc.included;
          }
          report.per_query.push_back(row);
        }
      }
    }
  }

  DirectionMetrics overall;
  for (const auto& [key, acc] : accum) {
    DirectionMetrics dm;
    dm.query_modality = key.first;
    dm.database_modality = key.second;
    dm.queries = acc.queries;
    dm.excluded = acc.excluded;
    if (acc.included > 0) {
      const auto n = static_cast<double>(acc.included);
      dm.map = acc.ap_sum / n;
      dm.beprp = acc.beprp_sum / n;
      for (const auto& [k, s] : acc.prec_sum) dm.prec_at[k] = s / n;
    }
    report.directions.push_back(dm);
    overall.map += dm.map;
    overall.beprp += dm.beprp;
    for (const auto& [k, v] : dm.prec_at) overall.prec_at[k] += v;
    overall.queries += dm.queries;
    overall.excluded += dm.excluded;
  }
  const auto nd = static_cast<double>(report.directions.size());
  overall.map /= nd;
  overall.beprp /= nd;
  for (auto& [k, v] : overall.prec_at) v /= nd;
  report.overall = overall;
  return report;
}

std::string formatReport(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  auto line = [&](const std::string& name, const DirectionMetrics& dm) {
    out << std::left << std::setw(10) << name << std::right << std::setw(8)
        << dm.queries << std::setw(10) << dm.excluded << std::setw(9) << dm.map
        << std::setw(9) << dm.beprp;
    for (const auto& [k, v] : report.overall.prec_at) {
      const auto it = dm.prec_at.find(k);
      out << std::setw(9) << (it == dm.prec_at.end() ? 0.0 : it->second);
    }
    out << '\n';
  };
  out << std::left << std::setw(10) << "direction" << std::right << std::setw(8)
      << "queries" << std::setw(10) << "excluded" << std::setw(9) << "mAP"
      << std::setw(9) << "BEPRP";
  for (const auto& [k, v] : report.overall.prec_at)
    out << std::setw(9) << ("P@" + std::to_string(k));
  out << '\n';
  for (const auto& dm : report.directions)
    line(std::to_string(dm.query_modality) + "->" +
             std::to_string(dm.database_modality),
         dm);
  line("average", report.overall);
  return out.str();
}

void writePerQueryCsv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("writePerQueryCsv: cannot open " + path);
  out << "fold,query_id,query_modality,database_modality,database_size,relevant,ap,beprp\n";
  out << std::setprecision(10);
  for (const auto& row : report.per_query) {
    out << row.fold << ',' << row.query_id << ',' << row.query_modality << ','
        << row.database_modality << ',' << row.database_size << ','
        << row.relevant << ',';
    if (std::isnan(row.ap))
      out << "nan,nan\n";
    else
      out << row.ap << ',' << row.beprp << '\n';
  }
  if (!out) throw std::invalid_argument("writePerQueryCsv: write failed for " + path);
}

double crossModalMap(const Dataset& ds, const ModelParams& params,
                     const Hyperparams& hp, MapVariant variant) {
  if (ds.modalities < 2)
    throw std::invalid_argument("crossModalMap: need >= 2 modalities");
  const Eigen::MatrixXd Z = embedDataset(ds, params, hp);
  double total = 0.0;
  int directions = 0;
  for (int jq = 1; jq <= ds.modalities; ++jq) {
    for (int jd = 1; jd <= ds.modalities; ++jd) {
      if (jq == jd) continue;
      Eigen::MatrixXd db(Z.rows(), ds.counts[jd - 1]);
      std::vector<Eigen::Index> db_ids;
      for (Eigen::Index g = ds.offsets[jd - 1];
           g < ds.offsets[jd - 1] + ds.counts[jd - 1]; ++g) {
        db.col(static_cast<Eigen::Index>(db_ids.size())) = Z.col(g);
        db_ids.push_back(g);
      }
      std::vector<RankedList> ranked;
      std::vector<Relevance> rels;
      for (Eigen::Index q = ds.offsets[jq - 1];
           q < ds.offsets[jq - 1] + ds.counts[jq - 1]; ++q) {
        Relevance rel(db_ids.size(), 0);
        for (std::size_t c = 0; c < db_ids.size(); ++c)
          rel[c] = ds.samples[db_ids[c]].class_id == ds.samples[q].class_id ? 1 : 0;
        ranked.push_back(rank(Z.col(q), db));
        rels.push_back(std::move(rel));
      }
      total += meanAveragePrecision(ranked, rels, variant);
      ++directions;
    }
  }
  return total / directions;
}

}  // namespace xmcnn
