#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xmcnn/eval.hpp"
#include "xmcnn/grad_check.hpp"
#include "xmcnn/solver.hpp"

namespace py = pybind11;
using namespace xmcnn;

namespace {

Relevance toRelevance(const std::vector<int>& flags) {
  Relevance rel(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) rel[i] = flags[i] ? 1 : 0;
  return rel;
}

Dataset labelled(Dataset ds, const std::vector<int>& pos_classes) {
  if (!pos_classes.empty()) return withLabels(ds, pos_classes);
  for (const auto& s : ds.samples)
    if (s.label != 1 && s.label != -1)
      throw std::invalid_argument(
          "dataset has unresolved labels; pass pos_classes or store labels in the file");
  return ds;
}

py::dict directionDict(const DirectionMetrics& dm) {
  py::dict d;
  d["query_modality"] = dm.query_modality;
  d["database_modality"] = dm.database_modality;
  d["map"] = dm.map;
  d["beprp"] = dm.beprp;
  d["prec_at"] = dm.prec_at;
  d["queries"] = dm.queries;
  d["excluded"] = dm.excluded;
  return d;
}

}  // namespace

PYBIND11_MODULE(_xmcnn, m) {
  m.doc() = "common-space embedding of multi-modality sequence data";

  // --- array-level operations ---
  m.def("window_count", &windowCount, py::arg("seq_len"), py::arg("h"));
  m.def(
      "make_windows",
      [](const Eigen::MatrixXd& instances, int h) {
        SequenceSample s;
        s.instances = instances;
        return makeWindows(s, h).windows;
      },
      py::arg("instances"), py::arg("h"),
      "Sliding windows of h consecutive instance columns, zero-padded.");
  m.def(
      "embed_sequence",
      [](const Eigen::MatrixXd& instances, const Eigen::MatrixXd& filters, int h) {
        SequenceSample s;
        s.instances = instances;
        FilterBank bank;
        bank.filters = filters;
        const Embedding e = embed(s, bank, h);
        return py::make_tuple(e.values, e.indicators);
      },
      py::arg("instances"), py::arg("filters"), py::arg("h"),
      "Max-pooled tanh responses and their 1-based window indices.");
  m.def(
      "laplacian",
      [](const Eigen::MatrixXd& S) {
        return laplacian(RelevanceMatrix::fromMatrix(S)).denseMatrix();
      },
      py::arg("S"), "Graph operator diag(1'S) - S of a relevance matrix.");
  m.def(
      "penalty_value",
      [](const Eigen::MatrixXd& Z, const Eigen::MatrixXd& S) {
        return penaltyValue(Z, laplacian(RelevanceMatrix::fromMatrix(S)));
      },
      py::arg("Z"), py::arg("S"),
      "sum_ab S_ab ||z_a - z_b||^2 over embedding columns.");
  m.def(
      "rank",
      [](const Eigen::VectorXd& query, const Eigen::MatrixXd& database) {
        const RankedList r = rank(query, database);
        return py::make_tuple(r.ids, r.distances);
      },
      py::arg("query"), py::arg("database"),
      "Database columns by ascending squared distance; ties to the lower id.");
  m.def(
      "average_precision",
      [](const Eigen::VectorXd& query, const Eigen::MatrixXd& database,
         const std::vector<int>& relevant, bool standard) {
        const RankedList r = rank(query, database);
        const Relevance rel = toRelevance(relevant);
        return standard ? averagePrecisionStandard(r, rel)
                        : averagePrecision(r, rel);
      },
      py::arg("query"), py::arg("database"), py::arg("relevant"),
      py::arg("standard") = false);
  m.def(
      "break_even_precision",
      [](const Eigen::VectorXd& query, const Eigen::MatrixXd& database,
         const std::vector<int>& relevant) {
        return breakEvenPrecision(rank(query, database), toRelevance(relevant));
      },
      py::arg("query"), py::arg("database"), py::arg("relevant"));

  // --- file-level operations (mirror the CLI) ---
  m.def(
      "generate_synthetic",
      [](const std::string& out, int modalities, int classes, int per_class,
         const std::vector<int>& dims, int seq_len_min, int seq_len_max,
         double separation, std::uint64_t seed, const std::vector<int>& pos_classes) {
        SynthSpec spec;
        spec.modalities = modalities;
        spec.classes = classes;
        spec.per_class = per_class;
        spec.dims.assign(dims.begin(), dims.end());
        spec.seq_len_min = seq_len_min;
        spec.seq_len_max = seq_len_max;
        spec.separation = separation;
        spec.seed = seed;
        spec.pos_classes = pos_classes;
        saveDataset(generateSynthetic(spec), out);
      },
      py::arg("out"), py::arg("modalities") = 2, py::arg("classes") = 2,
      py::arg("per_class") = 10, py::arg("dims") = std::vector<int>{4, 6},
      py::arg("seq_len_min") = 3, py::arg("seq_len_max") = 8,
      py::arg("separation") = 1.0, py::arg("seed") = 0,
      py::arg("pos_classes") = std::vector<int>{1});
  m.def(
      "train",
      [](const std::string& data, const std::string& out, double lambda1,
         double lambda2, double beta, int u, const std::vector<int>& h,
         int max_outer, int max_inner, double tol_lagrangian, double tol_residual,
         std::uint64_t seed, double init_scale, int threads,
         const std::vector<int>& pos_classes, const std::string& relevance_triples,
         bool clamp_negative_relevance) {
        Hyperparams hp;
        hp.lambda1 = lambda1;
        hp.lambda2 = lambda2;
        hp.beta = beta;
        hp.u = u;
        hp.h = h;
        SolverConfig config;
        config.max_outer_iters = max_outer;
        config.max_inner_iters = max_inner;
        config.tol_lagrangian = tol_lagrangian;
        config.tol_residual = tol_residual;
        config.seed = seed;
        config.init_scale = init_scale;
        config.threads = threads;

        const Dataset ds = labelled(loadDataset(data), pos_classes);
        RelevanceMatrix S =
            relevance_triples.empty()
                ? RelevanceMatrix::fromLabels(ds.classIds())
                : RelevanceMatrix::fromTriples(loadRelevanceTriples(relevance_triples),
                                               ds.size());
        if (clamp_negative_relevance) S = S.clampNegative();

        const SolveResult result = solve(ds, S, hp, config);
        saveModel(result.params, hp, out, {seed, result.report.outer_iterations});

        py::dict report;
        report["outer_iterations"] = result.report.outer_iterations;
        report["converged"] =
            result.report.reason == SolveReport::Termination::kConverged;
        report["lagrangian"] = result.report.trace.back().lagrangian;
        report["residual"] = result.report.trace.back().residual;
        return report;
      },
      py::arg("data"), py::arg("out"), py::arg("lambda1") = 0.1,
      py::arg("lambda2") = 0.01, py::arg("beta") = 1.0, py::arg("u") = 8,
      py::arg("h") = std::vector<int>{2}, py::arg("max_outer") = 200,
      py::arg("max_inner") = 50, py::arg("tol_lagrangian") = 1e-6,
      py::arg("tol_residual") = 1e-4, py::arg("seed") = 0,
      py::arg("init_scale") = 0.1, py::arg("threads") = 1,
      py::arg("pos_classes") = std::vector<int>{},
      py::arg("relevance_triples") = std::string{},
      py::arg("clamp_negative_relevance") = false);
  m.def(
      "evaluate",
      [](const std::string& data, const std::string& model, int folds,
         const std::vector<int>& k, bool map_standard,
         const std::vector<int>& pos_classes, bool clamp_negative_relevance,
         std::uint64_t seed, double lambda1, double lambda2, double beta, int u,
         const std::vector<int>& h, int max_outer, int max_inner, int threads) {
        Dataset ds = loadDataset(data);
        EvalConfig ec;
        ec.n_folds = folds;
        ec.k_list = k;
        ec.map_variant = map_standard ? MapVariant::kStandard : MapVariant::kDiluted;
        ec.pos_classes = pos_classes;
        ec.clamp_negative_relevance = clamp_negative_relevance;
        ec.seed = seed;
        SolverConfig config;
        config.max_outer_iters = max_outer;
        config.max_inner_iters = max_inner;
        config.seed = seed;
        config.threads = threads;

        EvalReport report;
        if (!model.empty()) {
          const LoadedModel lm = loadModel(model);
          report = evaluateCrossModal(ds, lm.hp, config, ec, &lm.params);
        } else {
          Hyperparams hp;
          hp.lambda1 = lambda1;
          hp.lambda2 = lambda2;
          hp.beta = beta;
          hp.u = u;
          hp.h = h;
          report = evaluateCrossModal(ds, hp, config, ec, nullptr);
        }
        py::dict out = directionDict(report.overall);
        py::list dirs;
        for (const auto& dm : report.directions) dirs.append(directionDict(dm));
        out["directions"] = dirs;
        return out;
      },
      py::arg("data"), py::arg("model") = std::string{}, py::arg("folds") = 10,
      py::arg("k") = std::vector<int>{1, 5, 10}, py::arg("map_standard") = false,
      py::arg("pos_classes") = std::vector<int>{},
      py::arg("clamp_negative_relevance") = false, py::arg("seed") = 0,
      py::arg("lambda1") = 0.1, py::arg("lambda2") = 0.01, py::arg("beta") = 1.0,
      py::arg("u") = 8, py::arg("h") = std::vector<int>{2},
      py::arg("max_outer") = 200, py::arg("max_inner") = 50,
      py::arg("threads") = 1);
  m.def(
      "embed_file",
      [](const std::string& data, const std::string& model) {
        const Dataset ds = loadDataset(data);
        const LoadedModel lm = loadModel(model);
        return embedDataset(ds, lm.params, lm.hp);
      },
      py::arg("data"), py::arg("model"),
      "Embeddings of every sample, one column per sample in file order.");
  m.def(
      "grad_check",
      [](int trials, std::uint64_t seed, double step, double tolerance,
         bool inject_error) {
        GradCheckOptions opts;
        opts.trials = trials;
        opts.seed = seed;
        opts.step = step;
        opts.tolerance = tolerance;
        opts.inject_error = inject_error;
        const GradCheckResult r = runGradCheck(opts);
        py::dict d;
        d["passed"] = r.passed;
        d["trials"] = r.trials;
        d["max_rel_error_z"] = r.max_rel_error_z;
        d["max_rel_error_w"] = r.max_rel_error_w;
        d["worst"] = r.worst;
        return d;
      },
      py::arg("trials") = 20, py::arg("seed") = 1, py::arg("step") = 1e-5,
      py::arg("tolerance") = 1e-5, py::arg("inject_error") = false);

  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError",
                                               PyExc_ValueError);
}
