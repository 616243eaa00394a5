// Command-line front end: gen-synth | train | eval | grad-check | embed.
// Exit codes: 0 success, 1 validation or check failure, 2 usage error,
// 3 numerical divergence.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xmcnn/eval.hpp"
#include "xmcnn/grad_check.hpp"
#include "xmcnn/solver.hpp"

namespace {

using namespace xmcnn;

void writeTrace(const std::vector<TraceEntry>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open trace file " + path);
  out << "# iteration lagrangian residual\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << (i + 1) << ' ' << trace[i].lagrangian << ' ' << trace[i].residual
        << '\n';
  if (!out) throw std::invalid_argument("write failed for trace file " + path);
}

struct SolverFlags {
  Hyperparams hp;
  SolverConfig config;
  std::vector<int> pos_classes;
  std::string relevance_path;
  bool clamp_negative = false;
};

void addSolverFlags(CLI::App* cmd, SolverFlags& f, bool with_relevance) {
  cmd->add_option("--lambda1", f.hp.lambda1, "ridge weight on classifier and filters")
      ->capture_default_str();
  cmd->add_option("--lambda2", f.hp.lambda2, "cross-modal relevance weight")
      ->capture_default_str();
  cmd->add_option("--beta", f.hp.beta, "augmented-Lagrangian penalty")
      ->capture_default_str();
  cmd->add_option("--u", f.hp.u, "filters per modality")->capture_default_str();
  cmd->add_option("--h", f.hp.h,
                  "window size, one value or one per modality (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--max-outer", f.config.max_outer_iters, "outer iteration cap")
      ->capture_default_str();
  cmd->add_option("--max-inner", f.config.max_inner_iters, "inner iteration cap")
      ->capture_default_str();
  cmd->add_option("--tol-lagrangian", f.config.tol_lagrangian,
                  "relative objective-change stopping threshold")
      ->capture_default_str();
  cmd->add_option("--tol-residual", f.config.tol_residual,
                  "constraint residual stopping threshold")
      ->capture_default_str();
  cmd->add_option("--seed", f.config.seed, "seed for all randomized steps")
      ->capture_default_str();
  cmd->add_option("--init-scale", f.config.init_scale, "filter init range")
      ->capture_default_str();
  cmd->add_option("--threads", f.config.threads, "worker threads (results identical)")
      ->capture_default_str();
  cmd->add_option("--pos-class", f.pos_classes,
                  "classes labelled +1 (comma separated); others get -1")
      ->delimiter(',');
  if (with_relevance) {
    cmd->add_option("--relevance-triples", f.relevance_path,
                    "relevance file 'a b value' (default: derived from classes)");
    cmd->add_flag("--clamp-negative-relevance", f.clamp_negative,
                  "drop the -1 relevance entries");
  }
}

Dataset resolveTrainLabels(const Dataset& ds, const std::vector<int>& pos_classes) {
  if (!pos_classes.empty()) return withLabels(ds, pos_classes);
  for (const auto& s : ds.samples)
    if (s.label != 1 && s.label != -1)
      throw std::invalid_argument(
          "dataset has unresolved labels; pass --pos-class or store labels in the file");
  return ds;
}

RelevanceMatrix buildRelevance(const Dataset& ds, const SolverFlags& f) {
  RelevanceMatrix S =
      f.relevance_path.empty()
          ? RelevanceMatrix::fromLabels(ds.classIds())
          : RelevanceMatrix::fromTriples(loadRelevanceTriples(f.relevance_path),
                                         ds.size());
  return f.clamp_negative ? S.clampNegative() : S;
}

int runTrain(const std::string& data_path, const std::string& out_path,
             const std::string& trace_path, SolverFlags& flags) {
  Dataset ds = resolveTrainLabels(loadDataset(data_path), flags.pos_classes);
  const RelevanceMatrix S = buildRelevance(ds, flags);

  SolveResult result;
  try {
    result = solve(ds, S, flags.hp, flags.config);
  } catch (const DivergedError& e) {
    if (!trace_path.empty()) writeTrace(e.trace(), trace_path);
    throw;
  }

  saveModel(result.params, flags.hp, out_path,
            {flags.config.seed, result.report.outer_iterations});
  if (!trace_path.empty()) writeTrace(result.report.trace, trace_path);

  const auto& trace = result.report.trace;
  std::cout << "samples: " << ds.size() << " (" << ds.modalities << " modalities)\n"
            << "outer iterations: " << result.report.outer_iterations << " ("
            << (result.report.reason == SolveReport::Termination::kConverged
                    ? "converged"
                    : "iteration cap")
            << ")\n";
  if (!trace.empty())
    std::cout << std::setprecision(17) << "final lagrangian: "
              << trace.back().lagrangian << "\nfinal residual: "
              << trace.back().residual << "\nfinal v-gradient norm: "
              << trace.back().v_grad_norm << '\n';
  std::cout << "model written to " << out_path << '\n';
  return 0;
}

int runEval(const std::string& data_path, const std::string& model_path,
            const std::string& csv_path, SolverFlags& flags, EvalConfig& ec) {
  Dataset ds = loadDataset(data_path);
  ec.pos_classes = flags.pos_classes;
  ec.clamp_negative_relevance = flags.clamp_negative;
  ec.seed = flags.config.seed;

  EvalReport report;
  if (!model_path.empty()) {
    const LoadedModel m = loadModel(model_path);
    report = evaluateCrossModal(ds, m.hp, flags.config, ec, &m.params);
  } else {
    report = evaluateCrossModal(ds, flags.hp, flags.config, ec, nullptr);
  }
  std::cout << formatReport(report);
  if (!csv_path.empty()) {
    writePerQueryCsv(report, csv_path);
    std::cout << "per-query metrics written to " << csv_path << '\n';
  }
  return 0;
}

int cmdGradCheck(const GradCheckOptions& opts) {
  const GradCheckResult r = xmcnn::runGradCheck(opts);
  std::cout << std::setprecision(6)
            << "trials: " << r.trials
            << "\nmax relative error (embedding gradient): " << r.max_rel_error_z
            << "\nmax relative error (filter gradient): " << r.max_rel_error_w
            << '\n';
  if (!r.worst.empty()) std::cout << "worst case: " << r.worst << '\n';
  std::cout << (r.passed ? "PASS" : "FAIL") << '\n';
  return r.passed ? 0 : 1;
}

int runEmbed(const std::string& data_path, const std::string& model_path,
             const std::string& out_path) {
  const Dataset ds = loadDataset(data_path);
  const LoadedModel m = loadModel(model_path);
  if (static_cast<int>(m.params.banks.size()) < ds.modalities)
    throw std::invalid_argument("model lacks filter banks for some modalities");

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::invalid_argument("cannot open output file " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file;

  for (Eigen::Index g = 0; g < ds.size(); ++g) {
    const auto& s = ds.samples[g];
    const Embedding e =
        embed(s, m.params.banks[s.modality - 1], m.hp.windowSize(s.modality));
    nlohmann::json row;
    row["id"] = g;
    row["modality"] = s.modality;
    row["class"] = s.class_id;
    row["values"] = std::vector<double>(e.values.data(),
                                        e.values.data() + e.values.size());
    row["indicators"] = std::vector<int>(e.indicators.data(),
                                         e.indicators.data() + e.indicators.size());
    out << row.dump() << '\n';
  }
  if (!out) throw std::invalid_argument("write failed");
  if (!out_path.empty())
    std::cout << "embeddings written to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"common-space embedding of multi-modality sequence data"};
  app.require_subcommand(1);
  app.allow_config_extras(false);
  // --h is the window-size flag, so help keeps only its long form.
  app.set_help_flag("--help", "print help and exit");
  app.set_config("--config", "",
                 "config file ([subcommand] sections; command-line flags win)");

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "generate a synthetic dataset");
  SynthSpec synth;
  std::string gen_out;
  std::vector<int> gen_dims{4, 6};
  gen->add_option("--out", gen_out, "output dataset (JSONL)")->required();
  gen->add_option("--modalities", synth.modalities)->capture_default_str();
  gen->add_option("--classes", synth.classes)->capture_default_str();
  gen->add_option("--per-class", synth.per_class, "samples per class per modality")
      ->capture_default_str();
  gen->add_option("--dims", gen_dims, "instance dimension per modality")
      ->delimiter(',')
      ->capture_default_str();
  gen->add_option("--seq-len-min", synth.seq_len_min)->capture_default_str();
  gen->add_option("--seq-len-max", synth.seq_len_max)->capture_default_str();
  gen->add_option("--separation", synth.separation, "distance between class anchors")
      ->capture_default_str();
  gen->add_option("--seed", synth.seed)->capture_default_str();
  gen->add_option("--pos-class", synth.pos_classes,
                  "classes stored with label +1 (comma separated)")
      ->delimiter(',')
      ->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "fit a model");
  std::string train_data, train_out, train_trace;
  SolverFlags train_flags;
  train->add_option("--data", train_data, "training dataset (JSONL)")->required();
  train->add_option("--out", train_out, "output model file")->required();
  train->add_option("--trace", train_trace,
                    "per-iteration log: iteration, objective, residual");
  addSolverFlags(train, train_flags, /*with_relevance=*/true);

  // eval
  auto* ev = app.add_subcommand("eval", "cross-modal retrieval evaluation");
  std::string eval_data, eval_model, eval_csv;
  SolverFlags eval_flags;
  EvalConfig eval_config;
  bool map_standard = false;
  ev->add_option("--data", eval_data, "dataset (JSONL)")->required();
  ev->add_option("--model", eval_model,
                 "fixed model file (default: train one per fold)");
  ev->add_option("--folds", eval_config.n_folds)->capture_default_str();
  ev->add_option("--k,--k-list", eval_config.k_list,
                 "precision cutoffs (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  ev->add_flag("--map-standard", map_standard,
               "divide AP by relevant count instead of database size");
  ev->add_option("--out-csv", eval_csv, "per-query metrics CSV");
  addSolverFlags(ev, eval_flags, /*with_relevance=*/false);
  ev->add_flag("--clamp-negative-relevance", eval_flags.clamp_negative,
               "drop the -1 relevance entries when training fold models");

  // grad-check
  auto* gc = app.add_subcommand("grad-check",
                                "finite-difference check of the analytic gradients");
  GradCheckOptions gc_opts;
  gc->add_option("--trials", gc_opts.trials)->capture_default_str();
  gc->add_option("--seed", gc_opts.seed)->capture_default_str();
  gc->add_option("--step", gc_opts.step)->capture_default_str();
  gc->add_option("--tolerance", gc_opts.tolerance)->capture_default_str();
  gc->add_flag("--inject-error", gc_opts.inject_error,
               "negative control: corrupt one analytic coordinate, expect FAIL");

  // embed
  auto* emb = app.add_subcommand("embed", "write embeddings for a dataset");
  std::string emb_data, emb_model, emb_out;
  emb->add_option("--data", emb_data, "dataset (JSONL)")->required();
  emb->add_option("--model", emb_model, "model file")->required();
  emb->add_option("--out", emb_out, "output JSONL (default: stdout)");

  // --config is a top-level option; let it appear after the subcommand too.
  // Unknown flags still fall up to the top-level app, which rejects them.
  for (CLI::App* sub : {gen, train, ev, gc, emb}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      synth.dims.assign(gen_dims.begin(), gen_dims.end());
      saveDataset(generateSynthetic(synth), gen_out);
      std::cout << "dataset written to " << gen_out << '\n';
      return 0;
    }
    if (train->parsed())
      return runTrain(train_data, train_out, train_trace, train_flags);
    if (ev->parsed()) {
      eval_config.map_variant =
          map_standard ? MapVariant::kStandard : MapVariant::kDiluted;
      return runEval(eval_data, eval_model, eval_csv, eval_flags, eval_config);
    }
    if (gc->parsed()) return cmdGradCheck(gc_opts);
    if (emb->parsed()) return runEmbed(emb_data, emb_model, emb_out);
  } catch (const DivergedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
