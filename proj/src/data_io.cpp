#include "xmcnn/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "xmcnn/errors.hpp"
#include "xmcnn/rng.hpp"

namespace xmcnn {

namespace {

using nlohmann::json;

// deriveSeed stream ids (filters use 1xx in the solver).
constexpr std::uint64_t kAnchorStreamBase = 200;
constexpr std::uint64_t kSynthStreamBase = 300;
constexpr double kClutterStd = 6.0;
constexpr std::uint64_t kFoldStream = 400;

}  // namespace

Eigen::Index Dataset::globalIndex(int modality, Eigen::Index within) const {
  if (modality < 1 || modality > modalities)
    throw std::invalid_argument("globalIndex: modality out of range");
  if (within < 0 || within >= counts[modality - 1])
    throw std::invalid_argument("globalIndex: sample index out of range");
  return offsets[modality - 1] + within;
}

std::vector<int> Dataset::classIds() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.class_id);
  return out;
}

Dataset makeDataset(std::vector<SequenceSample> samples) {
  if (samples.empty()) throw std::invalid_argument("dataset: no samples");
  std::stable_sort(samples.begin(), samples.end(),
                   [](const SequenceSample& a, const SequenceSample& b) {
                     return a.modality < b.modality;
                   });

  Dataset ds;
  ds.samples = std::move(samples);
  int max_modality = 0;
  for (const auto& s : ds.samples) {
    if (s.modality < 1)
      throw std::invalid_argument("dataset: modality ids are 1-based");
    if (s.class_id < 1)
      throw std::invalid_argument("dataset: class ids are 1-based");
    if (s.label != 0 && s.label != 1 && s.label != -1)
      throw std::invalid_argument("dataset: labels must be +1, -1, or unresolved");
    if (s.instances.rows() < 1 || s.instances.cols() < 1)
      throw std::invalid_argument("dataset: sample with no instances");
    max_modality = std::max(max_modality, s.modality);
  }
  ds.modalities = max_modality;
  ds.dims.assign(max_modality, 0);
  ds.counts.assign(max_modality, 0);
  ds.offsets.assign(max_modality, 0);
  for (const auto& s : ds.samples) {
    auto& dim = ds.dims[s.modality - 1];
    if (dim == 0)
      dim = s.instances.rows();
    else if (dim != s.instances.rows())
      throw std::invalid_argument("dataset: inconsistent instance dimension in modality " +
                                  std::to_string(s.modality));
    ++ds.counts[s.modality - 1];
  }
  for (int j = 0; j < max_modality; ++j) {
    if (ds.counts[j] == 0)
      throw std::invalid_argument("dataset: modality ids must be contiguous from 1 (missing " +
                                  std::to_string(j + 1) + ")");
    if (j > 0) ds.offsets[j] = ds.offsets[j - 1] + ds.counts[j - 1];
  }
  return ds;
}

Dataset loadDataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open dataset file");
  std::vector<SequenceSample> samples;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path, line_no, std::string("bad JSON: ") + e.what());
    }
    try {
      if (!row.is_object()) throw std::invalid_argument("expected a JSON object");
      SequenceSample s;
      s.modality = row.at("modality").get<int>();
      s.class_id = row.at("class").get<int>();
      if (row.contains("label")) {
        s.label = row.at("label").get<int>();
        if (s.label != 1 && s.label != -1)
          throw std::invalid_argument("label must be +1 or -1");
      }
      const auto& seq = row.at("seq");
      if (!seq.is_array() || seq.empty())
        throw std::invalid_argument("seq must be a non-empty array of instances");
      const auto n = static_cast<Eigen::Index>(seq.size());
      const auto d = static_cast<Eigen::Index>(seq.at(0).size());
      if (d < 1) throw std::invalid_argument("instances must be non-empty vectors");
      s.instances.resize(d, n);
      for (Eigen::Index t = 0; t < n; ++t) {
        const auto& inst = seq.at(static_cast<std::size_t>(t));
        if (!inst.is_array() || static_cast<Eigen::Index>(inst.size()) != d)
          throw std::invalid_argument("instances must share one dimension");
        for (Eigen::Index r = 0; r < d; ++r)
          s.instances(r, t) = inst.at(static_cast<std::size_t>(r)).get<double>();
      }
      samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ParseError(path, line_no, e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  if (samples.empty()) throw ParseError(path, line_no, "dataset holds no samples");
  try {
    return makeDataset(std::move(samples));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, 0, e.what());
  }
}

void saveDataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("saveDataset: cannot open " + path);
  for (const auto& s : ds.samples) {
    json row;
    row["modality"] = s.modality;
    row["class"] = s.class_id;
    if (s.label != 0) row["label"] = s.label;
    json seq = json::array();
    for (Eigen::Index t = 0; t < s.instances.cols(); ++t) {
      json inst = json::array();
      for (Eigen::Index r = 0; r < s.instances.rows(); ++r)
        inst.push_back(s.instances(r, t));
      seq.push_back(std::move(inst));
    }
    row["seq"] = std::move(seq);
    out << row.dump() << '\n';
  }
  if (!out) throw std::invalid_argument("saveDataset: write failed for " + path);
}

Dataset withLabels(const Dataset& ds, const std::vector<int>& pos_classes) {
  if (pos_classes.empty())
    throw std::invalid_argument("withLabels: positive class set is empty");
  std::set<int> pos(pos_classes.begin(), pos_classes.end());
  std::set<int> present;
  for (const auto& s : ds.samples) present.insert(s.class_id);
  for (int c : pos)
    if (!present.count(c))
      throw std::invalid_argument("withLabels: class " + std::to_string(c) +
                                  " does not occur in the data");
  Dataset out = ds;
  for (auto& s : out.samples) s.label = pos.count(s.class_id) ? 1 : -1;
  return out;
}

void SynthSpec::validate() const {
  if (modalities < 1) throw std::invalid_argument("synth: modalities must be >= 1");
  if (classes < 1) throw std::invalid_argument("synth: classes must be >= 1");
  if (per_class < 1) throw std::invalid_argument("synth: per_class must be >= 1");
  if (static_cast<int>(dims.size()) != modalities)
    throw std::invalid_argument("synth: need one dimension per modality");
  for (auto d : dims)
    if (d < 1) throw std::invalid_argument("synth: dimensions must be >= 1");
  if (seq_len_min < 1 || seq_len_max < seq_len_min)
    throw std::invalid_argument("synth: need 1 <= seq_len_min <= seq_len_max");
  if (!(separation >= 0.0))
    throw std::invalid_argument("synth: separation must be >= 0");
  for (int c : pos_classes)
    if (c < 1 || c > classes)
      throw std::invalid_argument("synth: positive class out of range");
}

std::vector<Eigen::MatrixXd> syntheticAnchors(const SynthSpec& spec) {
  spec.validate();
  std::vector<Eigen::MatrixXd> anchors;
  anchors.reserve(spec.modalities);
  const double scale = spec.separation / std::sqrt(2.0);
  for (int j = 1; j <= spec.modalities; ++j) {
    const Eigen::Index d = spec.dims[j - 1];
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, spec.classes);
    if (spec.classes <= d) {
      // Axis anchors: any two are exactly `separation` apart.
      for (int c = 0; c < spec.classes; ++c) A(c, c) = scale;
    } else {
      Rng rng(deriveSeed(spec.seed, kAnchorStreamBase + static_cast<std::uint64_t>(j)));
      for (int c = 0; c < spec.classes; ++c) {
        Eigen::VectorXd dir(d);
        do {
          for (Eigen::Index r = 0; r < d; ++r) dir[r] = rng.gaussian();
        } while (dir.norm() < 1e-8);
        A.col(c) = scale * dir / dir.norm();
      }
    }
    anchors.push_back(std::move(A));
  }
  return anchors;
}

Dataset generateSynthetic(const SynthSpec& spec) {
  spec.validate();
  const auto anchors = syntheticAnchors(spec);
  const std::set<int> pos(spec.pos_classes.begin(), spec.pos_classes.end());
  std::vector<SequenceSample> samples;
  samples.reserve(static_cast<std::size_t>(spec.modalities) * spec.classes *
                  spec.per_class);
  for (int j = 1; j <= spec.modalities; ++j) {
    const Eigen::Index d = spec.dims[j - 1];
    // Up to two trailing axes carry high-variance class-independent clutter:
    // untrained filters stay near chance retrieval while the class signal
    // keeps unit noise on the anchor axes (nearest-anchor accuracy unchanged).
    Eigen::VectorXd noise_std = Eigen::VectorXd::Ones(d);
    if (spec.classes <= d) {
      const Eigen::Index clutter = std::min<Eigen::Index>(2, d - spec.classes);
      for (Eigen::Index r = d - clutter; r < d; ++r) noise_std[r] = kClutterStd;
    }
    Rng rng(deriveSeed(spec.seed, kSynthStreamBase + static_cast<std::uint64_t>(j)));
    for (int c = 1; c <= spec.classes; ++c) {
      for (int i = 0; i < spec.per_class; ++i) {
        const auto len = static_cast<Eigen::Index>(
            rng.uniformInt(spec.seq_len_min, spec.seq_len_max));
        SequenceSample s;
        s.modality = j;
        s.class_id = c;
        s.label = pos.empty() ? 0 : (pos.count(c) ? 1 : -1);
        s.instances.resize(d, len);
        for (Eigen::Index t = 0; t < len; ++t)
          for (Eigen::Index r = 0; r < d; ++r)
            s.instances(r, t) =
                anchors[j - 1](r, c - 1) + noise_std[r] * rng.gaussian();
        samples.push_back(std::move(s));
      }
    }
  }
  return makeDataset(std::move(samples));
}

std::vector<std::vector<Eigen::Index>> makeFolds(const Dataset& ds, int n_folds,
                                                 std::uint64_t seed) {
  if (n_folds < 2) throw std::invalid_argument("makeFolds: need at least 2 folds");
  // (modality, class) cells in deterministic ascending order.
  std::map<std::pair<int, int>, std::vector<Eigen::Index>> cells;
  for (Eigen::Index g = 0; g < ds.size(); ++g)
    cells[{ds.samples[g].modality, ds.samples[g].class_id}].push_back(g);
  for (const auto& [key, ids] : cells)
    if (static_cast<int>(ids.size()) < n_folds)
      throw std::invalid_argument(
          "makeFolds: modality " + std::to_string(key.first) + " class " +
          std::to_string(key.second) + " has only " + std::to_string(ids.size()) +
          " samples for " + std::to_string(n_folds) + " folds");

  Rng rng(deriveSeed(seed, kFoldStream));
  std::vector<std::vector<Eigen::Index>> folds(n_folds);
  for (auto& [key, ids] : cells) {
    for (std::size_t i = ids.size() - 1; i > 0; --i) {
      const auto r = static_cast<std::size_t>(
          rng.uniformInt(0, static_cast<std::int64_t>(i)));
      std::swap(ids[i], ids[r]);
    }
    for (std::size_t t = 0; t < ids.size(); ++t)
      folds[t % n_folds].push_back(ids[t]);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

void saveModel(const ModelParams& params, const Hyperparams& hp,
               const std::string& path, const ModelProvenance& prov) {
  hp.validate();
  if (params.banks.empty()) throw std::invalid_argument("saveModel: no filter banks");
  if (params.v.size() != hp.u)
    throw std::invalid_argument("saveModel: classifier length != u");

  json body;
  body["format"] = "xmcnn-model";
  body["hyperparams"] = {{"lambda1", hp.lambda1},
                         {"lambda2", hp.lambda2},
                         {"beta", hp.beta},
                         {"u", hp.u},
                         {"h", hp.h}};
  json banks = json::array();
  for (const auto& bank : params.banks) {
    if (bank.filters.cols() != hp.u)
      throw std::invalid_argument("saveModel: bank filter count != u");
    json filters = json::array();
    for (int k = 0; k < bank.u(); ++k) {
      json w = json::array();
      for (Eigen::Index r = 0; r < bank.filters.rows(); ++r)
        w.push_back(bank.filters(r, k));
      filters.push_back(std::move(w));
    }
    banks.push_back({{"modality", bank.modality}, {"filters", std::move(filters)}});
  }
  body["banks"] = std::move(banks);
  json v = json::array();
  for (Eigen::Index i = 0; i < params.v.size(); ++i) v.push_back(params.v[i]);
  body["v"] = std::move(v);
  body["provenance"] = {{"seed", prov.seed},
                        {"outer_iterations", prov.outer_iterations}};

  std::ofstream out(path);
  if (!out) throw std::invalid_argument("saveModel: cannot open " + path);
  out << "XMCNN 1\n" << body.dump() << '\n';
  if (!out) throw std::invalid_argument("saveModel: write failed for " + path);
}

LoadedModel loadModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open model file");
  std::string header;
  if (!std::getline(in, header)) throw ParseError(path, 1, "missing header line");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != "XMCNN 1")
    throw ParseError(path, 1,
                     "unsupported model header '" + header + "' (expected 'XMCNN 1')");

  json body;
  try {
    body = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path, 2, std::string("bad JSON body: ") + e.what());
  }

  LoadedModel out;
  try {
    if (body.at("format").get<std::string>() != "xmcnn-model")
      throw std::invalid_argument("not a model file");
    const auto& jhp = body.at("hyperparams");
    out.hp.lambda1 = jhp.at("lambda1").get<double>();
    out.hp.lambda2 = jhp.at("lambda2").get<double>();
    out.hp.beta = jhp.at("beta").get<double>();
    out.hp.u = jhp.at("u").get<int>();
    out.hp.h = jhp.at("h").get<std::vector<int>>();
    out.hp.validate();

    for (const auto& jbank : body.at("banks")) {
      FilterBank bank;
      bank.modality = jbank.at("modality").get<int>();
      const auto& jf = jbank.at("filters");
      if (!jf.is_array() || static_cast<int>(jf.size()) != out.hp.u)
        throw std::invalid_argument("bank filter count != u");
      const auto rows = static_cast<Eigen::Index>(jf.at(0).size());
      if (rows < 1) throw std::invalid_argument("empty filter");
      bank.filters.resize(rows, out.hp.u);
      for (int k = 0; k < out.hp.u; ++k) {
        const auto& w = jf.at(static_cast<std::size_t>(k));
        if (static_cast<Eigen::Index>(w.size()) != rows)
          throw std::invalid_argument("ragged filter bank");
        for (Eigen::Index r = 0; r < rows; ++r)
          bank.filters(r, k) = w.at(static_cast<std::size_t>(r)).get<double>();
      }
      out.params.banks.push_back(std::move(bank));
    }
    if (out.params.banks.empty()) throw std::invalid_argument("no filter banks");
    for (std::size_t j = 0; j < out.params.banks.size(); ++j)
      if (out.params.banks[j].modality != static_cast<int>(j) + 1)
        throw std::invalid_argument("banks must cover modalities 1..m in order");

    const auto& jv = body.at("v");
    if (static_cast<int>(jv.size()) != out.hp.u)
      throw std::invalid_argument("classifier length != u");
    out.params.v.resize(out.hp.u);
    for (int i = 0; i < out.hp.u; ++i)
      out.params.v[i] = jv.at(static_cast<std::size_t>(i)).get<double>();

    if (body.contains("provenance")) {
      out.provenance.seed = body.at("provenance").at("seed").get<std::uint64_t>();
      out.provenance.outer_iterations =
          body.at("provenance").at("outer_iterations").get<int>();
    }
  } catch (const json::exception& e) {
    throw ParseError(path, 2, e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, 2, e.what());
  }
  return out;
}

}  // namespace xmcnn
