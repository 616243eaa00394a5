#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "xmcnn/objective.hpp"
#include "xmcnn/windowing.hpp"

namespace xmcnn {

// A multi-modality collection. Samples are stored modality-major (all of
// modality 1, then modality 2, ...); the position in `samples` is the
// 0-based global id used everywhere (relevance matrices, embedding columns).
struct Dataset {
  std::vector<SequenceSample> samples;
  int modalities = 0;
  std::vector<Eigen::Index> dims;     // instance dimension per modality
  std::vector<Eigen::Index> offsets;  // first global id of each modality
  std::vector<Eigen::Index> counts;   // samples per modality

  Eigen::Index size() const { return static_cast<Eigen::Index>(samples.size()); }
  Eigen::Index globalIndex(int modality, Eigen::Index within) const;
  std::vector<int> classIds() const;
};

// Groups by modality (stable), infers per-modality dims, validates
// (contiguous modality ids from 1, consistent dims, non-empty instances).
Dataset makeDataset(std::vector<SequenceSample> samples);

// JSONL: one sample per line {"modality": j, "class": c, "label": +-1 (optional),
// "seq": [[...], ...]} with "seq" holding instance vectors in order.
// '#' lines and blank lines are skipped.
Dataset loadDataset(const std::string& path);
void saveDataset(const Dataset& ds, const std::string& path);

// Copy with labels resolved from a positive-class set: +1 if the sample's
// class is listed, -1 otherwise. Every listed class must occur in the data.
Dataset withLabels(const Dataset& ds, const std::vector<int>& pos_classes);

struct SynthSpec {
  int modalities = 2;
  int classes = 2;
  int per_class = 10;  // per class per modality
  std::vector<Eigen::Index> dims{4, 6};
  int seq_len_min = 3;
  int seq_len_max = 8;
  double separation = 1.0;  // anchor distance between any two classes
  std::uint64_t seed = 0;
  std::vector<int> pos_classes{1};

  void validate() const;
};

// Class anchors per modality (d_j x classes). Pairwise distance between any
// two anchors is exactly `separation`: coordinate axes scaled by
// separation/sqrt(2) when d_j >= classes, random unit directions otherwise.
std::vector<Eigen::MatrixXd> syntheticAnchors(const SynthSpec& spec);

// Instances = anchor + seeded Gaussian noise: unit variance on the anchor
// axes, higher variance on up to two trailing clutter axes (class-independent
// distractors that keep untrained filters near chance retrieval). Lengths
// uniform on [len_min, len_max]; each modality uses an independent sub-stream.
Dataset generateSynthetic(const SynthSpec& spec);

// Stratified k-fold: shuffles within each (modality, class) cell, then deals
// round-robin, so every fold sees every cell. Requires each cell to hold at
// least n_folds samples. Returns global ids per fold.
std::vector<std::vector<Eigen::Index>> makeFolds(const Dataset& ds, int n_folds,
                                                 std::uint64_t seed);

struct ModelProvenance {
  std::uint64_t seed = 0;
  int outer_iterations = 0;
};

struct LoadedModel {
  ModelParams params;
  Hyperparams hp;
  ModelProvenance provenance;
};

// Versioned text format: "XMCNN 1" header line, JSON body. Doubles
// round-trip exactly.
void saveModel(const ModelParams& params, const Hyperparams& hp,
               const std::string& path, const ModelProvenance& prov = {});
LoadedModel loadModel(const std::string& path);

}  // namespace xmcnn
