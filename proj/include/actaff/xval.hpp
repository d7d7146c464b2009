#pragma once

#include "actaff/dataset.hpp"
#include "actaff/inference.hpp"
#include "actaff/learning.hpp"
#include "actaff/metrics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace actaff {

struct XvalOptions {
  TrainConfig train;
  SolverOptions solver;
  int bin_levels = 10;
  // Segmentation hypotheses for fused inference; empty runs the single-model
  // protocol on the ground-truth segmentation instead.
  std::vector<std::string> hypotheses;
  int multiseg_rounds = 20;
  bool highlevel = true;
  Scalar highlevel_C = 100.0;
  Scalar highlevel_epsilon = 1e-4;
  int highlevel_max_iterations = 500;
  int occlusion_bins = 10;
  int max_folds = 0; // 0 runs every subject; otherwise caps the fold count
};

struct FoldResult {
  std::string subject;       // held out for testing
  std::string theta_subject; // reserved from the training fold; fused runs only
  Metrics subactivity;       // segment level, ground-truth segmentation
  Metrics affordance;
  std::optional<Metrics> frame_subactivity; // fused output, frame level
  std::optional<Metrics> frame_affordance;
  std::optional<Metrics> highlevel_truth; // classifier fed true labels
  std::optional<Metrics> highlevel_pred;  // classifier fed predicted labels
};

struct LevelSummary {
  Summary micro;
  Summary macro_precision;
  Summary macro_recall;
};

struct XvalResult {
  std::vector<FoldResult> folds;
  LevelSummary subactivity;
  LevelSummary affordance;
  std::optional<LevelSummary> frame_subactivity;
  std::optional<LevelSummary> frame_affordance;
  std::optional<LevelSummary> highlevel_truth;
  std::optional<LevelSummary> highlevel_pred;
};

// Leave-one-subject-out protocol: folds are the distinct subject ids in
// ascending order; every model ingredient (bin thresholds, weights, theta,
// classifiers) is fitted on the training fold only. With segmentation
// hypotheses, the lexicographically smallest training subject is reserved to
// fit theta and the remaining subjects train the per-hypothesis models; test
// sequences are labeled by fused inference and scored per frame as well as
// per ground-truth segment. Requires at least two subjects (three with
// hypotheses) and ground truth on every sequence.
XvalResult cross_validate(const std::vector<ActivitySequence>& data,
                          const LabelSpace& labels, const XvalOptions& opt = {});

// Canonical fixed-precision text rendering; identical inputs give identical
// bytes.
std::string format_report(const XvalResult& r);

} // namespace actaff
