#pragma once

#include "actaff/dataset.hpp"
#include "actaff/multiseg.hpp"
#include "actaff/segment_graph.hpp"

#include <string>
#include <vector>

namespace actaff {

// Normalized label histograms: sub-activity block (Ka) then affordance block
// (Ko); each block sums to 1, or stays zero when it has no instances. The
// segment-labeling overload counts nodes, the frame overload counts frames.
Vec histogram_features(const SegmentGraph& g, const Labeling& y, int Ka, int Ko);
Vec histogram_features(const FrameLabeling& y, int Ka, int Ko);

// Splits [0, num_frames) into n_bins equal spans; entry b is the fraction of
// objects occluded at any frame within span b. No objects -> zeros.
Vec occlusion_features(const std::vector<ObjectTrack>& tracks, int num_frames,
                       int n_bins = 10);

struct HighLevelModel {
  std::vector<std::string> classes;
  Mat weights; // one row per class, last column is the bias
  bool single_class = false; // degenerate training set; constant classifier
};

// One-vs-all max-margin linear classifiers, each trained by the same
// cutting-plane restricted QP used for structured training (cuts average the
// currently margin-violating examples).
HighLevelModel train_highlevel(const Mat& X, const std::vector<int>& labels,
                               const std::vector<std::string>& classes,
                               Scalar C = 100.0, Scalar epsilon = 1e-4,
                               int max_iterations = 500);

// Highest-scoring class; ties resolve to the lowest class index.
int classify_highlevel(const HighLevelModel& model, const Vec& x);

} // namespace actaff
