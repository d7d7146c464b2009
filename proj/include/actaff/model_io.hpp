#pragma once

#include "actaff/features.hpp"
#include "actaff/highlevel.hpp"
#include "actaff/label_space.hpp"
#include "actaff/multiseg.hpp"
#include "actaff/weight_vector.hpp"

#include <optional>
#include <string>
#include <vector>

namespace actaff {

// Everything required to run inference on new sequences.
struct Model {
  LabelSpace labels;
  FeatureBinner binner;
  WeightVector w;
  std::string segmentation; // descriptor the model was trained for; "truth"
                            // means the ground-truth segmentation
};

// Self-describing JSON with a format version; loading rejects unknown
// versions and any dimension mismatch. Doubles round-trip losslessly.
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

void save_theta(const ThetaWeights& theta, const std::string& path);
ThetaWeights load_theta(const std::string& path);

void save_highlevel_model(const HighLevelModel& m, const std::string& path);
HighLevelModel load_highlevel_model(const std::string& path);

// Predicted labels for one sequence, written/read as one JSON object per
// line: segmentation plus label names per segment.
struct LabelingRecord {
  std::string id;
  std::vector<FrameRange> segments;
  std::vector<std::string> subactivity;              // per segment
  std::vector<std::vector<std::string>> affordances; // per segment, per track
  std::string highlevel;                             // optional
};

LabelingRecord make_labeling_record(const std::string& id,
                                    const SegmentGraph& g, const Labeling& y,
                                    const LabelSpace& ls);
void save_labelings(const std::vector<LabelingRecord>& recs,
                    const std::string& path);
std::vector<LabelingRecord> load_labelings(const std::string& path);

} // namespace actaff
