#pragma once

#include "actaff/dataset.hpp"
#include "actaff/weight_vector.hpp"

#include <array>
#include <utility>
#include <vector>

namespace actaff {

enum class FeatureFamily {
  ObjectNode = 0,
  ActivityNode = 1,
  ObjectObject = 2,
  ObjectActivity = 3,
  ObjectTemporal = 4,
  ActivityTemporal = 5,
};
constexpr int kNumFamilies = 6;

// Raw descriptor widths before binning.
constexpr std::array<int, kNumFamilies> kRawDims = {16, 103, 20, 40, 4, 16};

// Object node, evaluated on one segment: centroid (3) and bounding box (4) at
// the middle frame, centroid transform against the previous frame (6), total
// centroid path length (1), net displacement (1), occluded-frame fraction (1).
// Occluded frames borrow the nearest unoccluded frame within the segment; a
// segment with no unoccluded frame yields zeros with the fraction slot at 1.
Vec raw_object_features(const ActivitySequence& seq, int track, FrameRange range);

// Activity node: head-relative locations of the eight tracked joints at the
// middle frame (24), per-joint path length (8) and net displacement (8) in
// head-relative coordinates, body pose at the middle frame (47: all pairwise
// joint distances, joint heights above the torso, torso direction angles),
// hand pose at the middle frame (16: palms relative to torso and head,
// palm-palm and palm-head distances, highest palm above the torso).
Vec raw_activity_features(const ActivitySequence& seq, FrameRange range);

// Object pair: relative centroid (dx, dy, dz, distance) at the start, middle
// and end frames plus the per-coordinate max and min over the segment (20).
Vec raw_object_object_features(const ActivitySequence& seq, int track_a,
                               int track_b, FrameRange range);

// Object against the skeleton: distance from each tracked joint to the
// centroid at start/middle/end plus per-joint max and min (40).
Vec raw_object_activity_features(const ActivitySequence& seq, int track,
                                 FrameRange range);

// Across consecutive segments, middle frame to middle frame: vertical
// displacement and centroid distance, each total and per-frame (4).
Vec raw_object_temporal_features(const ActivitySequence& seq, int track,
                                 FrameRange from, FrameRange to);

// Per-joint distance between the segments' middle frames, total and per-frame
// (16).
Vec raw_activity_temporal_features(const ActivitySequence& seq, FrameRange from,
                                   FrameRange to);

Vec raw_features(const ActivitySequence& seq, FeatureFamily family,
                 FrameRange range, FrameRange next_range, int track_a,
                 int track_b);

// Indicator per threshold: out[j] = value >= thresholds[j]. With ascending
// thresholds the result is a prefix of ones.
Vec cumulative_bin(Scalar value, const Vec& thresholds);

// Per-family, per-coordinate decile thresholds fitted on a training corpus.
// Rows are forced strictly ascending so cumulative_bin stays monotone.
struct FeatureBinner {
  int levels = 10;
  std::array<Mat, kNumFamilies> thresholds; // (raw dim, levels)

  // corpus: sequences with the segmentations their statistics are drawn from.
  static FeatureBinner fit(
      const std::vector<std::pair<const ActivitySequence*,
                                  std::vector<FrameRange>>>& corpus,
      int levels = 10);

  // Thresholds 0, 1, ..., levels-1 in every slot; for fixed-dimension use
  // without fitted statistics.
  static FeatureBinner ramp(int levels = 10);

  Vec apply(FeatureFamily family, const Vec& raw) const;
  FeatureDims dims() const;
};

// Builds the labeled-topology graph for one sequence: raw descriptors per
// node/edge, binned through `binner`.
SegmentGraph build_sequence_graph(const ActivitySequence& seq,
                                  const std::vector<FrameRange>& segments,
                                  const FeatureBinner& binner);

} // namespace actaff
