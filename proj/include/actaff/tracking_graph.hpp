#pragma once

#include "actaff/types.hpp"

#include <vector>

namespace actaff {

// ts(e) = appearance similarity to the previous detection, plus similarity to
// its motion-tracked box, plus lambda times the detection confidence.
Scalar track_score(Scalar sim_prev_det, Scalar sim_tracked_det, Scalar detection,
                   Scalar lambda = 1.0);

struct TrackThresholds {
  Scalar distance = 0.5;   // max spatial distance for merging into a track
  Scalar similarity = 0.5; // min appearance similarity
  Scalar score = 0.5;      // min detection confidence to start a track
};

// Everything known about one new detection relative to the current state:
// spatial distance and appearance similarity to each live track, and
// appearance similarity to previously tracked detections.
struct DetectionContext {
  Scalar score = 0;
  std::vector<Scalar> track_distance;
  std::vector<Scalar> track_similarity; // parallel to track_distance
  std::vector<Scalar> prev_similarity;
};

enum class DetectionCategory { Merged, Isolated, Ignored };

// Merged: within the distance threshold and at least as similar as the
// similarity threshold to some live track. Isolated: not merged, but confident
// and similar-looking to some previously tracked detection; such detections
// seed tracks grown in both directions. Ignored otherwise.
DetectionCategory categorize_detection(const DetectionContext& d,
                                       const TrackThresholds& th);

struct DetectionNode {
  int frame = 0;      // detection-frame index
  Scalar score = 0;   // detection confidence
};

// Layered DAG over detections: edges connect consecutive detection frames
// only, each carrying its track score.
struct DetectionGraph {
  std::vector<DetectionNode> nodes;
  std::vector<std::vector<std::pair<int, Scalar>>> succ;

  int add_node(int frame, Scalar score);
  // Throws std::invalid_argument unless frame(to) == frame(from) + 1.
  void add_edge(int from, int to, Scalar ts);
};

struct TrackPath {
  std::vector<int> nodes;
  Scalar score = 0;
};

// Maximal path (runs until a node with no successors) of highest cumulative
// track score starting at `start`; among optima, the lexicographically
// smallest node sequence. Longest-path dynamic program in frame order.
TrackPath best_track(const DetectionGraph& g, int start);

// Same nodes with every edge reversed and frames mirrored, so isolated
// detections can be extended backward with the same machinery.
DetectionGraph backward_graph(const DetectionGraph& g);

} // namespace actaff
