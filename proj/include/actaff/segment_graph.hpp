#pragma once

#include "actaff/types.hpp"

#include <functional>
#include <vector>

namespace actaff {

// Inclusive frame range [first, last].
struct FrameRange {
  int first = 0;
  int last = 0;
  int length() const { return last - first + 1; }
  int middle() const { return first + (last - first) / 2; }
};

enum class NodeKind { Activity = 0, Object = 1 };

// Edge families. The numeric values index per-family weight blocks.
enum class EdgeKind {
  ObjectObject = 0,     // two object nodes, same segment
  ObjectActivity = 1,   // activity node and object node, same segment
  ObjectTemporal = 2,   // same track, consecutive segments
  ActivityTemporal = 3, // activity nodes of consecutive segments
};
constexpr int kNumEdgeKinds = 4;

struct GraphNode {
  NodeKind kind;
  int segment; // index into the segmentation
  int track;   // object track index; -1 for activity nodes
  Vec features;
};

// Endpoints satisfy i < j in the canonical node order; the weight block for
// the edge is indexed (label of i, label of j).
struct GraphEdge {
  EdgeKind kind;
  int i;
  int j;
  Vec features;
};

// Callbacks invoked once per node/edge while assembling a graph. Temporal
// callbacks receive the earlier segment of the pair.
struct FeatureProvider {
  std::function<Vec(int segment)> activity_node;
  std::function<Vec(int segment, int track)> object_node;
  std::function<Vec(int segment, int track_a, int track_b)> object_object;
  std::function<Vec(int segment, int track)> object_activity;
  std::function<Vec(int segment, int track)> object_temporal;
  std::function<Vec(int segment)> activity_temporal;
};

// Markov network over one temporally segmented sequence. Node order is
// segment-major: for each segment, first the activity node, then one node per
// object track in track order. Within a segment every object pair is linked
// once, every object is linked to the activity node, and consecutive segments
// are linked per track and between activity nodes.
class SegmentGraph {
 public:
  // track_extents[t] is the frame range covered by track t; every track must
  // cover all segments. Throws std::invalid_argument on an empty or
  // non-contiguous segmentation or a track that misses frames.
  SegmentGraph(std::vector<FrameRange> segments,
               std::vector<FrameRange> track_extents,
               const FeatureProvider& features);

  int num_segments() const { return static_cast<int>(segments_.size()); }
  int num_tracks() const { return num_tracks_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<FrameRange>& segments() const { return segments_; }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const GraphNode& node(int i) const { return nodes_[i]; }
  const GraphEdge& edge(int e) const { return edges_[e]; }

  // track = -1 addresses the activity node of the segment.
  int node_index(int segment, int track) const {
    return segment * (num_tracks_ + 1) + 1 + track;
  }

  int count_edges(EdgeKind kind) const;

 private:
  std::vector<FrameRange> segments_;
  int num_tracks_ = 0;
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
};

inline SegmentGraph build_graph(const std::vector<FrameRange>& segments,
                                const std::vector<FrameRange>& track_extents,
                                const FeatureProvider& features) {
  return SegmentGraph(segments, track_extents, features);
}

// One label index per node, in canonical node order. Activity nodes hold
// sub-activity indices, object nodes affordance indices.
struct Labeling {
  std::vector<int> labels;
};

// Fractional node/edge assignment. node_values[i][k] lies in {0, 0.5, 1};
// edge_values[e](l, k) is the product variable for endpoint labels (l, k).
struct RelaxedLabeling {
  std::vector<Vec> node_values;
  std::vector<Mat> edge_values;
};

// Rounds node-wise to the highest value; ties pick the lowest label index.
Labeling round_labeling(const RelaxedLabeling& relaxed);

// Embeds an integral labeling: indicators and their products.
RelaxedLabeling to_relaxed(const SegmentGraph& g, const Labeling& y,
                           int num_subactivities, int num_affordances);

} // namespace actaff
