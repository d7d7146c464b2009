#include "actaff/segment_graph.hpp"

#include <stdexcept>

namespace actaff {

SegmentGraph::SegmentGraph(std::vector<FrameRange> segments,
                           std::vector<FrameRange> track_extents,
                           const FeatureProvider& features)
    : segments_(std::move(segments)),
      num_tracks_(static_cast<int>(track_extents.size())) {
  if (segments_.empty())
    throw std::invalid_argument("segmentation is empty");
  for (size_t s = 0; s < segments_.size(); ++s) {
    if (segments_[s].last < segments_[s].first)
      throw std::invalid_argument("segment with negative length");
    if (s > 0 && segments_[s].first != segments_[s - 1].last + 1)
      throw std::invalid_argument("segmentation is not contiguous");
  }
  const int first_frame = segments_.front().first;
  const int last_frame = segments_.back().last;
  for (const FrameRange& ext : track_extents) {
    if (ext.first > first_frame || ext.last < last_frame)
      throw std::invalid_argument("object track does not cover every segment");
  }

  const int S = num_segments();
  const int O = num_tracks_;
  nodes_.reserve(static_cast<size_t>(S) * (O + 1));
  for (int s = 0; s < S; ++s) {
    nodes_.push_back({NodeKind::Activity, s, -1, features.activity_node(s)});
    for (int t = 0; t < O; ++t)
      nodes_.push_back({NodeKind::Object, s, t, features.object_node(s, t)});
  }

  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < O; ++t)
      edges_.push_back({EdgeKind::ObjectActivity, node_index(s, -1),
                        node_index(s, t), features.object_activity(s, t)});
    for (int a = 0; a < O; ++a)
      for (int b = a + 1; b < O; ++b)
        edges_.push_back({EdgeKind::ObjectObject, node_index(s, a),
                          node_index(s, b), features.object_object(s, a, b)});
    if (s + 1 < S) {
      edges_.push_back({EdgeKind::ActivityTemporal, node_index(s, -1),
                        node_index(s + 1, -1), features.activity_temporal(s)});
      for (int t = 0; t < O; ++t)
        edges_.push_back({EdgeKind::ObjectTemporal, node_index(s, t),
                          node_index(s + 1, t), features.object_temporal(s, t)});
    }
  }
}

int SegmentGraph::count_edges(EdgeKind kind) const {
  int n = 0;
  for (const GraphEdge& e : edges_)
    if (e.kind == kind) ++n;
  return n;
}

Labeling round_labeling(const RelaxedLabeling& relaxed) {
  Labeling y;
  y.labels.reserve(relaxed.node_values.size());
  for (const Vec& v : relaxed.node_values) {
    int best = 0;
    for (int k = 1; k < v.size(); ++k)
      if (v[k] > v[best]) best = k;
    y.labels.push_back(best);
  }
  return y;
}

RelaxedLabeling to_relaxed(const SegmentGraph& g, const Labeling& y,
                           int num_subactivities, int num_affordances) {
  RelaxedLabeling r;
  r.node_values.resize(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) {
    const int K = g.node(i).kind == NodeKind::Activity ? num_subactivities
                                                       : num_affordances;
    r.node_values[i] = Vec::Zero(K);
    r.node_values[i][y.labels[i]] = 1.0;
  }
  r.edge_values.resize(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    const GraphEdge& ge = g.edge(e);
    const int Li = static_cast<int>(r.node_values[ge.i].size());
    const int Lj = static_cast<int>(r.node_values[ge.j].size());
    r.edge_values[e] = Mat::Zero(Li, Lj);
    r.edge_values[e](y.labels[ge.i], y.labels[ge.j]) = 1.0;
  }
  return r;
}

} // namespace actaff
