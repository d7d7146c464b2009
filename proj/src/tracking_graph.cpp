#include "actaff/tracking_graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace actaff {

Scalar track_score(Scalar sim_prev_det, Scalar sim_tracked_det, Scalar detection,
                   Scalar lambda) {
  return sim_prev_det + sim_tracked_det + lambda * detection;
}

DetectionCategory categorize_detection(const DetectionContext& d,
                                       const TrackThresholds& th) {
  if (d.track_distance.size() != d.track_similarity.size())
    throw std::invalid_argument("track distance/similarity lists must align");
  for (size_t i = 0; i < d.track_distance.size(); ++i)
    if (d.track_distance[i] <= th.distance && d.track_similarity[i] >= th.similarity)
      return DetectionCategory::Merged;
  if (d.score >= th.score)
    for (Scalar s : d.prev_similarity)
      if (s >= th.similarity) return DetectionCategory::Isolated;
  return DetectionCategory::Ignored;
}

int DetectionGraph::add_node(int frame, Scalar score) {
  nodes.push_back({frame, score});
  succ.emplace_back();
  return static_cast<int>(nodes.size()) - 1;
}

void DetectionGraph::add_edge(int from, int to, Scalar ts) {
  if (from < 0 || to < 0 || from >= static_cast<int>(nodes.size()) ||
      to >= static_cast<int>(nodes.size()))
    throw std::invalid_argument("edge endpoint out of range");
  if (nodes[to].frame != nodes[from].frame + 1)
    throw std::invalid_argument("edges must join consecutive detection frames");
  succ[from].emplace_back(to, ts);
}

TrackPath best_track(const DetectionGraph& g, int start) {
  if (start < 0 || start >= static_cast<int>(g.nodes.size()))
    throw std::invalid_argument("start node absent");
  const int n = static_cast<int>(g.nodes.size());
  // Frame-descending order is a reverse topological order.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return g.nodes[a].frame > g.nodes[b].frame;
  });
  std::vector<Scalar> value(n, 0);
  std::vector<int> next(n, -1);
  for (int u : order) {
    for (const auto& [v, ts] : g.succ[u]) {
      const Scalar cand = ts + value[v];
      // Prefer higher value; on exact ties the smallest successor id, which
      // yields the lexicographically smallest optimal maximal path.
      if (next[u] < 0 || cand > value[u] || (cand == value[u] && v < next[u])) {
        value[u] = cand;
        next[u] = v;
      }
    }
  }
  TrackPath path;
  path.score = value[start];
  for (int u = start; u >= 0; u = next[u]) path.nodes.push_back(u);
  return path;
}

DetectionGraph backward_graph(const DetectionGraph& g) {
  DetectionGraph back;
  int max_frame = 0;
  for (const DetectionNode& n : g.nodes) max_frame = std::max(max_frame, n.frame);
  for (const DetectionNode& n : g.nodes)
    back.add_node(max_frame - n.frame, n.score);
  for (size_t u = 0; u < g.succ.size(); ++u)
    for (const auto& [v, ts] : g.succ[u]) back.add_edge(v, static_cast<int>(u), ts);
  return back;
}

} // namespace actaff
