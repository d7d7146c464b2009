#include "actaff/energy.hpp"

#include <stdexcept>

namespace actaff {

void check_dims(const WeightLayout& layout, const SegmentGraph& g) {
  for (const GraphNode& n : g.nodes())
    if (n.features.size() != layout.dims().node_dim(n.kind))
      throw std::invalid_argument("node feature length does not match layout");
  for (const GraphEdge& e : g.edges())
    if (e.features.size() != layout.dims().edge_dim(e.kind))
      throw std::invalid_argument("edge feature length does not match layout");
}

Vec joint_feature_map(const WeightLayout& layout, const SegmentGraph& g,
                      const Labeling& y) {
  check_dims(layout, g);
  Vec psi = Vec::Zero(layout.total_dim());
  for (int i = 0; i < g.num_nodes(); ++i) {
    const GraphNode& n = g.node(i);
    psi.segment(layout.node_offset(n.kind, y.labels[i]), n.features.size()) +=
        n.features;
  }
  for (const GraphEdge& e : g.edges()) {
    psi.segment(layout.edge_offset(e.kind, y.labels[e.i], y.labels[e.j]),
                e.features.size()) += e.features;
  }
  return psi;
}

Vec joint_feature_map(const WeightLayout& layout, const SegmentGraph& g,
                      const RelaxedLabeling& y) {
  check_dims(layout, g);
  Vec psi = Vec::Zero(layout.total_dim());
  for (int i = 0; i < g.num_nodes(); ++i) {
    const GraphNode& n = g.node(i);
    const Vec& v = y.node_values[i];
    for (int k = 0; k < v.size(); ++k) {
      if (v[k] == 0.0) continue;
      psi.segment(layout.node_offset(n.kind, k), n.features.size()) +=
          v[k] * n.features;
    }
  }
  for (int ei = 0; ei < g.num_edges(); ++ei) {
    const GraphEdge& e = g.edge(ei);
    const Mat& z = y.edge_values[ei];
    for (int l = 0; l < z.rows(); ++l)
      for (int k = 0; k < z.cols(); ++k) {
        if (z(l, k) == 0.0) continue;
        psi.segment(layout.edge_offset(e.kind, l, k), e.features.size()) +=
            z(l, k) * e.features;
      }
  }
  return psi;
}

Scalar energy(const WeightVector& w, const SegmentGraph& g, const Labeling& y) {
  check_dims(w.layout, g);
  Scalar total = 0;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const GraphNode& n = g.node(i);
    total += w.node_block(n.kind, y.labels[i]).dot(n.features);
  }
  for (const GraphEdge& e : g.edges())
    total += w.edge_block(e.kind, y.labels[e.i], y.labels[e.j]).dot(e.features);
  return total;
}

Scalar relaxed_energy(const WeightVector& w, const SegmentGraph& g,
                      const RelaxedLabeling& y) {
  check_dims(w.layout, g);
  Scalar total = 0;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const GraphNode& n = g.node(i);
    const Vec& v = y.node_values[i];
    for (int k = 0; k < v.size(); ++k)
      if (v[k] != 0.0) total += v[k] * w.node_block(n.kind, k).dot(n.features);
  }
  for (int ei = 0; ei < g.num_edges(); ++ei) {
    const GraphEdge& e = g.edge(ei);
    const Mat& z = y.edge_values[ei];
    for (int l = 0; l < z.rows(); ++l)
      for (int k = 0; k < z.cols(); ++k)
        if (z(l, k) != 0.0)
          total += z(l, k) * w.edge_block(e.kind, l, k).dot(e.features);
  }
  return total;
}

ScoreTables ScoreTables::build(const WeightVector& w, const SegmentGraph& g) {
  check_dims(w.layout, g);
  ScoreTables t;
  t.unary.reserve(g.num_nodes());
  for (const GraphNode& n : g.nodes()) {
    const int K = w.layout.node_labels(n.kind);
    Vec u(K);
    for (int k = 0; k < K; ++k) u[k] = w.node_block(n.kind, k).dot(n.features);
    t.unary.push_back(std::move(u));
  }
  t.pairwise.reserve(g.num_edges());
  for (const GraphEdge& e : g.edges()) {
    const int Li = w.layout.labels_i(e.kind);
    const int Lj = w.layout.labels_j(e.kind);
    Mat p(Li, Lj);
    for (int l = 0; l < Li; ++l)
      for (int k = 0; k < Lj; ++k)
        p(l, k) = w.edge_block(e.kind, l, k).dot(e.features);
    t.pairwise.push_back(std::move(p));
  }
  return t;
}

Scalar ScoreTables::score(const SegmentGraph& g, const Labeling& y) const {
  Scalar total = 0;
  for (int i = 0; i < g.num_nodes(); ++i) total += unary[i][y.labels[i]];
  for (int ei = 0; ei < g.num_edges(); ++ei) {
    const GraphEdge& e = g.edge(ei);
    total += pairwise[ei](y.labels[e.i], y.labels[e.j]);
  }
  return total;
}

} // namespace actaff
