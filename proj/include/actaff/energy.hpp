#pragma once

#include "actaff/segment_graph.hpp"
#include "actaff/weight_vector.hpp"

#include <vector>

namespace actaff {

// Sufficient statistics of a labeling: feature vectors accumulated into the
// weight blocks selected by the labels, so that
//   energy(w, g, y) == w.values.dot(joint_feature_map(w.layout, g, y)).
Vec joint_feature_map(const WeightLayout& layout, const SegmentGraph& g,
                      const Labeling& y);

// Fractional counterpart: node features are weighted by node_values, edge
// features by edge_values.
Vec joint_feature_map(const WeightLayout& layout, const SegmentGraph& g,
                      const RelaxedLabeling& y);

// Total labeling score under w: sum of node terms w_k . phi_i and edge terms
// w_{lk} . phi_ij. Higher is better.
Scalar energy(const WeightVector& w, const SegmentGraph& g, const Labeling& y);

Scalar relaxed_energy(const WeightVector& w, const SegmentGraph& g,
                      const RelaxedLabeling& y);

// Dense per-node and per-edge score tables for a fixed (w, graph); the solvers
// work on these instead of re-doing dot products.
struct ScoreTables {
  std::vector<Vec> unary;    // unary[i][k]
  std::vector<Mat> pairwise; // pairwise[e](label of i, label of j)

  static ScoreTables build(const WeightVector& w, const SegmentGraph& g);

  Scalar score(const SegmentGraph& g, const Labeling& y) const;
};

// Throws std::invalid_argument if node/edge feature lengths do not match the
// layout's dimensionalities.
void check_dims(const WeightLayout& layout, const SegmentGraph& g);

} // namespace actaff
