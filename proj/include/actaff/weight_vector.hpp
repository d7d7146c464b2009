#pragma once

#include "actaff/segment_graph.hpp"
#include "actaff/types.hpp"

#include <array>

namespace actaff {

// Per-family feature dimensionalities; edge[] is indexed by EdgeKind.
struct FeatureDims {
  int activity_node = 0;
  int object_node = 0;
  std::array<int, kNumEdgeKinds> edge = {0, 0, 0, 0};

  int node_dim(NodeKind kind) const {
    return kind == NodeKind::Activity ? activity_node : object_node;
  }
  int edge_dim(EdgeKind kind) const { return edge[static_cast<int>(kind)]; }
};

// Addressing into the stacked parameter vector. Layout, in order:
//   activity-node blocks, one per sub-activity label;
//   object-node blocks, one per affordance label;
//   per edge family, one block per (label of i, label of j), row-major.
// Edge families follow EdgeKind order. For object--activity edges the first
// endpoint is the activity node, so those blocks are indexed
// (sub-activity, affordance); both temporal families pair a label with itself.
class WeightLayout {
 public:
  WeightLayout() = default;
  WeightLayout(int num_subactivities, int num_affordances, FeatureDims dims)
      : Ka_(num_subactivities), Ko_(num_affordances), dims_(dims) {
    Eigen::Index off = static_cast<Eigen::Index>(Ka_) * dims_.activity_node +
                       static_cast<Eigen::Index>(Ko_) * dims_.object_node;
    for (int t = 0; t < kNumEdgeKinds; ++t) {
      edge_base_[t] = off;
      off += static_cast<Eigen::Index>(labels_i(static_cast<EdgeKind>(t))) *
             labels_j(static_cast<EdgeKind>(t)) * dims_.edge[t];
    }
    total_ = off;
  }

  int num_subactivities() const { return Ka_; }
  int num_affordances() const { return Ko_; }
  const FeatureDims& dims() const { return dims_; }
  Eigen::Index total_dim() const { return total_; }

  int node_labels(NodeKind kind) const {
    return kind == NodeKind::Activity ? Ka_ : Ko_;
  }
  // Label count of the first / second endpoint of an edge family.
  int labels_i(EdgeKind t) const {
    return t == EdgeKind::ObjectActivity || t == EdgeKind::ActivityTemporal ? Ka_ : Ko_;
  }
  int labels_j(EdgeKind t) const {
    return t == EdgeKind::ActivityTemporal ? Ka_ : Ko_;
  }

  Eigen::Index node_offset(NodeKind kind, int label) const {
    if (kind == NodeKind::Activity)
      return static_cast<Eigen::Index>(label) * dims_.activity_node;
    return static_cast<Eigen::Index>(Ka_) * dims_.activity_node +
           static_cast<Eigen::Index>(label) * dims_.object_node;
  }
  Eigen::Index edge_offset(EdgeKind t, int label_i, int label_j) const {
    const int ti = static_cast<int>(t);
    return edge_base_[ti] +
           (static_cast<Eigen::Index>(label_i) * labels_j(t) + label_j) *
               dims_.edge[ti];
  }

  bool operator==(const WeightLayout& o) const {
    return Ka_ == o.Ka_ && Ko_ == o.Ko_ &&
           dims_.activity_node == o.dims_.activity_node &&
           dims_.object_node == o.dims_.object_node && dims_.edge == o.dims_.edge;
  }

 private:
  int Ka_ = 0;
  int Ko_ = 0;
  FeatureDims dims_;
  std::array<Eigen::Index, kNumEdgeKinds> edge_base_ = {0, 0, 0, 0};
  Eigen::Index total_ = 0;
};

// Stacked model parameters plus their addressing.
struct WeightVector {
  WeightLayout layout;
  Vec values;

  WeightVector() = default;
  explicit WeightVector(const WeightLayout& l)
      : layout(l), values(Vec::Zero(l.total_dim())) {}

  auto node_block(NodeKind kind, int label) {
    return values.segment(layout.node_offset(kind, label),
                          layout.dims().node_dim(kind));
  }
  auto node_block(NodeKind kind, int label) const {
    return values.segment(layout.node_offset(kind, label),
                          layout.dims().node_dim(kind));
  }
  auto edge_block(EdgeKind t, int label_i, int label_j) {
    return values.segment(layout.edge_offset(t, label_i, label_j),
                          layout.dims().edge_dim(t));
  }
  auto edge_block(EdgeKind t, int label_i, int label_j) const {
    return values.segment(layout.edge_offset(t, label_i, label_j),
                          layout.dims().edge_dim(t));
  }
};

} // namespace actaff
