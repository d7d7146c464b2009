#include "actaff/energy.hpp"
#include "actaff/label_space.hpp"
#include "actaff/segment_graph.hpp"
#include "actaff/weight_vector.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <set>
#include <stdexcept>

using namespace actaff;

namespace {

// Constant features of the given dims for topology-only tests.
FeatureProvider unit_features(const FeatureDims& d) {
  FeatureProvider fp;
  fp.activity_node = [d](int) { return Vec::Ones(d.activity_node); };
  fp.object_node = [d](int, int) { return Vec::Ones(d.object_node); };
  fp.object_object = [d](int, int, int) { return Vec::Ones(d.edge[0]); };
  fp.object_activity = [d](int, int) { return Vec::Ones(d.edge[1]); };
  fp.object_temporal = [d](int, int) { return Vec::Ones(d.edge[2]); };
  fp.activity_temporal = [d](int) { return Vec::Ones(d.edge[3]); };
  return fp;
}

std::vector<FrameRange> even_segments(int S, int len = 5) {
  std::vector<FrameRange> segs;
  for (int s = 0; s < S; ++s) segs.push_back({len * s, len * s + len - 1});
  return segs;
}

SegmentGraph make_topology(int S, int O) {
  FeatureDims d;
  d.activity_node = 1;
  d.object_node = 1;
  d.edge = {1, 1, 1, 1};
  const auto segs = even_segments(S);
  const std::vector<FrameRange> extents(O, FrameRange{0, 5 * S - 1});
  return build_graph(segs, extents, unit_features(d));
}

// Independent accumulation of the feature map, node by node and edge by edge,
// against which joint_feature_map is checked.
Vec reference_feature_map(const WeightLayout& layout, const SegmentGraph& g,
                          const Labeling& y) {
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

} // namespace

TEST_SUITE("model_core") {

TEST_CASE("default label vocabularies") {
  const LabelSpace ls = LabelSpace::defaults();
  ls.validate();
  CHECK(ls.num_subactivities() == 10);
  CHECK(ls.num_affordances() == 12);
  CHECK(ls.num_highlevel() == 10);
  CHECK(ls.subactivities ==
        std::vector<std::string>{"reaching", "moving", "pouring", "eating",
                                 "drinking", "opening", "placing", "closing",
                                 "scrubbing", "null"});
  CHECK(ls.affordances[0] == "reachable");
  CHECK(ls.affordances[1] == "movable");
  CHECK(ls.affordances[2] == "pourable");
  CHECK(ls.subactivity_index("pouring") == 2);
  CHECK(ls.affordance_index("reachable") == 0);
  CHECK_THROWS_AS((void)ls.subactivity_index("jumping"), std::invalid_argument);
}

TEST_CASE("label space validation") {
  LabelSpace ls = LabelSpace::defaults();
  ls.subactivities.push_back("reaching"); // duplicate
  CHECK_THROWS_AS(ls.validate(), std::invalid_argument);
  ls = LabelSpace::defaults();
  ls.affordances.clear();
  CHECK_THROWS_AS(ls.validate(), std::invalid_argument);
}

TEST_CASE("graph shape follows the construction rules") {
  for (int S : {1, 2, 3, 5}) {
    for (int O : {0, 1, 2, 3}) {
      CAPTURE(S);
      CAPTURE(O);
      const SegmentGraph g = make_topology(S, O);
      CHECK(g.num_nodes() == S * (O + 1));
      CHECK(g.count_edges(EdgeKind::ObjectObject) == S * O * (O - 1) / 2);
      CHECK(g.count_edges(EdgeKind::ObjectActivity) == S * O);
      CHECK(g.count_edges(EdgeKind::ObjectTemporal) == (S - 1) * O);
      CHECK(g.count_edges(EdgeKind::ActivityTemporal) == S - 1);
    }
  }
}

TEST_CASE("hand-counted edge totals") {
  const SegmentGraph g = make_topology(2, 2);
  CHECK(g.num_nodes() == 6);
  CHECK(g.count_edges(EdgeKind::ObjectObject) == 2);
  CHECK(g.count_edges(EdgeKind::ObjectActivity) == 4);
  CHECK(g.count_edges(EdgeKind::ObjectTemporal) == 2);
  CHECK(g.count_edges(EdgeKind::ActivityTemporal) == 1);

  const SegmentGraph tiny = make_topology(1, 0);
  CHECK(tiny.num_nodes() == 1);
  CHECK(tiny.num_edges() == 0);
  CHECK(tiny.node(0).kind == NodeKind::Activity);
}

TEST_CASE("canonical node order is segment-major, activity first") {
  const SegmentGraph g = make_topology(3, 2);
  for (int s = 0; s < 3; ++s) {
    CHECK(g.node(g.node_index(s, -1)).kind == NodeKind::Activity);
    CHECK(g.node(g.node_index(s, -1)).segment == s);
    for (int t = 0; t < 2; ++t) {
      const GraphNode& n = g.node(g.node_index(s, t));
      CHECK(n.kind == NodeKind::Object);
      CHECK(n.segment == s);
      CHECK(n.track == t);
    }
  }
  // Edge endpoints respect the canonical order.
  for (const GraphEdge& e : g.edges()) {
    CHECK(e.i < e.j);
    switch (e.kind) {
      case EdgeKind::ObjectObject:
        CHECK(g.node(e.i).kind == NodeKind::Object);
        CHECK(g.node(e.j).kind == NodeKind::Object);
        CHECK(g.node(e.i).segment == g.node(e.j).segment);
        break;
      case EdgeKind::ObjectActivity:
        CHECK(g.node(e.i).kind == NodeKind::Activity);
        CHECK(g.node(e.j).kind == NodeKind::Object);
        break;
      case EdgeKind::ObjectTemporal:
        CHECK(g.node(e.i).track == g.node(e.j).track);
        CHECK(g.node(e.i).segment + 1 == g.node(e.j).segment);
        break;
      case EdgeKind::ActivityTemporal:
        CHECK(g.node(e.i).kind == NodeKind::Activity);
        CHECK(g.node(e.j).kind == NodeKind::Activity);
        CHECK(g.node(e.i).segment + 1 == g.node(e.j).segment);
        break;
    }
  }
}

TEST_CASE("invalid graph inputs are rejected") {
  FeatureDims d;
  d.activity_node = d.object_node = 1;
  d.edge = {1, 1, 1, 1};
  const auto fp = unit_features(d);
  CHECK_THROWS_AS(build_graph({}, {}, fp), std::invalid_argument);
  // Gap between segments.
  CHECK_THROWS_AS(build_graph({{0, 4}, {6, 9}}, {}, fp), std::invalid_argument);
  // Track missing the tail of the sequence.
  CHECK_THROWS_AS(build_graph({{0, 4}, {5, 9}}, {FrameRange{0, 7}}, fp),
                  std::invalid_argument);
}

TEST_CASE("weight layout covers the stacked vector exactly once") {
  FeatureDims d;
  d.activity_node = 3;
  d.object_node = 2;
  d.edge = {2, 1, 2, 1};
  const int Ka = 3, Ko = 4;
  const WeightLayout layout(Ka, Ko, d);
  const Eigen::Index expected = Ka * 3 + Ko * 2 + (Ko * Ko) * 2 + (Ka * Ko) * 1 +
                                (Ko * Ko) * 2 + (Ka * Ka) * 1;
  CHECK(layout.total_dim() == expected);

  // Mark every block; each coordinate must be touched exactly once.
  WeightVector w(layout);
  for (int k = 0; k < Ka; ++k) w.node_block(NodeKind::Activity, k).array() += 1;
  for (int k = 0; k < Ko; ++k) w.node_block(NodeKind::Object, k).array() += 1;
  for (int t = 0; t < kNumEdgeKinds; ++t) {
    const EdgeKind kind = static_cast<EdgeKind>(t);
    for (int l = 0; l < layout.labels_i(kind); ++l)
      for (int k = 0; k < layout.labels_j(kind); ++k)
        w.edge_block(kind, l, k).array() += 1;
  }
  CHECK(w.values.minCoeff() == 1.0);
  CHECK(w.values.maxCoeff() == 1.0);

  // Object--activity blocks pair a sub-activity with an affordance.
  CHECK(layout.labels_i(EdgeKind::ObjectActivity) == Ka);
  CHECK(layout.labels_j(EdgeKind::ObjectActivity) == Ko);
  CHECK(layout.labels_i(EdgeKind::ActivityTemporal) == Ka);
  CHECK(layout.labels_j(EdgeKind::ObjectTemporal) == Ko);
}

TEST_CASE("energy equals the weight/feature-map dot product") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = testutil::random_instance(rng);
    const Labeling y =
        testutil::random_labeling(rng, inst.graph, inst.Ka, inst.Ko);
    const Scalar e = energy(inst.w, inst.graph, y);
    const Vec psi = joint_feature_map(inst.w.layout, inst.graph, y);
    const Vec ref = reference_feature_map(inst.w.layout, inst.graph, y);
    CHECK((psi - ref).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
    CHECK(std::abs(e - inst.w.values.dot(psi)) <= 1e-9 * (1 + std::abs(e)));
  }
}

TEST_CASE("feature map is additive over nodes and edges") {
  Rng rng(42);
  auto inst = testutil::random_instance(rng);
  const Labeling y = testutil::random_labeling(rng, inst.graph, inst.Ka, inst.Ko);
  // Zero weight gives zero energy, single nonzero block picks out one term.
  WeightVector zero(inst.w.layout);
  CHECK(energy(zero, inst.graph, y) == 0.0);

  WeightVector one_block(inst.w.layout);
  one_block.node_block(NodeKind::Activity, y.labels[0]) =
      Vec::Ones(inst.w.layout.dims().activity_node);
  Scalar expect = 0;
  for (int i = 0; i < inst.graph.num_nodes(); ++i)
    if (inst.graph.node(i).kind == NodeKind::Activity &&
        y.labels[i] == y.labels[0])
      expect += inst.graph.node(i).features.sum();
  CHECK(energy(one_block, inst.graph, y) == doctest::Approx(expect));
}

TEST_CASE("score tables agree with the energy") {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = testutil::random_instance(rng);
    const ScoreTables t = ScoreTables::build(inst.w, inst.graph);
    for (int r = 0; r < 5; ++r) {
      const Labeling y =
          testutil::random_labeling(rng, inst.graph, inst.Ka, inst.Ko);
      CHECK(t.score(inst.graph, y) ==
            doctest::Approx(energy(inst.w, inst.graph, y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("relaxed embedding of an integral labeling") {
  Rng rng(44);
  auto inst = testutil::random_instance(rng);
  const Labeling y = testutil::random_labeling(rng, inst.graph, inst.Ka, inst.Ko);
  const RelaxedLabeling r = to_relaxed(inst.graph, y, inst.Ka, inst.Ko);
  CHECK(round_labeling(r).labels == y.labels);
  CHECK(relaxed_energy(inst.w, inst.graph, r) ==
        doctest::Approx(energy(inst.w, inst.graph, y)).epsilon(1e-12));
  const Vec psi_r = joint_feature_map(inst.w.layout, inst.graph, r);
  const Vec psi = joint_feature_map(inst.w.layout, inst.graph, y);
  CHECK((psi_r - psi).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
}

TEST_CASE("dimension mismatches are rejected") {
  FeatureDims d;
  d.activity_node = 2;
  d.object_node = 1;
  d.edge = {1, 1, 1, 1};
  const SegmentGraph g =
      build_graph(even_segments(2), {FrameRange{0, 9}}, unit_features(d));
  FeatureDims wrong = d;
  wrong.activity_node = 3;
  CHECK_THROWS_AS(check_dims(WeightLayout(2, 2, wrong), g),
                  std::invalid_argument);
  CHECK_NOTHROW(check_dims(WeightLayout(2, 2, d), g));
}

} // TEST_SUITE
