#include "actaff/features.hpp"
#include "actaff/multiseg.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace actaff;

namespace {

// Direct KKT solve of  min 0.5|theta|^2 - a.theta  s.t.  sum_n theta_n = 1,
// one label column at a time: stationarity theta - a + lambda 1 = 0 plus the
// primal constraint form a linear system solved here with a dense
// factorization, independent of the closed-form projection.
Mat kkt_theta(const Mat& a) {
  const int H = static_cast<int>(a.rows());
  Mat theta(H, a.cols());
  Mat A = Mat::Zero(H + 1, H + 1);
  A.topLeftCorner(H, H).setIdentity();
  A.topRightCorner(H, 1).setOnes();
  A.bottomLeftCorner(1, H).setOnes();
  const auto lu = A.fullPivLu();
  for (int k = 0; k < a.cols(); ++k) {
    Vec rhs(H + 1);
    rhs.head(H) = a.col(k);
    rhs[H] = 1.0;
    theta.col(k) = lu.solve(rhs).head(H);
  }
  return theta;
}

// One-segment graph whose activity node prefers `label` by a wide margin.
struct TinyModel {
  SegmentGraph graph;
  WeightVector w;
};

FeatureProvider indicator_features() {
  FeatureProvider fp;
  fp.activity_node = [](int) { return Vec::Ones(1); };
  fp.object_node = [](int, int) { return Vec::Ones(1); };
  fp.object_object = [](int, int, int) { return Vec::Ones(1); };
  fp.object_activity = [](int, int) { return Vec::Ones(1); };
  fp.object_temporal = [](int, int) { return Vec::Ones(1); };
  fp.activity_temporal = [](int) { return Vec::Ones(1); };
  return fp;
}

WeightLayout unit_layout(int Ka, int Ko) {
  FeatureDims d;
  d.activity_node = d.object_node = 1;
  d.edge = {1, 1, 1, 1};
  return WeightLayout(Ka, Ko, d);
}

} // namespace

TEST_SUITE("multiseg") {

TEST_CASE("expanding and projecting a labeling round-trips") {
  Rng rng(401);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = testutil::random_instance(rng);
    const Labeling y =
        testutil::random_labeling(rng, inst.graph, inst.Ka, inst.Ko);
    const FrameLabeling frames = expand_to_frames(inst.graph, y);
    CHECK(frames.num_frames() == inst.graph.segments().back().last + 1);
    CHECK(frames.num_tracks() == inst.graph.num_tracks());
    const Labeling back = project_to_segments(inst.graph, frames);
    CHECK(back.labels == y.labels);
  }
}

TEST_CASE("projection takes the majority frame label") {
  const SegmentGraph fine = build_graph({{0, 2}, {3, 4}}, {},
                                        indicator_features());
  const SegmentGraph coarse =
      build_graph({{0, 4}}, {}, indicator_features());
  // Three frames of label 1, two of label 0.
  const FrameLabeling frames = expand_to_frames(fine, Labeling{{1, 0}});
  CHECK(project_to_segments(coarse, frames).labels == std::vector<int>{1});

  // A tie resolves to the lower label index.
  const SegmentGraph even = build_graph({{0, 1}, {2, 3}}, {},
                                        indicator_features());
  const FrameLabeling tied =
      expand_to_frames(even, Labeling{{3, 0}});
  const SegmentGraph whole = build_graph({{0, 3}}, {}, indicator_features());
  CHECK(project_to_segments(whole, tied).labels == std::vector<int>{0});
}

TEST_CASE("ground-truth frames spread segment labels") {
  ActivitySequence seq;
  seq.id = "t";
  seq.subject = "s";
  seq.frames.resize(6);
  for (auto& f : seq.frames)
    for (auto& j : f.joints) j = Vec3::Zero();
  ObjectTrack track;
  track.centroid.assign(6, Vec3::Zero());
  track.bbox.assign(6, Eigen::Vector4d::Zero());
  track.occluded.assign(6, 0);
  seq.tracks = {track};
  LabelSpace ls;
  ls.subactivities = {"a", "b"};
  ls.affordances = {"x", "y"};
  ls.highlevel = {"h"};
  seq.segments = {{{0, 3}, "b", {"x"}}, {{4, 5}, "a", {"y"}}};

  const FrameLabeling fl = truth_frames(seq, ls);
  CHECK(fl.subactivity == std::vector<int>{1, 1, 1, 1, 0, 0});
  REQUIRE(fl.num_tracks() == 1);
  CHECK(fl.affordance[0] == std::vector<int>{0, 0, 0, 0, 1, 1});
}

TEST_CASE("phi score counts theta-weighted frame agreements") {
  const SegmentGraph g =
      build_graph({{0, 4}, {5, 9}}, {FrameRange{0, 9}}, indicator_features());
  const Labeling y_h{{0, 1, 1, 0}}; // activity 0|1, object 1|0 per segment
  const FrameLabeling consistent = expand_to_frames(g, y_h);
  const int Ka = 2;

  Vec theta = Vec::Zero(4); // two sub-activity labels then two affordances
  CHECK(phi_score(g, y_h, consistent, theta, Ka) == 0.0);

  theta.setConstant(0.25);
  // Twenty frame instances (10 activity + 10 object), all agreeing.
  CHECK(phi_score(g, y_h, consistent, theta, Ka) == doctest::Approx(5.0));

  FrameLabeling disagree = consistent;
  for (int f = 0; f < 10; ++f) {
    disagree.subactivity[f] = 1 - disagree.subactivity[f];
    disagree.affordance[0][f] = 1 - disagree.affordance[0][f];
  }
  CHECK(phi_score(g, y_h, disagree, theta, Ka) == 0.0);

  // Per-label weighting: only the five frames where the hypothesis says
  // activity label 0 count toward theta[0].
  Vec only0 = Vec::Zero(4);
  only0[0] = 1.0;
  CHECK(phi_score(g, y_h, consistent, only0, Ka) == doctest::Approx(5.0));
}

TEST_CASE("agreement counts on a hand-built example") {
  const SegmentGraph g =
      build_graph({{0, 1}, {2, 3}}, {FrameRange{0, 3}}, indicator_features());
  ThetaExample ex;
  // Hypothesis 0 labels everything correctly; hypothesis 1 misses the
  // second segment's activity.
  ex.hypotheses.push_back({&g, Labeling{{0, 1, 1, 0}}});
  ex.hypotheses.push_back({&g, Labeling{{0, 1, 0, 0}}});
  ex.truth = expand_to_frames(g, Labeling{{0, 1, 1, 0}});
  const Mat a = agreement_counts({ex}, 2, 2);
  REQUIRE(a.rows() == 2);
  REQUIRE(a.cols() == 4);
  // Truth frames: activity label 0 on frames 0-1, label 1 on frames 2-3;
  // affordance label 1 on 0-1, label 0 on 2-3.
  CHECK(a(0, 0) == 2.0); // hyp 0, activity label 0
  CHECK(a(0, 1) == 2.0);
  CHECK(a(0, 2) == 2.0);
  CHECK(a(0, 3) == 2.0);
  CHECK(a(1, 0) == 2.0);
  CHECK(a(1, 1) == 0.0); // hyp 1 relabeled those frames
  CHECK(a(1, 2) == 2.0);
  CHECK(a(1, 3) == 2.0);
}

TEST_CASE("theta projection formula on hand counts") {
  // Counts (3, 1) over two hypotheses: theta = a + (1 - sum a) / H.
  Mat a(2, 1);
  a << 3, 1;
  // The independent KKT solve pins the expected projection values.
  const Mat expect = kkt_theta(a);
  CHECK(expect(0, 0) == doctest::Approx(1.5));
  CHECK(expect(1, 0) == doctest::Approx(-0.5));
  CHECK(expect.col(0).sum() == doctest::Approx(1.0));
}

TEST_CASE("learn_theta matches the dense KKT solve") {
  Rng rng(402);
  const SegmentGraph g =
      build_graph({{0, 1}, {2, 3}}, {FrameRange{0, 3}}, indicator_features());
  for (int trial = 0; trial < 10; ++trial) {
    const int H = 1 + rng.uniform_int(4);
    std::vector<ThetaExample> heldout(2);
    for (ThetaExample& ex : heldout) {
      for (int n = 0; n < H; ++n)
        ex.hypotheses.push_back(
            {&g, testutil::random_labeling(rng, g, 2, 2)});
      ex.truth = expand_to_frames(g, testutil::random_labeling(rng, g, 2, 2));
    }
    const ThetaWeights theta = learn_theta(heldout, 2, 2);
    const Mat counts = agreement_counts(heldout, 2, 2);
    const Mat expect = kkt_theta(counts);
    CHECK((theta.values - expect).lpNorm<Eigen::Infinity>() <= 1e-10);
    for (int k = 0; k < theta.values.cols(); ++k)
      CHECK(theta.values.col(k).sum() == doctest::Approx(1.0));
    CHECK(theta_kkt_residual(theta, counts) <= 1e-8);
  }
}

TEST_CASE("degenerate theta cases") {
  const SegmentGraph g =
      build_graph({{0, 1}, {2, 3}}, {FrameRange{0, 3}}, indicator_features());
  ThetaExample ex;
  ex.hypotheses.push_back({&g, Labeling{{0, 1, 1, 0}}});
  ex.truth = expand_to_frames(g, Labeling{{0, 1, 1, 0}});

  // A single hypothesis owns every label.
  const ThetaWeights solo = learn_theta({ex}, 2, 2);
  REQUIRE(solo.num_hypotheses() == 1);
  for (int k = 0; k < 4; ++k) CHECK(solo.values(0, k) == doctest::Approx(1.0));

  // Identical hypotheses split every label evenly.
  ex.hypotheses.push_back(ex.hypotheses[0]);
  const ThetaWeights twin = learn_theta({ex}, 2, 2);
  for (int k = 0; k < 4; ++k) {
    CHECK(twin.values(0, k) == doctest::Approx(0.5));
    CHECK(twin.values(1, k) == doctest::Approx(0.5));
  }

  CHECK_THROWS_AS(learn_theta({}, 2, 2), std::invalid_argument);
}

TEST_CASE("joint inference with one hypothesis is its plain maximizer") {
  WeightVector w{unit_layout(2, 2)};
  w.node_block(NodeKind::Activity, 1)[0] = 2.0;
  w.node_block(NodeKind::Object, 0)[0] = 1.0;
  const SegmentGraph g =
      build_graph({{0, 4}, {5, 9}}, {FrameRange{0, 9}}, indicator_features());

  ThetaWeights theta;
  theta.values = Mat::Ones(1, 4);
  theta.num_subactivities = 2;

  const JointInferenceResult res = joint_infer({&g}, {&w}, theta);
  CHECK(res.converged);
  CHECK(res.rounds <= 2);
  const ExactSolution plain = solve_exact(w, g);
  const FrameLabeling expect = expand_to_frames(g, plain.labeling);
  CHECK(res.fused.subactivity == expect.subactivity);
  CHECK(res.fused.affordance == expect.affordance);
  CHECK(res.hypothesis_labels[0].labels == plain.labeling.labels);
}

TEST_CASE("identical hypotheses agree on the common maximizer") {
  WeightVector w{unit_layout(2, 2)};
  w.node_block(NodeKind::Activity, 0)[0] = 1.5;
  w.node_block(NodeKind::Object, 1)[0] = 0.5;
  const SegmentGraph g =
      build_graph({{0, 4}, {5, 9}}, {FrameRange{0, 9}}, indicator_features());

  ThetaWeights theta;
  theta.values = Mat::Constant(3, 4, 1.0 / 3);
  theta.num_subactivities = 2;

  const JointInferenceResult res =
      joint_infer({&g, &g, &g}, {&w, &w, &w}, theta);
  CHECK(res.converged);
  const FrameLabeling expect = expand_to_frames(g, solve_exact(w, g).labeling);
  CHECK(res.fused.subactivity == expect.subactivity);
  CHECK(res.fused.affordance == expect.affordance);
}

TEST_CASE("conflicting hypotheses follow the heavier theta vote") {
  // Hypothesis A (two segments) has no preference of its own; hypothesis B
  // (one segment) insists on label 1 everywhere. The fused vote follows B's
  // heavier theta and the agreement bonus then pulls A onto the same labels.
  const SegmentGraph ga =
      build_graph({{0, 4}, {5, 9}}, {}, indicator_features());
  const SegmentGraph gb = build_graph({{0, 9}}, {}, indicator_features());

  // A's model is indifferent between the activity labels; B's strongly
  // prefers label 1 everywhere.
  WeightVector wa{unit_layout(2, 1)};
  WeightVector wb{unit_layout(2, 1)};
  wb.node_block(NodeKind::Activity, 1)[0] = 5.0;

  // A is indifferent, so the theta-weighted agreement bonus decides its
  // labels; B's model dominates its own solve.
  ThetaWeights theta;
  theta.values = Mat::Zero(2, 3);
  theta.num_subactivities = 2;
  theta.values(0, 0) = 0.4; // A's confidence on activity label 0
  theta.values(0, 1) = 0.1;
  theta.values(1, 0) = 0.6;
  theta.values(1, 1) = 0.9; // B's confidence on activity label 1

  const JointInferenceResult res = joint_infer({&ga, &gb}, {&wa, &wb}, theta);
  CHECK(res.converged);
  // Fused vote per frame: label 1 collects theta from B (0.9) and, once A
  // aligns, from A (0.1); label 0 musters at most 0.4.
  CHECK(res.fused.subactivity == std::vector<int>(10, 1));
  for (size_t i = 1; i < res.objective_trace.size(); ++i)
    CHECK(res.objective_trace[i] >= res.objective_trace[i - 1] - 1e-9);
}

TEST_CASE("joint inference trace never decreases on random inputs") {
  Rng rng(403);
  for (int trial = 0; trial < 6; ++trial) {
    const int frames = 12;
    std::vector<FrameRange> segs_a, segs_b;
    for (int s = 0; s < 3; ++s) segs_a.push_back({4 * s, 4 * s + 3});
    for (int s = 0; s < 2; ++s) segs_b.push_back({6 * s, 6 * s + 5});
    const std::vector<FrameRange> extent{FrameRange{0, frames - 1}};

    FeatureDims d;
    d.activity_node = d.object_node = 2;
    d.edge = {1, 1, 1, 1};
    FeatureProvider fp;
    fp.activity_node = [&](int) { return testutil::random_vec(rng, 2); };
    fp.object_node = [&](int, int) { return testutil::random_vec(rng, 2); };
    fp.object_object = [&](int, int, int) {
      return testutil::random_vec(rng, 1);
    };
    fp.object_activity = [&](int, int) { return testutil::random_vec(rng, 1); };
    fp.object_temporal = [&](int, int) { return testutil::random_vec(rng, 1); };
    fp.activity_temporal = [&](int) { return testutil::random_vec(rng, 1); };

    const SegmentGraph ga = build_graph(segs_a, extent, fp);
    const SegmentGraph gb = build_graph(segs_b, extent, fp);
    WeightVector wa{WeightLayout(3, 2, d)};
    WeightVector wb{WeightLayout(3, 2, d)};
    wa.values = testutil::random_vec(rng, (int)wa.layout.total_dim());
    wb.values = testutil::random_vec(rng, (int)wb.layout.total_dim());

    ThetaWeights theta;
    theta.values = Mat(2, 5);
    for (int n = 0; n < 2; ++n)
      for (int k = 0; k < 5; ++k) theta.values(n, k) = rng.uniform(0.0, 1.0);
    theta.num_subactivities = 3;

    const JointInferenceResult res =
        joint_infer({&ga, &gb}, {&wa, &wb}, theta, 25);
    CHECK(res.converged);
    CHECK(res.rounds <= 25);
    REQUIRE(res.objective_trace.size() >= 1);
    for (size_t i = 1; i < res.objective_trace.size(); ++i)
      CHECK(res.objective_trace[i] >= res.objective_trace[i - 1] - 1e-9);
  }
}

} // TEST_SUITE
