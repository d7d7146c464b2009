#include "actaff/synth.hpp"

#include "actaff/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace actaff {

void SynthConfig::validate() const {
  labels.validate();
  const int Ka = labels.num_subactivities();
  const int Ko = labels.num_affordances();
  if (static_cast<int>(palm_velocity.size()) != Ka ||
      static_cast<int>(palm_toward_object.size()) != Ka ||
      static_cast<int>(active_affordance.size()) != Ka)
    throw std::invalid_argument("need one motion template per sub-activity");
  if (static_cast<int>(object_velocity.size()) != Ko)
    throw std::invalid_argument("need one motion template per affordance");
  for (int a : active_affordance)
    if (a < 0 || a >= Ko) throw std::invalid_argument("affordance out of range");
  if (idle_affordance < 0 || idle_affordance >= Ko)
    throw std::invalid_argument("idle affordance out of range");
  if (class_transitions.empty() ||
      class_transitions.size() != labels.highlevel.size() ||
      class_occludes.size() != class_transitions.size())
    throw std::invalid_argument("need one transition table per class");
  for (const Mat& t : class_transitions) {
    if (t.rows() != Ka || t.cols() != Ka)
      throw std::invalid_argument("transition table must be Ka x Ka");
    for (int i = 0; i < Ka; ++i) {
      if (t.row(i).minCoeff() < 0 || t.row(i).sum() <= 0)
        throw std::invalid_argument("transition rows must be sub-stochastic");
    }
  }
  if (num_sequences < 1 || num_subjects < 1 || num_objects < 0 ||
      segments_per_sequence < 1 || segment_len_min < 2 ||
      segment_len_max < segment_len_min || noise < 0)
    throw std::invalid_argument("bad generator sizes");
}

SynthConfig SynthConfig::defaults() {
  SynthConfig c;
  c.labels.subactivities = {"idle", "reach", "lift", "place"};
  c.labels.affordances = {"stationary", "reachable", "liftable", "placeable"};
  c.labels.highlevel = {"fetch_routine", "shelve_routine"};
  c.palm_velocity = {Vec3(0, 0, 0), Vec3(0.02, 0, 0), Vec3(0, 0, 0.035),
                     Vec3(0.012, -0.012, -0.02)};
  c.palm_toward_object = {0, 1, 0, 0};
  c.object_velocity = {Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(0, 0, 0.035),
                       Vec3(0.012, -0.012, -0.02)};
  c.active_affordance = {0, 1, 2, 3};
  c.idle_affordance = 0;
  Mat t0(4, 4), t1(4, 4);
  t0 << 0.2, 0.5, 0.3, 0.0,  //
      0.1, 0.0, 0.7, 0.2,    //
      0.3, 0.3, 0.0, 0.4,    //
      0.6, 0.2, 0.2, 0.0;
  t1 << 0.3, 0.1, 0.1, 0.5,  //
      0.2, 0.0, 0.2, 0.6,    //
      0.2, 0.4, 0.0, 0.4,    //
      0.5, 0.3, 0.2, 0.0;
  c.class_transitions = {t0, t1};
  c.class_occludes = {0, 1}; // the shelving class loses sight of one object
  return c;
}

namespace {

SkeletonFrame base_pose() {
  SkeletonFrame f;
  f.joints[Head] = Vec3(0, 0, 1.70);
  f.joints[Neck] = Vec3(0, 0, 1.50);
  f.joints[Torso] = Vec3(0, 0, 1.20);
  f.joints[LShoulder] = Vec3(-0.20, 0, 1.45);
  f.joints[RShoulder] = Vec3(0.20, 0, 1.45);
  f.joints[LElbow] = Vec3(-0.35, 0, 1.25);
  f.joints[RElbow] = Vec3(0.35, 0, 1.25);
  f.joints[LPalm] = Vec3(-0.45, 0, 1.05);
  f.joints[RPalm] = Vec3(0.45, 0, 1.05);
  return f;
}

} // namespace

std::vector<ActivitySequence> synth_generate(const SynthConfig& cfg,
                                             std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const int num_classes = static_cast<int>(cfg.class_transitions.size());
  const Scalar sigma = cfg.noise * 0.02;

  std::vector<ActivitySequence> out;
  out.reserve(cfg.num_sequences);
  for (int si = 0; si < cfg.num_sequences; ++si) {
    const int cls = si % num_classes;
    const Mat& trans = cfg.class_transitions[cls];
    ActivitySequence seq;
    seq.id = "synth-" + std::to_string(si);
    // Classes cycle fastest so every subject sees every class.
    seq.subject =
        "subject-" + std::to_string((si / num_classes) % cfg.num_subjects);
    seq.highlevel = cfg.labels.highlevel[cls];

    // Segment plan: labels follow the class's transition table.
    std::vector<int> seg_label(cfg.segments_per_sequence);
    std::vector<int> seg_len(cfg.segments_per_sequence);
    std::vector<int> seg_active(cfg.segments_per_sequence);
    for (int s = 0; s < cfg.segments_per_sequence; ++s) {
      seg_label[s] = rng.categorical(
          trans.row(s == 0 ? 0 : seg_label[s - 1]).transpose());
      seg_len[s] =
          cfg.segment_len_min +
          rng.uniform_int(cfg.segment_len_max - cfg.segment_len_min + 1);
      seg_active[s] = cfg.num_objects > 0 ? rng.uniform_int(cfg.num_objects) : -1;
    }

    // Object rest positions on a table in front of the skeleton.
    std::vector<Vec3> obj_pos(cfg.num_objects);
    for (int t = 0; t < cfg.num_objects; ++t)
      obj_pos[t] = Vec3(0.25 * t - 0.25, 0.55, 1.00);
    seq.tracks.resize(cfg.num_objects);
    for (int t = 0; t < cfg.num_objects; ++t) seq.tracks[t].id = t;

    SkeletonFrame pose = base_pose();
    int frame = 0;
    for (int s = 0; s < cfg.segments_per_sequence; ++s) {
      const int a = seg_label[s];
      LabeledSegment gt;
      gt.range = {frame, frame + seg_len[s] - 1};
      gt.subactivity = cfg.labels.subactivities[a];
      gt.affordances.assign(cfg.num_objects,
                            cfg.labels.affordances[cfg.idle_affordance]);
      if (seg_active[s] >= 0)
        gt.affordances[seg_active[s]] =
            cfg.labels.affordances[cfg.active_affordance[a]];
      seq.segments.push_back(gt);

      // The arm snaps back to rest at segment starts; the jump marks the
      // boundary in the motion signal.
      pose.joints[RPalm] = base_pose().joints[RPalm];
      pose.joints[RElbow] = base_pose().joints[RElbow];
      for (int f = 0; f < seg_len[s]; ++f, ++frame) {
        Vec3 v = cfg.palm_velocity[a];
        if (cfg.palm_toward_object[a] && seg_active[s] >= 0) {
          const Vec3 to = obj_pos[seg_active[s]] - pose.joints[RPalm];
          if (to.norm() > 1e-9) v = v.norm() * to.normalized();
        }
        pose.joints[RPalm] += v;
        pose.joints[RElbow] += 0.5 * v;
        SkeletonFrame noisy = pose;
        if (sigma > 0)
          for (int j = 0; j < kNumJoints; ++j)
            for (int c = 0; c < 3; ++c) noisy.joints[j][c] += sigma * rng.normal();
        seq.frames.push_back(noisy);

        for (int t = 0; t < cfg.num_objects; ++t) {
          if (t == seg_active[s])
            obj_pos[t] += cfg.object_velocity[cfg.active_affordance[a]];
          Vec3 c = obj_pos[t];
          if (sigma > 0)
            for (int k = 0; k < 3; ++k) c[k] += sigma * rng.normal();
          seq.tracks[t].centroid.push_back(c);
          seq.tracks[t].bbox.push_back(Eigen::Vector4d(
              320 + 400 * c[0], 240 - 200 * c[2], 340 + 400 * c[0],
              260 - 200 * c[2]));
          seq.tracks[t].occluded.push_back(0);
        }
      }
    }
    if (cfg.class_occludes[cls])
      for (int t = 0; t < std::min(1, cfg.num_objects); ++t)
        for (int f = seq.num_frames() / 3; f < 2 * seq.num_frames() / 3; ++f)
          seq.tracks[t].occluded[f] = 1;
    out.push_back(std::move(seq));
  }
  return out;
}

PlantedDataset make_planted_dataset(int num_instances, int num_segments,
                                    int num_objects, int num_subactivities,
                                    int num_affordances, Scalar noise,
                                    std::uint64_t seed,
                                    const SolverOptions& opt) {
  if (num_instances < 1 || num_segments < 1 || num_objects < 0)
    throw std::invalid_argument("bad planted dataset sizes");
  Rng rng(seed);

  FeatureDims dims;
  dims.activity_node = 6;
  dims.object_node = 6;
  dims.edge = {2, 2, 2, 2};
  WeightLayout layout(num_subactivities, num_affordances, dims);

  PlantedDataset ds;
  ds.layout = layout;
  ds.planted_w = WeightVector(layout);
  for (int k = 0; k < num_subactivities; ++k) {
    auto blk = ds.planted_w.node_block(NodeKind::Activity, k);
    for (int d = 0; d < blk.size(); ++d) blk[d] = rng.normal();
  }
  for (int k = 0; k < num_affordances; ++k) {
    auto blk = ds.planted_w.node_block(NodeKind::Object, k);
    for (int d = 0; d < blk.size(); ++d) blk[d] = rng.normal();
  }
  // Mildly associative pairwise structure: same-label blocks get a positive
  // constant coordinate, the rest stay small and random.
  for (int t = 0; t < kNumEdgeKinds; ++t) {
    const EdgeKind kind = static_cast<EdgeKind>(t);
    for (int l = 0; l < layout.labels_i(kind); ++l)
      for (int k = 0; k < layout.labels_j(kind); ++k) {
        auto blk = ds.planted_w.edge_block(kind, l, k);
        blk[0] = (kind != EdgeKind::ObjectActivity && l == k) ? 0.4
                                                              : 0.1 * rng.normal();
        blk[1] = 0.1 * rng.normal();
      }
  }

  // Separability with a workable margin, not just argmax consistency: a node
  // whose top two unary scores nearly tie forces the margin-rescaled QP into
  // huge ||w||, so finite C leaves training errors. Resampling until the gap
  // clears kMinUnaryGap keeps the planted weights a wide-margin separator.
  constexpr Scalar kMinUnaryGap = 1.5;
  auto unary_gap = [&](NodeKind kind, int labels, const Vec& f) {
    Scalar best = -std::numeric_limits<Scalar>::infinity(), second = best;
    for (int k = 0; k < labels; ++k) {
      const Scalar s = ds.planted_w.node_block(kind, k).dot(f);
      if (s > best) {
        second = best;
        best = s;
      } else if (s > second) {
        second = s;
      }
    }
    return labels > 1 ? best - second
                      : std::numeric_limits<Scalar>::infinity();
  };

  for (int i = 0; i < num_instances; ++i) {
    // Clean features decide the truth; noise only perturbs what is observed.
    std::vector<Vec> node_feat;
    std::vector<Vec> edge_feat;
    auto fresh_node = [&](NodeKind kind, int labels) {
      Vec f(6);
      do {
        for (int d = 0; d < 6; ++d) f[d] = rng.normal();
      } while (unary_gap(kind, labels, f) < kMinUnaryGap);
      return f;
    };
    auto fresh_edge = [&]() {
      Vec f(2);
      f[0] = 1.0;
      f[1] = 0.2 * rng.normal();
      return f;
    };
    std::vector<FrameRange> segs;
    for (int s = 0; s < num_segments; ++s) segs.push_back({10 * s, 10 * s + 9});
    std::vector<FrameRange> extents(num_objects,
                                    FrameRange{0, 10 * num_segments - 1});
    size_t node_at = 0, edge_at = 0;
    FeatureProvider clean;
    clean.activity_node = [&](int) { return node_feat[node_at++]; };
    clean.object_node = [&](int, int) { return node_feat[node_at++]; };
    clean.object_object = [&](int, int, int) { return edge_feat[edge_at++]; };
    clean.object_activity = [&](int, int) { return edge_feat[edge_at++]; };
    clean.object_temporal = [&](int, int) { return edge_feat[edge_at++]; };
    clean.activity_temporal = [&](int) { return edge_feat[edge_at++]; };

    // build_graph consumes node features segment-major, activity node first.
    const int want_nodes = num_segments * (num_objects + 1);
    for (int n = 0; n < want_nodes; ++n) {
      const bool is_activity = n % (num_objects + 1) == 0;
      node_feat.push_back(is_activity
                              ? fresh_node(NodeKind::Activity, num_subactivities)
                              : fresh_node(NodeKind::Object, num_affordances));
    }
    const int want_edges =
        num_segments * (num_objects + num_objects * (num_objects - 1) / 2) +
        (num_segments - 1) * (num_objects + 1);
    for (int e = 0; e < want_edges; ++e) edge_feat.push_back(fresh_edge());

    SegmentGraph clean_graph = build_graph(segs, extents, clean);
    ExactSolution truth = solve_exact(ds.planted_w, clean_graph, opt);
    if (truth.status != SolveStatus::Optimal)
      throw std::runtime_error(
          "planted truth exceeded the solver budget; raise max_bb_nodes");

    if (noise > 0) {
      for (Vec& f : node_feat)
        for (int d = 0; d < f.size(); ++d) f[d] += noise * rng.normal();
      for (Vec& f : edge_feat) f[1] += noise * rng.normal();
    }
    node_at = edge_at = 0;
    SegmentGraph noisy_graph = build_graph(segs, extents, clean);
    ds.instances.push_back({std::move(noisy_graph), std::move(truth.labeling)});
  }
  return ds;
}

} // namespace actaff
