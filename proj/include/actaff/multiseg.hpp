#pragma once

#include "actaff/dataset.hpp"
#include "actaff/inference.hpp"
#include "actaff/segment_graph.hpp"
#include "actaff/weight_vector.hpp"

#include <vector>

namespace actaff {

// Per-frame labels: the common refinement that segmentation hypotheses with
// different boundaries can all be compared on.
struct FrameLabeling {
  std::vector<int> subactivity;            // per frame
  std::vector<std::vector<int>> affordance; // [track][frame]

  int num_frames() const { return static_cast<int>(subactivity.size()); }
  int num_tracks() const { return static_cast<int>(affordance.size()); }
};

// Copies each node's label onto the frames of its segment. The graph's
// segmentation must start at frame 0.
FrameLabeling expand_to_frames(const SegmentGraph& g, const Labeling& y);

// Majority frame label per segment (ties to the lowest index); projects a
// frame labeling onto an arbitrary segmentation, e.g. to derive training
// labels for a hypothesis that disagrees with the ground-truth boundaries.
Labeling project_to_segments(const SegmentGraph& g, const FrameLabeling& y);

// Ground-truth labels spread over the frames they cover.
FrameLabeling truth_frames(const ActivitySequence& seq, const LabelSpace& ls);

// Per-hypothesis label confidences. Column order: sub-activity labels
// [0, Ka), then affordance labels [Ka, Ka + Ko).
struct ThetaWeights {
  Mat values; // hypotheses x (Ka + Ko)
  int num_subactivities = 0;

  int num_hypotheses() const { return static_cast<int>(values.rows()); }
};

// Score for carrying hypothesis labels over to a frame labeling: each frame
// instance whose fused label agrees with its hypothesis segment's label k
// contributes theta_row[k] (affordance labels offset by Ka).
Scalar phi_score(const SegmentGraph& g, const Labeling& y_h,
                 const FrameLabeling& y, const Vec& theta_row, int Ka);

struct HypothesisPrediction {
  const SegmentGraph* graph;
  Labeling labels;
};

struct ThetaExample {
  std::vector<HypothesisPrediction> hypotheses; // same order in every example
  FrameLabeling truth;
};

// Frame instances where hypothesis n agrees with the truth on label k,
// summed over the held-out set; rows are hypotheses.
Mat agreement_counts(const std::vector<ThetaExample>& heldout, int Ka, int Ko);

// Minimizer of 0.5 |theta|^2 - sum_nk theta_nk a_nk subject to a unit column
// sum per label: theta_nk = a_nk + (1 - sum_m a_mk) / H. Entries may be
// negative.
ThetaWeights learn_theta(const std::vector<ThetaExample>& heldout, int Ka,
                         int Ko);

// Max-norm violation of the optimality conditions of that QP: column sums off
// one, or theta - a not constant within a column.
Scalar theta_kkt_residual(const ThetaWeights& theta, const Mat& counts);

struct JointInferenceResult {
  FrameLabeling fused;
  std::vector<Labeling> hypothesis_labels;
  std::vector<Scalar> objective_trace; // after init and after every round
  int rounds = 0;
  bool converged = false; // fixed point reached before max_rounds
};

// Alternating maximization: (a) re-solve each hypothesis with theta-weighted
// agreement bonuses on its node potentials, (b) re-fuse by the per-instance
// theta-weighted vote (ties to the lowest label). The shared objective
// sum_n [energy_n + phi_n] never decreases. Initial fused labeling is the
// vote over the unassisted per-hypothesis maximizers.
JointInferenceResult joint_infer(const std::vector<const SegmentGraph*>& graphs,
                                 const std::vector<const WeightVector*>& models,
                                 const ThetaWeights& theta, int max_rounds = 20,
                                 const SolverOptions& opt = {});

} // namespace actaff
