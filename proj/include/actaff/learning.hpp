#pragma once

#include "actaff/inference.hpp"

#include <vector>

namespace actaff {

// Hamming distance between labelings counted over indicator coordinates: a
// node labeled differently contributes 2.
Scalar hamming_loss(const Labeling& a, const Labeling& b);
// Fractional counterpart, linear in the relaxed indicators.
Scalar hamming_loss(const Labeling& truth, const RelaxedLabeling& y);

struct TrainExample {
  const SegmentGraph* graph;
  Labeling truth;
};

struct TrainConfig {
  Scalar C = 1.0;          // slack penalty
  Scalar epsilon = 0.01;   // cutting-plane termination tolerance
  int max_iterations = 200;
  int threads = 1;         // separation-oracle fan-out
};

struct IterationInfo {
  int cuts;         // working-set size after the iteration
  Scalar violation; // margin violation of the freshly separated labeling
  Scalar xi;
  Scalar objective; // 0.5 |w|^2 + C xi
};

struct TrainResult {
  WeightVector w;
  Scalar xi = 0;
  bool converged = false; // false: iteration cap hit; w is the best iterate
  std::vector<IterationInfo> iterations;
};

// One-slack margin-rescaling cutting plane. Each iteration solves the
// loss-augmented relaxation per example, averages feature differences and
// losses over the training set into a single cut, and re-solves the
// restricted QP; terminates when the newest cut is violated by at most
// epsilon beyond the current slack.
TrainResult train(const std::vector<TrainExample>& data,
                  const WeightLayout& layout, const TrainConfig& cfg = {});

struct RestrictedQpSolution {
  Vec alpha;
  Vec w;
  Scalar xi = 0;
};

// min_w,xi 0.5 |w|^2 + C xi  s.t.  w . g_j >= l_j - xi for all cuts, xi >= 0,
// solved in the dual (alpha >= 0, sum alpha <= C) by coordinate ascent with
// pairwise transfers; runs until the duality gap is at most 1e-8.
RestrictedQpSolution solve_restricted_qp(const std::vector<Vec>& cut_gradients,
                                         const std::vector<Scalar>& cut_losses,
                                         Scalar C, const Vec* warm_alpha = nullptr);

} // namespace actaff
