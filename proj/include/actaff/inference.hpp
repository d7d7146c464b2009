#pragma once

#include "actaff/energy.hpp"
#include "actaff/segment_graph.hpp"
#include "actaff/weight_vector.hpp"

namespace actaff {

struct SolverOptions {
  long max_bb_nodes = 1000000; // branch-and-bound node budget
  Scalar tolerance = 1e-10;    // pruning slack; bounds the optimality gap
  Scalar time_budget_sec = 0;  // 0 = unlimited
};

enum class SolveStatus { Optimal, ResourceLimit };

struct RelaxedSolution {
  RelaxedLabeling labeling; // node values half-integral, edge values consistent
  Scalar objective;         // relaxation optimum; >= every integral labeling
};

struct ExactSolution {
  Labeling labeling;
  Scalar objective;
  SolveStatus status; // ResourceLimit: labeling is the best incumbent found
  long nodes_explored = 0;
};

// LP relaxation of the labeling problem: indicators relaxed to [0,1] with
// product variables z <= y_i, z <= y_j, y_i + y_j <= z + 1 and without the
// one-label-per-node constraint. Solved by roof duality; optima are
// half-integral. Edge values are filled in optimally given the node values.
RelaxedSolution solve_relaxed(const WeightVector& w, const SegmentGraph& g);
RelaxedSolution solve_relaxed_tables(const SegmentGraph& g, const ScoreTables& t);

// Exact maximizer over one-label-per-node assignments: depth-first
// branch-and-bound, bounding each subproblem with the relaxation above and
// seeding incumbents by rounding. Branches on the lowest-index unfixed node
// (preferring nodes left fractional by the relaxation) with labels tried in
// ascending order, which keeps results deterministic.
ExactSolution solve_exact(const WeightVector& w, const SegmentGraph& g,
                          const SolverOptions& opt = {});
ExactSolution maximize_tables(const SegmentGraph& g, const ScoreTables& t,
                              const SolverOptions& opt = {});

enum class SolverMode { Relaxed, Exact };

struct LossAugmentedSolution {
  RelaxedLabeling labeling; // integral node values when mode == Exact
  Scalar objective;         // max of score + Hamming distance to truth
  SolveStatus status = SolveStatus::Optimal;
};

// Maximizes energy(w, g, y') + |y - y'|_H over y'. The Hamming term is linear
// in the indicators, so it folds into the unary tables. Relaxed mode is the
// separation oracle used in training; Exact mode maximizes over integral
// labelings.
LossAugmentedSolution solve_loss_augmented(const WeightVector& w,
                                           const SegmentGraph& g,
                                           const Labeling& truth, SolverMode mode,
                                           const SolverOptions& opt = {});

struct OracleSolution {
  Labeling labeling;
  Scalar objective;
};

// Exhaustive search over all labelings in lexicographic order (ties keep the
// first maximum, i.e. the lexicographically smallest). loss_against, when
// given, adds the Hamming distance to that labeling. Refuses instances with
// more than max_configs assignments.
OracleSolution brute_force_oracle(const WeightVector& w, const SegmentGraph& g,
                                  const Labeling* loss_against = nullptr,
                                  long max_configs = 10000000);

} // namespace actaff
