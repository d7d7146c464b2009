#pragma once

#include "actaff/types.hpp"

#include <vector>

namespace actaff {

// One product term c * u_p * u_q, p != q.
struct QuadraticTerm {
  int p;
  int q;
  Scalar c;
};

struct RoofDualResult {
  std::vector<Scalar> values; // per variable: 0, 0.5 or 1
  Scalar bound;               // optimum of the half-integral relaxation
};

// Maximizes  sum_p unary[p] u_p + sum_t c_t u_{p_t} u_{q_t}  over {0,1}^n by
// roof duality: the objective is mirrored onto complemented copies of the
// variables so every pairwise term becomes submodular, and the resulting
// problem is solved exactly with one min-cut. The returned values solve the
// relaxation over {0, 0.5, 1}^n, so `bound` upper-bounds every 0/1 assignment;
// integral coordinates are weakly persistent.
RoofDualResult roof_dual_maximize(int num_vars, const std::vector<Scalar>& unary,
                                  const std::vector<QuadraticTerm>& terms);

} // namespace actaff
