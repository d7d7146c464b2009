#include "actaff/inference.hpp"

#include "actaff/qpbo.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>

namespace actaff {

namespace {

std::vector<int> label_counts(const ScoreTables& t) {
  std::vector<int> K;
  K.reserve(t.unary.size());
  for (const Vec& u : t.unary) K.push_back(static_cast<int>(u.size()));
  return K;
}

std::vector<int> var_bases(const std::vector<int>& K) {
  std::vector<int> base(K.size() + 1, 0);
  for (size_t i = 0; i < K.size(); ++i) base[i + 1] = base[i] + K[i];
  return base;
}

// Optimal product variable given endpoint values and the term coefficient.
Scalar best_z(Scalar c, Scalar yi, Scalar yj) {
  return c > 0 ? std::min(yi, yj) : std::max<Scalar>(0.0, yi + yj - 1.0);
}

RelaxedLabeling relaxed_from_values(const SegmentGraph& g, const ScoreTables& t,
                                    const std::vector<int>& K,
                                    const std::vector<int>& base,
                                    const std::vector<Scalar>& values) {
  RelaxedLabeling rl;
  rl.node_values.resize(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) {
    rl.node_values[i] = Vec(K[i]);
    for (int k = 0; k < K[i]; ++k) rl.node_values[i][k] = values[base[i] + k];
  }
  rl.edge_values.resize(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    const GraphEdge& ge = g.edge(e);
    const Mat& p = t.pairwise[e];
    Mat z(p.rows(), p.cols());
    for (int l = 0; l < p.rows(); ++l)
      for (int k = 0; k < p.cols(); ++k)
        z(l, k) = best_z(p(l, k), rl.node_values[ge.i][l], rl.node_values[ge.j][k]);
    rl.edge_values[e] = std::move(z);
  }
  return rl;
}

// Depth-first branch-and-bound over tables; see solve_exact.
class BranchAndBound {
 public:
  BranchAndBound(const SegmentGraph& g, const ScoreTables& t,
                 const SolverOptions& opt)
      : g_(g), t_(t), opt_(opt), K_(label_counts(t)), base_(var_bases(K_)),
        fixed_(g.num_nodes(), -1) {
    if (opt_.time_budget_sec > 0)
      deadline_ = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(opt_.time_budget_sec));
  }

  ExactSolution run() {
    recurse();
    ExactSolution s;
    s.labeling = best_;
    s.objective = best_val_;
    s.status = out_of_budget_ ? SolveStatus::ResourceLimit : SolveStatus::Optimal;
    s.nodes_explored = nodes_;
    return s;
  }

 private:
  void recurse() {
    if (nodes_ >= opt_.max_bb_nodes ||
        (opt_.time_budget_sec > 0 && std::chrono::steady_clock::now() > deadline_)) {
      out_of_budget_ = true;
      return;
    }
    ++nodes_;

    // Reduced problem over the unfixed nodes.
    Scalar fixed_const = 0;
    std::vector<Scalar> unary;
    unary.reserve(base_.back());
    std::vector<int> rbase(g_.num_nodes() + 1, 0);
    for (int i = 0; i < g_.num_nodes(); ++i) {
      if (fixed_[i] < 0) {
        for (int k = 0; k < K_[i]; ++k) unary.push_back(t_.unary[i][k]);
        rbase[i + 1] = rbase[i] + K_[i];
      } else {
        fixed_const += t_.unary[i][fixed_[i]];
        rbase[i + 1] = rbase[i];
      }
    }
    std::vector<QuadraticTerm> terms;
    for (int e = 0; e < g_.num_edges(); ++e) {
      const GraphEdge& ge = g_.edge(e);
      const Mat& p = t_.pairwise[e];
      const int fi = fixed_[ge.i], fj = fixed_[ge.j];
      if (fi >= 0 && fj >= 0) {
        fixed_const += p(fi, fj);
      } else if (fi >= 0) {
        for (int k = 0; k < K_[ge.j]; ++k) unary[rbase[ge.j] + k] += p(fi, k);
      } else if (fj >= 0) {
        for (int l = 0; l < K_[ge.i]; ++l) unary[rbase[ge.i] + l] += p(l, fj);
      } else {
        for (int l = 0; l < K_[ge.i]; ++l)
          for (int k = 0; k < K_[ge.j]; ++k)
            if (p(l, k) != 0.0)
              terms.push_back({rbase[ge.i] + l, rbase[ge.j] + k, p(l, k)});
      }
    }
    // Shift every unfixed node's unaries so its best label scores zero. The
    // objective is unchanged on one-label assignments, but the unconstrained
    // relaxation can no longer collect several positive labels of one node,
    // which tightens the bound by roughly the sum of positive unaries.
    Scalar shift_const = 0;
    for (int i = 0; i < g_.num_nodes(); ++i) {
      if (fixed_[i] >= 0) continue;
      Scalar m = unary[rbase[i]];
      for (int k = 1; k < K_[i]; ++k)
        m = std::max(m, unary[rbase[i] + k]);
      for (int k = 0; k < K_[i]; ++k) unary[rbase[i] + k] -= m;
      shift_const += m;
    }
    const RoofDualResult rd =
        roof_dual_maximize(static_cast<int>(unary.size()), unary, terms);
    const Scalar bound = fixed_const + shift_const + rd.bound;

    // Incumbent from rounding the relaxation.
    Labeling cand;
    cand.labels.resize(g_.num_nodes());
    for (int i = 0; i < g_.num_nodes(); ++i) {
      if (fixed_[i] >= 0) {
        cand.labels[i] = fixed_[i];
        continue;
      }
      int arg = 0;
      for (int k = 1; k < K_[i]; ++k)
        if (rd.values[rbase[i] + k] > rd.values[rbase[i] + arg]) arg = k;
      cand.labels[i] = arg;
    }
    const Scalar cand_val = t_.score(g_, cand);
    if (!has_best_ || cand_val > best_val_ ||
        (cand_val == best_val_ && cand.labels < best_.labels)) {
      best_ = cand;
      best_val_ = cand_val;
      has_best_ = true;
    }

    if (bound <= best_val_ + opt_.tolerance) return;

    int branch = -1;
    for (int i = 0; i < g_.num_nodes() && branch < 0; ++i) {
      if (fixed_[i] >= 0) continue;
      for (int k = 0; k < K_[i]; ++k)
        if (rd.values[rbase[i] + k] == 0.5) {
          branch = i;
          break;
        }
    }
    if (branch < 0)
      for (int i = 0; i < g_.num_nodes(); ++i)
        if (fixed_[i] < 0) {
          branch = i;
          break;
        }
    if (branch < 0) return; // every node fixed; bound check already returned

    for (int k = 0; k < K_[branch] && !out_of_budget_; ++k) {
      fixed_[branch] = k;
      recurse();
    }
    fixed_[branch] = -1;
  }

  const SegmentGraph& g_;
  const ScoreTables& t_;
  const SolverOptions& opt_;
  std::vector<int> K_;
  std::vector<int> base_;
  std::vector<int> fixed_;
  Labeling best_;
  Scalar best_val_ = 0;
  bool has_best_ = false;
  long nodes_ = 0;
  bool out_of_budget_ = false;
  std::chrono::steady_clock::time_point deadline_;
};

} // namespace

RelaxedSolution solve_relaxed_tables(const SegmentGraph& g, const ScoreTables& t) {
  const std::vector<int> K = label_counts(t);
  const std::vector<int> base = var_bases(K);
  std::vector<Scalar> unary(base.back());
  for (int i = 0; i < g.num_nodes(); ++i)
    for (int k = 0; k < K[i]; ++k) unary[base[i] + k] = t.unary[i][k];
  std::vector<QuadraticTerm> terms;
  for (int e = 0; e < g.num_edges(); ++e) {
    const GraphEdge& ge = g.edge(e);
    const Mat& p = t.pairwise[e];
    for (int l = 0; l < p.rows(); ++l)
      for (int k = 0; k < p.cols(); ++k)
        if (p(l, k) != 0.0)
          terms.push_back({base[ge.i] + l, base[ge.j] + k, p(l, k)});
  }
  const RoofDualResult rd =
      roof_dual_maximize(static_cast<int>(unary.size()), unary, terms);
  RelaxedSolution s;
  s.labeling = relaxed_from_values(g, t, K, base, rd.values);
  s.objective = rd.bound;
  return s;
}

RelaxedSolution solve_relaxed(const WeightVector& w, const SegmentGraph& g) {
  return solve_relaxed_tables(g, ScoreTables::build(w, g));
}

ExactSolution maximize_tables(const SegmentGraph& g, const ScoreTables& t,
                              const SolverOptions& opt) {
  return BranchAndBound(g, t, opt).run();
}

ExactSolution solve_exact(const WeightVector& w, const SegmentGraph& g,
                          const SolverOptions& opt) {
  return maximize_tables(g, ScoreTables::build(w, g), opt);
}

LossAugmentedSolution solve_loss_augmented(const WeightVector& w,
                                           const SegmentGraph& g,
                                           const Labeling& truth, SolverMode mode,
                                           const SolverOptions& opt) {
  ScoreTables t = ScoreTables::build(w, g);
  if (static_cast<int>(truth.labels.size()) != g.num_nodes())
    throw std::invalid_argument("truth labeling size mismatch");
  // Hamming distance is linear in the indicators: it contributes
  // 1 - 2*[k == truth] per coordinate plus a constant of one per node.
  for (int i = 0; i < g.num_nodes(); ++i)
    for (int k = 0; k < static_cast<int>(t.unary[i].size()); ++k)
      t.unary[i][k] += (k == truth.labels[i]) ? -1.0 : 1.0;
  const Scalar constant = g.num_nodes();

  LossAugmentedSolution s;
  if (mode == SolverMode::Relaxed) {
    RelaxedSolution r = solve_relaxed_tables(g, t);
    s.labeling = std::move(r.labeling);
    s.objective = r.objective + constant;
  } else {
    ExactSolution e = maximize_tables(g, t, opt);
    const std::vector<int> K = label_counts(t);
    s.labeling.node_values.resize(g.num_nodes());
    for (int i = 0; i < g.num_nodes(); ++i) {
      s.labeling.node_values[i] = Vec::Zero(K[i]);
      s.labeling.node_values[i][e.labeling.labels[i]] = 1.0;
    }
    s.labeling.edge_values.resize(g.num_edges());
    for (int ei = 0; ei < g.num_edges(); ++ei) {
      const GraphEdge& ge = g.edge(ei);
      Mat z = Mat::Zero(K[ge.i], K[ge.j]);
      z(e.labeling.labels[ge.i], e.labeling.labels[ge.j]) = 1.0;
      s.labeling.edge_values[ei] = std::move(z);
    }
    s.objective = e.objective + constant;
    s.status = e.status;
  }
  return s;
}

OracleSolution brute_force_oracle(const WeightVector& w, const SegmentGraph& g,
                                  const Labeling* loss_against, long max_configs) {
  const ScoreTables t = ScoreTables::build(w, g);
  const std::vector<int> K = label_counts(t);
  long double configs = 1;
  for (int k : K) {
    configs *= k;
    if (configs > static_cast<long double>(max_configs))
      throw std::invalid_argument("instance too large for exhaustive search");
  }

  Labeling y;
  y.labels.assign(g.num_nodes(), 0);
  OracleSolution best;
  best.objective = -std::numeric_limits<Scalar>::infinity();
  for (;;) {
    Scalar val = t.score(g, y);
    if (loss_against)
      for (int i = 0; i < g.num_nodes(); ++i)
        if (y.labels[i] != loss_against->labels[i]) val += 2.0;
    if (val > best.objective) {
      best.objective = val;
      best.labeling = y;
    }
    int i = g.num_nodes() - 1;
    while (i >= 0 && y.labels[i] == K[i] - 1) y.labels[i--] = 0;
    if (i < 0) break;
    ++y.labels[i];
  }
  return best;
}

} // namespace actaff
