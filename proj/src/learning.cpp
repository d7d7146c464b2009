#include "actaff/learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace actaff {

Scalar hamming_loss(const Labeling& a, const Labeling& b) {
  if (a.labels.size() != b.labels.size())
    throw std::invalid_argument("labeling size mismatch");
  Scalar d = 0;
  for (size_t i = 0; i < a.labels.size(); ++i)
    if (a.labels[i] != b.labels[i]) d += 2.0;
  return d;
}

Scalar hamming_loss(const Labeling& truth, const RelaxedLabeling& y) {
  if (truth.labels.size() != y.node_values.size())
    throw std::invalid_argument("labeling size mismatch");
  Scalar d = 0;
  for (size_t i = 0; i < truth.labels.size(); ++i) {
    const Vec& v = y.node_values[i];
    for (int k = 0; k < v.size(); ++k)
      d += std::abs((k == truth.labels[i] ? 1.0 : 0.0) - v[k]);
  }
  return d;
}

RestrictedQpSolution solve_restricted_qp(const std::vector<Vec>& cut_gradients,
                                         const std::vector<Scalar>& cut_losses,
                                         Scalar C, const Vec* warm_alpha) {
  const int J = static_cast<int>(cut_gradients.size());
  if (cut_losses.size() != cut_gradients.size())
    throw std::invalid_argument("restricted QP needs matching cut lists");
  if (J == 0) return {};
  const Eigen::Index dim = cut_gradients[0].size();

  Mat G(J, J);
  for (int j = 0; j < J; ++j)
    for (int k = 0; k <= j; ++k)
      G(j, k) = G(k, j) = cut_gradients[j].dot(cut_gradients[k]);
  Vec l(J);
  for (int j = 0; j < J; ++j) l[j] = cut_losses[j];

  Vec alpha = Vec::Zero(J);
  if (warm_alpha && warm_alpha->size() == J) {
    alpha = *warm_alpha;
    for (int j = 0; j < J; ++j) alpha[j] = std::max<Scalar>(alpha[j], 0.0);
    const Scalar s = alpha.sum();
    if (s > C && s > 0) alpha *= C / s;
  }
  Vec Ga = G * alpha;

  auto finalize = [&](RestrictedQpSolution& out) {
    out.alpha = alpha;
    out.w = Vec::Zero(dim);
    for (int j = 0; j < J; ++j)
      if (alpha[j] != 0.0) out.w += alpha[j] * cut_gradients[j];
    Scalar worst = 0;
    for (int j = 0; j < J; ++j)
      worst = std::max(worst, l[j] - out.w.dot(cut_gradients[j]));
    out.xi = worst;
  };

  const int max_sweeps = 100000;
  RestrictedQpSolution out;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // Single-coordinate steps against the simplex-with-budget constraints.
    for (int j = 0; j < J; ++j) {
      const Scalar grad = l[j] - Ga[j];
      const Scalar budget = C - alpha.sum();
      Scalar step;
      if (G(j, j) > 0)
        step = grad / G(j, j);
      else
        step = grad > 0 ? budget : -alpha[j];
      step = std::clamp(step, -alpha[j], budget);
      if (step != 0.0) {
        alpha[j] += step;
        Ga += step * G.col(j);
      }
    }
    // Pairwise transfers move mass along the budget face; off the face the
    // single-coordinate steps already reach the optimum, so skip them.
    if (C - alpha.sum() <= 1e-12 * (1.0 + C)) {
      for (int j = 0; j < J; ++j) {
        for (int k = j + 1; k < J; ++k) {
          const Scalar curv = G(j, j) - 2 * G(j, k) + G(k, k);
          if (curv <= 0) continue;
          Scalar t = ((l[j] - Ga[j]) - (l[k] - Ga[k])) / curv;
          t = std::clamp(t, -alpha[j], alpha[k]);
          if (t != 0.0) {
            alpha[j] += t;
            alpha[k] -= t;
            Ga += t * (G.col(j) - G.col(k));
          }
        }
      }
    }
    Ga = G * alpha; // shed incremental drift before the gap test
    Scalar xi = 0;
    for (int j = 0; j < J; ++j) xi = std::max(xi, l[j] - Ga[j]);
    const Scalar wsq = alpha.dot(Ga);
    const Scalar primal = 0.5 * wsq + C * xi;
    const Scalar dual = alpha.dot(l) - 0.5 * wsq;
    if (primal - dual <= 1e-8) break;
  }
  finalize(out);
  return out;
}

namespace {

struct OraclePoint {
  Vec psi;      // joint feature map of the separated labeling
  Scalar loss;  // Hamming loss against the truth
};

} // namespace

TrainResult train(const std::vector<TrainExample>& data,
                  const WeightLayout& layout, const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("empty training set");
  const int M = static_cast<int>(data.size());
  std::vector<Vec> psi_truth(M);
  for (int m = 0; m < M; ++m) {
    const TrainExample& ex = data[m];
    if (static_cast<int>(ex.truth.labels.size()) != ex.graph->num_nodes())
      throw std::invalid_argument("truth labeling does not match graph");
    psi_truth[m] = joint_feature_map(layout, *ex.graph, ex.truth);
  }

  TrainResult result;
  result.w = WeightVector(layout);
  std::vector<Vec> cuts_g;
  std::vector<Scalar> cuts_l;
  std::vector<int> idle; // consecutive solves a cut sat at alpha = 0
  Vec alpha;
  Scalar xi = 0;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    std::vector<OraclePoint> points(M);
    auto run_range = [&](int lo, int hi) {
      for (int m = lo; m < hi; ++m) {
        const TrainExample& ex = data[m];
        LossAugmentedSolution s = solve_loss_augmented(
            result.w, *ex.graph, ex.truth, SolverMode::Relaxed);
        points[m].psi = joint_feature_map(layout, *ex.graph, s.labeling);
        points[m].loss = hamming_loss(ex.truth, s.labeling);
      }
    };
    const int workers = std::max(1, std::min(cfg.threads, M));
    if (workers == 1) {
      run_range(0, M);
    } else {
      std::vector<std::thread> pool;
      const int chunk = (M + workers - 1) / workers;
      for (int t = 0; t < workers; ++t)
        pool.emplace_back(run_range, t * chunk, std::min(M, (t + 1) * chunk));
      for (std::thread& t : pool) t.join();
    }

    // Average the per-example cut; summation order is fixed by index.
    Vec g = Vec::Zero(layout.total_dim());
    Scalar loss = 0;
    for (int m = 0; m < M; ++m) {
      g += psi_truth[m] - points[m].psi;
      loss += points[m].loss;
    }
    g /= M;
    loss /= M;

    const Scalar violation = loss - result.w.values.dot(g);
    if (violation <= xi + cfg.epsilon) {
      result.converged = true;
      break;
    }

    cuts_g.push_back(std::move(g));
    cuts_l.push_back(loss);
    idle.push_back(0);
    Vec warm = Vec::Zero(cuts_g.size());
    warm.head(alpha.size()) = alpha;
    RestrictedQpSolution qp = solve_restricted_qp(cuts_g, cuts_l, cfg.C, &warm);
    alpha = qp.alpha;
    xi = qp.xi;
    result.w.values = qp.w;
    result.iterations.push_back(
        {static_cast<int>(cuts_g.size()), violation, xi,
         0.5 * qp.w.squaredNorm() + cfg.C * xi});

    // Keep the working set small: a cut that stayed off the support for many
    // consecutive solves gets dropped; the oracle re-separates it if it ever
    // matters again.
    size_t keep = 0;
    for (size_t j = 0; j < cuts_g.size(); ++j) {
      idle[j] = alpha[j] > 0 ? 0 : idle[j] + 1;
      if (idle[j] > 25) continue;
      if (keep != j) {
        cuts_g[keep] = std::move(cuts_g[j]);
        cuts_l[keep] = cuts_l[j];
        idle[keep] = idle[j];
        alpha[keep] = alpha[j];
      }
      ++keep;
    }
    if (keep != cuts_g.size()) {
      cuts_g.resize(keep);
      cuts_l.resize(keep);
      idle.resize(keep);
      alpha.conservativeResize(keep);
    }
  }
  result.xi = xi;
  return result;
}

} // namespace actaff
