#include "actaff/qpbo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace actaff {

namespace {

// Dinic max-flow on doubles. Arc order is insertion order, so the min cut
// (and therefore the relaxed labeling) is deterministic.
class FlowNetwork {
 public:
  explicit FlowNetwork(int num_nodes) : head_(num_nodes) {}

  void add_arc(int from, int to, Scalar cap) {
    head_[from].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({to, cap});
    head_[to].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({from, 0.0});
    max_cap_ = std::max(max_cap_, cap);
  }

  Scalar max_flow(int s, int t) {
    eps_ = 1e-12 * std::max<Scalar>(1.0, max_cap_);
    Scalar flow = 0;
    const int n = static_cast<int>(head_.size());
    int guard = 2 * n + 5;
    while (bfs(s, t)) {
      if (--guard < 0)
        throw std::runtime_error("max-flow failed to terminate");
      iter_.assign(head_.size(), 0);
      for (;;) {
        Scalar pushed = dfs(s, t, std::numeric_limits<Scalar>::infinity());
        if (pushed <= eps_) break;
        flow += pushed;
      }
    }
    return flow;
  }

  // Reachability from s in the residual network of the final flow.
  std::vector<char> source_side(int s) const {
    std::vector<char> reach(head_.size(), 0);
    std::vector<int> stack = {s};
    reach[s] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int a : head_[v]) {
        if (arcs_[a].cap > eps_ && !reach[arcs_[a].to]) {
          reach[arcs_[a].to] = 1;
          stack.push_back(arcs_[a].to);
        }
      }
    }
    return reach;
  }

 private:
  struct Arc {
    int to;
    Scalar cap;
  };

  bool bfs(int s, int t) {
    level_.assign(head_.size(), -1);
    level_[s] = 0;
    std::vector<int> queue = {s};
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      int v = queue[qi];
      for (int a : head_[v]) {
        if (arcs_[a].cap > eps_ && level_[arcs_[a].to] < 0) {
          level_[arcs_[a].to] = level_[v] + 1;
          queue.push_back(arcs_[a].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  Scalar dfs(int v, int t, Scalar limit) {
    if (v == t) return limit;
    for (size_t& i = iter_[v]; i < head_[v].size(); ++i) {
      const int a = head_[v][i];
      Arc& arc = arcs_[a];
      if (arc.cap <= eps_ || level_[arc.to] != level_[v] + 1) continue;
      Scalar pushed = dfs(arc.to, t, std::min(limit, arc.cap));
      if (pushed > eps_) {
        arc.cap -= pushed;
        arcs_[a ^ 1].cap += pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<std::vector<int>> head_;
  std::vector<Arc> arcs_;
  std::vector<int> level_;
  std::vector<size_t> iter_;
  Scalar max_cap_ = 0;
  Scalar eps_ = 1e-12;
};

} // namespace

RoofDualResult roof_dual_maximize(int num_vars, const std::vector<Scalar>& unary,
                                  const std::vector<QuadraticTerm>& terms) {
  if (static_cast<int>(unary.size()) != num_vars)
    throw std::invalid_argument("unary coefficient count mismatch");
  // Coefficients of the equivalent minimization.
  std::vector<Scalar> alpha(num_vars);
  for (int p = 0; p < num_vars; ++p) alpha[p] = -unary[p];
  std::map<std::pair<int, int>, Scalar> beta;
  for (const QuadraticTerm& t : terms) {
    if (t.p == t.q || t.p < 0 || t.q < 0 || t.p >= num_vars || t.q >= num_vars)
      throw std::invalid_argument("bad quadratic term endpoints");
    if (t.c == 0.0) continue;
    beta[std::minmax(t.p, t.q)] -= t.c;
  }

  // Network layout: u_p = p, complemented copy v_p = num_vars + p, then
  // source and sink. A node on the source side of the cut takes value 0.
  const int S = 2 * num_vars;
  const int T = 2 * num_vars + 1;
  FlowNetwork net(2 * num_vars + 2);
  Scalar constant = 0;
  std::vector<Scalar> cost0(2 * num_vars, 0.0), cost1(2 * num_vars, 0.0);

  // cost E00/E01/E10/E11 over (a, b); requires E01 + E10 >= E00 + E11.
  auto add_pair = [&](int a, int b, Scalar e00, Scalar e01, Scalar e10, Scalar e11) {
    constant += e00;
    cost1[a] += e10 - e00;
    cost1[b] += e11 - e10;
    const Scalar cap = e01 + e10 - e00 - e11;
    if (cap > 0) net.add_arc(a, b, cap);
  };

  for (int p = 0; p < num_vars; ++p) {
    cost1[p] += alpha[p] / 2;              // u_p = 1
    cost0[num_vars + p] += alpha[p] / 2;   // v_p = 0 encodes x_p = 1
  }
  for (const auto& [pq, b] : beta) {
    const auto [p, q] = pq;
    const Scalar h = b / 2;
    if (b < 0) {
      add_pair(p, q, 0, 0, 0, h);
      add_pair(num_vars + p, num_vars + q, h, 0, 0, 0);
    } else {
      add_pair(p, num_vars + q, 0, 0, h, 0);
      add_pair(q, num_vars + p, 0, 0, h, 0);
    }
  }
  for (int x = 0; x < 2 * num_vars; ++x) {
    const Scalar d = cost1[x] - cost0[x];
    if (d >= 0) {
      constant += cost0[x];
      if (d > 0) net.add_arc(S, x, d);
    } else {
      constant += cost1[x];
      net.add_arc(x, T, -d);
    }
  }

  const Scalar flow = net.max_flow(S, T);
  const std::vector<char> reach = net.source_side(S);

  RoofDualResult r;
  r.bound = -(constant + flow);
  r.values.resize(num_vars);
  for (int p = 0; p < num_vars; ++p) {
    const Scalar xp = reach[p] ? 0.0 : 1.0;             // u_p on sink side
    const Scalar xcp = reach[num_vars + p] ? 1.0 : 0.0; // 1 - x'_p
    r.values[p] = (xp + xcp) / 2;
  }
  return r;
}

} // namespace actaff
