#include "actaff/multiseg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace actaff {

namespace {

void check_frame_zero(const SegmentGraph& g) {
  if (g.segments().front().first != 0)
    throw std::invalid_argument("segmentation must start at frame 0");
}

} // namespace

FrameLabeling expand_to_frames(const SegmentGraph& g, const Labeling& y) {
  check_frame_zero(g);
  const int T = g.segments().back().last + 1;
  FrameLabeling out;
  out.subactivity.assign(T, 0);
  out.affordance.assign(g.num_tracks(), std::vector<int>(T, 0));
  for (int s = 0; s < g.num_segments(); ++s) {
    const FrameRange r = g.segments()[s];
    for (int f = r.first; f <= r.last; ++f) {
      out.subactivity[f] = y.labels[g.node_index(s, -1)];
      for (int t = 0; t < g.num_tracks(); ++t)
        out.affordance[t][f] = y.labels[g.node_index(s, t)];
    }
  }
  return out;
}

Labeling project_to_segments(const SegmentGraph& g, const FrameLabeling& y) {
  check_frame_zero(g);
  if (y.num_frames() <= g.segments().back().last ||
      y.num_tracks() != g.num_tracks())
    throw std::invalid_argument("frame labeling does not cover the graph");
  auto majority = [](const std::vector<int>& stream, FrameRange r) {
    std::vector<int> count;
    for (int f = r.first; f <= r.last; ++f) {
      if (stream[f] >= static_cast<int>(count.size()))
        count.resize(stream[f] + 1, 0);
      ++count[stream[f]];
    }
    int best = 0;
    for (size_t k = 1; k < count.size(); ++k)
      if (count[k] > count[best]) best = static_cast<int>(k);
    return best;
  };
  Labeling out;
  out.labels.resize(g.num_nodes());
  for (int s = 0; s < g.num_segments(); ++s) {
    const FrameRange r = g.segments()[s];
    out.labels[g.node_index(s, -1)] = majority(y.subactivity, r);
    for (int t = 0; t < g.num_tracks(); ++t)
      out.labels[g.node_index(s, t)] = majority(y.affordance[t], r);
  }
  return out;
}

FrameLabeling truth_frames(const ActivitySequence& seq, const LabelSpace& ls) {
  FrameLabeling y;
  y.subactivity.assign(seq.num_frames(), 0);
  y.affordance.assign(seq.num_tracks(), std::vector<int>(seq.num_frames(), 0));
  for (const auto& seg : seq.segments) {
    const int a = ls.subactivity_index(seg.subactivity);
    for (int f = seg.range.first; f <= seg.range.last; ++f) y.subactivity[f] = a;
    for (int t = 0; t < seq.num_tracks(); ++t) {
      const int o = ls.affordance_index(seg.affordances[t]);
      for (int f = seg.range.first; f <= seg.range.last; ++f)
        y.affordance[t][f] = o;
    }
  }
  return y;
}

Scalar phi_score(const SegmentGraph& g, const Labeling& y_h,
                 const FrameLabeling& y, const Vec& theta_row, int Ka) {
  check_frame_zero(g);
  if (y.num_frames() <= g.segments().back().last ||
      y.num_tracks() != g.num_tracks())
    throw std::invalid_argument("frame labeling does not cover the graph");
  Scalar total = 0;
  for (int s = 0; s < g.num_segments(); ++s) {
    const FrameRange r = g.segments()[s];
    const int ka = y_h.labels[g.node_index(s, -1)];
    for (int f = r.first; f <= r.last; ++f)
      if (y.subactivity[f] == ka) total += theta_row[ka];
    for (int t = 0; t < g.num_tracks(); ++t) {
      const int ko = y_h.labels[g.node_index(s, t)];
      for (int f = r.first; f <= r.last; ++f)
        if (y.affordance[t][f] == ko) total += theta_row[Ka + ko];
    }
  }
  return total;
}

Mat agreement_counts(const std::vector<ThetaExample>& heldout, int Ka, int Ko) {
  if (heldout.empty()) throw std::invalid_argument("empty held-out set");
  const int H = static_cast<int>(heldout.front().hypotheses.size());
  if (H == 0) throw std::invalid_argument("no hypotheses");
  Mat a = Mat::Zero(H, Ka + Ko);
  for (const ThetaExample& ex : heldout) {
    if (static_cast<int>(ex.hypotheses.size()) != H)
      throw std::invalid_argument("hypothesis count differs across examples");
    for (int n = 0; n < H; ++n) {
      const FrameLabeling pred =
          expand_to_frames(*ex.hypotheses[n].graph, ex.hypotheses[n].labels);
      if (pred.num_frames() != ex.truth.num_frames() ||
          pred.num_tracks() != ex.truth.num_tracks())
        throw std::invalid_argument("prediction does not match truth extent");
      for (int f = 0; f < pred.num_frames(); ++f)
        if (pred.subactivity[f] == ex.truth.subactivity[f])
          a(n, pred.subactivity[f]) += 1.0;
      for (int t = 0; t < pred.num_tracks(); ++t)
        for (int f = 0; f < pred.num_frames(); ++f)
          if (pred.affordance[t][f] == ex.truth.affordance[t][f])
            a(n, Ka + pred.affordance[t][f]) += 1.0;
    }
  }
  return a;
}

ThetaWeights learn_theta(const std::vector<ThetaExample>& heldout, int Ka,
                         int Ko) {
  const Mat a = agreement_counts(heldout, Ka, Ko);
  const int H = static_cast<int>(a.rows());
  ThetaWeights theta;
  theta.num_subactivities = Ka;
  theta.values = a;
  for (int k = 0; k < a.cols(); ++k) {
    const Scalar shift = (1.0 - a.col(k).sum()) / H;
    for (int n = 0; n < H; ++n) theta.values(n, k) += shift;
  }
  return theta;
}

Scalar theta_kkt_residual(const ThetaWeights& theta, const Mat& counts) {
  Scalar worst = 0;
  for (int k = 0; k < theta.values.cols(); ++k) {
    worst = std::max(worst, std::abs(theta.values.col(k).sum() - 1.0));
    // Stationarity: theta - a = -mu_k, identical down the column.
    const Vec diff = theta.values.col(k) - counts.col(k);
    const Scalar mean = diff.mean();
    for (int n = 0; n < diff.size(); ++n)
      worst = std::max(worst, std::abs(diff[n] - mean));
  }
  return worst;
}

namespace {

FrameLabeling fuse_vote(const std::vector<const SegmentGraph*>& graphs,
                        const std::vector<FrameLabeling>& expanded,
                        const ThetaWeights& theta, int Ka, int Ko) {
  const int H = static_cast<int>(graphs.size());
  const int T = expanded.front().num_frames();
  const int O = expanded.front().num_tracks();
  FrameLabeling fused;
  fused.subactivity.assign(T, 0);
  fused.affordance.assign(O, std::vector<int>(T, 0));
  Vec score(std::max(Ka, Ko));
  for (int f = 0; f < T; ++f) {
    score.head(Ka).setZero();
    for (int n = 0; n < H; ++n)
      score[expanded[n].subactivity[f]] += theta.values(n, expanded[n].subactivity[f]);
    int best = 0;
    for (int k = 1; k < Ka; ++k)
      if (score[k] > score[best]) best = k;
    fused.subactivity[f] = best;
  }
  for (int t = 0; t < O; ++t) {
    for (int f = 0; f < T; ++f) {
      score.head(Ko).setZero();
      for (int n = 0; n < H; ++n)
        score[expanded[n].affordance[t][f]] +=
            theta.values(n, Ka + expanded[n].affordance[t][f]);
      int best = 0;
      for (int k = 1; k < Ko; ++k)
        if (score[k] > score[best]) best = k;
      fused.affordance[t][f] = best;
    }
  }
  return fused;
}

} // namespace

JointInferenceResult joint_infer(const std::vector<const SegmentGraph*>& graphs,
                                 const std::vector<const WeightVector*>& models,
                                 const ThetaWeights& theta, int max_rounds,
                                 const SolverOptions& opt) {
  const int H = static_cast<int>(graphs.size());
  if (H == 0 || static_cast<int>(models.size()) != H ||
      theta.num_hypotheses() != H)
    throw std::invalid_argument("graphs, models and theta rows must agree");
  const int Ka = models[0]->layout.num_subactivities();
  const int Ko = models[0]->layout.num_affordances();
  const int T = graphs[0]->segments().back().last + 1;
  const int O = graphs[0]->num_tracks();
  for (int n = 0; n < H; ++n) {
    check_frame_zero(*graphs[n]);
    if (graphs[n]->segments().back().last + 1 != T ||
        graphs[n]->num_tracks() != O)
      throw std::invalid_argument("hypotheses cover different frame ranges");
  }

  std::vector<ScoreTables> tables;
  tables.reserve(H);
  for (int n = 0; n < H; ++n)
    tables.push_back(ScoreTables::build(*models[n], *graphs[n]));

  JointInferenceResult res;
  res.hypothesis_labels.resize(H);
  std::vector<FrameLabeling> expanded(H);
  for (int n = 0; n < H; ++n) {
    res.hypothesis_labels[n] = maximize_tables(*graphs[n], tables[n], opt).labeling;
    expanded[n] = expand_to_frames(*graphs[n], res.hypothesis_labels[n]);
  }
  res.fused = fuse_vote(graphs, expanded, theta, Ka, Ko);

  auto objective = [&]() {
    Scalar total = 0;
    for (int n = 0; n < H; ++n)
      total += tables[n].score(*graphs[n], res.hypothesis_labels[n]) +
               phi_score(*graphs[n], res.hypothesis_labels[n], res.fused,
                         theta.values.row(n).transpose(), Ka);
    return total;
  };
  res.objective_trace.push_back(objective());

  for (int round = 1; round <= max_rounds; ++round) {
    bool changed = false;
    for (int n = 0; n < H; ++n) {
      // Frame-agreement bonus: a node labeled k gains theta_nk per frame of
      // its segment that the fused labeling also assigns k.
      ScoreTables boosted = tables[n];
      const SegmentGraph& g = *graphs[n];
      for (int s = 0; s < g.num_segments(); ++s) {
        const FrameRange r = g.segments()[s];
        Vec acount = Vec::Zero(Ka);
        for (int f = r.first; f <= r.last; ++f)
          acount[res.fused.subactivity[f]] += 1.0;
        const int ai = g.node_index(s, -1);
        for (int k = 0; k < Ka; ++k)
          boosted.unary[ai][k] += theta.values(n, k) * acount[k];
        for (int t = 0; t < O; ++t) {
          Vec ocount = Vec::Zero(Ko);
          for (int f = r.first; f <= r.last; ++f)
            ocount[res.fused.affordance[t][f]] += 1.0;
          const int oi = g.node_index(s, t);
          for (int k = 0; k < Ko; ++k)
            boosted.unary[oi][k] += theta.values(n, Ka + k) * ocount[k];
        }
      }
      Labeling next = maximize_tables(g, boosted, opt).labeling;
      // Adopt the re-solve only on strict improvement: a budget-capped solver
      // may return a worse incumbent, and on ties keeping the current labels
      // lets the alternation reach a fixed point.
      if (next.labels != res.hypothesis_labels[n].labels &&
          boosted.score(g, next) >
              boosted.score(g, res.hypothesis_labels[n])) {
        changed = true;
        res.hypothesis_labels[n] = std::move(next);
        expanded[n] = expand_to_frames(g, res.hypothesis_labels[n]);
      }
    }
    FrameLabeling next_fused = fuse_vote(graphs, expanded, theta, Ka, Ko);
    if (next_fused.subactivity != res.fused.subactivity ||
        next_fused.affordance != res.fused.affordance)
      changed = true;
    res.fused = std::move(next_fused);
    res.objective_trace.push_back(objective());
    res.rounds = round;
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  return res;
}

} // namespace actaff
