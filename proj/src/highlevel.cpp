#include "actaff/highlevel.hpp"

#include "actaff/learning.hpp"

#include <algorithm>
#include <stdexcept>

namespace actaff {

namespace {

void normalize_block(Vec& v, int begin, int len) {
  const Scalar total = v.segment(begin, len).sum();
  if (total > 0) v.segment(begin, len) /= total;
}

} // namespace

Vec histogram_features(const SegmentGraph& g, const Labeling& y, int Ka, int Ko) {
  Vec h = Vec::Zero(Ka + Ko);
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (g.node(i).kind == NodeKind::Activity)
      h[y.labels[i]] += 1.0;
    else
      h[Ka + y.labels[i]] += 1.0;
  }
  normalize_block(h, 0, Ka);
  normalize_block(h, Ka, Ko);
  return h;
}

Vec histogram_features(const FrameLabeling& y, int Ka, int Ko) {
  Vec h = Vec::Zero(Ka + Ko);
  for (int f : y.subactivity) h[f] += 1.0;
  for (const std::vector<int>& track : y.affordance)
    for (int f : track) h[Ka + f] += 1.0;
  normalize_block(h, 0, Ka);
  normalize_block(h, Ka, Ko);
  return h;
}

Vec occlusion_features(const std::vector<ObjectTrack>& tracks, int num_frames,
                       int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("need at least one bin");
  if (num_frames < 1) throw std::invalid_argument("need at least one frame");
  Vec out = Vec::Zero(n_bins);
  if (tracks.empty()) return out;
  for (int b = 0; b < n_bins; ++b) {
    const int lo = static_cast<int>(static_cast<long>(b) * num_frames / n_bins);
    const int hi =
        static_cast<int>(static_cast<long>(b + 1) * num_frames / n_bins);
    int occluded = 0;
    for (const ObjectTrack& t : tracks) {
      for (int f = lo; f < hi; ++f) {
        if (t.occluded[f]) {
          ++occluded;
          break;
        }
      }
    }
    out[b] = static_cast<Scalar>(occluded) / tracks.size();
  }
  return out;
}

HighLevelModel train_highlevel(const Mat& X, const std::vector<int>& labels,
                               const std::vector<std::string>& classes,
                               Scalar C, Scalar epsilon, int max_iterations) {
  const int M = static_cast<int>(X.rows());
  if (M == 0 || static_cast<int>(labels.size()) != M)
    throw std::invalid_argument("features and labels must align");
  const int K = static_cast<int>(classes.size());
  for (int y : labels)
    if (y < 0 || y >= K) throw std::invalid_argument("label out of range");

  HighLevelModel model;
  model.classes = classes;
  const int dim = static_cast<int>(X.cols()) + 1; // bias column
  model.weights = Mat::Zero(K, dim);

  std::vector<char> present(K, 0);
  for (int y : labels) present[y] = 1;
  model.single_class =
      std::count(present.begin(), present.end(), 1) < 2;
  if (model.single_class) return model;

  Mat Xb(M, dim);
  Xb.leftCols(dim - 1) = X;
  Xb.col(dim - 1).setOnes();

  for (int c = 0; c < K; ++c) {
    if (!present[c]) continue;
    // One-slack cutting plane for the binary hinge objective: each cut
    // averages the examples the current iterate leaves inside the margin.
    std::vector<Vec> cuts_g;
    std::vector<Scalar> cuts_l;
    Vec w = Vec::Zero(dim);
    Vec alpha;
    Scalar xi = 0;
    for (int iter = 0; iter < max_iterations; ++iter) {
      Vec g = Vec::Zero(dim);
      Scalar loss = 0;
      for (int m = 0; m < M; ++m) {
        const Scalar ym = labels[m] == c ? 1.0 : -1.0;
        if (ym * w.dot(Xb.row(m).transpose()) < 1.0) {
          g += ym * Xb.row(m).transpose();
          loss += 1.0;
        }
      }
      g /= M;
      loss /= M;
      const Scalar violation = loss - w.dot(g);
      if (violation <= xi + epsilon) break;
      cuts_g.push_back(g);
      cuts_l.push_back(loss);
      Vec warm = Vec::Zero(cuts_g.size());
      warm.head(alpha.size()) = alpha;
      RestrictedQpSolution qp = solve_restricted_qp(cuts_g, cuts_l, C, &warm);
      alpha = qp.alpha;
      w = qp.w;
      xi = qp.xi;
    }
    model.weights.row(c) = w.transpose();
  }
  return model;
}

int classify_highlevel(const HighLevelModel& model, const Vec& x) {
  Vec xb(x.size() + 1);
  xb.head(x.size()) = x;
  xb[x.size()] = 1.0;
  if (model.weights.cols() != xb.size())
    throw std::invalid_argument("feature length does not match model");
  const Vec scores = model.weights * xb;
  int best = 0;
  for (int c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return best;
}

} // namespace actaff
