#include "actaff/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace actaff {

std::vector<FrameRange> uniform_segment(int num_frames, int size, int offset) {
  if (num_frames < 1) throw std::invalid_argument("need at least one frame");
  if (size < 1) throw std::invalid_argument("segment size must be positive");
  if (offset < 0) throw std::invalid_argument("offset must be non-negative");
  offset %= size;
  std::vector<FrameRange> segs;
  int start = 0;
  for (int b = offset == 0 ? size : offset; b < num_frames; b += size) {
    segs.push_back({start, b - 1});
    start = b;
  }
  segs.push_back({start, num_frames - 1});
  return segs;
}

std::vector<Scalar> chain_edge_weights(const std::vector<SkeletonFrame>& frames,
                                       ChainWeightMode mode) {
  const int T = static_cast<int>(frames.size());
  if (T < 1) throw std::invalid_argument("need at least one frame");
  std::vector<Scalar> dist(std::max(0, T - 1));
  for (int t = 0; t + 1 < T; ++t) {
    Scalar d = 0;
    const Vec3 h0 = frames[t].joints[Head], h1 = frames[t + 1].joints[Head];
    for (Joint j : kUpperBody)
      d += ((frames[t + 1].joints[j] - h1) - (frames[t].joints[j] - h0)).norm();
    dist[t] = d;
  }
  if (mode == ChainWeightMode::JointDistance) return dist;
  std::vector<Scalar> rate(dist.size());
  for (size_t t = 1; t < dist.size(); ++t) rate[t] = std::abs(dist[t] - dist[t - 1]);
  return rate; // rate[0] stays 0: no earlier edge to difference against
}

namespace {

struct UnionFind {
  std::vector<int> parent, size;
  std::vector<Scalar> internal; // largest weight merged inside the component
  explicit UnionFind(int n) : parent(n), size(n, 1), internal(n, 0) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
};

} // namespace

ChainSegmentation chain_segment_weights(int num_frames,
                                        const std::vector<Scalar>& weights,
                                        Scalar k) {
  if (num_frames < 1) throw std::invalid_argument("need at least one frame");
  if (static_cast<int>(weights.size()) != num_frames - 1)
    throw std::invalid_argument("need one weight per adjacent frame pair");
  if (k < 0) throw std::invalid_argument("k must be non-negative");

  std::vector<int> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return weights[a] < weights[b]; });

  UnionFind uf(num_frames);
  ChainSegmentation out;
  out.trace.reserve(order.size());
  for (int e : order) {
    const int a = uf.find(e), b = uf.find(e + 1);
    const Scalar threshold = std::min(uf.internal[a] + k / uf.size[a],
                                      uf.internal[b] + k / uf.size[b]);
    const bool merged = a != b && weights[e] <= threshold;
    if (merged) {
      uf.parent[b] = a;
      uf.size[a] += uf.size[b];
      uf.internal[a] = weights[e]; // edges arrive in ascending order
    }
    out.trace.push_back({e, weights[e], merged});
  }

  int start = 0;
  for (int t = 0; t + 1 < num_frames; ++t) {
    if (uf.find(t) != uf.find(t + 1)) {
      out.segments.push_back({start, t});
      start = t + 1;
    }
  }
  out.segments.push_back({start, num_frames - 1});
  return out;
}

ChainSegmentation chain_segment(const std::vector<SkeletonFrame>& frames,
                                ChainWeightMode mode, Scalar k) {
  return chain_segment_weights(static_cast<int>(frames.size()),
                               chain_edge_weights(frames, mode), k);
}

namespace {

std::vector<std::pair<std::string, std::string>> parse_params(
    const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("malformed parameter: " + item);
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

} // namespace

std::vector<FrameRange> apply_segmentation(const ActivitySequence& seq,
                                           const std::string& descriptor) {
  const size_t colon = descriptor.find(':');
  const std::string method = descriptor.substr(0, colon);
  const std::string params =
      colon == std::string::npos ? "" : descriptor.substr(colon + 1);
  if (method == "uniform") {
    int size = 0, offset = 0;
    for (const auto& [key, val] : parse_params(params)) {
      if (key == "size")
        size = std::stoi(val);
      else if (key == "offset")
        offset = std::stoi(val);
      else
        throw std::invalid_argument("unknown uniform parameter: " + key);
    }
    if (size == 0)
      throw std::invalid_argument("uniform segmentation needs size=<frames>");
    return uniform_segment(seq.num_frames(), size, offset);
  }
  if (method == "chain-dist" || method == "chain-rate") {
    Scalar k = -1.0;
    for (const auto& [key, val] : parse_params(params)) {
      if (key == "k")
        k = std::stod(val);
      else
        throw std::invalid_argument("unknown chain parameter: " + key);
    }
    if (k < 0)
      throw std::invalid_argument("chain segmentation needs k=<tolerance>");
    const ChainWeightMode mode = method == "chain-dist"
                                     ? ChainWeightMode::JointDistance
                                     : ChainWeightMode::JointDistanceRate;
    return chain_segment(seq.frames, mode, k).segments;
  }
  throw std::invalid_argument("unknown segmentation method: " + method);
}

std::vector<SegmentationHypothesis> make_hypothesis_set(
    const ActivitySequence& seq, const std::vector<std::string>& descriptors) {
  std::vector<SegmentationHypothesis> out;
  for (const std::string& d : descriptors) {
    SegmentationHypothesis h{d, apply_segmentation(seq, d)};
    bool dup = false;
    for (const SegmentationHypothesis& prev : out) {
      if (prev.segments.size() == h.segments.size()) {
        dup = true;
        for (size_t i = 0; i < h.segments.size(); ++i)
          if (prev.segments[i].first != h.segments[i].first ||
              prev.segments[i].last != h.segments[i].last) {
            dup = false;
            break;
          }
      }
      if (dup) break;
    }
    if (!dup) out.push_back(std::move(h));
  }
  return out;
}

} // namespace actaff
