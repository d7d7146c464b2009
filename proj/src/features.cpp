#include "actaff/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace actaff {

namespace {

bool fully_occluded(const ObjectTrack& t, FrameRange r) {
  for (int f = r.first; f <= r.last; ++f)
    if (!t.occluded[f]) return false;
  return true;
}

// Nearest unoccluded frame to f within r; ties prefer the earlier frame.
// Returns -1 when the whole range is occluded.
int nearest_valid(const ObjectTrack& t, int f, FrameRange r) {
  if (!t.occluded[f]) return f;
  for (int d = 1; d <= r.last - r.first; ++d) {
    if (f - d >= r.first && !t.occluded[f - d]) return f - d;
    if (f + d <= r.last && !t.occluded[f + d]) return f + d;
  }
  return -1;
}

Vec3 centroid_at(const ObjectTrack& t, int f, FrameRange r) {
  const int g = nearest_valid(t, f, r);
  return t.centroid[g < 0 ? f : g];
}

void check_range(const ActivitySequence& seq, FrameRange r) {
  if (r.first < 0 || r.last >= seq.num_frames() || r.last < r.first)
    throw std::invalid_argument("segment range outside sequence");
}

} // namespace

Vec raw_object_features(const ActivitySequence& seq, int track, FrameRange r) {
  check_range(seq, r);
  const ObjectTrack& t = seq.tracks.at(track);
  Vec out = Vec::Zero(kRawDims[0]);
  if (fully_occluded(t, r)) {
    out[15] = 1.0;
    return out;
  }
  const int mid = r.middle();
  const int midv = nearest_valid(t, mid, r);
  out.segment<3>(0) = t.centroid[midv];
  out.segment<4>(3) = t.bbox[midv];
  if (!t.transform.empty()) {
    out.segment<6>(7) = t.transform[midv];
  } else if (midv > r.first) {
    out.segment<3>(7) = t.centroid[midv] - centroid_at(t, midv - 1, r);
  }
  Scalar path = 0;
  for (int f = r.first + 1; f <= r.last; ++f)
    path += (centroid_at(t, f, r) - centroid_at(t, f - 1, r)).norm();
  out[13] = path;
  out[14] = (centroid_at(t, r.last, r) - centroid_at(t, r.first, r)).norm();
  int occluded = 0;
  for (int f = r.first; f <= r.last; ++f) occluded += t.occluded[f] ? 1 : 0;
  out[15] = static_cast<Scalar>(occluded) / r.length();
  return out;
}

Vec raw_activity_features(const ActivitySequence& seq, FrameRange r) {
  check_range(seq, r);
  const SkeletonFrame& mid = seq.frames[r.middle()];
  Vec out(kRawDims[1]);
  int at = 0;

  auto rel = [](const SkeletonFrame& f, Joint j) -> Vec3 {
    return f.joints[j] - f.joints[Head];
  };
  for (Joint j : kUpperBody) {
    out.segment<3>(at) = rel(mid, j);
    at += 3;
  }
  for (Joint j : kUpperBody) {
    Scalar path = 0;
    for (int f = r.first + 1; f <= r.last; ++f)
      path += (rel(seq.frames[f], j) - rel(seq.frames[f - 1], j)).norm();
    out[at++] = path;
  }
  for (Joint j : kUpperBody)
    out[at++] = (rel(seq.frames[r.last], j) - rel(seq.frames[r.first], j)).norm();

  for (int a = 0; a < kNumJoints; ++a)
    for (int b = a + 1; b < kNumJoints; ++b)
      out[at++] = (mid.joints[a] - mid.joints[b]).norm();
  for (int j = 0; j < kNumJoints; ++j)
    if (j != Torso) out[at++] = mid.joints[j][2] - mid.joints[Torso][2];
  const Vec3 axis = mid.joints[Neck] - mid.joints[Torso];
  const Scalar n = axis.norm();
  for (int c = 0; c < 3; ++c)
    out[at++] = n > 0 ? std::acos(std::clamp(axis[c] / n, -1.0, 1.0)) : 0.0;

  out.segment<3>(at) = mid.joints[LPalm] - mid.joints[Torso];
  out.segment<3>(at + 3) = mid.joints[RPalm] - mid.joints[Torso];
  out.segment<3>(at + 6) = mid.joints[LPalm] - mid.joints[Head];
  out.segment<3>(at + 9) = mid.joints[RPalm] - mid.joints[Head];
  at += 12;
  out[at++] = (mid.joints[LPalm] - mid.joints[RPalm]).norm();
  out[at++] = (mid.joints[LPalm] - mid.joints[Head]).norm();
  out[at++] = (mid.joints[RPalm] - mid.joints[Head]).norm();
  out[at++] = std::max(mid.joints[LPalm][2], mid.joints[RPalm][2]) -
              mid.joints[Torso][2];
  return out;
}

Vec raw_object_object_features(const ActivitySequence& seq, int track_a,
                               int track_b, FrameRange r) {
  check_range(seq, r);
  const ObjectTrack& a = seq.tracks.at(track_a);
  const ObjectTrack& b = seq.tracks.at(track_b);
  Vec out = Vec::Zero(kRawDims[2]);
  if (fully_occluded(a, r) || fully_occluded(b, r)) return out;
  auto relq = [&](int f) {
    Eigen::Vector4d q;
    const Vec3 d = centroid_at(a, f, r) - centroid_at(b, f, r);
    q << d[0], d[1], d[2], d.norm();
    return q;
  };
  out.segment<4>(0) = relq(r.first);
  out.segment<4>(4) = relq(r.middle());
  out.segment<4>(8) = relq(r.last);
  Eigen::Vector4d mx = relq(r.first), mn = mx;
  for (int f = r.first + 1; f <= r.last; ++f) {
    const Eigen::Vector4d q = relq(f);
    mx = mx.cwiseMax(q);
    mn = mn.cwiseMin(q);
  }
  out.segment<4>(12) = mx;
  out.segment<4>(16) = mn;
  return out;
}

Vec raw_object_activity_features(const ActivitySequence& seq, int track,
                                 FrameRange r) {
  check_range(seq, r);
  const ObjectTrack& t = seq.tracks.at(track);
  Vec out = Vec::Zero(kRawDims[3]);
  if (fully_occluded(t, r)) return out;
  auto dists = [&](int f) {
    Eigen::Matrix<Scalar, 8, 1> d;
    const Vec3 c = centroid_at(t, f, r);
    for (int j = 0; j < 8; ++j)
      d[j] = (seq.frames[f].joints[kUpperBody[j]] - c).norm();
    return d;
  };
  out.segment<8>(0) = dists(r.first);
  out.segment<8>(8) = dists(r.middle());
  out.segment<8>(16) = dists(r.last);
  Eigen::Matrix<Scalar, 8, 1> mx = dists(r.first), mn = mx;
  for (int f = r.first + 1; f <= r.last; ++f) {
    const Eigen::Matrix<Scalar, 8, 1> d = dists(f);
    mx = mx.cwiseMax(d);
    mn = mn.cwiseMin(d);
  }
  out.segment<8>(24) = mx;
  out.segment<8>(32) = mn;
  return out;
}

Vec raw_object_temporal_features(const ActivitySequence& seq, int track,
                                 FrameRange from, FrameRange to) {
  check_range(seq, from);
  check_range(seq, to);
  const ObjectTrack& t = seq.tracks.at(track);
  Vec out = Vec::Zero(kRawDims[4]);
  if (fully_occluded(t, from) || fully_occluded(t, to)) return out;
  const int m1 = from.middle(), m2 = to.middle();
  const Scalar frames = std::max(1, m2 - m1);
  const Vec3 c1 = centroid_at(t, m1, from), c2 = centroid_at(t, m2, to);
  out[0] = c2[2] - c1[2];
  out[1] = out[0] / frames;
  out[2] = (c2 - c1).norm();
  out[3] = out[2] / frames;
  return out;
}

Vec raw_activity_temporal_features(const ActivitySequence& seq, FrameRange from,
                                   FrameRange to) {
  check_range(seq, from);
  check_range(seq, to);
  const int m1 = from.middle(), m2 = to.middle();
  const Scalar frames = std::max(1, m2 - m1);
  Vec out(kRawDims[5]);
  for (int j = 0; j < 8; ++j) {
    const Scalar d = (seq.frames[m2].joints[kUpperBody[j]] -
                      seq.frames[m1].joints[kUpperBody[j]])
                         .norm();
    out[j] = d;
    out[8 + j] = d / frames;
  }
  return out;
}

Vec raw_features(const ActivitySequence& seq, FeatureFamily family,
                 FrameRange range, FrameRange next_range, int track_a,
                 int track_b) {
  switch (family) {
    case FeatureFamily::ObjectNode:
      return raw_object_features(seq, track_a, range);
    case FeatureFamily::ActivityNode:
      return raw_activity_features(seq, range);
    case FeatureFamily::ObjectObject:
      return raw_object_object_features(seq, track_a, track_b, range);
    case FeatureFamily::ObjectActivity:
      return raw_object_activity_features(seq, track_a, range);
    case FeatureFamily::ObjectTemporal:
      return raw_object_temporal_features(seq, track_a, range, next_range);
    case FeatureFamily::ActivityTemporal:
      return raw_activity_temporal_features(seq, range, next_range);
  }
  throw std::invalid_argument("unknown feature family");
}

Vec cumulative_bin(Scalar value, const Vec& thresholds) {
  Vec out(thresholds.size());
  for (int j = 0; j < thresholds.size(); ++j)
    out[j] = value >= thresholds[j] ? 1.0 : 0.0;
  return out;
}

FeatureBinner FeatureBinner::ramp(int levels) {
  FeatureBinner b;
  b.levels = levels;
  for (int f = 0; f < kNumFamilies; ++f) {
    b.thresholds[f] = Mat(kRawDims[f], levels);
    for (int r = 0; r < kRawDims[f]; ++r)
      for (int j = 0; j < levels; ++j) b.thresholds[f](r, j) = j;
  }
  return b;
}

FeatureBinner FeatureBinner::fit(
    const std::vector<std::pair<const ActivitySequence*,
                                std::vector<FrameRange>>>& corpus,
    int levels) {
  if (levels < 1) throw std::invalid_argument("levels must be positive");
  if (corpus.empty()) throw std::invalid_argument("empty binning corpus");

  std::array<std::vector<Vec>, kNumFamilies> samples;
  for (const auto& [seq, segs] : corpus) {
    const int S = static_cast<int>(segs.size());
    const int O = seq->num_tracks();
    for (int s = 0; s < S; ++s) {
      samples[1].push_back(raw_activity_features(*seq, segs[s]));
      for (int t = 0; t < O; ++t) {
        samples[0].push_back(raw_object_features(*seq, t, segs[s]));
        samples[3].push_back(raw_object_activity_features(*seq, t, segs[s]));
      }
      for (int a = 0; a < O; ++a)
        for (int b = a + 1; b < O; ++b)
          samples[2].push_back(raw_object_object_features(*seq, a, b, segs[s]));
      if (s + 1 < S) {
        samples[5].push_back(
            raw_activity_temporal_features(*seq, segs[s], segs[s + 1]));
        for (int t = 0; t < O; ++t)
          samples[4].push_back(
              raw_object_temporal_features(*seq, t, segs[s], segs[s + 1]));
      }
    }
  }

  FeatureBinner out = ramp(levels); // fallback for families with no samples
  for (int f = 0; f < kNumFamilies; ++f) {
    if (samples[f].empty()) continue;
    const int n = static_cast<int>(samples[f].size());
    for (int r = 0; r < kRawDims[f]; ++r) {
      std::vector<Scalar> col(n);
      for (int i = 0; i < n; ++i) col[i] = samples[f][i][r];
      std::sort(col.begin(), col.end());
      for (int j = 0; j < levels; ++j) {
        const int idx = static_cast<int>(
            static_cast<long>(j) * (n - 1) / levels); // lower decile
        Scalar t = col[idx];
        if (j > 0) {
          const Scalar prev = out.thresholds[f](r, j - 1);
          const Scalar eps = std::max<Scalar>(1e-12, 1e-9 * std::abs(prev));
          t = std::max(t, prev + eps);
        }
        out.thresholds[f](r, j) = t;
      }
    }
  }
  return out;
}

Vec FeatureBinner::apply(FeatureFamily family, const Vec& raw) const {
  const Mat& th = thresholds[static_cast<int>(family)];
  if (raw.size() != th.rows())
    throw std::invalid_argument("raw feature length does not match binner");
  Vec out(th.rows() * levels);
  for (int r = 0; r < th.rows(); ++r)
    out.segment(r * levels, levels) =
        cumulative_bin(raw[r], th.row(r).transpose());
  return out;
}

FeatureDims FeatureBinner::dims() const {
  FeatureDims d;
  d.object_node = kRawDims[0] * levels;
  d.activity_node = kRawDims[1] * levels;
  d.edge[static_cast<int>(EdgeKind::ObjectObject)] = kRawDims[2] * levels;
  d.edge[static_cast<int>(EdgeKind::ObjectActivity)] = kRawDims[3] * levels;
  d.edge[static_cast<int>(EdgeKind::ObjectTemporal)] = kRawDims[4] * levels;
  d.edge[static_cast<int>(EdgeKind::ActivityTemporal)] = kRawDims[5] * levels;
  return d;
}

SegmentGraph build_sequence_graph(const ActivitySequence& seq,
                                  const std::vector<FrameRange>& segments,
                                  const FeatureBinner& binner) {
  FeatureProvider fp;
  fp.activity_node = [&](int s) {
    return binner.apply(FeatureFamily::ActivityNode,
                        raw_activity_features(seq, segments[s]));
  };
  fp.object_node = [&](int s, int t) {
    return binner.apply(FeatureFamily::ObjectNode,
                        raw_object_features(seq, t, segments[s]));
  };
  fp.object_object = [&](int s, int a, int b) {
    return binner.apply(FeatureFamily::ObjectObject,
                        raw_object_object_features(seq, a, b, segments[s]));
  };
  fp.object_activity = [&](int s, int t) {
    return binner.apply(FeatureFamily::ObjectActivity,
                        raw_object_activity_features(seq, t, segments[s]));
  };
  fp.object_temporal = [&](int s, int t) {
    return binner.apply(
        FeatureFamily::ObjectTemporal,
        raw_object_temporal_features(seq, t, segments[s], segments[s + 1]));
  };
  fp.activity_temporal = [&](int s) {
    return binner.apply(
        FeatureFamily::ActivityTemporal,
        raw_activity_temporal_features(seq, segments[s], segments[s + 1]));
  };
  return build_graph(segments, track_extents(seq), fp);
}

} // namespace actaff
