#include "actaff/dataset.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace actaff {

using nlohmann::json;

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("expected a 3-vector");
  return Vec3(j[0].get<Scalar>(), j[1].get<Scalar>(), j[2].get<Scalar>());
}

} // namespace

std::string sequence_to_json(const ActivitySequence& seq) {
  json j;
  j["id"] = seq.id;
  j["subject"] = seq.subject;
  j["highlevel"] = seq.highlevel;
  json frames = json::array();
  for (const SkeletonFrame& f : seq.frames) {
    json joints = json::array();
    for (const Vec3& p : f.joints) joints.push_back(vec3_to_json(p));
    frames.push_back(json{{"joints", joints}});
  }
  j["frames"] = std::move(frames);
  json tracks = json::array();
  for (const ObjectTrack& t : seq.tracks) {
    json jt;
    jt["id"] = t.id;
    json cent = json::array(), bbox = json::array(), occ = json::array();
    for (const Vec3& c : t.centroid) cent.push_back(vec3_to_json(c));
    for (const auto& b : t.bbox) bbox.push_back(json::array({b[0], b[1], b[2], b[3]}));
    for (char o : t.occluded) occ.push_back(static_cast<int>(o));
    jt["centroid"] = std::move(cent);
    jt["bbox"] = std::move(bbox);
    jt["occluded"] = std::move(occ);
    if (!t.transform.empty()) {
      json tr = json::array();
      for (const auto& x : t.transform)
        tr.push_back(json::array({x[0], x[1], x[2], x[3], x[4], x[5]}));
      jt["transform"] = std::move(tr);
    }
    tracks.push_back(std::move(jt));
  }
  j["tracks"] = std::move(tracks);
  if (!seq.segments.empty()) {
    json segs = json::array();
    for (const LabeledSegment& s : seq.segments) {
      segs.push_back(json{{"first", s.range.first},
                          {"last", s.range.last},
                          {"subactivity", s.subactivity},
                          {"affordances", s.affordances}});
    }
    j["segments"] = std::move(segs);
  }
  return j.dump();
}

ActivitySequence sequence_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  ActivitySequence seq;
  seq.id = j.at("id").get<std::string>();
  seq.subject = j.at("subject").get<std::string>();
  seq.highlevel = j.value("highlevel", std::string());
  for (const json& f : j.at("frames")) {
    const json& joints = f.at("joints");
    if (joints.size() != kNumJoints)
      throw std::invalid_argument("frame must list all joints");
    SkeletonFrame sf;
    for (int k = 0; k < kNumJoints; ++k) sf.joints[k] = vec3_from_json(joints[k]);
    seq.frames.push_back(sf);
  }
  const int T = seq.num_frames();
  if (T == 0) throw std::invalid_argument("sequence has no frames");
  for (const json& jt : j.value("tracks", json::array())) {
    ObjectTrack t;
    t.id = jt.at("id").get<int>();
    for (const json& c : jt.at("centroid")) t.centroid.push_back(vec3_from_json(c));
    for (const json& b : jt.at("bbox")) {
      if (b.size() != 4) throw std::invalid_argument("bbox must have 4 entries");
      t.bbox.push_back(Eigen::Vector4d(b[0].get<Scalar>(), b[1].get<Scalar>(),
                                       b[2].get<Scalar>(), b[3].get<Scalar>()));
    }
    for (const json& o : jt.at("occluded"))
      t.occluded.push_back(o.get<int>() ? 1 : 0);
    if (jt.contains("transform")) {
      for (const json& x : jt.at("transform")) {
        if (x.size() != 6)
          throw std::invalid_argument("transform must have 6 entries");
        Eigen::Matrix<Scalar, 6, 1> v;
        for (int k = 0; k < 6; ++k) v[k] = x[k].get<Scalar>();
        t.transform.push_back(v);
      }
    }
    if (t.num_frames() != T || static_cast<int>(t.bbox.size()) != T ||
        static_cast<int>(t.occluded.size()) != T ||
        (!t.transform.empty() && static_cast<int>(t.transform.size()) != T))
      throw std::invalid_argument("track frame count does not match skeleton");
    seq.tracks.push_back(std::move(t));
  }
  if (j.contains("segments")) {
    for (const json& s : j.at("segments")) {
      LabeledSegment ls;
      ls.range.first = s.at("first").get<int>();
      ls.range.last = s.at("last").get<int>();
      ls.subactivity = s.at("subactivity").get<std::string>();
      ls.affordances = s.at("affordances").get<std::vector<std::string>>();
      if (static_cast<int>(ls.affordances.size()) != seq.num_tracks())
        throw std::invalid_argument("segment needs one affordance per track");
      seq.segments.push_back(std::move(ls));
    }
    for (size_t s = 0; s < seq.segments.size(); ++s) {
      const FrameRange& r = seq.segments[s].range;
      const int expect_first = s == 0 ? 0 : seq.segments[s - 1].range.last + 1;
      if (r.first != expect_first || r.last < r.first)
        throw std::invalid_argument("ground-truth segments must tile the frames");
    }
    if (seq.segments.back().range.last != T - 1)
      throw std::invalid_argument("ground-truth segments must tile the frames");
  }
  return seq;
}

std::vector<ActivitySequence> load_sequences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<ActivitySequence> seqs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      seqs.push_back(sequence_from_json(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return seqs;
}

void save_sequences(const std::vector<ActivitySequence>& seqs,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const ActivitySequence& s : seqs) out << sequence_to_json(s) << "\n";
}

std::vector<FrameRange> truth_segments(const ActivitySequence& seq) {
  std::vector<FrameRange> out;
  out.reserve(seq.segments.size());
  for (const LabeledSegment& s : seq.segments) out.push_back(s.range);
  return out;
}

Labeling truth_labeling(const ActivitySequence& seq, const LabelSpace& ls) {
  Labeling y;
  for (const LabeledSegment& s : seq.segments) {
    y.labels.push_back(ls.subactivity_index(s.subactivity));
    for (const std::string& a : s.affordances)
      y.labels.push_back(ls.affordance_index(a));
  }
  return y;
}

std::vector<FrameRange> track_extents(const ActivitySequence& seq) {
  std::vector<FrameRange> ext;
  ext.reserve(seq.tracks.size());
  for (const ObjectTrack& t : seq.tracks)
    ext.push_back({0, t.num_frames() - 1});
  return ext;
}

} // namespace actaff
