#include "actaff/model_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace actaff {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = a.at(static_cast<size_t>(i)).get<Scalar>();
  return v;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& rows) {
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  Eigen::Index nc = 0;
  if (nr > 0) nc = static_cast<Eigen::Index>(rows.at(0).size());
  Mat m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    const json& row = rows.at(static_cast<size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != nc)
      throw std::runtime_error("ragged matrix in model file");
    for (Eigen::Index c = 0; c < nc; ++c)
      m(r, c) = row.at(static_cast<size_t>(c)).get<Scalar>();
  }
  return m;
}

json strings_to_json(const std::vector<std::string>& v) {
  json a = json::array();
  for (const auto& s : v) a.push_back(s);
  return a;
}

std::vector<std::string> strings_from_json(const json& a) {
  std::vector<std::string> v;
  v.reserve(a.size());
  for (const auto& s : a) v.push_back(s.get<std::string>());
  return v;
}

json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + std::string(what) +
                                    " file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

void check_version(const json& j, const std::string& path) {
  if (!j.contains("format_version") ||
      j.at("format_version").get<int>() != kFormatVersion) {
    std::ostringstream msg;
    msg << path << ": unsupported format_version (expected " << kFormatVersion
        << ")";
    throw std::runtime_error(msg.str());
  }
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace

void save_model(const Model& m, const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["subactivities"] = strings_to_json(m.labels.subactivities);
  j["affordances"] = strings_to_json(m.labels.affordances);
  j["highlevel"] = strings_to_json(m.labels.highlevel);
  j["segmentation"] = m.segmentation;
  j["bin_levels"] = m.binner.levels;
  json th = json::array();
  for (const Mat& t : m.binner.thresholds) th.push_back(mat_to_json(t));
  j["bin_thresholds"] = std::move(th);
  j["weights"] = vec_to_json(m.w.values);
  write_json_file(j, path);
}

Model load_model(const std::string& path) {
  const json j = load_json_file(path, "model");
  check_version(j, path);
  Model m;
  m.labels.subactivities = strings_from_json(j.at("subactivities"));
  m.labels.affordances = strings_from_json(j.at("affordances"));
  m.labels.highlevel = strings_from_json(j.at("highlevel"));
  m.labels.validate();
  m.segmentation = j.at("segmentation").get<std::string>();
  m.binner.levels = j.at("bin_levels").get<int>();
  if (m.binner.levels <= 0)
    throw std::runtime_error(path + ": bin_levels must be positive");
  const json& th = j.at("bin_thresholds");
  if (th.size() != static_cast<size_t>(kNumFamilies))
    throw std::runtime_error(path + ": expected one threshold table per "
                                    "feature family");
  for (int f = 0; f < kNumFamilies; ++f) {
    Mat t = mat_from_json(th.at(static_cast<size_t>(f)));
    if (t.rows() != kRawDims[static_cast<size_t>(f)] ||
        t.cols() != m.binner.levels)
      throw std::runtime_error(path + ": threshold table shape mismatch");
    m.binner.thresholds[static_cast<size_t>(f)] = std::move(t);
  }
  const WeightLayout layout(static_cast<int>(m.labels.subactivities.size()),
                            static_cast<int>(m.labels.affordances.size()),
                            m.binner.dims());
  Vec w = vec_from_json(j.at("weights"));
  if (w.size() != layout.total_dim())
    throw std::runtime_error(path + ": weight vector length mismatch");
  m.w.layout = layout;
  m.w.values = std::move(w);
  return m;
}

void save_theta(const ThetaWeights& theta, const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["num_subactivities"] = theta.num_subactivities;
  j["values"] = mat_to_json(theta.values);
  write_json_file(j, path);
}

ThetaWeights load_theta(const std::string& path) {
  const json j = load_json_file(path, "theta");
  check_version(j, path);
  ThetaWeights t;
  t.num_subactivities = j.at("num_subactivities").get<int>();
  t.values = mat_from_json(j.at("values"));
  if (t.num_subactivities < 0 || t.values.cols() < t.num_subactivities)
    throw std::runtime_error(path + ": inconsistent theta shape");
  return t;
}

void save_highlevel_model(const HighLevelModel& m, const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["classes"] = strings_to_json(m.classes);
  j["single_class"] = m.single_class;
  j["weights"] = mat_to_json(m.weights);
  write_json_file(j, path);
}

HighLevelModel load_highlevel_model(const std::string& path) {
  const json j = load_json_file(path, "classifier");
  check_version(j, path);
  HighLevelModel m;
  m.classes = strings_from_json(j.at("classes"));
  m.single_class = j.at("single_class").get<bool>();
  m.weights = mat_from_json(j.at("weights"));
  if (m.weights.rows() != static_cast<Eigen::Index>(m.classes.size()))
    throw std::runtime_error(path + ": one weight row per class required");
  return m;
}

LabelingRecord make_labeling_record(const std::string& id,
                                    const SegmentGraph& g, const Labeling& y,
                                    const LabelSpace& ls) {
  LabelingRecord rec;
  rec.id = id;
  rec.segments = g.segments();
  const int S = g.num_segments();
  const int O = g.num_tracks();
  rec.subactivity.resize(static_cast<size_t>(S));
  rec.affordances.assign(static_cast<size_t>(S),
                         std::vector<std::string>(static_cast<size_t>(O)));
  for (int s = 0; s < S; ++s) {
    rec.subactivity[static_cast<size_t>(s)] =
        ls.subactivities.at(static_cast<size_t>(y.labels[static_cast<size_t>(
            g.node_index(s, -1))]));
    for (int t = 0; t < O; ++t)
      rec.affordances[static_cast<size_t>(s)][static_cast<size_t>(t)] =
          ls.affordances.at(static_cast<size_t>(
              y.labels[static_cast<size_t>(g.node_index(s, t))]));
  }
  return rec;
}

void save_labelings(const std::vector<LabelingRecord>& recs,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& rec : recs) {
    json j;
    j["id"] = rec.id;
    json segs = json::array();
    for (const auto& r : rec.segments)
      segs.push_back(json{{"first", r.first}, {"last", r.last}});
    j["segments"] = std::move(segs);
    j["subactivity"] = strings_to_json(rec.subactivity);
    json aff = json::array();
    for (const auto& per_seg : rec.affordances)
      aff.push_back(strings_to_json(per_seg));
    j["affordances"] = std::move(aff);
    if (!rec.highlevel.empty()) j["highlevel"] = rec.highlevel;
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<LabelingRecord> load_labelings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labeling file: " + path);
  std::vector<LabelingRecord> recs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
    LabelingRecord rec;
    rec.id = j.at("id").get<std::string>();
    for (const auto& s : j.at("segments"))
      rec.segments.push_back(
          FrameRange{s.at("first").get<int>(), s.at("last").get<int>()});
    rec.subactivity = strings_from_json(j.at("subactivity"));
    for (const auto& per_seg : j.at("affordances"))
      rec.affordances.push_back(strings_from_json(per_seg));
    if (j.contains("highlevel"))
      rec.highlevel = j.at("highlevel").get<std::string>();
    recs.push_back(std::move(rec));
  }
  return recs;
}

} // namespace actaff
