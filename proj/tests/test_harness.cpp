#include "actaff/dataset.hpp"
#include "actaff/metrics.hpp"
#include "actaff/model_io.hpp"
#include "actaff/rng.hpp"
#include "actaff/synth.hpp"
#include "actaff/xval.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace actaff;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("actaff_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ActivitySequence tiny_sequence() {
  ActivitySequence seq;
  seq.id = "seq-7";
  seq.subject = "subject-2";
  seq.highlevel = "stacking";
  for (int f = 0; f < 6; ++f) {
    SkeletonFrame sf;
    for (int j = 0; j < kNumJoints; ++j)
      sf.joints[j] = Vec3(0.125 * j, -0.25 * f, 1.0 + 0.3 * j * f);
    seq.frames.push_back(sf);
  }
  ObjectTrack t;
  t.id = 4;
  for (int f = 0; f < 6; ++f) {
    t.centroid.push_back(Vec3(0.1 * f, 0.2, 1.0 / 3.0));
    t.bbox.push_back(Eigen::Vector4d(10 + f, 20, 30 + f, 40));
    t.occluded.push_back(f == 2 ? 1 : 0);
    Eigen::Matrix<Scalar, 6, 1> x;
    x << f, 0.5, -0.5, 0.0625, 1e-7, 2.0 / 7.0;
    t.transform.push_back(x);
  }
  seq.tracks.push_back(t);
  seq.segments.push_back({{0, 3}, "reach", {"graspable"}});
  seq.segments.push_back({{4, 5}, "place", {"placeable"}});
  return seq;
}

bool same_sequence(const ActivitySequence& a, const ActivitySequence& b) {
  if (a.id != b.id || a.subject != b.subject || a.highlevel != b.highlevel ||
      a.num_frames() != b.num_frames() || a.num_tracks() != b.num_tracks() ||
      a.segments.size() != b.segments.size())
    return false;
  for (int f = 0; f < a.num_frames(); ++f)
    for (int j = 0; j < kNumJoints; ++j)
      if (a.frames[f].joints[j] != b.frames[f].joints[j]) return false;
  for (int t = 0; t < a.num_tracks(); ++t) {
    const ObjectTrack& x = a.tracks[t];
    const ObjectTrack& y = b.tracks[t];
    if (x.id != y.id || x.centroid != y.centroid || x.occluded != y.occluded ||
        x.bbox.size() != y.bbox.size() ||
        x.transform.size() != y.transform.size())
      return false;
    for (size_t f = 0; f < x.bbox.size(); ++f)
      if (x.bbox[f] != y.bbox[f]) return false;
    for (size_t f = 0; f < x.transform.size(); ++f)
      if (x.transform[f] != y.transform[f]) return false;
  }
  for (size_t s = 0; s < a.segments.size(); ++s) {
    if (a.segments[s].range.first != b.segments[s].range.first ||
        a.segments[s].range.last != b.segments[s].range.last ||
        a.segments[s].subactivity != b.segments[s].subactivity ||
        a.segments[s].affordances != b.segments[s].affordances)
      return false;
  }
  return true;
}

// Small, fast generator setup shared by the xval cases.
SynthConfig small_synth(int num_sequences, int num_subjects) {
  SynthConfig cfg = SynthConfig::defaults();
  cfg.num_sequences = num_sequences;
  cfg.num_subjects = num_subjects;
  cfg.num_objects = 2;
  cfg.segments_per_sequence = 3;
  cfg.segment_len_min = 8;
  cfg.segment_len_max = 10;
  cfg.noise = 0.1;
  return cfg;
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("sequence JSON round trip preserves every field") {
  const ActivitySequence seq = tiny_sequence();
  const ActivitySequence back = sequence_from_json(sequence_to_json(seq));
  CHECK(same_sequence(seq, back));

  // Through a JSONL file as well.
  const std::string path = temp_path("roundtrip.jsonl");
  ActivitySequence other = tiny_sequence();
  other.id = "seq-8";
  other.tracks.clear();
  other.segments.clear(); // ground truth and tracks are optional
  save_sequences({seq, other}, path);
  const auto loaded = load_sequences(path);
  REQUIRE(loaded.size() == 2);
  CHECK(same_sequence(loaded[0], seq));
  CHECK(same_sequence(loaded[1], other));
  std::remove(path.c_str());
}

TEST_CASE("a 520-frame generated sequence loads with 3 tracks") {
  SynthConfig cfg = SynthConfig::defaults();
  cfg.num_sequences = 1;
  cfg.num_objects = 3;
  cfg.segments_per_sequence = 40;
  cfg.segment_len_min = cfg.segment_len_max = 13; // 40 x 13 = 520 frames
  const auto seqs = synth_generate(cfg, 11);
  REQUIRE(seqs.size() == 1);
  REQUIRE(seqs[0].num_frames() == 520);

  const std::string path = temp_path("fixture520.jsonl");
  save_sequences(seqs, path);
  const auto loaded = load_sequences(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].num_frames() == 520);
  CHECK(loaded[0].num_tracks() == 3);
  CHECK(loaded[0].segments.size() == 40);
  CHECK(same_sequence(loaded[0], seqs[0]));
  std::remove(path.c_str());
}

TEST_CASE("malformed corpus lines report their line number") {
  const std::string good = sequence_to_json(tiny_sequence());

  const std::string path = temp_path("bad.jsonl");
  {
    std::ofstream out(path);
    out << good << "\n" << "{ this is not json\n";
  }
  CHECK_THROWS_WITH_AS(load_sequences(path),
                       doctest::Contains(":2:"), std::runtime_error);

  {
    // Valid JSON on line 3 but one joint short.
    ActivitySequence seq = tiny_sequence();
    std::string text = sequence_to_json(seq);
    const std::string joint = "[0.0,-0.0,1.0],";
    const size_t pos = text.find(joint);
    REQUIRE(pos != std::string::npos);
    text.erase(pos, joint.size());
    std::ofstream out(path);
    out << good << "\n" << good << "\n" << text << "\n";
  }
  CHECK_THROWS_WITH_AS(load_sequences(path),
                       doctest::Contains(":3:"), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("perfect predictions score 1.0 with a diagonal confusion matrix") {
  const std::vector<int> truth = {0, 1, 2, 1, 0, 2, 2};
  const Metrics m = evaluate_labels(truth, truth, 3);
  CHECK(m.total == 7);
  CHECK(m.micro_precision == 1.0);
  CHECK(m.micro_recall == 1.0);
  CHECK(m.macro_precision == 1.0);
  CHECK(m.macro_recall == 1.0);
  CHECK(m.confusion.diagonal().sum() == 7.0);
  CHECK(m.confusion.sum() == 7.0);
  for (int k = 0; k < 3; ++k) {
    CHECK(m.class_precision[k] == 1.0);
    CHECK(m.class_recall[k] == 1.0);
  }
}

TEST_CASE("one-class predictions on a balanced two-class set") {
  // Class 2 exists in the label space but never appears.
  const std::vector<int> truth = {0, 0, 1, 1};
  const std::vector<int> pred = {0, 0, 0, 0};
  const Metrics m = evaluate_labels(truth, pred, 3);
  CHECK(m.micro_precision == doctest::Approx(0.5));
  CHECK(m.micro_recall == doctest::Approx(0.5));
  // Precision is defined only for the predicted class.
  CHECK(m.class_precision[0] == doctest::Approx(0.5));
  CHECK(std::isnan(m.class_precision[1]));
  CHECK(std::isnan(m.class_precision[2]));
  CHECK(m.macro_precision == doctest::Approx(0.5));
  // Recall is defined for both classes with truth instances.
  CHECK(m.class_recall[0] == doctest::Approx(1.0));
  CHECK(m.class_recall[1] == doctest::Approx(0.0));
  CHECK(std::isnan(m.class_recall[2]));
  CHECK(m.macro_recall == doctest::Approx(0.5));

  CHECK(m.confusion(0, 0) == 2.0);
  CHECK(m.confusion(1, 0) == 2.0);
  CHECK(m.confusion.col(1).sum() == 0.0);
}

TEST_CASE("micro precision equals recall equals accuracy on random pairs") {
  Rng rng(71);
  for (int trial = 0; trial < 25; ++trial) {
    const int K = 2 + rng.uniform_int(4);
    const int n = 1 + rng.uniform_int(40);
    std::vector<int> truth(n), pred(n);
    int correct = 0;
    for (int i = 0; i < n; ++i) {
      truth[i] = rng.uniform_int(K);
      pred[i] = rng.uniform_int(K);
      if (truth[i] == pred[i]) ++correct;
    }
    const Metrics m = evaluate_labels(truth, pred, K);
    const Scalar acc = static_cast<Scalar>(correct) / n;
    CHECK(m.micro_precision == doctest::Approx(acc));
    CHECK(m.micro_recall == m.micro_precision);
    CHECK(m.total == n);

    // Confusion marginals: row sums count truth, column sums count predictions.
    for (int k = 0; k < K; ++k) {
      const int truth_k = static_cast<int>(std::count(truth.begin(), truth.end(), k));
      const int pred_k = static_cast<int>(std::count(pred.begin(), pred.end(), k));
      CHECK(m.confusion.row(k).sum() == static_cast<Scalar>(truth_k));
      CHECK(m.confusion.col(k).sum() == static_cast<Scalar>(pred_k));
    }
  }
}

TEST_CASE("evaluate_labels rejects misaligned or out-of-range input") {
  CHECK_THROWS_AS(evaluate_labels({0, 1}, {0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_labels({0, 2}, {0, 0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_labels({0, -1}, {0, 0}, 2), std::invalid_argument);
}

TEST_CASE("summary of fold values") {
  const Summary s = summarize({1.0, 2.0, 3.0});
  CHECK(s.mean == doctest::Approx(2.0));
  CHECK(s.stderr_ == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));

  const Summary same = summarize({0.25, 0.25, 0.25, 0.25});
  CHECK(same.mean == doctest::Approx(0.25));
  CHECK(same.stderr_ == 0.0);

  const Summary one = summarize({0.7});
  CHECK(one.mean == doctest::Approx(0.7));
  CHECK(one.stderr_ == 0.0);

  const Summary none = summarize({});
  CHECK(none.mean == 0.0);
  CHECK(none.stderr_ == 0.0);
}

TEST_CASE("generator is deterministic in the seed") {
  const SynthConfig cfg = small_synth(6, 3);
  const auto a = synth_generate(cfg, 42);
  const auto b = synth_generate(cfg, 42);
  const auto c = synth_generate(cfg, 43);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(sequence_to_json(a[i]) == sequence_to_json(b[i]));
  bool any_differs = false;
  for (size_t i = 0; i < a.size(); ++i)
    any_differs = any_differs || sequence_to_json(a[i]) != sequence_to_json(c[i]);
  CHECK(any_differs);
}

TEST_CASE("generated label chains respect the transition tables") {
  const SynthConfig cfg = small_synth(12, 3);
  const auto seqs = synth_generate(cfg, 5);
  for (const ActivitySequence& seq : seqs) {
    const int cls = [&] {
      for (size_t k = 0; k < cfg.labels.highlevel.size(); ++k)
        if (cfg.labels.highlevel[k] == seq.highlevel) return static_cast<int>(k);
      FAIL("unknown high-level class");
      return -1;
    }();
    const Mat& trans = cfg.class_transitions[static_cast<size_t>(cls)];
    int prev = 0; // chains start from state 0's row
    for (const LabeledSegment& s : seq.segments) {
      const int a = cfg.labels.subactivity_index(s.subactivity);
      CHECK(trans(prev, a) > 0.0);
      prev = a;
    }
    // Round-trip validation doubles as a tiling check on the ground truth.
    CHECK(same_sequence(seq, sequence_from_json(sequence_to_json(seq))));
  }
}

TEST_CASE("subjects and classes rotate so every subject sees every class") {
  SynthConfig cfg = small_synth(16, 4);
  const auto seqs = synth_generate(cfg, 9);
  std::map<std::string, std::set<std::string>> classes_by_subject;
  std::map<std::string, int> count_by_subject;
  for (const auto& seq : seqs) {
    classes_by_subject[seq.subject].insert(seq.highlevel);
    ++count_by_subject[seq.subject];
  }
  REQUIRE(classes_by_subject.size() == 4);
  for (const auto& [subject, classes] : classes_by_subject) {
    CHECK(classes.size() == cfg.labels.highlevel.size());
    CHECK(count_by_subject[subject] == 4);
  }
}

TEST_CASE("generator rejects inconsistent configs") {
  SynthConfig cfg = SynthConfig::defaults();
  cfg.palm_velocity.pop_back();
  CHECK_THROWS_AS(synth_generate(cfg, 1), std::invalid_argument);

  cfg = SynthConfig::defaults();
  cfg.class_transitions[0](1, 0) = -0.5;
  CHECK_THROWS_AS(synth_generate(cfg, 1), std::invalid_argument);

  cfg = SynthConfig::defaults();
  cfg.segment_len_min = 1; // too short to carry motion statistics
  CHECK_THROWS_AS(synth_generate(cfg, 1), std::invalid_argument);

  cfg = SynthConfig::defaults();
  cfg.active_affordance[2] = 99;
  CHECK_THROWS_AS(synth_generate(cfg, 1), std::invalid_argument);
}

TEST_CASE("model files round-trip losslessly") {
  Rng rng(313);
  Model m;
  m.labels.subactivities = {"a0", "a1", "a2"};
  m.labels.affordances = {"o0", "o1"};
  m.labels.highlevel = {"h0", "h1"};
  m.segmentation = "uniform:size=20";
  m.binner.levels = 4;
  for (int f = 0; f < kNumFamilies; ++f) {
    Mat t(kRawDims[static_cast<size_t>(f)], 4);
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      Scalar v = rng.uniform(-1.0, 1.0);
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        t(r, c) = v;
        v += rng.uniform(0.01, 1.0); // keep rows strictly ascending
      }
    }
    m.binner.thresholds[static_cast<size_t>(f)] = std::move(t);
  }
  const WeightLayout layout(3, 2, m.binner.dims());
  m.w.layout = layout;
  m.w.values = testutil::random_vec(rng, layout.total_dim(), -2.0, 2.0);

  const std::string path = temp_path("model.json");
  save_model(m, path);
  const Model back = load_model(path);
  CHECK(back.labels.subactivities == m.labels.subactivities);
  CHECK(back.labels.affordances == m.labels.affordances);
  CHECK(back.labels.highlevel == m.labels.highlevel);
  CHECK(back.segmentation == m.segmentation);
  CHECK(back.binner.levels == 4);
  for (int f = 0; f < kNumFamilies; ++f)
    CHECK(back.binner.thresholds[static_cast<size_t>(f)] ==
          m.binner.thresholds[static_cast<size_t>(f)]);
  CHECK(back.w.values == m.w.values); // bit-exact doubles
  CHECK(back.w.layout.total_dim() == layout.total_dim());

  // Tampering with the version marker must be rejected.
  std::string text = slurp(path);
  const std::string marker = "\"format_version\": 1";
  const size_t pos = text.find(marker);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, marker.size(), "\"format_version\": 99");
  {
    std::ofstream out(path);
    out << text;
  }
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("unsupported"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("theta and classifier files round-trip") {
  Rng rng(314);
  ThetaWeights theta;
  theta.num_subactivities = 3;
  theta.values = Mat(2, 5);
  for (Eigen::Index r = 0; r < 2; ++r)
    for (Eigen::Index c = 0; c < 5; ++c) theta.values(r, c) = rng.normal();
  const std::string tpath = temp_path("theta.json");
  save_theta(theta, tpath);
  const ThetaWeights tback = load_theta(tpath);
  CHECK(tback.num_subactivities == 3);
  CHECK(tback.values == theta.values);
  std::remove(tpath.c_str());

  HighLevelModel hl;
  hl.classes = {"h0", "h1", "h2"};
  hl.single_class = false;
  hl.weights = Mat(3, 7);
  for (Eigen::Index r = 0; r < 3; ++r)
    for (Eigen::Index c = 0; c < 7; ++c) hl.weights(r, c) = rng.normal();
  const std::string hpath = temp_path("highlevel.json");
  save_highlevel_model(hl, hpath);
  const HighLevelModel hback = load_highlevel_model(hpath);
  CHECK(hback.classes == hl.classes);
  CHECK(hback.single_class == hl.single_class);
  CHECK(hback.weights == hl.weights);
  std::remove(hpath.c_str());
}

TEST_CASE("labeling records round-trip and match the graph labels") {
  Rng rng(315);
  const testutil::RandomInstance inst = testutil::random_instance(rng);
  LabelSpace ls;
  for (int k = 0; k < inst.Ka; ++k) ls.subactivities.push_back("act" + std::to_string(k));
  for (int k = 0; k < inst.Ko; ++k) ls.affordances.push_back("aff" + std::to_string(k));
  ls.highlevel = {"h0"};

  const Labeling y = testutil::random_labeling(rng, inst.graph, inst.Ka, inst.Ko);
  LabelingRecord rec = make_labeling_record("seq-1", inst.graph, y, ls);
  CHECK(rec.id == "seq-1");
  REQUIRE(static_cast<int>(rec.subactivity.size()) == inst.graph.num_segments());
  for (int s = 0; s < inst.graph.num_segments(); ++s) {
    const int a = y.labels[static_cast<size_t>(inst.graph.node_index(s, -1))];
    CHECK(rec.subactivity[static_cast<size_t>(s)] ==
          ls.subactivities[static_cast<size_t>(a)]);
    for (int t = 0; t < inst.graph.num_tracks(); ++t) {
      const int o = y.labels[static_cast<size_t>(inst.graph.node_index(s, t))];
      CHECK(rec.affordances[static_cast<size_t>(s)][static_cast<size_t>(t)] ==
            ls.affordances[static_cast<size_t>(o)]);
    }
  }

  rec.highlevel = "h0";
  LabelingRecord plain;
  plain.id = "seq-2";
  plain.segments = {{0, 9}, {10, 19}};
  plain.subactivity = {"act0", "act0"};
  plain.affordances = {{}, {}};
  const std::string path = temp_path("labels.jsonl");
  save_labelings({rec, plain}, path);
  const auto back = load_labelings(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == rec.id);
  CHECK(back[0].subactivity == rec.subactivity);
  CHECK(back[0].affordances == rec.affordances);
  CHECK(back[0].highlevel == "h0");
  REQUIRE(back[0].segments.size() == rec.segments.size());
  for (size_t s = 0; s < rec.segments.size(); ++s) {
    CHECK(back[0].segments[s].first == rec.segments[s].first);
    CHECK(back[0].segments[s].last == rec.segments[s].last);
  }
  CHECK(back[1].id == "seq-2");
  CHECK(back[1].highlevel.empty());
  CHECK(back[1].affordances == plain.affordances);
  std::remove(path.c_str());
}

TEST_CASE("leave-one-subject-out folds and a reproducible report") {
  const SynthConfig cfg = small_synth(8, 4);
  const auto data = synth_generate(cfg, 17);

  XvalOptions opt;
  opt.train.C = 10.0;
  opt.train.epsilon = 0.01;
  opt.train.max_iterations = 15;
  opt.bin_levels = 3;
  opt.highlevel_max_iterations = 100;

  const XvalResult r = cross_validate(data, cfg.labels, opt);
  REQUIRE(r.folds.size() == 4);
  std::vector<std::string> subjects;
  for (const FoldResult& f : r.folds) subjects.push_back(f.subject);
  std::vector<std::string> sorted = subjects;
  std::sort(sorted.begin(), sorted.end());
  CHECK(subjects == sorted);
  CHECK(std::set<std::string>(subjects.begin(), subjects.end()).size() == 4);

  for (const FoldResult& f : r.folds) {
    // Each subject holds 2 sequences x 3 segments, with 2 tracks each.
    CHECK(f.subactivity.total == 6);
    CHECK(f.affordance.total == 12);
    CHECK(f.theta_subject.empty()); // no hypotheses: no reserved subject
    CHECK_FALSE(f.frame_subactivity.has_value());
    CHECK(f.highlevel_truth.has_value());
    CHECK(f.highlevel_truth->total == 2);
  }

  const std::string report = format_report(r);
  CHECK_FALSE(report.empty());

  // Same inputs, fresh run: byte-identical report.
  const XvalResult again = cross_validate(data, cfg.labels, opt);
  CHECK(format_report(again) == report);

  // A single subject cannot be cross-validated.
  const auto solo = synth_generate(small_synth(2, 1), 17);
  CHECK_THROWS_AS(cross_validate(solo, cfg.labels, opt), std::invalid_argument);
}

} // TEST_SUITE
