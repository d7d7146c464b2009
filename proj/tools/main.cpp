// Command-line front end: dataset generation and conversion, segmentation,
// training, inference (single and fused), theta fitting, high-level
// classification, detection tracking, cross-validation, and evaluation.
//
// Exit codes: 0 success, 1 input error, 2 a solver hit its resource budget
// (outputs still carry the best incumbent found).

#include <CLI11.hpp>
#include <json.hpp>

#include "actaff/dataset.hpp"
#include "actaff/features.hpp"
#include "actaff/highlevel.hpp"
#include "actaff/inference.hpp"
#include "actaff/label_space.hpp"
#include "actaff/learning.hpp"
#include "actaff/metrics.hpp"
#include "actaff/model_io.hpp"
#include "actaff/multiseg.hpp"
#include "actaff/segmentation.hpp"
#include "actaff/synth.hpp"
#include "actaff/tracking_graph.hpp"
#include "actaff/xval.hpp"

#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace actaff;

namespace {

// Vocabularies observed in a dataset, in sorted order so indices are stable
// across runs and machines.
LabelSpace labels_from_data(const std::vector<ActivitySequence>& seqs) {
  std::set<std::string> sub, aff, hl;
  for (const auto& seq : seqs) {
    for (const auto& seg : seq.segments) {
      sub.insert(seg.subactivity);
      for (const auto& a : seg.affordances) aff.insert(a);
    }
    if (!seq.highlevel.empty()) hl.insert(seq.highlevel);
  }
  if (sub.empty() || aff.empty())
    throw std::runtime_error("dataset carries no ground-truth labels; pass "
                             "--labels cad120 or label the data");
  if (hl.empty()) hl.insert("unlabeled");
  LabelSpace ls;
  ls.subactivities.assign(sub.begin(), sub.end());
  ls.affordances.assign(aff.begin(), aff.end());
  ls.highlevel.assign(hl.begin(), hl.end());
  return ls;
}

LabelSpace pick_labels(const std::string& mode,
                       const std::vector<ActivitySequence>& seqs) {
  if (mode == "cad120") return LabelSpace::defaults();
  if (mode == "data") return labels_from_data(seqs);
  throw std::runtime_error("--labels must be 'data' or 'cad120'");
}

std::vector<FrameRange> segments_for(const ActivitySequence& seq,
                                     const std::string& descriptor) {
  if (descriptor == "truth") {
    if (seq.segments.empty())
      throw std::runtime_error("sequence " + seq.id +
                               " has no ground-truth segmentation");
    return truth_segments(seq);
  }
  return apply_segmentation(seq, descriptor);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

void print_metrics(std::ostream& out, const std::string& name,
                   const Metrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%-12s micro %.6f  macro-p %.6f  macro-r %.6f  n %d\n",
                name.c_str(), m.micro_precision, m.macro_precision,
                m.macro_recall, m.total);
  out << buf;
}

void write_confusion_csv(const std::string& path, const Metrics& m,
                         const std::vector<std::string>& names) {
  std::ofstream out = open_out(path);
  out << "truth\\pred";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (Eigen::Index r = 0; r < m.confusion.rows(); ++r) {
    out << names[static_cast<size_t>(r)];
    for (Eigen::Index c = 0; c < m.confusion.cols(); ++c)
      out << ',' << m.confusion(r, c);
    out << '\n';
  }
}

// Expands a per-segment record to per-frame labels; the segments must tile
// [0, num_frames).
FrameLabeling record_to_frames(const LabelingRecord& rec, const LabelSpace& ls,
                               int num_frames, int num_tracks) {
  FrameLabeling y;
  y.subactivity.assign(num_frames, 0);
  y.affordance.assign(num_tracks, std::vector<int>(num_frames, 0));
  int expect = 0;
  for (size_t s = 0; s < rec.segments.size(); ++s) {
    const FrameRange r = rec.segments[s];
    if (r.first != expect || r.last < r.first || r.last >= num_frames)
      throw std::runtime_error("prediction for " + rec.id +
                               " does not tile the sequence frames");
    expect = r.last + 1;
    if (static_cast<int>(rec.affordances[s].size()) != num_tracks)
      throw std::runtime_error("prediction for " + rec.id +
                               " has the wrong track count");
    const int a = ls.subactivity_index(rec.subactivity[s]);
    for (int f = r.first; f <= r.last; ++f) y.subactivity[f] = a;
    for (int t = 0; t < num_tracks; ++t) {
      const int o = ls.affordance_index(rec.affordances[s][t]);
      for (int f = r.first; f <= r.last; ++f) y.affordance[t][f] = o;
    }
  }
  if (expect != num_frames)
    throw std::runtime_error("prediction for " + rec.id +
                             " does not cover every frame");
  return y;
}

Vec highlevel_feature_row(const FrameLabeling& fl, const ActivitySequence& seq,
                          int Ka, int Ko, int bins) {
  const Vec hist = histogram_features(fl, Ka, Ko);
  const Vec occ = occlusion_features(seq.tracks, seq.num_frames(), bins);
  Vec row(hist.size() + occ.size());
  row << hist, occ;
  return row;
}

// ---------------------------------------------------------------------------
// Best-effort converter for the public CAD-120 annotation layout. Expected
// inside --dir:
//   activityLabel.txt   id,high_level_label[,subject][,...]
//   labeling.txt        id,start_frame,end_frame,sub_activity,aff_1,...,aff_O
//                       (frames 1-based inclusive)
//   <id>.txt            skeleton: 171 comma/space separated numbers per line
//                       (frame, 11 joints x [9 orientation, conf, xyz, conf],
//                       4 joints x [xyz, conf]); millimeters
//   <id>_obj<k>.txt     frame,object_id,x1,y1,x2,y2[,6 transform values]
// Gaps between labeled segments are bridged by extending the earlier segment;
// object depth is unavailable, so centroids carry the scaled box center.
// ---------------------------------------------------------------------------

std::vector<double> parse_numbers(const std::string& line) {
  std::vector<double> out;
  const char* p = line.c_str();
  char* end = nullptr;
  while (*p) {
    if (*p == ',' || *p == ' ' || *p == '\t' || *p == '\r') {
      ++p;
      continue;
    }
    const double v = std::strtod(p, &end);
    if (end == p) break;
    out.push_back(v);
    p = end;
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
      field.pop_back();
    out.push_back(field);
  }
  return out;
}

std::vector<SkeletonFrame> parse_cad_skeleton(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open skeleton file: " + path);
  // Source joint order: head neck torso Lshoulder Lelbow Rshoulder Relbow
  // Lhip Lknee Rhip Rknee | Lhand Rhand Lfoot Rfoot.
  const std::array<std::pair<Joint, int>, kNumJoints> mapping = {{
      {Head, 0},
      {Neck, 1},
      {Torso, 2},
      {LShoulder, 3},
      {RShoulder, 5},
      {LElbow, 4},
      {RElbow, 6},
      {LPalm, 11},
      {RPalm, 12},
  }};
  std::vector<SkeletonFrame> frames;
  std::string line;
  while (std::getline(in, line)) {
    const std::vector<double> v = parse_numbers(line);
    if (v.size() < 171) {
      if (v.empty()) continue;
      throw std::runtime_error(path + ": skeleton line with " +
                               std::to_string(v.size()) +
                               " values (expected 171)");
    }
    SkeletonFrame f;
    for (const auto& [joint, src] : mapping) {
      size_t base;
      if (src < 11)
        base = 1 + static_cast<size_t>(src) * 14 + 10; // skip orientation+conf
      else
        base = 1 + 11 * 14 + static_cast<size_t>(src - 11) * 4;
      f.joints[joint] = Vec3(v[base], v[base + 1], v[base + 2]) / 1000.0;
    }
    frames.push_back(f);
  }
  if (frames.empty()) throw std::runtime_error(path + ": no skeleton frames");
  return frames;
}

ObjectTrack parse_cad_object(const std::string& path, int track_id,
                             int num_frames) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open object file: " + path);
  ObjectTrack tr;
  tr.id = track_id;
  tr.centroid.assign(num_frames, Vec3::Zero());
  tr.bbox.assign(num_frames, Eigen::Vector4d::Zero());
  tr.occluded.assign(num_frames, 1);
  std::string line;
  while (std::getline(in, line)) {
    const std::vector<double> v = parse_numbers(line);
    if (v.size() < 6) continue;
    const int f = static_cast<int>(v[0]) - 1; // 1-based frames
    if (f < 0 || f >= num_frames) continue;
    const Eigen::Vector4d box(v[2], v[3], v[4], v[5]);
    if (box.isZero()) continue; // lost detection; stays occluded
    tr.bbox[f] = box;
    tr.centroid[f] =
        Vec3((box[0] + box[2]) / 2.0, (box[1] + box[3]) / 2.0, 0.0) / 1000.0;
    tr.occluded[f] = 0;
  }
  return tr;
}

std::vector<ActivitySequence> convert_cad120(const std::string& dir,
                                             const std::string& default_subject) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::ifstream act(root / "activityLabel.txt");
  if (!act)
    throw std::runtime_error("missing activityLabel.txt under " + dir);
  struct Head {
    std::string highlevel;
    std::string subject;
  };
  std::map<std::string, Head> heads;
  std::vector<std::string> order;
  std::string line;
  while (std::getline(act, line)) {
    const auto f = split_csv(line);
    if (f.size() < 2 || f[0].empty()) continue;
    heads[f[0]] = {f[1], f.size() > 2 && !f[2].empty() ? f[2] : default_subject};
    order.push_back(f[0]);
  }

  struct Seg {
    int start, end;
    std::string sub;
    std::vector<std::string> affs;
  };
  std::map<std::string, std::vector<Seg>> seg_map;
  std::ifstream lab(root / "labeling.txt");
  if (!lab) throw std::runtime_error("missing labeling.txt under " + dir);
  while (std::getline(lab, line)) {
    const auto f = split_csv(line);
    if (f.size() < 5 || f[0].empty()) continue;
    Seg s;
    s.start = std::stoi(f[1]) - 1;
    s.end = std::stoi(f[2]) - 1;
    s.sub = f[3];
    s.affs.assign(f.begin() + 4, f.end());
    while (!s.affs.empty() && s.affs.back().empty()) s.affs.pop_back();
    seg_map[f[0]].push_back(s);
  }

  std::vector<ActivitySequence> out;
  for (const auto& id : order) {
    ActivitySequence seq;
    seq.id = id;
    seq.highlevel = heads[id].highlevel;
    seq.subject = heads[id].subject;
    seq.frames = parse_cad_skeleton((root / (id + ".txt")).string());
    const int T = seq.num_frames();
    for (int k = 1;; ++k) {
      const fs::path obj = root / (id + "_obj" + std::to_string(k) + ".txt");
      if (!fs::exists(obj)) break;
      seq.tracks.push_back(parse_cad_object(obj.string(), k - 1, T));
    }
    auto segs = seg_map[id];
    if (segs.empty())
      throw std::runtime_error("no labeled segments for sequence " + id);
    // Bridge annotation gaps and clamp to the skeleton extent.
    segs.front().start = 0;
    for (size_t s = 0; s + 1 < segs.size(); ++s)
      segs[s].end = segs[s + 1].start - 1;
    segs.back().end = T - 1;
    for (const auto& s : segs) {
      if (static_cast<int>(s.affs.size()) != seq.num_tracks())
        throw std::runtime_error("sequence " + id +
                                 ": affordance count != object count");
      LabeledSegment ls;
      ls.range = {s.start, s.end};
      ls.subactivity = s.sub;
      ls.affordances = s.affs;
      seq.segments.push_back(ls);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

// Detection-graph records, one JSON object per line:
//   {"frame": f, "id": d, "score": s,
//    "links": [{"prev": d0, "sim_prev": a, "sim_tracked": b}, ...]}
// where "prev" names a detection on the immediately preceding frame.
struct LoadedDetections {
  DetectionGraph graph;
  std::vector<int> external_id;
  std::vector<int> frame; // original (unmirrored) frame per node
  std::map<int, int> index_of;
};

LoadedDetections load_detection_graph(const std::string& path, Scalar lambda) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open detection file: " + path);
  using nlohmann::json;
  std::vector<json> records;
  std::string line;
  int line_no = 0;
  LoadedDetections out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
    const int id = j.at("id").get<int>();
    if (out.index_of.count(id))
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": duplicate detection id");
    const int node = out.graph.add_node(j.at("frame").get<int>(),
                                        j.at("score").get<Scalar>());
    out.index_of[id] = node;
    out.external_id.push_back(id);
    out.frame.push_back(j.at("frame").get<int>());
    records.push_back(std::move(j));
  }
  for (size_t n = 0; n < records.size(); ++n) {
    const json& j = records[n];
    if (!j.contains("links")) continue;
    for (const auto& l : j.at("links")) {
      const int prev = l.at("prev").get<int>();
      const auto it = out.index_of.find(prev);
      if (it == out.index_of.end())
        throw std::runtime_error(path + ": link to unknown detection " +
                                 std::to_string(prev));
      const Scalar ts =
          track_score(l.at("sim_prev").get<Scalar>(),
                      l.at("sim_tracked").get<Scalar>(),
                      out.graph.nodes[n].score, lambda);
      out.graph.add_edge(it->second, static_cast<int>(n), ts);
    }
  }
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human activity and object affordance labeling toolkit"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  int threads = 1;
  app.add_option("--seed", seed, "seed for all randomized steps")
      ->capture_default_str();
  app.add_option("--threads", threads, "training separation-oracle fan-out")
      ->capture_default_str();
  app.set_config("--config", "", "INI file; [subcommand] sections set per-"
                                 "subcommand options");

  SolverOptions solver;
  TrainConfig train_cfg;
  std::string labels_mode = "data";

  bool resource_limited = false;

  // --- synth ---------------------------------------------------------------
  auto* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic labeled dataset");
  synth_cmd->fallthrough();
  std::string synth_out;
  SynthConfig synth_cfg = SynthConfig::defaults();
  synth_cmd->add_option("--out", synth_out, "output JSONL path")->required();
  synth_cmd->add_option("--sequences", synth_cfg.num_sequences, "")
      ->capture_default_str();
  synth_cmd->add_option("--subjects", synth_cfg.num_subjects, "")
      ->capture_default_str();
  synth_cmd->add_option("--objects", synth_cfg.num_objects, "")
      ->capture_default_str();
  synth_cmd->add_option("--segments", synth_cfg.segments_per_sequence, "")
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth_cfg.noise, "observation noise level")
      ->capture_default_str();
  synth_cmd->callback([&] {
    const auto seqs = synth_generate(synth_cfg, seed);
    save_sequences(seqs, synth_out);
    std::cout << "wrote " << seqs.size() << " sequences to " << synth_out
              << "\n";
  });

  // --- convert-cad120 ------------------------------------------------------
  auto* conv_cmd = app.add_subcommand(
      "convert-cad120", "best-effort conversion of a CAD-120 annotation "
                        "directory to the canonical JSONL format");
  conv_cmd->fallthrough();
  std::string conv_dir, conv_out, conv_subject = "subject1";
  conv_cmd->add_option("--dir", conv_dir, "annotation directory")->required();
  conv_cmd->add_option("--out", conv_out, "output JSONL path")->required();
  conv_cmd->add_option("--subject", conv_subject,
                       "subject id when activityLabel.txt lacks one")
      ->capture_default_str();
  conv_cmd->callback([&] {
    const auto seqs = convert_cad120(conv_dir, conv_subject);
    save_sequences(seqs, conv_out);
    std::cout << "converted " << seqs.size() << " sequences to " << conv_out
              << "\n";
  });

  // --- segment --------------------------------------------------------------
  auto* seg_cmd =
      app.add_subcommand("segment", "segment sequences and emit boundaries");
  seg_cmd->fallthrough();
  std::string seg_data, seg_method = "chain-dist:k=0.5", seg_out;
  seg_cmd->add_option("--data", seg_data, "input JSONL")->required();
  seg_cmd->add_option("--method", seg_method,
                      "'truth', 'uniform:size=N,offset=N', 'chain-dist:k=X' "
                      "or 'chain-rate:k=X'")
      ->capture_default_str();
  seg_cmd->add_option("--out", seg_out, "CSV path (default stdout)");
  seg_cmd->callback([&] {
    const auto seqs = load_sequences(seg_data);
    std::ofstream file;
    if (!seg_out.empty()) file = open_out(seg_out);
    std::ostream& out = seg_out.empty() ? std::cout : file;
    out << "id,segment,first,last\n";
    for (const auto& seq : seqs) {
      const auto segs = segments_for(seq, seg_method);
      for (size_t s = 0; s < segs.size(); ++s)
        out << seq.id << ',' << s << ',' << segs[s].first << ','
            << segs[s].last << '\n';
    }
  });

  // --- train ----------------------------------------------------------------
  auto* train_cmd =
      app.add_subcommand("train", "fit a labeling model by cutting planes");
  train_cmd->fallthrough();
  std::string train_data, train_out, train_seg = "truth", train_log;
  int bin_levels = 10;
  train_cmd->add_option("--data", train_data, "training JSONL")->required();
  train_cmd->add_option("--out", train_out, "model JSON path")->required();
  train_cmd->add_option("--segmentation", train_seg,
                        "segmentation the model is trained on")
      ->capture_default_str();
  train_cmd->add_option("--C", train_cfg.C, "slack penalty")
      ->capture_default_str();
  train_cmd->add_option("--epsilon", train_cfg.epsilon,
                        "cutting-plane tolerance")
      ->capture_default_str();
  train_cmd->add_option("--max-iters", train_cfg.max_iterations, "")
      ->capture_default_str();
  train_cmd->add_option("--bin-levels", bin_levels, "feature bins per value")
      ->capture_default_str();
  train_cmd->add_option("--labels", labels_mode, "'data' or 'cad120'")
      ->capture_default_str();
  train_cmd->add_option("--log", train_log,
                        "CSV diagnostics (iteration,cuts,violation,xi,"
                        "objective)");
  train_cmd->callback([&] {
    const auto seqs = load_sequences(train_data);
    const LabelSpace ls = pick_labels(labels_mode, seqs);
    std::vector<std::pair<const ActivitySequence*, std::vector<FrameRange>>>
        corpus;
    for (const auto& seq : seqs)
      corpus.emplace_back(&seq, segments_for(seq, train_seg));
    const FeatureBinner binner = FeatureBinner::fit(corpus, bin_levels);
    const WeightLayout layout(ls.num_subactivities(), ls.num_affordances(),
                              binner.dims());
    std::deque<SegmentGraph> graphs;
    std::vector<TrainExample> examples;
    for (size_t i = 0; i < corpus.size(); ++i) {
      graphs.push_back(
          build_sequence_graph(*corpus[i].first, corpus[i].second, binner));
      Labeling truth =
          train_seg == "truth"
              ? truth_labeling(*corpus[i].first, ls)
              : project_to_segments(graphs.back(),
                                    truth_frames(*corpus[i].first, ls));
      examples.push_back({&graphs.back(), std::move(truth)});
    }
    train_cfg.threads = threads;
    const TrainResult res = train(examples, layout, train_cfg);
    save_model({ls, binner, res.w, train_seg}, train_out);
    if (!train_log.empty()) {
      std::ofstream log = open_out(train_log);
      log << "iteration,cuts,violation,xi,objective\n";
      for (size_t i = 0; i < res.iterations.size(); ++i) {
        const auto& it = res.iterations[i];
        char buf[160];
        std::snprintf(buf, sizeof buf, "%zu,%d,%.12g,%.12g,%.12g\n", i + 1,
                      it.cuts, it.violation, it.xi, it.objective);
        log << buf;
      }
    }
    std::cout << "trained on " << examples.size() << " sequences: "
              << res.iterations.size() << " iterations, "
              << (res.converged ? "converged" : "iteration cap reached")
              << ", slack " << res.xi << "\n";
  });

  // --- infer ----------------------------------------------------------------
  auto* infer_cmd =
      app.add_subcommand("infer", "label sequences with a trained model");
  infer_cmd->fallthrough();
  std::string infer_model, infer_data, infer_out, infer_seg;
  infer_cmd->add_option("--model", infer_model, "model JSON")->required();
  infer_cmd->add_option("--data", infer_data, "input JSONL")->required();
  infer_cmd->add_option("--out", infer_out, "predictions JSONL")->required();
  infer_cmd->add_option("--segmentation", infer_seg,
                        "override the model's segmentation");
  infer_cmd->add_option("--max-bb-nodes", solver.max_bb_nodes, "")
      ->capture_default_str();
  infer_cmd->add_option("--tolerance", solver.tolerance, "")
      ->capture_default_str();
  infer_cmd->add_option("--time-budget", solver.time_budget_sec,
                        "seconds per sequence, 0 = unlimited")
      ->capture_default_str();
  infer_cmd->callback([&] {
    const Model model = load_model(infer_model);
    const auto seqs = load_sequences(infer_data);
    const std::string desc =
        infer_seg.empty() ? model.segmentation : infer_seg;
    std::vector<LabelingRecord> recs;
    for (const auto& seq : seqs) {
      const SegmentGraph g =
          build_sequence_graph(seq, segments_for(seq, desc), model.binner);
      const ExactSolution sol = solve_exact(model.w, g, solver);
      if (sol.status == SolveStatus::ResourceLimit) resource_limited = true;
      recs.push_back(make_labeling_record(seq.id, g, sol.labeling, model.labels));
    }
    save_labelings(recs, infer_out);
    std::cout << "labeled " << recs.size() << " sequences\n";
    if (resource_limited)
      std::cerr << "warning: branch-and-bound budget hit; predictions are "
                   "best incumbents\n";
  });

  // --- infer-multi ----------------------------------------------------------
  auto* multi_cmd = app.add_subcommand(
      "infer-multi", "fused inference over several segmentation hypotheses");
  multi_cmd->fallthrough();
  std::vector<std::string> multi_models;
  std::string multi_theta, multi_data, multi_out;
  int multi_rounds = 20;
  multi_cmd->add_option("--models", multi_models, "model JSONs")
      ->required()
      ->delimiter(',');
  multi_cmd->add_option("--theta", multi_theta, "theta JSON")->required();
  multi_cmd->add_option("--data", multi_data, "input JSONL")->required();
  multi_cmd->add_option("--out", multi_out, "frame predictions JSONL")
      ->required();
  multi_cmd->add_option("--rounds", multi_rounds, "alternation cap")
      ->capture_default_str();
  multi_cmd->add_option("--max-bb-nodes", solver.max_bb_nodes, "")
      ->capture_default_str();
  multi_cmd->callback([&] {
    std::vector<Model> models;
    for (const auto& p : multi_models) models.push_back(load_model(p));
    for (const auto& m : models)
      if (m.labels.subactivities != models[0].labels.subactivities ||
          m.labels.affordances != models[0].labels.affordances)
        throw std::runtime_error("models disagree on label vocabularies");
    const ThetaWeights theta = load_theta(multi_theta);
    if (theta.num_hypotheses() != static_cast<int>(models.size()))
      throw std::runtime_error("theta covers " +
                               std::to_string(theta.num_hypotheses()) +
                               " hypotheses, got " +
                               std::to_string(models.size()) + " models");
    const auto seqs = load_sequences(multi_data);
    const LabelSpace& ls = models[0].labels;
    std::vector<LabelingRecord> recs;
    for (const auto& seq : seqs) {
      std::deque<SegmentGraph> graphs;
      std::vector<const SegmentGraph*> gp;
      std::vector<const WeightVector*> wp;
      for (const auto& m : models) {
        graphs.push_back(build_sequence_graph(
            seq, segments_for(seq, m.segmentation), m.binner));
        gp.push_back(&graphs.back());
        wp.push_back(&m.w);
      }
      const JointInferenceResult joint =
          joint_infer(gp, wp, theta, multi_rounds, solver);
      LabelingRecord rec;
      rec.id = seq.id;
      for (int f = 0; f < seq.num_frames(); ++f) {
        rec.segments.push_back({f, f});
        rec.subactivity.push_back(
            ls.subactivities[joint.fused.subactivity[f]]);
        std::vector<std::string> affs;
        for (int t = 0; t < seq.num_tracks(); ++t)
          affs.push_back(ls.affordances[joint.fused.affordance[t][f]]);
        rec.affordances.push_back(std::move(affs));
      }
      recs.push_back(std::move(rec));
    }
    save_labelings(recs, multi_out);
    std::cout << "fused " << models.size() << " hypotheses over "
              << recs.size() << " sequences\n";
  });

  // --- learn-theta ----------------------------------------------------------
  auto* theta_cmd = app.add_subcommand(
      "learn-theta", "fit per-hypothesis confidences on held-out sequences");
  theta_cmd->fallthrough();
  std::vector<std::string> theta_models;
  std::string theta_data, theta_out;
  theta_cmd->add_option("--models", theta_models, "model JSONs")
      ->required()
      ->delimiter(',');
  theta_cmd->add_option("--data", theta_data, "held-out labeled JSONL")
      ->required();
  theta_cmd->add_option("--out", theta_out, "theta JSON path")->required();
  theta_cmd->add_option("--max-bb-nodes", solver.max_bb_nodes, "")
      ->capture_default_str();
  theta_cmd->callback([&] {
    std::vector<Model> models;
    for (const auto& p : theta_models) models.push_back(load_model(p));
    const auto seqs = load_sequences(theta_data);
    const LabelSpace& ls = models[0].labels;
    std::deque<SegmentGraph> graphs;
    std::vector<ThetaExample> examples;
    for (const auto& seq : seqs) {
      ThetaExample ex;
      for (const auto& m : models) {
        graphs.push_back(build_sequence_graph(
            seq, segments_for(seq, m.segmentation), m.binner));
        const ExactSolution sol = solve_exact(m.w, graphs.back(), solver);
        if (sol.status == SolveStatus::ResourceLimit) resource_limited = true;
        ex.hypotheses.push_back({&graphs.back(), sol.labeling});
      }
      ex.truth = truth_frames(seq, ls);
      examples.push_back(std::move(ex));
    }
    const int Ka = ls.num_subactivities();
    const int Ko = ls.num_affordances();
    const ThetaWeights theta = learn_theta(examples, Ka, Ko);
    save_theta(theta, theta_out);
    const Scalar resid =
        theta_kkt_residual(theta, agreement_counts(examples, Ka, Ko));
    std::cout << "theta over " << theta.num_hypotheses()
              << " hypotheses, stationarity residual " << resid << "\n";
  });

  // --- classify-highlevel -----------------------------------------------------
  auto* hl_cmd = app.add_subcommand(
      "classify-highlevel", "train or apply the whole-sequence classifier");
  hl_cmd->fallthrough();
  std::string hl_data, hl_train_out, hl_model_in, hl_out, hl_labelings;
  Scalar hl_C = 100.0, hl_eps = 1e-4;
  int hl_iters = 500, hl_bins = 10;
  hl_cmd->add_option("--data", hl_data, "sequences JSONL")->required();
  hl_cmd->add_option("--train-out", hl_train_out,
                     "fit on ground-truth labels and write this model");
  hl_cmd->add_option("--model-in", hl_model_in, "apply this trained model");
  hl_cmd->add_option("--out", hl_out, "predictions CSV (default stdout)");
  hl_cmd->add_option("--labelings", hl_labelings,
                     "use these predicted labels instead of ground truth");
  hl_cmd->add_option("--labels", labels_mode, "'data' or 'cad120'")
      ->capture_default_str();
  hl_cmd->add_option("--C", hl_C, "")->capture_default_str();
  hl_cmd->add_option("--epsilon", hl_eps, "")->capture_default_str();
  hl_cmd->add_option("--max-iters", hl_iters, "")->capture_default_str();
  hl_cmd->add_option("--occlusion-bins", hl_bins, "")->capture_default_str();
  hl_cmd->callback([&] {
    if (hl_train_out.empty() == hl_model_in.empty())
      throw std::runtime_error(
          "pass exactly one of --train-out (fit) or --model-in (apply)");
    const auto seqs = load_sequences(hl_data);
    const LabelSpace ls = pick_labels(labels_mode, seqs);
    const int Ka = ls.num_subactivities();
    const int Ko = ls.num_affordances();
    std::map<std::string, LabelingRecord> rec_by_id;
    if (!hl_labelings.empty())
      for (auto& rec : load_labelings(hl_labelings))
        rec_by_id[rec.id] = std::move(rec);
    auto features_of = [&](const ActivitySequence& seq) {
      FrameLabeling fl;
      if (!hl_labelings.empty()) {
        const auto it = rec_by_id.find(seq.id);
        if (it == rec_by_id.end())
          throw std::runtime_error("no labeling record for sequence " +
                                   seq.id);
        fl = record_to_frames(it->second, ls, seq.num_frames(),
                              seq.num_tracks());
      } else {
        fl = truth_frames(seq, ls);
      }
      return highlevel_feature_row(fl, seq, Ka, Ko, hl_bins);
    };
    if (!hl_train_out.empty()) {
      Mat X(static_cast<Eigen::Index>(seqs.size()), Ka + Ko + hl_bins);
      std::vector<int> y;
      for (size_t i = 0; i < seqs.size(); ++i) {
        X.row(static_cast<Eigen::Index>(i)) = features_of(seqs[i]);
        y.push_back(ls.highlevel_index(seqs[i].highlevel));
      }
      const HighLevelModel model =
          train_highlevel(X, y, ls.highlevel, hl_C, hl_eps, hl_iters);
      save_highlevel_model(model, hl_train_out);
      std::cout << "classifier over " << model.classes.size()
                << " classes written to " << hl_train_out << "\n";
      return;
    }
    const HighLevelModel model = load_highlevel_model(hl_model_in);
    if (model.weights.cols() != Ka + Ko + hl_bins + 1)
      throw std::runtime_error(
          "classifier expects a different label space or bin count");
    std::ofstream file;
    if (!hl_out.empty()) file = open_out(hl_out);
    std::ostream& out = hl_out.empty() ? std::cout : file;
    out << "id,truth,predicted\n";
    int correct = 0, with_truth = 0;
    for (const auto& seq : seqs) {
      const int pred = classify_highlevel(model, features_of(seq));
      out << seq.id << ',' << seq.highlevel << ','
          << model.classes[static_cast<size_t>(pred)] << '\n';
      if (!seq.highlevel.empty()) {
        ++with_truth;
        if (model.classes[static_cast<size_t>(pred)] == seq.highlevel)
          ++correct;
      }
    }
    if (with_truth > 0)
      std::cerr << "accuracy " << static_cast<double>(correct) / with_truth
                << " over " << with_truth << " labeled sequences\n";
  });

  // --- track ------------------------------------------------------------------
  auto* track_cmd = app.add_subcommand(
      "track", "highest-score maximal path through a detection graph");
  track_cmd->fallthrough();
  std::string track_graph, track_out;
  int track_start = -1;
  bool track_backward = false;
  Scalar track_lambda = 1.0;
  track_cmd->add_option("--graph", track_graph, "detections JSONL")->required();
  track_cmd->add_option("--start", track_start,
                        "start detection id (default: best over sources)");
  track_cmd->add_flag("--backward", track_backward,
                      "walk the reversed graph instead");
  track_cmd->add_option("--lambda", track_lambda,
                        "detection-score weight inside the edge score")
      ->capture_default_str();
  track_cmd->add_option("--out", track_out, "CSV path (default stdout)");
  track_cmd->callback([&] {
    const LoadedDetections det = load_detection_graph(track_graph, track_lambda);
    const DetectionGraph g =
        track_backward ? backward_graph(det.graph) : det.graph;
    std::vector<int> starts;
    if (track_start >= 0) {
      const auto it = det.index_of.find(track_start);
      if (it == det.index_of.end())
        throw std::runtime_error("unknown start detection id");
      starts.push_back(it->second);
    } else {
      std::vector<char> has_pred(g.nodes.size(), 0);
      for (const auto& adj : g.succ)
        for (const auto& [to, ts] : adj) has_pred[to] = 1;
      for (size_t n = 0; n < g.nodes.size(); ++n)
        if (!has_pred[n]) starts.push_back(static_cast<int>(n));
    }
    if (starts.empty()) throw std::runtime_error("detection graph is empty");
    TrackPath best;
    bool have = false;
    for (const int s : starts) {
      TrackPath p = best_track(g, s);
      if (!have || p.score > best.score) {
        best = std::move(p);
        have = true;
      }
    }
    std::ofstream file;
    if (!track_out.empty()) file = open_out(track_out);
    std::ostream& out = track_out.empty() ? std::cout : file;
    out << "position,id,frame,score\n";
    for (size_t i = 0; i < best.nodes.size(); ++i) {
      const int n = best.nodes[i];
      out << i << ',' << det.external_id[static_cast<size_t>(n)] << ','
          << det.frame[static_cast<size_t>(n)] << ','
          << g.nodes[static_cast<size_t>(n)].score << '\n';
    }
    out << "total,,," << best.score << '\n';
  });

  // --- xval -------------------------------------------------------------------
  auto* xval_cmd = app.add_subcommand(
      "xval", "leave-one-subject-out cross-validation");
  xval_cmd->fallthrough();
  XvalOptions xval_opts;
  std::string xval_data, xval_out, xval_hyp;
  xval_cmd->add_option("--data", xval_data, "labeled JSONL")->required();
  xval_cmd->add_option("--hypotheses", xval_hyp,
                       "';'-separated segmentation descriptors; empty = "
                       "ground-truth segmentation protocol");
  xval_cmd->add_option("--C", xval_opts.train.C, "")->capture_default_str();
  xval_cmd->add_option("--epsilon", xval_opts.train.epsilon, "")
      ->capture_default_str();
  xval_cmd->add_option("--max-iters", xval_opts.train.max_iterations, "")
      ->capture_default_str();
  xval_cmd->add_option("--bin-levels", xval_opts.bin_levels, "")
      ->capture_default_str();
  xval_cmd->add_option("--rounds", xval_opts.multiseg_rounds, "")
      ->capture_default_str();
  xval_cmd->add_option("--folds", xval_opts.max_folds,
                       "cap on folds to run, 0 = all subjects")
      ->capture_default_str();
  bool xval_no_hl = false;
  xval_cmd->add_flag("--no-highlevel", xval_no_hl,
                     "skip the whole-sequence classifier");
  xval_cmd->add_option("--labels", labels_mode, "'data' or 'cad120'")
      ->capture_default_str();
  xval_cmd->add_option("--max-bb-nodes", xval_opts.solver.max_bb_nodes, "")
      ->capture_default_str();
  xval_cmd->add_option("--out", xval_out, "also write the report here");
  xval_cmd->callback([&] {
    const auto seqs = load_sequences(xval_data);
    const LabelSpace ls = pick_labels(labels_mode, seqs);
    if (!xval_hyp.empty()) {
      std::istringstream in(xval_hyp);
      std::string d;
      while (std::getline(in, d, ';'))
        if (!d.empty()) xval_opts.hypotheses.push_back(d);
    }
    xval_opts.highlevel = !xval_no_hl;
    xval_opts.train.threads = threads;
    const XvalResult result = cross_validate(seqs, ls, xval_opts);
    const std::string report = format_report(result);
    std::cout << report;
    if (!xval_out.empty()) open_out(xval_out) << report;
  });

  // --- eval -------------------------------------------------------------------
  auto* eval_cmd =
      app.add_subcommand("eval", "score predictions against ground truth");
  eval_cmd->fallthrough();
  std::string eval_truth, eval_pred, eval_level = "subactivity", eval_conf;
  eval_cmd->add_option("--truth", eval_truth, "labeled sequences JSONL")
      ->required();
  eval_cmd->add_option("--pred", eval_pred, "predictions JSONL")->required();
  eval_cmd->add_option("--level", eval_level,
                       "'subactivity', 'affordance' or 'highlevel'")
      ->capture_default_str();
  eval_cmd->add_option("--labels", labels_mode, "'data' or 'cad120'")
      ->capture_default_str();
  eval_cmd->add_option("--confusion", eval_conf, "confusion matrix CSV path");
  eval_cmd->callback([&] {
    const auto seqs = load_sequences(eval_truth);
    const auto recs = load_labelings(eval_pred);
    const LabelSpace ls = pick_labels(labels_mode, seqs);
    std::map<std::string, const ActivitySequence*> by_id;
    for (const auto& seq : seqs) by_id[seq.id] = &seq;
    std::vector<int> truth_idx, pred_idx;
    const std::vector<std::string>* names = nullptr;
    if (eval_level == "highlevel") {
      names = &ls.highlevel;
      for (const auto& rec : recs) {
        const auto it = by_id.find(rec.id);
        if (it == by_id.end())
          throw std::runtime_error("prediction for unknown sequence " + rec.id);
        if (rec.highlevel.empty())
          throw std::runtime_error("record " + rec.id +
                                   " carries no high-level label");
        truth_idx.push_back(ls.highlevel_index(it->second->highlevel));
        pred_idx.push_back(ls.highlevel_index(rec.highlevel));
      }
    } else if (eval_level == "subactivity" || eval_level == "affordance") {
      const bool act = eval_level == "subactivity";
      names = act ? &ls.subactivities : &ls.affordances;
      // Segment-level accounting when the predicted segmentation matches the
      // ground truth everywhere; frame-level expansion otherwise.
      bool aligned = true;
      for (const auto& rec : recs) {
        const auto it = by_id.find(rec.id);
        if (it == by_id.end())
          throw std::runtime_error("prediction for unknown sequence " + rec.id);
        const auto gt = truth_segments(*it->second);
        if (gt.size() != rec.segments.size()) {
          aligned = false;
          break;
        }
        for (size_t s = 0; s < gt.size(); ++s)
          if (gt[s].first != rec.segments[s].first ||
              gt[s].last != rec.segments[s].last) {
            aligned = false;
            break;
          }
        if (!aligned) break;
      }
      for (const auto& rec : recs) {
        const ActivitySequence& seq = *by_id.at(rec.id);
        if (aligned) {
          for (size_t s = 0; s < rec.segments.size(); ++s) {
            const auto& gt_seg = seq.segments[s];
            if (act) {
              truth_idx.push_back(ls.subactivity_index(gt_seg.subactivity));
              pred_idx.push_back(ls.subactivity_index(rec.subactivity[s]));
            } else {
              for (int t = 0; t < seq.num_tracks(); ++t) {
                truth_idx.push_back(
                    ls.affordance_index(gt_seg.affordances[t]));
                pred_idx.push_back(ls.affordance_index(rec.affordances[s][t]));
              }
            }
          }
        } else {
          const FrameLabeling pf = record_to_frames(rec, ls, seq.num_frames(),
                                                    seq.num_tracks());
          const FrameLabeling tf = truth_frames(seq, ls);
          if (act) {
            for (int f = 0; f < seq.num_frames(); ++f) {
              truth_idx.push_back(tf.subactivity[f]);
              pred_idx.push_back(pf.subactivity[f]);
            }
          } else {
            for (int t = 0; t < seq.num_tracks(); ++t)
              for (int f = 0; f < seq.num_frames(); ++f) {
                truth_idx.push_back(tf.affordance[t][f]);
                pred_idx.push_back(pf.affordance[t][f]);
              }
          }
        }
      }
      if (!aligned)
        std::cerr << "note: segmentations differ from ground truth; scoring "
                     "per frame\n";
    } else {
      throw std::runtime_error("unknown --level: " + eval_level);
    }
    const Metrics m = evaluate_labels(truth_idx, pred_idx,
                                      static_cast<int>(names->size()));
    print_metrics(std::cout, eval_level, m);
    for (size_t k = 0; k < names->size(); ++k) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %-20s precision %.6f  recall %.6f\n",
                    (*names)[k].c_str(),
                    m.class_precision[static_cast<Eigen::Index>(k)],
                    m.class_recall[static_cast<Eigen::Index>(k)]);
      std::cout << buf;
    }
    if (!eval_conf.empty()) write_confusion_csv(eval_conf, m, *names);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return resource_limited ? 2 : 0;
}
