#include "actaff/xval.hpp"

#include "actaff/features.hpp"
#include "actaff/highlevel.hpp"
#include "actaff/multiseg.hpp"
#include "actaff/segmentation.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

namespace actaff {
namespace {

int majority_label(const std::vector<int>& per_frame, FrameRange r, int K) {
  std::vector<int> count(static_cast<size_t>(K), 0);
  for (int f = r.first; f <= r.last; ++f)
    ++count[static_cast<size_t>(per_frame[static_cast<size_t>(f)])];
  int best = 0;
  for (int k = 1; k < K; ++k)
    if (count[static_cast<size_t>(k)] > count[static_cast<size_t>(best)]) best = k;
  return best;
}

// Accumulates instance-level truth/prediction pairs across a fold's test set.
struct PairPool {
  std::vector<int> truth;
  std::vector<int> pred;
  void add(int t, int p) {
    truth.push_back(t);
    pred.push_back(p);
  }
  Metrics evaluate(int num_classes) const {
    return evaluate_labels(truth, pred, num_classes);
  }
};

// Splits a node labeling of a ground-truth-segmentation graph into activity
// and object instances and pools them against the truth labeling.
void pool_graph_labels(const SegmentGraph& g, const Labeling& truth,
                       const Labeling& pred, PairPool& act, PairPool& obj) {
  for (int i = 0; i < g.num_nodes(); ++i) {
    const auto& t = truth.labels[static_cast<size_t>(i)];
    const auto& p = pred.labels[static_cast<size_t>(i)];
    if (g.node(i).kind == NodeKind::Activity)
      act.add(t, p);
    else
      obj.add(t, p);
  }
}

Vec highlevel_row(const Vec& hist, const ActivitySequence& seq, int bins) {
  const Vec occ = occlusion_features(seq.tracks, seq.num_frames(), bins);
  Vec row(hist.size() + occ.size());
  row << hist, occ;
  return row;
}

struct HypothesisModel {
  std::string descriptor;
  FeatureBinner binner;
  WeightVector w;
};

LevelSummary summarize_level(const std::vector<const Metrics*>& per_fold) {
  std::vector<Scalar> micro, mp, mr;
  for (const Metrics* m : per_fold) {
    micro.push_back(m->micro_precision);
    mp.push_back(m->macro_precision);
    mr.push_back(m->macro_recall);
  }
  return LevelSummary{summarize(micro), summarize(mp), summarize(mr)};
}

void append_metrics(std::ostringstream& out, const char* name,
                    const Metrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "  %-18s micro %.6f  macro-p %.6f  macro-r %.6f  n %d\n", name,
                m.micro_precision, m.macro_precision, m.macro_recall, m.total);
  out << buf;
}

void append_summary(std::ostringstream& out, const char* name,
                    const LevelSummary& s) {
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "  %-18s micro %.6f +- %.6f  macro-p %.6f +- %.6f  macro-r "
                "%.6f +- %.6f\n",
                name, s.micro.mean, s.micro.stderr_, s.macro_precision.mean,
                s.macro_precision.stderr_, s.macro_recall.mean,
                s.macro_recall.stderr_);
  out << buf;
}

} // namespace

XvalResult cross_validate(const std::vector<ActivitySequence>& data,
                          const LabelSpace& labels, const XvalOptions& opt) {
  labels.validate();
  if (data.empty()) throw std::invalid_argument("cross_validate: empty dataset");
  for (const auto& seq : data)
    if (seq.segments.empty())
      throw std::invalid_argument("cross_validate: sequence " + seq.id +
                                  " has no ground truth");
  std::set<std::string> subject_set;
  for (const auto& seq : data) subject_set.insert(seq.subject);
  const std::vector<std::string> subjects(subject_set.begin(),
                                          subject_set.end());
  if (subjects.size() < 2)
    throw std::invalid_argument("cross_validate: need at least two subjects");
  const bool multiseg = !opt.hypotheses.empty();
  if (multiseg && subjects.size() < 3)
    throw std::invalid_argument(
        "cross_validate: fused protocol reserves a training subject and needs "
        "at least three subjects");

  const int Ka = labels.num_subactivities();
  const int Ko = labels.num_affordances();
  const int Kh = labels.num_highlevel();

  XvalResult result;
  for (const std::string& held_out : subjects) {
    if (opt.max_folds > 0 &&
        static_cast<int>(result.folds.size()) >= opt.max_folds)
      break;
    FoldResult fold;
    fold.subject = held_out;
    std::vector<const ActivitySequence*> train_seqs, test_seqs;
    for (const auto& seq : data)
      (seq.subject == held_out ? test_seqs : train_seqs).push_back(&seq);

    PairPool act_pool, obj_pool;
    PairPool hl_truth_pool, hl_pred_pool;
    std::vector<Vec> hl_rows;
    std::vector<int> hl_labels;

    if (!multiseg) {
      std::vector<std::pair<const ActivitySequence*, std::vector<FrameRange>>>
          corpus;
      for (const auto* seq : train_seqs)
        corpus.emplace_back(seq, truth_segments(*seq));
      const FeatureBinner binner = FeatureBinner::fit(corpus, opt.bin_levels);
      const WeightLayout layout(Ka, Ko, binner.dims());

      std::deque<SegmentGraph> graphs;
      std::vector<TrainExample> examples;
      for (const auto* seq : train_seqs) {
        graphs.push_back(
            build_sequence_graph(*seq, truth_segments(*seq), binner));
        examples.push_back({&graphs.back(), truth_labeling(*seq, labels)});
        if (opt.highlevel) {
          hl_rows.push_back(highlevel_row(
              histogram_features(graphs.back(), examples.back().truth, Ka, Ko),
              *seq, opt.occlusion_bins));
          hl_labels.push_back(labels.highlevel_index(seq->highlevel));
        }
      }
      const TrainResult trained = train(examples, layout, opt.train);

      HighLevelModel hl;
      if (opt.highlevel) {
        Mat X(static_cast<Eigen::Index>(hl_rows.size()), hl_rows[0].size());
        for (size_t i = 0; i < hl_rows.size(); ++i)
          X.row(static_cast<Eigen::Index>(i)) = hl_rows[i];
        hl = train_highlevel(X, hl_labels, labels.highlevel, opt.highlevel_C,
                             opt.highlevel_epsilon,
                             opt.highlevel_max_iterations);
      }

      for (const auto* seq : test_seqs) {
        const SegmentGraph g =
            build_sequence_graph(*seq, truth_segments(*seq), binner);
        const Labeling truth = truth_labeling(*seq, labels);
        const Labeling pred = solve_exact(trained.w, g, opt.solver).labeling;
        pool_graph_labels(g, truth, pred, act_pool, obj_pool);
        if (opt.highlevel) {
          const int hl_true = labels.highlevel_index(seq->highlevel);
          hl_truth_pool.add(
              hl_true,
              classify_highlevel(
                  hl, highlevel_row(histogram_features(g, truth, Ka, Ko), *seq,
                                    opt.occlusion_bins)));
          hl_pred_pool.add(
              hl_true,
              classify_highlevel(
                  hl, highlevel_row(histogram_features(g, pred, Ka, Ko), *seq,
                                    opt.occlusion_bins)));
        }
      }
    } else {
      // One training subject (the smallest) is held back to fit theta.
      std::set<std::string> train_subjects;
      for (const auto* seq : train_seqs) train_subjects.insert(seq->subject);
      fold.theta_subject = *train_subjects.begin();
      std::vector<const ActivitySequence*> ssvm_seqs, theta_seqs;
      for (const auto* seq : train_seqs)
        (seq->subject == fold.theta_subject ? theta_seqs : ssvm_seqs)
            .push_back(seq);
      if (ssvm_seqs.empty())
        throw std::invalid_argument(
            "cross_validate: no training sequences left after reserving the "
            "theta subject");

      std::vector<HypothesisModel> models;
      for (const std::string& descriptor : opt.hypotheses) {
        std::vector<std::pair<const ActivitySequence*, std::vector<FrameRange>>>
            corpus;
        for (const auto* seq : ssvm_seqs)
          corpus.emplace_back(seq, apply_segmentation(*seq, descriptor));
        HypothesisModel hm;
        hm.descriptor = descriptor;
        hm.binner = FeatureBinner::fit(corpus, opt.bin_levels);
        const WeightLayout layout(Ka, Ko, hm.binner.dims());

        std::deque<SegmentGraph> graphs;
        std::vector<TrainExample> examples;
        for (size_t i = 0; i < corpus.size(); ++i) {
          graphs.push_back(build_sequence_graph(*corpus[i].first,
                                                corpus[i].second, hm.binner));
          const FrameLabeling ft = truth_frames(*corpus[i].first, labels);
          examples.push_back(
              {&graphs.back(), project_to_segments(graphs.back(), ft)});
        }
        hm.w = train(examples, layout, opt.train).w;
        models.push_back(std::move(hm));
      }

      std::deque<SegmentGraph> theta_graphs;
      std::vector<ThetaExample> theta_examples;
      for (const auto* seq : theta_seqs) {
        ThetaExample ex;
        for (const auto& hm : models) {
          theta_graphs.push_back(build_sequence_graph(
              *seq, apply_segmentation(*seq, hm.descriptor), hm.binner));
          const SegmentGraph& g = theta_graphs.back();
          ex.hypotheses.push_back(
              {&g, solve_exact(hm.w, g, opt.solver).labeling});
        }
        ex.truth = truth_frames(*seq, labels);
        theta_examples.push_back(std::move(ex));
      }
      const ThetaWeights theta = learn_theta(theta_examples, Ka, Ko);

      HighLevelModel hl;
      if (opt.highlevel) {
        for (const auto* seq : train_seqs) {
          hl_rows.push_back(
              highlevel_row(histogram_features(truth_frames(*seq, labels), Ka,
                                               Ko),
                            *seq, opt.occlusion_bins));
          hl_labels.push_back(labels.highlevel_index(seq->highlevel));
        }
        Mat X(static_cast<Eigen::Index>(hl_rows.size()), hl_rows[0].size());
        for (size_t i = 0; i < hl_rows.size(); ++i)
          X.row(static_cast<Eigen::Index>(i)) = hl_rows[i];
        hl = train_highlevel(X, hl_labels, labels.highlevel, opt.highlevel_C,
                             opt.highlevel_epsilon,
                             opt.highlevel_max_iterations);
      }

      PairPool frame_act_pool, frame_obj_pool;
      for (const auto* seq : test_seqs) {
        std::deque<SegmentGraph> graphs;
        std::vector<const SegmentGraph*> graph_ptrs;
        std::vector<const WeightVector*> weight_ptrs;
        for (const auto& hm : models) {
          graphs.push_back(build_sequence_graph(
              *seq, apply_segmentation(*seq, hm.descriptor), hm.binner));
          graph_ptrs.push_back(&graphs.back());
          weight_ptrs.push_back(&hm.w);
        }
        const JointInferenceResult joint = joint_infer(
            graph_ptrs, weight_ptrs, theta, opt.multiseg_rounds, opt.solver);
        const FrameLabeling truth = truth_frames(*seq, labels);

        for (int f = 0; f < seq->num_frames(); ++f)
          frame_act_pool.add(truth.subactivity[static_cast<size_t>(f)],
                             joint.fused.subactivity[static_cast<size_t>(f)]);
        for (int t = 0; t < seq->num_tracks(); ++t)
          for (int f = 0; f < seq->num_frames(); ++f)
            frame_obj_pool.add(
                truth.affordance[static_cast<size_t>(t)][static_cast<size_t>(f)],
                joint.fused.affordance[static_cast<size_t>(t)]
                                      [static_cast<size_t>(f)]);
        for (const auto& seg : seq->segments) {
          act_pool.add(labels.subactivity_index(seg.subactivity),
                       majority_label(joint.fused.subactivity, seg.range, Ka));
          for (int t = 0; t < seq->num_tracks(); ++t)
            obj_pool.add(
                labels.affordance_index(seg.affordances[static_cast<size_t>(t)]),
                majority_label(joint.fused.affordance[static_cast<size_t>(t)],
                               seg.range, Ko));
        }
        if (opt.highlevel) {
          const int hl_true = labels.highlevel_index(seq->highlevel);
          hl_truth_pool.add(
              hl_true, classify_highlevel(
                           hl, highlevel_row(histogram_features(truth, Ka, Ko),
                                             *seq, opt.occlusion_bins)));
          hl_pred_pool.add(
              hl_true,
              classify_highlevel(
                  hl, highlevel_row(histogram_features(joint.fused, Ka, Ko),
                                    *seq, opt.occlusion_bins)));
        }
      }
      fold.frame_subactivity = frame_act_pool.evaluate(Ka);
      fold.frame_affordance = frame_obj_pool.evaluate(Ko);
    }

    fold.subactivity = act_pool.evaluate(Ka);
    fold.affordance = obj_pool.evaluate(Ko);
    if (opt.highlevel) {
      fold.highlevel_truth = hl_truth_pool.evaluate(Kh);
      fold.highlevel_pred = hl_pred_pool.evaluate(Kh);
    }
    result.folds.push_back(std::move(fold));
  }

  std::vector<const Metrics*> act, obj, fs, fo, ht, hp;
  for (const auto& fold : result.folds) {
    act.push_back(&fold.subactivity);
    obj.push_back(&fold.affordance);
    if (fold.frame_subactivity) fs.push_back(&*fold.frame_subactivity);
    if (fold.frame_affordance) fo.push_back(&*fold.frame_affordance);
    if (fold.highlevel_truth) ht.push_back(&*fold.highlevel_truth);
    if (fold.highlevel_pred) hp.push_back(&*fold.highlevel_pred);
  }
  result.subactivity = summarize_level(act);
  result.affordance = summarize_level(obj);
  if (!fs.empty()) result.frame_subactivity = summarize_level(fs);
  if (!fo.empty()) result.frame_affordance = summarize_level(fo);
  if (!ht.empty()) result.highlevel_truth = summarize_level(ht);
  if (!hp.empty()) result.highlevel_pred = summarize_level(hp);
  return result;
}

std::string format_report(const XvalResult& r) {
  std::ostringstream out;
  for (const auto& fold : r.folds) {
    out << "fold subject=" << fold.subject;
    if (!fold.theta_subject.empty())
      out << " theta_subject=" << fold.theta_subject;
    out << "\n";
    append_metrics(out, "subactivity", fold.subactivity);
    append_metrics(out, "affordance", fold.affordance);
    if (fold.frame_subactivity)
      append_metrics(out, "frame-subactivity", *fold.frame_subactivity);
    if (fold.frame_affordance)
      append_metrics(out, "frame-affordance", *fold.frame_affordance);
    if (fold.highlevel_truth)
      append_metrics(out, "highlevel-truth", *fold.highlevel_truth);
    if (fold.highlevel_pred)
      append_metrics(out, "highlevel-pred", *fold.highlevel_pred);
  }
  out << "summary over " << r.folds.size() << " folds\n";
  append_summary(out, "subactivity", r.subactivity);
  append_summary(out, "affordance", r.affordance);
  if (r.frame_subactivity)
    append_summary(out, "frame-subactivity", *r.frame_subactivity);
  if (r.frame_affordance)
    append_summary(out, "frame-affordance", *r.frame_affordance);
  if (r.highlevel_truth)
    append_summary(out, "highlevel-truth", *r.highlevel_truth);
  if (r.highlevel_pred)
    append_summary(out, "highlevel-pred", *r.highlevel_pred);
  return out.str();
}

} // namespace actaff
