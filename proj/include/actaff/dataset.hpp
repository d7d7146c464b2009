#pragma once

#include "actaff/label_space.hpp"
#include "actaff/segment_graph.hpp"
#include "actaff/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace actaff {

enum Joint {
  Head = 0,
  Neck,
  Torso,
  LShoulder,
  RShoulder,
  LElbow,
  RElbow,
  LPalm,
  RPalm,
};
constexpr int kNumJoints = 9;
// Joints tracked relative to the head; used for motion features.
constexpr std::array<Joint, 8> kUpperBody = {Neck,   Torso,  LShoulder, RShoulder,
                                             LElbow, RElbow, LPalm,     RPalm};

struct SkeletonFrame {
  std::array<Vec3, kNumJoints> joints;
};

struct ObjectTrack {
  int id = 0;
  std::vector<Vec3> centroid;                 // per frame
  std::vector<Eigen::Vector4d> bbox;          // x1, y1, x2, y2 per frame
  std::vector<char> occluded;                 // per frame
  std::vector<Eigen::Matrix<Scalar, 6, 1>> transform; // optional, per frame

  int num_frames() const { return static_cast<int>(centroid.size()); }
};

struct LabeledSegment {
  FrameRange range;
  std::string subactivity;
  std::vector<std::string> affordances; // one per track, in track order
};

struct ActivitySequence {
  std::string id;
  std::string subject;
  std::string highlevel;
  std::vector<SkeletonFrame> frames;
  std::vector<ObjectTrack> tracks;
  std::vector<LabeledSegment> segments; // ground truth; may be empty

  int num_frames() const { return static_cast<int>(frames.size()); }
  int num_tracks() const { return static_cast<int>(tracks.size()); }
};

// One JSON object per sequence. Parsing validates frame-count agreement
// between skeleton and tracks and, when present, that ground-truth segments
// tile [0, num_frames) and carry one affordance per track.
ActivitySequence sequence_from_json(const std::string& json_text);
std::string sequence_to_json(const ActivitySequence& seq);

// JSONL corpus: one sequence per line. Load errors carry the line number.
std::vector<ActivitySequence> load_sequences(const std::string& path);
void save_sequences(const std::vector<ActivitySequence>& seqs,
                    const std::string& path);

std::vector<FrameRange> truth_segments(const ActivitySequence& seq);
// Node labels in canonical order for the ground-truth segmentation.
Labeling truth_labeling(const ActivitySequence& seq, const LabelSpace& ls);
// Frame extents per track, for graph construction.
std::vector<FrameRange> track_extents(const ActivitySequence& seq);

} // namespace actaff
