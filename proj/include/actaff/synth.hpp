#pragma once

#include "actaff/dataset.hpp"
#include "actaff/inference.hpp"
#include "actaff/label_space.hpp"

#include <cstdint>
#include <vector>

namespace actaff {

// Generator configuration: label-transition tables (one per high-level class;
// a zero entry forbids that transition), motion templates per label, and the
// observation noise level.
struct SynthConfig {
  LabelSpace labels;

  std::vector<Vec3> palm_velocity;     // per sub-activity, meters per frame
  std::vector<char> palm_toward_object; // per sub-activity: steer at the object
  std::vector<Vec3> object_velocity;   // per affordance, for the active object
  std::vector<int> active_affordance;  // per sub-activity
  int idle_affordance = 0;             // all other objects

  std::vector<Mat> class_transitions;  // per high-level class, rows stochastic
  std::vector<char> class_occludes;    // per class: hide track 0 mid-sequence

  int num_sequences = 20;
  int num_subjects = 4;
  int num_objects = 3;
  int segments_per_sequence = 8;
  int segment_len_min = 8;
  int segment_len_max = 14;
  Scalar noise = 0.0; // stddev as a fraction of the nominal per-frame step

  void validate() const;
  static SynthConfig defaults();
};

// Deterministic for a fixed (config, seed). Sequences carry full ground truth;
// subjects and high-level classes rotate round-robin.
std::vector<ActivitySequence> synth_generate(const SynthConfig& cfg,
                                             std::uint64_t seed);

// Instances whose truth is the exact maximizer under a hidden weight vector;
// with zero noise the labels are reproducible from the features, so training
// can fit them perfectly.
struct PlantedInstance {
  SegmentGraph graph; // features carry the noise; truth never does
  Labeling truth;
};

struct PlantedDataset {
  WeightLayout layout;
  WeightVector planted_w;
  std::vector<PlantedInstance> instances;
};

PlantedDataset make_planted_dataset(int num_instances, int num_segments,
                                    int num_objects, int num_subactivities,
                                    int num_affordances, Scalar noise,
                                    std::uint64_t seed,
                                    const SolverOptions& opt = {});

} // namespace actaff
