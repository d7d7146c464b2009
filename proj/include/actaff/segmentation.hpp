#pragma once

#include "actaff/dataset.hpp"
#include "actaff/segment_graph.hpp"

#include <string>
#include <vector>

namespace actaff {

// Segments of `size` frames aligned to the boundary grid shifted by `offset`
// (boundaries sit where (frame - offset) % size == 0), so varying the offset
// yields staggered hypotheses over the same sequence.
std::vector<FrameRange> uniform_segment(int num_frames, int size, int offset);

enum class ChainWeightMode {
  JointDistance,     // summed head-relative joint displacement between frames
  JointDistanceRate, // absolute change of that displacement; first edge 0
};

// Weight of the chain edge between frames t and t+1, for t = 0..T-2.
std::vector<Scalar> chain_edge_weights(const std::vector<SkeletonFrame>& frames,
                                       ChainWeightMode mode);

struct MergeStep {
  int edge; // joins frames edge and edge+1
  Scalar weight;
  bool merged;
};

struct ChainSegmentation {
  std::vector<FrameRange> segments;
  std::vector<MergeStep> trace; // decisions in processing order
};

// Graph-based merging specialised to a chain: edges are visited in ascending
// weight order (ties by frame order) and joined when the weight is within the
// adaptive threshold min over both components of (internal + k / size).
// Larger k tolerates more variation and yields fewer segments.
ChainSegmentation chain_segment_weights(int num_frames,
                                        const std::vector<Scalar>& weights,
                                        Scalar k);

ChainSegmentation chain_segment(const std::vector<SkeletonFrame>& frames,
                                ChainWeightMode mode, Scalar k);

struct SegmentationHypothesis {
  std::string name; // descriptor it was built from
  std::vector<FrameRange> segments;
};

// Descriptors: "uniform:size=<n>,offset=<n>", "chain-dist:k=<x>",
// "chain-rate:k=<x>". Throws std::invalid_argument on malformed input.
std::vector<FrameRange> apply_segmentation(const ActivitySequence& seq,
                                           const std::string& descriptor);

// Runs every descriptor and drops hypotheses whose segment list duplicates an
// earlier one.
std::vector<SegmentationHypothesis> make_hypothesis_set(
    const ActivitySequence& seq, const std::vector<std::string>& descriptors);

} // namespace actaff
