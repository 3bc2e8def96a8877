#pragma once

#include <map>
#include <vector>

#include "trackfuse/geometry.hpp"

namespace trackfuse {

struct GroupingConfig {
  double a = 0.5;    // overlap vs depth mixing weight
  double tau = 0.5;  // acceptance threshold
  bool literal_depth_kernel = false;
};

/// Detections hypothesized to belong to one person: at most one member per
/// detector.
struct DetectionGroup {
  std::vector<Detection> members;

  bool has_detector(int detector_id) const;
};

/// Probability that two detections from distinct detectors belong to the
/// same person. Throws std::invalid_argument if the detectors coincide.
double pair_probability(const Detection& d1, const Detection& d2,
                        const GroupingConfig& cfg);

/// Merges one detector's detections into existing groups by greedy maximum
/// selection on the group-to-detection similarity matrix. A group's
/// similarity to a detection is the best pair_probability over its members.
/// Pairs above tau merge; everything left over becomes a singleton group.
/// Ties break on lowest (row, column) index.
std::vector<DetectionGroup> group_two_sets(std::vector<DetectionGroup> groups,
                                           const std::vector<Detection>& dets,
                                           const GroupingConfig& cfg);

/// Folds group_two_sets over detectors in ascending detector_id. The output
/// partitions the input detections.
std::vector<DetectionGroup> group_all_detectors(
    const std::map<int, std::vector<Detection>>& frame_detections,
    const GroupingConfig& cfg);

}  // namespace trackfuse
