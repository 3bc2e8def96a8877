#include "trackfuse/grouping.hpp"

#include <algorithm>
#include <stdexcept>

namespace trackfuse {

bool DetectionGroup::has_detector(int detector_id) const {
  return std::any_of(members.begin(), members.end(), [&](const Detection& d) {
    return d.detector_id == detector_id;
  });
}

double pair_probability(const Detection& d1, const Detection& d2,
                        const GroupingConfig& cfg) {
  if (d1.detector_id == d2.detector_id) {
    throw std::invalid_argument(
        "pair_probability: detections must come from distinct detectors");
  }
  const double p_over = overlap_probability(d1.box, d2.box);
  const double p_depth =
      depth_similarity(d1.depth, d2.depth, cfg.literal_depth_kernel);
  return cfg.a * p_over + (1.0 - cfg.a) * p_depth;
}

std::vector<DetectionGroup> group_two_sets(std::vector<DetectionGroup> groups,
                                           const std::vector<Detection>& dets,
                                           const GroupingConfig& cfg) {
  const std::size_t n_rows = groups.size();
  const std::size_t n_cols = dets.size();
  if (n_rows == 0 || n_cols == 0) {
    for (const Detection& d : dets) groups.push_back(DetectionGroup{{d}});
    return groups;
  }

  // Group-to-detection similarity: best pair probability over members.
  std::vector<std::vector<double>> p(n_rows, std::vector<double>(n_cols));
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < n_cols; ++j) {
      double best = 0.0;
      for (const Detection& member : groups[i].members) {
        best = std::max(best, pair_probability(member, dets[j], cfg));
      }
      p[i][j] = best;
    }
  }

  std::vector<bool> row_done(n_rows, false), col_done(n_cols, false);
  std::vector<bool> det_merged(n_cols, false);
  const std::size_t rounds = std::min(n_rows, n_cols);
  for (std::size_t r = 0; r < rounds; ++r) {
    double best = -1.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n_rows; ++i) {
      if (row_done[i]) continue;
      for (std::size_t j = 0; j < n_cols; ++j) {
        if (col_done[j]) continue;
        if (p[i][j] > best) {
          best = p[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    if (best <= cfg.tau) break;  // everything remaining is below threshold
    row_done[bi] = true;
    col_done[bj] = true;
    groups[bi].members.push_back(dets[bj]);
    det_merged[bj] = true;
  }

  for (std::size_t j = 0; j < n_cols; ++j) {
    if (!det_merged[j]) groups.push_back(DetectionGroup{{dets[j]}});
  }
  return groups;
}

std::vector<DetectionGroup> group_all_detectors(
    const std::map<int, std::vector<Detection>>& frame_detections,
    const GroupingConfig& cfg) {
  std::vector<DetectionGroup> groups;
  bool first = true;
  for (const auto& [detector_id, dets] : frame_detections) {
    (void)detector_id;
    if (first) {
      for (const Detection& d : dets) groups.push_back(DetectionGroup{{d}});
      first = false;
    } else {
      groups = group_two_sets(std::move(groups), dets, cfg);
    }
  }
  return groups;
}

}  // namespace trackfuse
