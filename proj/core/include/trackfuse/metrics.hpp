#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "trackfuse/geometry.hpp"
#include "trackfuse/simulator.hpp"

namespace trackfuse {

struct EvalConfig {
  double iou_threshold = 0.5;
  int region = kBodyRegion;  // region evaluated
};

struct TrackBox {
  int frame = 0;  // 1-based
  int person_id = 0;
  int region = 0;
  BoundingBox box;
};

struct MotReport {
  double mota = 0.0;
  double motp = 0.0;
  double fp_rate = 0.0;
  double fn_rate = 0.0;
  double ids_rate = 0.0;
  double recall = 0.0;
  double precision = 0.0;

  long gt_total = 0;
  long false_positives = 0;
  long false_negatives = 0;
  long id_switches = 0;
  long matches = 0;

  nlohmann::json to_json() const;
  /// Aligned single-row table: MOTA, MOTP, FP, FN, IDs, Recall, Precision.
  std::string to_text() const;
};

/// CLEAR MOT evaluation against ground truth. Correspondences persist while
/// still valid (IoU >= threshold); remaining pairs are matched by optimal
/// assignment on IoU. Throws if tracks reference frames beyond the ground
/// truth.
MotReport evaluate(const std::vector<TrackBox>& tracks,
                   const GroundTruth& truth, const EvalConfig& cfg);

}  // namespace trackfuse
