#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "trackfuse/metrics.hpp"
#include "trackfuse/optimizer.hpp"
#include "trackfuse/simulator.hpp"
#include "trackfuse/spatial_model.hpp"

namespace trackfuse {

// JSONL detection format, one object per line:
//   {"frame": t, "detector": k, "box": [x1,y1,x2,y2], "score": w,
//    "depth_mean": v, "depth_std": s}
// Frames are 1-based and need not be contiguous; missing frames are empty.
// Malformed lines raise std::runtime_error naming the line number.
std::vector<std::vector<Detection>> load_detections(const std::string& path);
void save_detections(const std::string& path,
                     const std::vector<std::vector<Detection>>& per_frame);

// Track format: {"frame": t, "person_id": p, "region": l, "box": [...]}
std::vector<TrackBox> load_tracks(const std::string& path);
void save_tracks(const std::string& path, const std::vector<TrackBox>& tracks);

// Ground truth: {"frame": t, "person": id, "region": l, "box": [...]}
GroundTruth load_ground_truth(const std::string& path);
void save_ground_truth(const std::string& path, const GroundTruth& truth);

// Annotation samples for spatial-model training, normalized coordinates:
//   {"boxes": {"1": [x1,y1,x2,y2], "2": [...], ...}}
std::vector<PoseSample> load_annotations(const std::string& path);
void save_annotations(const std::string& path,
                      const std::vector<PoseSample>& samples);

// Appearance rasters, run-length encoded row-major, bins 1-based:
//   {"frame": t, "width": w, "height": h, "bins": B, "rle": [[bin,count],..]}
std::vector<AppearanceRaster> load_rasters(const std::string& path);
void save_rasters(const std::string& path,
                  const std::vector<AppearanceRaster>& rasters);

void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

/// Full run configuration: module configs, detector registry and seed.
/// Defaults follow the published operating point (a = tau = delta = 0.5,
/// C = 4, all lambda = 1).
struct RunConfig {
  unsigned seed = 1;
  int image_width = 160;
  int image_height = 120;
  int regions = 2;
  std::map<int, int> region_of_detector;

  GroupingConfig grouping;
  EnergyConfig energy;
  OptimizerConfig optimizer;
  SpatialModelConfig spatial;
  EvalConfig eval;
  double identity_delta = 0.5;
  int appearance_bins = 16;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  TrackerConfig tracker_config() const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

}  // namespace trackfuse
