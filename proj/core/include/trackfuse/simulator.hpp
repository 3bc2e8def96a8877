#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "trackfuse/appearance.hpp"
#include "trackfuse/geometry.hpp"
#include "trackfuse/spatial_model.hpp"

namespace trackfuse {

// Region convention used by the simulator: 0 = full body, 1 = head.
inline constexpr int kBodyRegion = 0;
inline constexpr int kHeadRegion = 1;

enum class Pose { Standing, Sitting, Lying };

Pose pose_from_string(const std::string& s);
std::string pose_to_string(Pose p);

/// The generator affine map body -> head for each pose. Linear in the body
/// corners, so a fitted spatial model can recover it exactly.
BoundingBox head_from_body(Pose pose, const BoundingBox& body);

/// Body center follows (cx, cy) + v * (frame - from) while the segment is
/// active. Frames outside any segment mean the person is absent.
struct MotionSegment {
  int from = 0;
  int to = 0;  // inclusive
  double cx = 0.0, cy = 0.0;
  double vx = 0.0, vy = 0.0;
};

struct PoseInterval {
  int from = 0;
  int to = 0;  // inclusive
  Pose pose = Pose::Standing;
};

struct PersonSpec {
  int id = 0;
  double body_width = 0.0;
  double body_height = 0.0;
  double base_depth = 0.0;
  std::vector<int> signature_bins;  // 0-based stripes painted in the body box
  std::vector<MotionSegment> segments;
  std::vector<PoseInterval> poses;
};

struct DetectorSpec {
  int detector_id = 0;
  int region = kBodyRegion;
  double miss_rate = 0.0;
  double fp_rate = 0.0;  // Poisson mean per frame
  double position_noise_std = 0.0;  // px, per corner coordinate
  double depth_noise_std = 0.05;
  double depth_std_value = 0.5;  // sigma reported with each detection
};

struct ScenarioConfig {
  unsigned seed = 1;
  int width = 160;
  int height = 120;
  int frames = 100;
  int bins = 16;
  int background_bin = 0;
  double occlusion_overlap = 0.5;      // body overlap that counts as occlusion
  double occlusion_miss_rate = 0.7;    // miss rate while occluded
  int training_samples_per_pose = 60;
  std::vector<PersonSpec> persons;
  std::vector<DetectorSpec> detectors;

  nlohmann::json to_json() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
};

struct TruthPerson {
  int identity = 0;
  bool present = false;
  std::vector<BoundingBox> boxes;  // per region, clipped to the image
};

struct GroundTruth {
  int width = 0, height = 0, regions = 2;
  std::vector<std::vector<TruthPerson>> frames;  // [frame][person-slot]
};

struct SimulationResult {
  GroundTruth truth;
  std::vector<std::vector<Detection>> detections;  // per frame, pixel coords
  std::vector<AppearanceRaster> rasters;           // per frame
  std::vector<PoseSample> training;  // clean normalized pose samples
};

/// Deterministic under a fixed seed. Detectors emit each visible person's
/// region box with probability 1 - miss (elevated while occluded), Gaussian
/// corner noise, plus Poisson false positives at random locations.
SimulationResult simulate(const ScenarioConfig& config);

}  // namespace trackfuse
