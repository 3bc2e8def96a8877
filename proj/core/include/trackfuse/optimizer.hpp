#pragma once

#include <map>
#include <vector>

#include "trackfuse/appearance.hpp"
#include "trackfuse/energy.hpp"
#include "trackfuse/grouping.hpp"
#include "trackfuse/spatial_model.hpp"

namespace trackfuse {

struct OptimizerConfig {
  double step = 0.05;        // initial line-search step, normalized units
  double backtrack = 0.5;    // step shrink factor
  int max_backtracks = 20;
  int max_iters = 500;       // block sweeps
  double rel_tol = 1e-6;
  double boundary_margin = 0.05;    // fraction of image size
  double detection_radius = 0.1;    // fraction of the image diagonal
};

struct TrackerConfig {
  int regions = 2;
  std::map<int, int> region_of_detector;  // detector_id -> region index
  GroupingConfig grouping;
  EnergyConfig energy;
  OptimizerConfig optimizer;
  double identity_delta = 0.5;
  int appearance_bins = 16;
};

struct TrackerState {
  int frame = 0;  // frames processed so far
  FrameSolution solution;
  std::vector<Eigen::Vector4d> velocities;   // per (m, l)
  std::vector<int> identities;               // per m
  std::vector<AppearanceFeature> features;   // psi of current boxes, per (m, l)
  AppearanceBank bank;
  int m_star = 0;
};

/// Block coordinate descent: cycles over persons, descending the total
/// energy of each person's L boxes with a backtracking line search. The
/// returned energy never exceeds the initial one. Throws if the energy is
/// not finite at the initial solution.
FrameSolution optimize_fixed_m(FrameSolution init, const FrameContext& ctx,
                               const EnergyConfig& ecfg,
                               const OptimizerConfig& ocfg,
                               double* final_energy = nullptr);

struct PreprocessResult {
  std::vector<int> survivors;                   // person indices kept, in order
  std::vector<Eigen::Vector4d> predictions;     // per (m, l), constant velocity
};

/// Constant-velocity prediction plus the exit rule: a person is dropped when
/// some predicted region box sits in the boundary margin and no detection
/// lies within the detection radius of any predicted region.
PreprocessResult preprocess(const TrackerState& state,
                            const TrackerConfig& cfg,
                            const std::vector<Detection>& detections_px);

/// Online multi-person tracker: first call to process() runs the first-frame
/// initialization, subsequent calls run the temporal update. Detections and
/// rasters are in pixel units; state boxes are normalized.
class Tracker {
 public:
  Tracker(TrackerConfig cfg, SpatialModel model);

  void process(const std::vector<Detection>& detections_px,
               const AppearanceRaster& raster);

  const TrackerState& state() const { return state_; }
  const TrackerConfig& config() const { return cfg_; }
  const SpatialModel& model() const { return model_; }

 private:
  void initialize_first_frame(const std::vector<Detection>& detections_px,
                              const AppearanceRaster& raster);
  void update_frame(const std::vector<Detection>& detections_px,
                    const AppearanceRaster& raster);

  std::vector<Detection> normalized(
      const std::vector<Detection>& detections_px) const;
  std::vector<std::vector<Eigen::Vector4d>> candidate_configurations(
      const std::vector<Detection>& detections_norm) const;
  std::vector<AppearanceFeature> extract_all_features(
      const FrameSolution& sol, const AppearanceRaster& raster) const;

  TrackerConfig cfg_;
  SpatialModel model_;
  TrackerState state_;
};

}  // namespace trackfuse
