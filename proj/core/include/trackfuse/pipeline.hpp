#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trackfuse/io.hpp"

namespace trackfuse {

struct PipelineResult {
  std::vector<TrackBox> tracks;
  std::optional<MotReport> report;
};

/// Runs first-frame initialization followed by the online update over the
/// whole sequence, then evaluates against ground truth when provided.
PipelineResult run_tracking(const RunConfig& cfg, const SpatialModel& model,
                            const std::vector<std::vector<Detection>>& detections,
                            const std::vector<AppearanceRaster>& rasters,
                            const GroundTruth* truth = nullptr);

/// Cartesian grid sweep over selected parameters (a, tau, delta, alpha and
/// the six lambdas), one tracking run per combination. Returns CSV text with
/// one row per configuration, ordered by configuration index. `jobs` > 1
/// runs configurations in a parallel worker pool.
std::string run_sweep(const RunConfig& base, const SpatialModel& model,
                      const std::vector<std::vector<Detection>>& detections,
                      const std::vector<AppearanceRaster>& rasters,
                      const GroundTruth& truth, const nlohmann::json& grid,
                      int jobs = 1);

}  // namespace trackfuse
