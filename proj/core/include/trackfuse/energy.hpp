#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "trackfuse/appearance.hpp"
#include "trackfuse/grouping.hpp"
#include "trackfuse/spatial_model.hpp"

namespace trackfuse {

/// Per-frame unknowns: an L x M grid of boxes, one per (person, region).
/// All coordinates are in normalized [0,1] image units.
struct FrameSolution {
  int regions = 0;
  int persons = 0;
  std::vector<Eigen::Vector4d> boxes;  // index (m, l) = m * regions + l

  FrameSolution() = default;
  FrameSolution(int regions_, int persons_)
      : regions(regions_),
        persons(persons_),
        boxes(static_cast<std::size_t>(regions_) * persons_,
              Eigen::Vector4d::Zero()) {}

  Eigen::Vector4d& box(int m, int l) { return boxes[m * regions + l]; }
  const Eigen::Vector4d& box(int m, int l) const {
    return boxes[m * regions + l];
  }
  int dof() const { return 4 * regions * persons; }
};

struct EnergyWeights {
  double det = 1.0;
  double spa = 1.0;
  double exc = 1.0;
  double reg = 1.0;
  double tra = 1.0;
  double app = 1.0;
};

struct EnergyConfig {
  double alpha = -10.0;  // softmin sharpness, must be negative
  EnergyWeights lambda;
  int image_width = 0;
  int image_height = 0;
};

/// Everything the energy needs besides the unknowns. Detection group boxes
/// are expected in normalized coordinates. Temporal members (prev,
/// velocities, prev_features, raster) are only consulted when present.
struct FrameContext {
  std::vector<DetectionGroup> groups;
  const SpatialModel* model = nullptr;
  std::map<int, int> region_of_detector;  // detector_id -> region index

  const FrameSolution* prev = nullptr;
  const std::vector<Eigen::Vector4d>* velocities = nullptr;  // per (m, l) of prev
  int m_star = 0;  // persons carried over from the previous frame
  const AppearanceRaster* raster = nullptr;
  const std::vector<AppearanceFeature>* prev_features = nullptr;  // per (m, l)
};

/// Smooth surrogate of min for alpha < 0, exact in the limit
/// alpha -> -inf. Throws std::invalid_argument on empty input.
double softmin(std::span<const double> values, double alpha);

// Each term optionally accumulates `weight * d(term)/d(boxes)` into grad
// (grad must be pre-sized to sol.dof() by the caller).

double e_det(const FrameSolution& sol, const FrameContext& ctx, double alpha,
             Eigen::VectorXd* grad = nullptr, double weight = 1.0);
double e_spa(const FrameSolution& sol, const FrameContext& ctx, double alpha,
             Eigen::VectorXd* grad = nullptr, double weight = 1.0);
double e_exc(const FrameSolution& sol, Eigen::VectorXd* grad = nullptr,
             double weight = 1.0);
double e_reg(const FrameSolution& sol);
double e_tra(const FrameSolution& sol, const FrameContext& ctx,
             Eigen::VectorXd* grad = nullptr, double weight = 1.0);
double e_app(const FrameSolution& sol, const FrameContext& ctx,
             const EnergyConfig& cfg, Eigen::VectorXd* grad = nullptr,
             double weight = 1.0);

/// Weighted sum of the six terms. Temporal terms are skipped when the
/// context has no previous frame. e_reg contributes no gradient (the person
/// count is discrete).
double total_energy(const FrameSolution& sol, const FrameContext& ctx,
                    const EnergyConfig& cfg, Eigen::VectorXd* grad = nullptr);

}  // namespace trackfuse
