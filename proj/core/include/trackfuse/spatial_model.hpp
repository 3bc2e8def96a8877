#pragma once

#include <Eigen/Core>
#include <map>
#include <vector>

#include <json.hpp>

#include "trackfuse/geometry.hpp"

namespace trackfuse {

/// One annotated person with a box for every region of interest, in
/// normalized image coordinates. Regions are indexed 0..L-1.
struct PoseSample {
  std::vector<BoundingBox> boxes;
};

struct SpatialModelConfig {
  int subcategories = 4;
  double ridge = 1e-4;
  int anchor_region = 0;
  unsigned seed = 7;
  int kmeans_max_iters = 100;
  // recorded in the serialized model so files can be traced back to the
  // coordinate frame they were trained in
  int image_width = 0;
  int image_height = 0;
};

/// Pose descriptor of a sample relative to the anchor region: per non-anchor
/// region (center offset x / anchor width, center offset y / anchor height,
/// log sqrt area ratio). Invariant to translation and uniform scale.
/// Throws std::invalid_argument on a zero-area anchor.
Eigen::VectorXd pose_feature(const PoseSample& sample, int anchor_region);

/// Pose-clustered affine projections between regions of interest. Each
/// matrix maps the homogeneous corner vector [x1,y1,x2,y2,1] of one region
/// to the corner vector of another.
class SpatialModel {
 public:
  using Projection = Eigen::Matrix<double, 4, 5>;

  SpatialModel() = default;

  int subcategory_count() const { return subcategories_; }
  int region_count() const { return regions_; }

  const Projection& matrix(int c, int from, int to) const;
  Projection& matrix(int c, int from, int to);
  const std::vector<Eigen::VectorXd>& centroids() const { return centroids_; }

  /// Applies the (c, from, to) projection; corners are re-ordered if the
  /// mapped box comes out inverted.
  BoundingBox project(int c, int from, int to, const BoundingBox& box) const;

  /// Full candidate configuration from a single box known to be region
  /// `region`: that region keeps the box, all others are projected.
  std::vector<BoundingBox> predict_configuration(int c, int region,
                                                 const BoundingBox& box) const;

  /// k-means on pose features followed by per-cluster ridge regression for
  /// every ordered region pair. Requires at least `subcategories` distinct
  /// samples. Optionally reports the cluster label of each sample.
  static SpatialModel fit(const std::vector<PoseSample>& samples,
                          const SpatialModelConfig& cfg,
                          std::vector<int>* labels = nullptr);

  /// All-identity model with C subcategories (useful as a neutral model).
  static SpatialModel identity(int regions, int subcategories = 1);

  nlohmann::json to_json() const;
  static SpatialModel from_json(const nlohmann::json& j);

 private:
  int index(int c, int from, int to) const;

  int regions_ = 0;
  int subcategories_ = 0;
  double ridge_ = 0.0;
  int anchor_region_ = 0;
  int image_width_ = 0;
  int image_height_ = 0;
  std::vector<Projection> projections_;  // indexed by (c, from, to), from != to
  std::vector<Eigen::VectorXd> centroids_;
};

}  // namespace trackfuse
