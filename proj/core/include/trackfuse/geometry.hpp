#pragma once

#include <Eigen/Core>
#include <cmath>

namespace trackfuse {

/// Axis-aligned box given by upper-left and lower-right corners, in
/// continuous image coordinates.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && x1 <= x2 && y1 <= y2;
  }

  BoundingBox translated(double dx, double dy) const {
    return {x1 + dx, y1 + dy, x2 + dx, y2 + dy};
  }

  Eigen::Vector4d to_vector() const { return {x1, y1, x2, y2}; }
  static BoundingBox from_vector(const Eigen::Vector4d& v) {
    return {v[0], v[1], v[2], v[3]};
  }
};

/// Summary depth statistics of the pixels inside a detection box.
struct DepthStats {
  double mean = 0.0;
  double std_dev = 0.0;
};

/// One detector output. Scores are assumed already normalized to (0,1].
struct Detection {
  BoundingBox box;
  double score = 1.0;
  int detector_id = 0;
  DepthStats depth;
};

double intersection_area(const BoundingBox& b1, const BoundingBox& b2);

/// Intersection over the smaller of the two areas. 1 when the smaller box is
/// contained in the larger, 0 when disjoint or either box is degenerate.
double overlap_probability(const BoundingBox& b1, const BoundingBox& b2);

double iou(const BoundingBox& b1, const BoundingBox& b2);

/// Symmetric average of two Gaussian kernels on the difference of depth
/// means, each scaled by one box's depth variance. Stds are floored at 1e-3
/// before evaluation. With literal_kernel the second kernel is scaled by the
/// squared depth *mean* instead of the variance (the uncorrected form).
double depth_similarity(const DepthStats& d1, const DepthStats& d2,
                        bool literal_kernel = false);

}  // namespace trackfuse
