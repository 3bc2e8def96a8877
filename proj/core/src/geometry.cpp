#include "trackfuse/geometry.hpp"

#include <algorithm>

namespace trackfuse {

namespace {
constexpr double kDepthStdFloor = 1e-3;
}

double intersection_area(const BoundingBox& b1, const BoundingBox& b2) {
  const double w = std::min(b1.x2, b2.x2) - std::max(b1.x1, b2.x1);
  const double h = std::min(b1.y2, b2.y2) - std::max(b1.y1, b2.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double overlap_probability(const BoundingBox& b1, const BoundingBox& b2) {
  const double smaller = std::min(b1.area(), b2.area());
  if (smaller <= 0.0) return 0.0;
  return intersection_area(b1, b2) / smaller;
}

double iou(const BoundingBox& b1, const BoundingBox& b2) {
  const double inter = intersection_area(b1, b2);
  const double uni = b1.area() + b2.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double depth_similarity(const DepthStats& d1, const DepthStats& d2,
                        bool literal_kernel) {
  const double diff2 = (d1.mean - d2.mean) * (d1.mean - d2.mean);
  const double s1 = std::max(d1.std_dev, kDepthStdFloor);
  const double scale2 =
      literal_kernel ? std::max(std::abs(d2.mean), kDepthStdFloor)
                     : std::max(d2.std_dev, kDepthStdFloor);
  return 0.5 * std::exp(-diff2 / (2.0 * s1 * s1)) +
         0.5 * std::exp(-diff2 / (2.0 * scale2 * scale2));
}

}  // namespace trackfuse
