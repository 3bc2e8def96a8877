#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <set>
#include <vector>

#include <json.hpp>

#include "trackfuse/geometry.hpp"

namespace trackfuse {

/// Per-pixel bin map standing in for a real appearance descriptor image.
/// Bins are 0-based internally; the on-disk format uses 1..B.
struct AppearanceRaster {
  int width = 0;
  int height = 0;
  int bins = 0;
  std::vector<std::uint16_t> bin_map;  // row-major, size width*height

  int at(int x, int y) const { return bin_map[y * width + x]; }
  void fill(int bin) { bin_map.assign(width * height, std::uint16_t(bin)); }
  void paint(const BoundingBox& box, int bin);
};

/// B non-negative reals; unit L2 norm unless identically zero.
using AppearanceFeature = Eigen::VectorXd;

/// Gaussian-weighted bin histogram of the box, L2-normalized. The Gaussian
/// is centered at the box center with per-axis std of half the side length,
/// truncated at 3 sigma. Boxes fully outside the raster give the zero
/// feature; a zero side length throws std::invalid_argument.
/// If d_psi is non-null it receives the B x 4 Jacobian with respect to
/// (x1, y1, x2, y2) in pixel units.
AppearanceFeature extract_feature(const AppearanceRaster& raster,
                                  const BoundingBox& box_px,
                                  Eigen::MatrixXd* d_psi = nullptr);

/// Lifetime appearance store: one entry per identity ever seen, with a
/// per-region feature and the number of frames the identity appeared in.
struct AppearanceBank {
  struct Entry {
    int identity = 0;
    std::vector<AppearanceFeature> per_region;
    int frame_count = 0;
  };

  std::vector<Entry> entries;
  int next_identity = 1;
  int regions = 0;

  const Entry* find(int identity) const;
  Entry* find(int identity);

  nlohmann::json to_json() const;
  static AppearanceBank from_json(const nlohmann::json& j);
};

struct IdentityMatch {
  int identity = 0;
  double score = 0.0;
  bool is_new = false;
};

/// Best inner-product similarity over stored identities and regions. If it
/// reaches delta the matching identity is returned, otherwise a fresh
/// identity is allocated and registered with the candidate features.
/// Identities in `exclude` are never matched (they are already in use in the
/// current frame).
IdentityMatch match_identity(AppearanceBank& bank,
                             const std::vector<AppearanceFeature>& candidate,
                             double delta,
                             const std::set<int>& exclude = {});

/// Running-mean update of the identity's per-region features, re-normalized
/// to unit norm; increments the frame count.
void update_bank(AppearanceBank& bank, int identity,
                 const std::vector<AppearanceFeature>& features);

}  // namespace trackfuse
