#include "trackfuse/appearance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trackfuse {

void AppearanceRaster::paint(const BoundingBox& box, int bin) {
  const int x_lo = std::max(0, static_cast<int>(std::floor(box.x1)));
  const int x_hi = std::min(width - 1, static_cast<int>(std::ceil(box.x2)));
  const int y_lo = std::max(0, static_cast<int>(std::floor(box.y1)));
  const int y_hi = std::min(height - 1, static_cast<int>(std::ceil(box.y2)));
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      bin_map[y * width + x] = std::uint16_t(bin);
    }
  }
}

namespace {

constexpr double kSigmaSupport = 3.0;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);

// 1D Gaussian values over an integer pixel range, plus derivatives with
// respect to the two box corners on that axis.
struct Axis {
  int lo = 0, hi = -1;  // inclusive pixel range; empty if hi < lo
  std::vector<double> n, d_lo, d_hi;
};

Axis evaluate_axis(double c1, double c2, int limit, bool with_grad) {
  Axis axis;
  const double mu = 0.5 * (c1 + c2);
  const double sigma = 0.5 * (c2 - c1);
  axis.lo = std::max(0, static_cast<int>(std::floor(mu - kSigmaSupport * sigma)));
  axis.hi = std::min(limit - 1,
                     static_cast<int>(std::ceil(mu + kSigmaSupport * sigma)));
  if (axis.hi < axis.lo) return axis;
  const int count = axis.hi - axis.lo + 1;
  axis.n.resize(count);
  if (with_grad) {
    axis.d_lo.resize(count);
    axis.d_hi.resize(count);
  }
  const double inv_s = 1.0 / sigma;
  for (int i = 0; i < count; ++i) {
    const double z = (axis.lo + i - mu) * inv_s;
    const double n = kInvSqrt2Pi * inv_s * std::exp(-0.5 * z * z);
    axis.n[i] = n;
    if (with_grad) {
      const double d_mu = n * z * inv_s;
      const double d_sigma = n * (z * z - 1.0) * inv_s;
      axis.d_lo[i] = 0.5 * d_mu - 0.5 * d_sigma;
      axis.d_hi[i] = 0.5 * d_mu + 0.5 * d_sigma;
    }
  }
  return axis;
}

}  // namespace

AppearanceFeature extract_feature(const AppearanceRaster& raster,
                                  const BoundingBox& box_px,
                                  Eigen::MatrixXd* d_psi) {
  if (!(box_px.width() > 0.0) || !(box_px.height() > 0.0)) {
    throw std::invalid_argument("extract_feature: box has a zero side");
  }
  const int bins = raster.bins;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(bins);
  Eigen::MatrixXd dg;
  const bool with_grad = d_psi != nullptr;
  if (with_grad) dg = Eigen::MatrixXd::Zero(bins, 4);

  const Axis ax = evaluate_axis(box_px.x1, box_px.x2, raster.width, with_grad);
  const Axis ay = evaluate_axis(box_px.y1, box_px.y2, raster.height, with_grad);

  if (ax.hi >= ax.lo && ay.hi >= ay.lo) {
    for (int y = ay.lo; y <= ay.hi; ++y) {
      const double ny = ay.n[y - ay.lo];
      const std::uint16_t* row = raster.bin_map.data() + y * raster.width;
      for (int x = ax.lo; x <= ax.hi; ++x) {
        const int b = row[x];
        const double nx = ax.n[x - ax.lo];
        g[b] += nx * ny;
        if (with_grad) {
          dg(b, 0) += ax.d_lo[x - ax.lo] * ny;
          dg(b, 2) += ax.d_hi[x - ax.lo] * ny;
          dg(b, 1) += nx * ay.d_lo[y - ay.lo];
          dg(b, 3) += nx * ay.d_hi[y - ay.lo];
        }
      }
    }
  }

  const double norm = g.norm();
  if (norm <= 0.0) {
    if (with_grad) d_psi->setZero(bins, 4);
    return Eigen::VectorXd::Zero(bins);
  }
  const Eigen::VectorXd psi = g / norm;
  if (with_grad) {
    // d(g/|g|) = dg/|g| - g (g . dg) / |g|^3
    *d_psi = dg / norm - psi * (psi.transpose() * dg) / norm;
  }
  return psi;
}

const AppearanceBank::Entry* AppearanceBank::find(int identity) const {
  for (const Entry& e : entries) {
    if (e.identity == identity) return &e;
  }
  return nullptr;
}

AppearanceBank::Entry* AppearanceBank::find(int identity) {
  for (Entry& e : entries) {
    if (e.identity == identity) return &e;
  }
  return nullptr;
}

nlohmann::json AppearanceBank::to_json() const {
  nlohmann::json j;
  j["next_identity"] = next_identity;
  j["regions"] = regions;
  nlohmann::json list = nlohmann::json::array();
  for (const Entry& e : entries) {
    nlohmann::json je;
    je["identity"] = e.identity;
    je["frame_count"] = e.frame_count;
    nlohmann::json feats = nlohmann::json::array();
    for (const auto& f : e.per_region) {
      feats.push_back(std::vector<double>(f.data(), f.data() + f.size()));
    }
    je["features"] = feats;
    list.push_back(je);
  }
  j["entries"] = list;
  return j;
}

AppearanceBank AppearanceBank::from_json(const nlohmann::json& j) {
  AppearanceBank bank;
  bank.next_identity = j.at("next_identity").get<int>();
  bank.regions = j.at("regions").get<int>();
  for (const auto& je : j.at("entries")) {
    Entry e;
    e.identity = je.at("identity").get<int>();
    e.frame_count = je.at("frame_count").get<int>();
    for (const auto& jf : je.at("features")) {
      const auto v = jf.get<std::vector<double>>();
      e.per_region.push_back(
          Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
    }
    bank.entries.push_back(std::move(e));
  }
  return bank;
}

IdentityMatch match_identity(AppearanceBank& bank,
                             const std::vector<AppearanceFeature>& candidate,
                             double delta, const std::set<int>& exclude) {
  IdentityMatch best{0, 0.0, false};
  for (const AppearanceBank::Entry& e : bank.entries) {
    if (exclude.count(e.identity)) continue;
    for (std::size_t l = 0; l < candidate.size() && l < e.per_region.size();
         ++l) {
      const double s = e.per_region[l].dot(candidate[l]);
      if (s > best.score) {
        best.score = s;
        best.identity = e.identity;
      }
    }
  }
  if (best.identity != 0 && best.score >= delta) return best;

  IdentityMatch fresh{bank.next_identity++, best.identity != 0 ? best.score : 0.0,
                      true};
  AppearanceBank::Entry entry;
  entry.identity = fresh.identity;
  entry.per_region = candidate;
  entry.frame_count = 1;
  if (bank.regions == 0) bank.regions = static_cast<int>(candidate.size());
  bank.entries.push_back(std::move(entry));
  return fresh;
}

void update_bank(AppearanceBank& bank, int identity,
                 const std::vector<AppearanceFeature>& features) {
  AppearanceBank::Entry* e = bank.find(identity);
  if (!e) {
    throw std::invalid_argument("update_bank: unknown identity");
  }
  const double f = static_cast<double>(e->frame_count);
  for (std::size_t l = 0; l < e->per_region.size() && l < features.size();
       ++l) {
    Eigen::VectorXd mixed = (f * e->per_region[l] + features[l]) / (f + 1.0);
    const double norm = mixed.norm();
    e->per_region[l] = norm > 0.0 ? AppearanceFeature(mixed / norm)
                                  : AppearanceFeature(mixed);
  }
  e->frame_count += 1;
}

}  // namespace trackfuse
