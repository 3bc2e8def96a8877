// Shared test utilities: independent oracles and random instance builders.
// Everything here is deliberately naive so it stays independent of the
// library's implementation paths.
#pragma once

#include <functional>
#include <map>
#include <random>
#include <vector>

#include "trackfuse/energy.hpp"
#include "trackfuse/grouping.hpp"
#include "trackfuse/simulator.hpp"

namespace testutil {

using namespace trackfuse;

// ---------------------------------------------------------------------------
// grouping oracle: straightforward re-implementation of the greedy matrix
// selection, structured around explicit pair lists instead of row/col flags.

inline std::vector<DetectionGroup> naive_group_two_sets(
    const std::vector<DetectionGroup>& groups_in,
    const std::vector<Detection>& dets, const GroupingConfig& cfg) {
  std::vector<DetectionGroup> groups = groups_in;
  if (groups.empty()) {
    std::vector<DetectionGroup> out;
    for (const auto& d : dets) out.push_back(DetectionGroup{{d}});
    return out;
  }
  struct Pair {
    std::size_t g, d;
    double p;
  };
  std::vector<Pair> pairs;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t d = 0; d < dets.size(); ++d) {
      double best = 0.0;
      for (const auto& m : groups[g].members) {
        best = std::max(best, pair_probability(m, dets[d], cfg));
      }
      pairs.push_back({g, d, best});
    }
  }
  std::vector<bool> g_taken(groups.size(), false), d_taken(dets.size(), false);
  while (true) {
    const Pair* best = nullptr;
    for (const Pair& p : pairs) {
      if (g_taken[p.g] || d_taken[p.d]) continue;
      if (!best || p.p > best->p ||
          (p.p == best->p &&
           (p.g < best->g || (p.g == best->g && p.d < best->d)))) {
        best = &p;
      }
    }
    if (!best || best->p <= cfg.tau) break;
    g_taken[best->g] = true;
    d_taken[best->d] = true;
    groups[best->g].members.push_back(dets[best->d]);
  }
  for (std::size_t d = 0; d < dets.size(); ++d) {
    if (!d_taken[d]) groups.push_back(DetectionGroup{{dets[d]}});
  }
  return groups;
}

inline std::vector<DetectionGroup> naive_group_all(
    const std::map<int, std::vector<Detection>>& by_detector,
    const GroupingConfig& cfg) {
  std::vector<DetectionGroup> groups;
  bool first = true;
  for (const auto& [k, dets] : by_detector) {
    (void)k;
    if (first) {
      for (const auto& d : dets) groups.push_back(DetectionGroup{{d}});
      first = false;
    } else {
      groups = naive_group_two_sets(groups, dets, cfg);
    }
  }
  return groups;
}

// ---------------------------------------------------------------------------
// finite differences

inline Eigen::VectorXd central_differences(
    const std::function<double(const FrameSolution&)>& f, FrameSolution sol,
    double h = 1e-5) {
  Eigen::VectorXd grad(sol.dof());
  for (int i = 0; i < sol.dof(); ++i) {
    double& coord = sol.boxes[i / 4][i % 4];
    const double saved = coord;
    coord = saved + h;
    const double fp = f(sol);
    coord = saved - h;
    const double fm = f(sol);
    coord = saved;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

// Relative error between an analytic gradient and its finite-difference
// estimate, using a norm-scaled denominator.
inline double gradient_error(const Eigen::VectorXd& analytic,
                             const Eigen::VectorXd& fd) {
  const double denom = std::max(1e-8, std::max(analytic.norm(), fd.norm()));
  return (analytic - fd).norm() / denom;
}

// ---------------------------------------------------------------------------
// random instances

inline BoundingBox random_box(std::mt19937& rng, double lo = 0.05,
                              double hi = 0.95) {
  std::uniform_real_distribution<double> u(lo, hi);
  double x1 = u(rng), x2 = u(rng), y1 = u(rng), y2 = u(rng);
  if (x1 > x2) std::swap(x1, x2);
  if (y1 > y2) std::swap(y1, y2);
  // keep a minimum side so appearance features stay well defined
  x2 = std::max(x2, x1 + 0.05);
  y2 = std::max(y2, y1 + 0.05);
  return {x1, y1, x2, y2};
}

inline Detection random_detection(std::mt19937& rng, int detector_id) {
  std::uniform_real_distribution<double> score(0.1, 1.0);
  std::uniform_real_distribution<double> depth(1.0, 8.0);
  std::uniform_real_distribution<double> dstd(0.2, 1.0);
  Detection d;
  d.box = random_box(rng);
  d.score = score(rng);
  d.detector_id = detector_id;
  d.depth = {depth(rng), dstd(rng)};
  return d;
}

inline FrameSolution random_solution(std::mt19937& rng, int regions,
                                     int persons) {
  FrameSolution sol(regions, persons);
  for (auto& b : sol.boxes) b = random_box(rng).to_vector();
  return sol;
}

inline AppearanceRaster random_raster(std::mt19937& rng, int width = 48,
                                      int height = 36, int bins = 8) {
  AppearanceRaster r;
  r.width = width;
  r.height = height;
  r.bins = bins;
  r.bin_map.resize(std::size_t(width) * height);
  std::uniform_int_distribution<int> bin(0, bins - 1);
  for (auto& b : r.bin_map) b = std::uint16_t(bin(rng));
  return r;
}

}  // namespace testutil
