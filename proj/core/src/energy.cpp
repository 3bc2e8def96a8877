#include "trackfuse/energy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace trackfuse {

namespace {

constexpr double kExclusionFloor = 1e-8;

// Softmin weights w_m = exp(alpha (z_m - z_min)) normalized to sum 1,
// together with the softmin value.
struct Softmin {
  double value = 0.0;
  std::vector<double> weights;
};

Softmin softmin_detail(std::span<const double> z, double alpha) {
  double z_min = z[0];
  for (double v : z) z_min = std::min(z_min, v);
  Softmin out;
  out.weights.resize(z.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double w = std::exp(alpha * (z[i] - z_min));
    out.weights[i] = w;
    num += w * z[i];
    den += w;
  }
  out.value = num / den;
  for (double& w : out.weights) w /= den;
  return out;
}

Eigen::Vector4d to_px(const Eigen::Vector4d& x, const EnergyConfig& cfg) {
  return {x[0] * cfg.image_width, x[1] * cfg.image_height,
          x[2] * cfg.image_width, x[3] * cfg.image_height};
}

}  // namespace

double softmin(std::span<const double> values, double alpha) {
  if (values.empty()) {
    throw std::invalid_argument("softmin: empty input");
  }
  if (!(alpha < 0.0)) {
    throw std::invalid_argument("softmin: alpha must be negative");
  }
  return softmin_detail(values, alpha).value;
}

double e_det(const FrameSolution& sol, const FrameContext& ctx, double alpha,
             Eigen::VectorXd* grad, double weight) {
  if (ctx.groups.empty()) return 0.0;
  if (sol.persons == 0) return std::numeric_limits<double>::infinity();

  const int L = sol.regions;
  double total = 0.0;
  std::vector<double> z(sol.persons);
  for (const DetectionGroup& group : ctx.groups) {
    for (int m = 0; m < sol.persons; ++m) {
      double cost = 0.0;
      for (const Detection& d : group.members) {
        const int l = ctx.region_of_detector.at(d.detector_id);
        cost += d.score * (d.box.to_vector() - sol.box(m, l)).squaredNorm();
      }
      z[m] = cost;
    }
    const Softmin sm = softmin_detail(z, alpha);
    total += sm.value;
    if (grad) {
      for (int m = 0; m < sol.persons; ++m) {
        // dS/dz_m = w_m (1 + alpha (z_m - S))
        const double ds = sm.weights[m] * (1.0 + alpha * (z[m] - sm.value));
        for (const Detection& d : group.members) {
          const int l = ctx.region_of_detector.at(d.detector_id);
          const Eigen::Vector4d dz =
              2.0 * d.score * (sol.box(m, l) - d.box.to_vector());
          grad->segment<4>((m * L + l) * 4) += weight * ds * dz;
        }
      }
    }
  }
  return total;
}

double e_spa(const FrameSolution& sol, const FrameContext& ctx, double alpha,
             Eigen::VectorXd* grad, double weight) {
  const SpatialModel& model = *ctx.model;
  const int L = sol.regions;
  const int C = model.subcategory_count();
  double total = 0.0;
  std::vector<double> z(C);
  // gradient of z_c with respect to all boxes of the current person
  Eigen::MatrixXd dz(C, 4 * L);

  for (int m = 0; m < sol.persons; ++m) {
    dz.setZero();
    for (int c = 0; c < C; ++c) {
      double cost = 0.0;
      for (int from = 0; from < L; ++from) {
        Eigen::Matrix<double, 5, 1> h;
        h << sol.box(m, from), 1.0;
        for (int to = 0; to < L; ++to) {
          if (to == from) continue;
          const auto& a = model.matrix(c, from, to);
          const Eigen::Vector4d r = a * h - sol.box(m, to);
          cost += r.squaredNorm();
          if (grad) {
            dz.block<1, 4>(c, 4 * from) +=
                (2.0 * a.block<4, 4>(0, 0).transpose() * r).transpose();
            dz.block<1, 4>(c, 4 * to) += (-2.0 * r).transpose();
          }
        }
      }
      z[c] = cost;
    }
    const Softmin sm = softmin_detail(z, alpha);
    total += sm.value;
    if (grad) {
      for (int c = 0; c < C; ++c) {
        const double ds = sm.weights[c] * (1.0 + alpha * (z[c] - sm.value));
        grad->segment(m * L * 4, L * 4) += weight * ds * dz.row(c).transpose();
      }
    }
  }
  return total;
}

double e_exc(const FrameSolution& sol, Eigen::VectorXd* grad, double weight) {
  const int L = sol.regions;
  double total = 0.0;
  for (int l = 0; l < L; ++l) {
    for (int m = 0; m < sol.persons; ++m) {
      for (int m2 = 0; m2 < sol.persons; ++m2) {
        if (m2 == m) continue;
        const Eigen::Vector4d d = sol.box(m, l) - sol.box(m2, l);
        const double s = d.squaredNorm();
        if (s <= kExclusionFloor) {
          total += 1.0 / kExclusionFloor;  // clamped, zero gradient
          continue;
        }
        total += 1.0 / s;
        if (grad) {
          const Eigen::Vector4d dd = -2.0 / (s * s) * d;
          grad->segment<4>((m * L + l) * 4) += weight * dd;
          grad->segment<4>((m2 * L + l) * 4) -= weight * dd;
        }
      }
    }
  }
  return total;
}

double e_reg(const FrameSolution& sol) {
  return static_cast<double>(sol.persons);
}

double e_tra(const FrameSolution& sol, const FrameContext& ctx,
             Eigen::VectorXd* grad, double weight) {
  if (!ctx.prev || !ctx.velocities) return 0.0;
  const int L = sol.regions;
  const int m_max = std::min({ctx.m_star, sol.persons, ctx.prev->persons});
  double total = 0.0;
  for (int m = 0; m < m_max; ++m) {
    for (int l = 0; l < L; ++l) {
      const Eigen::Vector4d v_now = sol.box(m, l) - ctx.prev->box(m, l);
      const Eigen::Vector4d diff = v_now - (*ctx.velocities)[m * L + l];
      total += diff.squaredNorm();
      if (grad) grad->segment<4>((m * L + l) * 4) += weight * 2.0 * diff;
    }
  }
  return total;
}

double e_app(const FrameSolution& sol, const FrameContext& ctx,
             const EnergyConfig& cfg, Eigen::VectorXd* grad, double weight) {
  if (!ctx.raster || !ctx.prev_features) return 0.0;
  const int L = sol.regions;
  const int m_max = std::min(ctx.m_star, sol.persons);
  const Eigen::Vector4d px_scale(cfg.image_width, cfg.image_height,
                                 cfg.image_width, cfg.image_height);
  double total = 0.0;
  Eigen::MatrixXd d_psi;
  for (int m = 0; m < m_max; ++m) {
    for (int l = 0; l < L; ++l) {
      const AppearanceFeature& phi = (*ctx.prev_features)[m * L + l];
      if (phi.size() == 0) continue;
      const BoundingBox box_px =
          BoundingBox::from_vector(to_px(sol.box(m, l), cfg));
      // an inverted or flat box has no appearance support
      if (!(box_px.width() > 0.0) || !(box_px.height() > 0.0)) continue;
      const AppearanceFeature psi =
          extract_feature(*ctx.raster, box_px, grad ? &d_psi : nullptr);
      total -= phi.dot(psi);
      if (grad) {
        const Eigen::Vector4d d_term =
            -(phi.transpose() * d_psi).transpose().cwiseProduct(px_scale);
        grad->segment<4>((m * L + l) * 4) += weight * d_term;
      }
    }
  }
  return total;
}

double total_energy(const FrameSolution& sol, const FrameContext& ctx,
                    const EnergyConfig& cfg, Eigen::VectorXd* grad) {
  if (grad) grad->setZero(sol.dof());
  const EnergyWeights& lam = cfg.lambda;
  double total = 0.0;
  if (lam.det != 0.0)
    total += lam.det * e_det(sol, ctx, cfg.alpha, grad, lam.det);
  if (lam.spa != 0.0 && ctx.model)
    total += lam.spa * e_spa(sol, ctx, cfg.alpha, grad, lam.spa);
  if (lam.exc != 0.0) total += lam.exc * e_exc(sol, grad, lam.exc);
  total += lam.reg * e_reg(sol);
  if (ctx.prev) {
    if (lam.tra != 0.0) total += lam.tra * e_tra(sol, ctx, grad, lam.tra);
    if (lam.app != 0.0)
      total += lam.app * e_app(sol, ctx, cfg, grad, lam.app);
  }
  return total;
}

}  // namespace trackfuse
