#include "trackfuse/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace trackfuse {

namespace {

constexpr double kArmijo = 1e-4;

// Objective used to rank candidate configurations during the incremental
// person-count search. Temporal terms are identical across candidates (they
// only cover carried-over persons), so they are omitted.
double selection_objective(const FrameSolution& sol, const FrameContext& ctx,
                           const EnergyConfig& cfg) {
  double total = cfg.lambda.reg * e_reg(sol);
  if (cfg.lambda.det != 0.0) total += cfg.lambda.det * e_det(sol, ctx, cfg.alpha);
  if (cfg.lambda.spa != 0.0 && ctx.model)
    total += cfg.lambda.spa * e_spa(sol, ctx, cfg.alpha);
  if (cfg.lambda.exc != 0.0) total += cfg.lambda.exc * e_exc(sol);
  return total;
}

FrameSolution solution_from_seeds(
    int regions, const std::vector<std::vector<Eigen::Vector4d>>& seeds) {
  FrameSolution sol(regions, static_cast<int>(seeds.size()));
  for (std::size_t m = 0; m < seeds.size(); ++m) {
    for (int l = 0; l < regions; ++l) {
      sol.box(static_cast<int>(m), l) = seeds[m][l];
    }
  }
  return sol;
}

}  // namespace

FrameSolution optimize_fixed_m(FrameSolution init, const FrameContext& ctx,
                               const EnergyConfig& ecfg,
                               const OptimizerConfig& ocfg,
                               double* final_energy) {
  const int L = init.regions;
  Eigen::VectorXd grad(init.dof());
  double energy = total_energy(init, ctx, ecfg, &grad);
  if (!std::isfinite(energy)) {
    throw std::runtime_error(
        "optimize_fixed_m: non-finite energy at the initial solution");
  }

  for (int iter = 0; iter < ocfg.max_iters; ++iter) {
    const double sweep_start = energy;
    for (int m = 0; m < init.persons; ++m) {
      total_energy(init, ctx, ecfg, &grad);
      const Eigen::VectorXd block = grad.segment(m * L * 4, L * 4);
      const double g2 = block.squaredNorm();
      if (g2 == 0.0) continue;

      const Eigen::VectorXd saved = [&] {
        Eigen::VectorXd s(L * 4);
        for (int l = 0; l < L; ++l) s.segment<4>(l * 4) = init.box(m, l);
        return s;
      }();

      double step = ocfg.step / std::max(1.0, std::sqrt(g2));
      bool accepted = false;
      for (int bt = 0; bt < ocfg.max_backtracks; ++bt) {
        for (int l = 0; l < L; ++l) {
          init.box(m, l) =
              saved.segment<4>(l * 4) - step * block.segment<4>(l * 4);
        }
        const double trial = total_energy(init, ctx, ecfg);
        if (std::isfinite(trial) && trial <= energy - kArmijo * step * g2) {
          energy = trial;
          accepted = true;
          break;
        }
        step *= ocfg.backtrack;
      }
      if (!accepted) {
        for (int l = 0; l < L; ++l) init.box(m, l) = saved.segment<4>(l * 4);
      }
    }
    if (sweep_start - energy <= ocfg.rel_tol * std::max(1.0, std::abs(sweep_start))) {
      break;
    }
  }
  if (final_energy) *final_energy = energy;
  return init;
}

PreprocessResult preprocess(const TrackerState& state, const TrackerConfig& cfg,
                            const std::vector<Detection>& detections_px) {
  const int L = cfg.regions;
  const int M = state.solution.persons;
  const double W = cfg.energy.image_width;
  const double H = cfg.energy.image_height;
  const double radius_px =
      cfg.optimizer.detection_radius * std::hypot(W, H);
  const double margin = cfg.optimizer.boundary_margin;

  PreprocessResult out;
  out.predictions.resize(static_cast<std::size_t>(M) * L);
  for (int m = 0; m < M; ++m) {
    for (int l = 0; l < L; ++l) {
      out.predictions[m * L + l] =
          state.solution.box(m, l) + state.velocities[m * L + l];
    }
  }

  for (int m = 0; m < M; ++m) {
    bool near_boundary = false;
    for (int l = 0; l < L && !near_boundary; ++l) {
      const Eigen::Vector4d& b = out.predictions[m * L + l];
      const double cx = 0.5 * (b[0] + b[2]);
      const double cy = 0.5 * (b[1] + b[3]);
      near_boundary = cx < margin || cx > 1.0 - margin || cy < margin ||
                      cy > 1.0 - margin;
    }
    bool has_detection = false;
    for (int l = 0; l < L && !has_detection; ++l) {
      const Eigen::Vector4d& b = out.predictions[m * L + l];
      const double cx = 0.5 * (b[0] + b[2]) * W;
      const double cy = 0.5 * (b[1] + b[3]) * H;
      for (const Detection& d : detections_px) {
        if (std::hypot(d.box.center_x() - cx, d.box.center_y() - cy) <=
            radius_px) {
          has_detection = true;
          break;
        }
      }
    }
    if (!(near_boundary && !has_detection)) out.survivors.push_back(m);
  }
  return out;
}

Tracker::Tracker(TrackerConfig cfg, SpatialModel model)
    : cfg_(std::move(cfg)), model_(std::move(model)) {
  state_.bank.regions = cfg_.regions;
  state_.solution = FrameSolution(cfg_.regions, 0);
}

std::vector<Detection> Tracker::normalized(
    const std::vector<Detection>& detections_px) const {
  const double W = cfg_.energy.image_width;
  const double H = cfg_.energy.image_height;
  std::vector<Detection> out = detections_px;
  for (Detection& d : out) {
    d.box = {d.box.x1 / W, d.box.y1 / H, d.box.x2 / W, d.box.y2 / H};
  }
  return out;
}

std::vector<std::vector<Eigen::Vector4d>> Tracker::candidate_configurations(
    const std::vector<Detection>& detections_norm) const {
  std::vector<std::vector<Eigen::Vector4d>> out;
  for (const Detection& d : detections_norm) {
    const auto it = cfg_.region_of_detector.find(d.detector_id);
    if (it == cfg_.region_of_detector.end()) continue;
    for (int c = 0; c < model_.subcategory_count(); ++c) {
      const auto boxes = model_.predict_configuration(c, it->second, d.box);
      std::vector<Eigen::Vector4d> config;
      config.reserve(boxes.size());
      for (const BoundingBox& b : boxes) config.push_back(b.to_vector());
      out.push_back(std::move(config));
    }
  }
  return out;
}

std::vector<AppearanceFeature> Tracker::extract_all_features(
    const FrameSolution& sol, const AppearanceRaster& raster) const {
  const double W = cfg_.energy.image_width;
  const double H = cfg_.energy.image_height;
  std::vector<AppearanceFeature> out(sol.boxes.size());
  for (std::size_t i = 0; i < sol.boxes.size(); ++i) {
    const Eigen::Vector4d& b = sol.boxes[i];
    const BoundingBox px{b[0] * W, b[1] * H, b[2] * W, b[3] * H};
    if (px.width() > 0.0 && px.height() > 0.0) {
      out[i] = extract_feature(raster, px);
    } else {
      out[i] = Eigen::VectorXd::Zero(raster.bins);
    }
  }
  return out;
}

void Tracker::process(const std::vector<Detection>& detections_px,
                      const AppearanceRaster& raster) {
  if (state_.frame == 0) {
    initialize_first_frame(detections_px, raster);
  } else {
    update_frame(detections_px, raster);
  }
}

void Tracker::initialize_first_frame(
    const std::vector<Detection>& detections_px,
    const AppearanceRaster& raster) {
  const int L = cfg_.regions;
  const auto dets = normalized(detections_px);

  std::map<int, std::vector<Detection>> by_detector;
  for (const Detection& d : dets) by_detector[d.detector_id].push_back(d);

  FrameContext ctx;
  ctx.groups = group_all_detectors(by_detector, cfg_.grouping);
  ctx.model = &model_;
  ctx.region_of_detector = cfg_.region_of_detector;

  auto pool = candidate_configurations(dets);

  std::vector<std::vector<Eigen::Vector4d>> seeds;
  FrameSolution best(L, 0);
  double best_cost = std::numeric_limits<double>::infinity();

  while (!pool.empty()) {
    // pick the candidate whose augmented seed set scores lowest
    std::size_t pick = 0;
    double pick_cost = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      seeds.push_back(pool[i]);
      const double c =
          selection_objective(solution_from_seeds(L, seeds), ctx, cfg_.energy);
      seeds.pop_back();
      if (c < pick_cost) {
        pick_cost = c;
        pick = i;
      }
    }
    seeds.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));

    double energy = 0.0;
    FrameSolution sol = optimize_fixed_m(solution_from_seeds(L, seeds), ctx,
                                         cfg_.energy, cfg_.optimizer, &energy);
    if (energy < best_cost) {
      best_cost = energy;
      best = std::move(sol);
    } else {
      break;  // person count search stops on the first non-decrease
    }
  }

  state_.frame = 1;
  state_.solution = std::move(best);
  state_.velocities.assign(state_.solution.boxes.size(),
                           Eigen::Vector4d::Zero());
  state_.m_star = 0;
  state_.features = extract_all_features(state_.solution, raster);
  state_.identities.clear();
  for (int m = 0; m < state_.solution.persons; ++m) {
    std::vector<AppearanceFeature> feats(
        state_.features.begin() + m * L, state_.features.begin() + (m + 1) * L);
    std::set<int> active(state_.identities.begin(), state_.identities.end());
    const IdentityMatch match =
        match_identity(state_.bank, feats, cfg_.identity_delta, active);
    state_.identities.push_back(match.identity);
  }
}

void Tracker::update_frame(const std::vector<Detection>& detections_px,
                           const AppearanceRaster& raster) {
  const int L = cfg_.regions;
  const auto dets = normalized(detections_px);

  std::map<int, std::vector<Detection>> by_detector;
  for (const Detection& d : dets) by_detector[d.detector_id].push_back(d);

  const PreprocessResult pre = preprocess(state_, cfg_, detections_px);
  const int m_star = static_cast<int>(pre.survivors.size());

  // previous-frame quantities restricted to the survivors
  FrameSolution prev(L, m_star);
  std::vector<Eigen::Vector4d> velocities(static_cast<std::size_t>(m_star) * L);
  std::vector<AppearanceFeature> prev_features(
      static_cast<std::size_t>(m_star) * L);
  std::vector<int> carried_ids(m_star);
  std::vector<std::vector<Eigen::Vector4d>> seeds;
  for (int m = 0; m < m_star; ++m) {
    const int src = pre.survivors[m];
    carried_ids[m] = state_.identities[src];
    std::vector<Eigen::Vector4d> seed(L);
    for (int l = 0; l < L; ++l) {
      prev.box(m, l) = state_.solution.box(src, l);
      velocities[m * L + l] = state_.velocities[src * L + l];
      prev_features[m * L + l] = state_.features[src * L + l];
      seed[l] = pre.predictions[src * L + l];
    }
    seeds.push_back(std::move(seed));
  }

  FrameContext ctx;
  ctx.groups = group_all_detectors(by_detector, cfg_.grouping);
  ctx.model = &model_;
  ctx.region_of_detector = cfg_.region_of_detector;
  ctx.prev = &prev;
  ctx.velocities = &velocities;
  ctx.m_star = m_star;
  ctx.raster = &raster;
  ctx.prev_features = &prev_features;

  auto pool = candidate_configurations(dets);

  FrameSolution best(L, 0);
  double best_cost;
  if (m_star > 0) {
    best = optimize_fixed_m(solution_from_seeds(L, seeds), ctx, cfg_.energy,
                            cfg_.optimizer, &best_cost);
  } else {
    best_cost = ctx.groups.empty() ? cfg_.energy.lambda.reg * 0.0
                                   : std::numeric_limits<double>::infinity();
  }

  while (!pool.empty()) {
    std::size_t pick = 0;
    double pick_cost = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      seeds.push_back(pool[i]);
      const double c =
          selection_objective(solution_from_seeds(L, seeds), ctx, cfg_.energy);
      seeds.pop_back();
      if (c < pick_cost) {
        pick_cost = c;
        pick = i;
      }
    }
    seeds.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));

    double energy = 0.0;
    FrameSolution sol = optimize_fixed_m(solution_from_seeds(L, seeds), ctx,
                                         cfg_.energy, cfg_.optimizer, &energy);
    if (energy < best_cost) {
      best_cost = energy;
      best = std::move(sol);
    } else {
      seeds.pop_back();
      break;
    }
  }

  // velocities for carried-over persons; zero for newcomers
  std::vector<Eigen::Vector4d> new_velocities(best.boxes.size(),
                                              Eigen::Vector4d::Zero());
  for (int m = 0; m < std::min(m_star, best.persons); ++m) {
    for (int l = 0; l < L; ++l) {
      new_velocities[m * L + l] = best.box(m, l) - prev.box(m, l);
    }
  }

  const auto features = extract_all_features(best, raster);

  std::vector<int> identities(best.persons, 0);
  std::vector<bool> freshly_registered(best.persons, false);
  std::set<int> active;
  for (int m = 0; m < std::min(m_star, best.persons); ++m) {
    identities[m] = carried_ids[m];
    active.insert(carried_ids[m]);
  }
  for (int m = m_star; m < best.persons; ++m) {
    std::vector<AppearanceFeature> feats(features.begin() + m * L,
                                         features.begin() + (m + 1) * L);
    const IdentityMatch match =
        match_identity(state_.bank, feats, cfg_.identity_delta, active);
    identities[m] = match.identity;
    freshly_registered[m] = match.is_new;
    active.insert(match.identity);
  }
  for (int m = 0; m < best.persons; ++m) {
    if (freshly_registered[m]) continue;  // registered with these features
    std::vector<AppearanceFeature> feats(features.begin() + m * L,
                                         features.begin() + (m + 1) * L);
    update_bank(state_.bank, identities[m], feats);
  }

  state_.frame += 1;
  state_.solution = std::move(best);
  state_.velocities = std::move(new_velocities);
  state_.identities = std::move(identities);
  state_.features = features;
  state_.m_star = m_star;
}

}  // namespace trackfuse
