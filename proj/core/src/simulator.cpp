#include "trackfuse/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace trackfuse {

namespace {

BoundingBox clip_to_image(const BoundingBox& b, int width, int height) {
  return {std::clamp(b.x1, 0.0, double(width)),
          std::clamp(b.y1, 0.0, double(height)),
          std::clamp(b.x2, 0.0, double(width)),
          std::clamp(b.y2, 0.0, double(height))};
}

double beta_sample(double a, double b, std::mt19937& rng) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

BoundingBox jitter(const BoundingBox& b, double std_px, std::mt19937& rng) {
  if (std_px <= 0.0) return b;
  std::normal_distribution<double> noise(0.0, std_px);
  BoundingBox out{b.x1 + noise(rng), b.y1 + noise(rng), b.x2 + noise(rng),
                  b.y2 + noise(rng)};
  if (out.x1 > out.x2) std::swap(out.x1, out.x2);
  if (out.y1 > out.y2) std::swap(out.y1, out.y2);
  return out;
}

}  // namespace

Pose pose_from_string(const std::string& s) {
  if (s == "standing") return Pose::Standing;
  if (s == "sitting") return Pose::Sitting;
  if (s == "lying") return Pose::Lying;
  throw std::invalid_argument("unknown pose: " + s);
}

std::string pose_to_string(Pose p) {
  switch (p) {
    case Pose::Standing: return "standing";
    case Pose::Sitting: return "sitting";
    case Pose::Lying: return "lying";
  }
  return "standing";
}

BoundingBox head_from_body(Pose pose, const BoundingBox& body) {
  const double cx = body.center_x();
  const double cy = body.center_y();
  const double w = body.width();
  const double h = body.height();
  switch (pose) {
    case Pose::Standing:
      return {cx - w / 4.0, body.y1, cx + w / 4.0, body.y1 + h / 7.0};
    case Pose::Sitting:
      return {cx - w / 4.0, body.y1, cx + w / 4.0, body.y1 + h / 5.0};
    case Pose::Lying:
      return {body.x1, cy - h / 4.0, body.x1 + w / 7.0, cy + h / 4.0};
  }
  return body;
}

nlohmann::json ScenarioConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["image_size"] = {width, height};
  j["frames"] = frames;
  j["bins"] = bins;
  j["background_bin"] = background_bin + 1;
  j["occlusion_overlap"] = occlusion_overlap;
  j["occlusion_miss_rate"] = occlusion_miss_rate;
  j["training_samples_per_pose"] = training_samples_per_pose;
  j["persons"] = nlohmann::json::array();
  for (const PersonSpec& p : persons) {
    nlohmann::json jp;
    jp["id"] = p.id;
    jp["body_size"] = {p.body_width, p.body_height};
    jp["base_depth"] = p.base_depth;
    std::vector<int> sig;
    for (int b : p.signature_bins) sig.push_back(b + 1);
    jp["signature_bins"] = sig;
    jp["segments"] = nlohmann::json::array();
    for (const MotionSegment& s : p.segments) {
      jp["segments"].push_back({{"from", s.from},
                                {"to", s.to},
                                {"start", {s.cx, s.cy}},
                                {"velocity", {s.vx, s.vy}}});
    }
    jp["poses"] = nlohmann::json::array();
    for (const PoseInterval& pi : p.poses) {
      jp["poses"].push_back({{"from", pi.from},
                             {"to", pi.to},
                             {"pose", pose_to_string(pi.pose)}});
    }
    j["persons"].push_back(jp);
  }
  j["detectors"] = nlohmann::json::array();
  for (const DetectorSpec& d : detectors) {
    j["detectors"].push_back({{"detector_id", d.detector_id},
                              {"region", d.region + 1},
                              {"miss_rate", d.miss_rate},
                              {"fp_rate", d.fp_rate},
                              {"position_noise_std", d.position_noise_std},
                              {"depth_noise_std", d.depth_noise_std},
                              {"depth_std_value", d.depth_std_value}});
  }
  return j;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  cfg.seed = j.value("seed", 1u);
  if (j.contains("image_size")) {
    cfg.width = j["image_size"][0].get<int>();
    cfg.height = j["image_size"][1].get<int>();
  }
  cfg.frames = j.value("frames", 100);
  cfg.bins = j.value("bins", 16);
  cfg.background_bin = j.value("background_bin", 1) - 1;
  cfg.occlusion_overlap = j.value("occlusion_overlap", 0.5);
  cfg.occlusion_miss_rate = j.value("occlusion_miss_rate", 0.7);
  cfg.training_samples_per_pose = j.value("training_samples_per_pose", 60);
  for (const auto& jp : j.value("persons", nlohmann::json::array())) {
    PersonSpec p;
    p.id = jp.at("id").get<int>();
    p.body_width = jp.at("body_size")[0].get<double>();
    p.body_height = jp.at("body_size")[1].get<double>();
    p.base_depth = jp.value("base_depth", 3.0);
    for (int b : jp.value("signature_bins", std::vector<int>{}))
      p.signature_bins.push_back(b - 1);
    for (const auto& js : jp.value("segments", nlohmann::json::array())) {
      MotionSegment s;
      s.from = js.at("from").get<int>();
      s.to = js.at("to").get<int>();
      s.cx = js.at("start")[0].get<double>();
      s.cy = js.at("start")[1].get<double>();
      s.vx = js.value("velocity", std::vector<double>{0, 0})[0];
      s.vy = js.value("velocity", std::vector<double>{0, 0})[1];
      p.segments.push_back(s);
    }
    for (const auto& ji : jp.value("poses", nlohmann::json::array())) {
      p.poses.push_back({ji.at("from").get<int>(), ji.at("to").get<int>(),
                         pose_from_string(ji.at("pose").get<std::string>())});
    }
    cfg.persons.push_back(std::move(p));
  }
  for (const auto& jd : j.value("detectors", nlohmann::json::array())) {
    DetectorSpec d;
    d.detector_id = jd.at("detector_id").get<int>();
    d.region = jd.value("region", 1) - 1;
    d.miss_rate = jd.value("miss_rate", 0.0);
    d.fp_rate = jd.value("fp_rate", 0.0);
    d.position_noise_std = jd.value("position_noise_std", 0.0);
    d.depth_noise_std = jd.value("depth_noise_std", 0.05);
    d.depth_std_value = jd.value("depth_std_value", 0.5);
    cfg.detectors.push_back(d);
  }
  return cfg;
}

SimulationResult simulate(const ScenarioConfig& config) {
  SimulationResult out;
  out.truth.width = config.width;
  out.truth.height = config.height;
  out.truth.regions = 2;
  out.truth.frames.resize(config.frames);
  out.detections.resize(config.frames);
  out.rasters.resize(config.frames);

  std::mt19937 rng(config.seed);

  for (int f = 0; f < config.frames; ++f) {
    const int frame = f + 1;
    auto& slot = out.truth.frames[f];
    slot.resize(config.persons.size());

    // ground truth
    for (std::size_t pi = 0; pi < config.persons.size(); ++pi) {
      const PersonSpec& p = config.persons[pi];
      TruthPerson& tp = slot[pi];
      tp.identity = p.id;
      tp.present = false;
      const MotionSegment* seg = nullptr;
      for (const MotionSegment& s : p.segments) {
        if (frame >= s.from && frame <= s.to) {
          seg = &s;
          break;
        }
      }
      if (!seg) continue;
      const double cx = seg->cx + seg->vx * (frame - seg->from);
      const double cy = seg->cy + seg->vy * (frame - seg->from);
      Pose pose = Pose::Standing;
      for (const PoseInterval& piv : p.poses) {
        if (frame >= piv.from && frame <= piv.to) {
          pose = piv.pose;
          break;
        }
      }
      double bw = p.body_width, bh = p.body_height;
      if (pose == Pose::Lying) std::swap(bw, bh);
      const BoundingBox body{cx - bw / 2.0, cy - bh / 2.0, cx + bw / 2.0,
                             cy + bh / 2.0};
      const BoundingBox head = head_from_body(pose, body);
      const BoundingBox body_c = clip_to_image(body, config.width, config.height);
      if (body_c.area() <= 0.0) continue;
      tp.present = true;
      tp.boxes = {body_c, clip_to_image(head, config.width, config.height)};
    }

    // raster
    AppearanceRaster& raster = out.rasters[f];
    raster.width = config.width;
    raster.height = config.height;
    raster.bins = config.bins;
    raster.fill(config.background_bin);
    for (const TruthPerson& tp : slot) {
      if (!tp.present) continue;
      const PersonSpec* spec = nullptr;
      for (const PersonSpec& p : config.persons) {
        if (p.id == tp.identity) spec = &p;
      }
      const BoundingBox& body = tp.boxes[kBodyRegion];
      const int stripes = static_cast<int>(spec->signature_bins.size());
      if (stripes == 0) continue;
      const double stripe_h = body.height() / stripes;
      for (int s = 0; s < stripes; ++s) {
        const BoundingBox stripe{body.x1, body.y1 + s * stripe_h, body.x2,
                                 body.y1 + (s + 1) * stripe_h};
        raster.paint(stripe, spec->signature_bins[s]);
      }
    }

    // detections
    for (const DetectorSpec& det : config.detectors) {
      for (std::size_t pi = 0; pi < config.persons.size(); ++pi) {
        const TruthPerson& tp = slot[pi];
        if (!tp.present) continue;
        double miss = det.miss_rate;
        for (std::size_t qi = 0; qi < slot.size(); ++qi) {
          if (qi == pi || !slot[qi].present) continue;
          if (overlap_probability(tp.boxes[kBodyRegion],
                                  slot[qi].boxes[kBodyRegion]) >
              config.occlusion_overlap) {
            miss = std::max(miss, config.occlusion_miss_rate);
          }
        }
        if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < miss) {
          continue;
        }
        Detection d;
        d.detector_id = det.detector_id;
        d.box = jitter(tp.boxes[det.region], det.position_noise_std, rng);
        d.box = clip_to_image(d.box, config.width, config.height);
        d.score = std::max(0.01, beta_sample(5.0, 2.0, rng));
        const PersonSpec& spec = config.persons[pi];
        double depth = spec.base_depth;
        if (det.depth_noise_std > 0.0) {
          depth += std::normal_distribution<double>(0.0, det.depth_noise_std)(rng);
        }
        d.depth = {depth, det.depth_std_value};
        out.detections[f].push_back(d);
      }
      // false positives
      int n_fp = 0;
      if (det.fp_rate > 0.0) {
        n_fp = std::poisson_distribution<int>(det.fp_rate)(rng);
      }
      std::uniform_real_distribution<double> ux(0.0, config.width);
      std::uniform_real_distribution<double> uy(0.0, config.height);
      std::uniform_real_distribution<double> usize(0.05, 0.3);
      std::uniform_real_distribution<double> udepth(0.5, 10.0);
      for (int i = 0; i < n_fp; ++i) {
        const double cx = ux(rng), cy = uy(rng);
        const double w = usize(rng) * config.width;
        const double h = usize(rng) * config.height;
        Detection d;
        d.detector_id = det.detector_id;
        d.box = clip_to_image({cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2},
                              config.width, config.height);
        d.score = std::max(0.01, beta_sample(2.0, 5.0, rng));
        d.depth = {udepth(rng), det.depth_std_value};
        out.detections[f].push_back(d);
      }
    }
  }

  // clean pose samples for spatial-model training, normalized coordinates
  std::mt19937 train_rng(config.seed ^ 0x9e3779b9u);
  std::uniform_real_distribution<double> uw(0.10, 0.35);
  std::uniform_real_distribution<double> uh(0.30, 0.60);
  std::uniform_real_distribution<double> uc(0.0, 1.0);
  for (Pose pose : {Pose::Standing, Pose::Sitting, Pose::Lying}) {
    for (int i = 0; i < config.training_samples_per_pose; ++i) {
      double bw = uw(train_rng);
      double bh = uh(train_rng);
      if (pose == Pose::Lying) std::swap(bw, bh);
      const double cx = bw / 2 + uc(train_rng) * (1.0 - bw);
      const double cy = bh / 2 + uc(train_rng) * (1.0 - bh);
      const BoundingBox body{cx - bw / 2, cy - bh / 2, cx + bw / 2,
                             cy + bh / 2};
      out.training.push_back(PoseSample{{body, head_from_body(pose, body)}});
    }
  }
  return out;
}

}  // namespace trackfuse
