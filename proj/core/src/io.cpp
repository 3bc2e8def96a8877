#include "trackfuse/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace trackfuse {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

[[noreturn]] void line_error(const std::string& path, int line,
                             const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

BoundingBox parse_box(const nlohmann::json& j, const std::string& path,
                      int line) {
  if (!j.is_array() || j.size() != 4) {
    line_error(path, line, "box must be [x1,y1,x2,y2]");
  }
  BoundingBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                j[3].get<double>()};
  if (!b.valid()) {
    line_error(path, line,
               "box violates x1 <= x2 and y1 <= y2 (corners inverted?)");
  }
  return b;
}

nlohmann::json box_json(const BoundingBox& b) {
  return {b.x1, b.y1, b.x2, b.y2};
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in = open_input(path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      line_error(path, lineno, std::string("malformed JSON: ") + e.what());
    }
    fn(j, lineno);
  }
}

}  // namespace

std::vector<std::vector<Detection>> load_detections(const std::string& path) {
  std::vector<std::vector<Detection>> per_frame;
  for_each_line(path, [&](const nlohmann::json& j, int lineno) {
    const int frame = j.at("frame").get<int>();
    if (frame < 1) line_error(path, lineno, "frame must be >= 1");
    Detection d;
    d.detector_id = j.at("detector").get<int>();
    d.box = parse_box(j.at("box"), path, lineno);
    d.score = j.at("score").get<double>();
    if (!(d.score > 0.0)) line_error(path, lineno, "score must be > 0");
    d.depth.mean = j.value("depth_mean", 0.0);
    d.depth.std_dev = j.value("depth_std", 0.0);
    if (d.depth.std_dev < 0.0) line_error(path, lineno, "depth_std must be >= 0");
    if (per_frame.size() < std::size_t(frame)) per_frame.resize(frame);
    per_frame[frame - 1].push_back(d);
  });
  return per_frame;
}

void save_detections(const std::string& path,
                     const std::vector<std::vector<Detection>>& per_frame) {
  std::ofstream out = open_output(path);
  for (std::size_t f = 0; f < per_frame.size(); ++f) {
    for (const Detection& d : per_frame[f]) {
      nlohmann::json j{{"frame", f + 1},
                       {"detector", d.detector_id},
                       {"box", box_json(d.box)},
                       {"score", d.score},
                       {"depth_mean", d.depth.mean},
                       {"depth_std", d.depth.std_dev}};
      out << j.dump() << "\n";
    }
  }
}

std::vector<TrackBox> load_tracks(const std::string& path) {
  std::vector<TrackBox> tracks;
  for_each_line(path, [&](const nlohmann::json& j, int lineno) {
    TrackBox t;
    t.frame = j.at("frame").get<int>();
    t.person_id = j.at("person_id").get<int>();
    t.region = j.at("region").get<int>() - 1;
    t.box = parse_box(j.at("box"), path, lineno);
    tracks.push_back(t);
  });
  return tracks;
}

void save_tracks(const std::string& path, const std::vector<TrackBox>& tracks) {
  std::ofstream out = open_output(path);
  for (const TrackBox& t : tracks) {
    nlohmann::json j{{"frame", t.frame},
                     {"person_id", t.person_id},
                     {"region", t.region + 1},
                     {"box", box_json(t.box)}};
    out << j.dump() << "\n";
  }
}

GroundTruth load_ground_truth(const std::string& path) {
  GroundTruth truth;
  // frame -> person id -> region -> box
  std::map<int, std::map<int, std::map<int, BoundingBox>>> data;
  int max_region = 1;
  for_each_line(path, [&](const nlohmann::json& j, int lineno) {
    const int frame = j.at("frame").get<int>();
    const int person = j.at("person").get<int>();
    const int region = j.at("region").get<int>() - 1;
    if (frame < 1 || region < 0) line_error(path, lineno, "bad frame/region");
    max_region = std::max(max_region, region + 1);
    data[frame][person][region] = parse_box(j.at("box"), path, lineno);
  });
  truth.regions = max_region;
  int n_frames = data.empty() ? 0 : data.rbegin()->first;
  truth.frames.resize(n_frames);
  for (const auto& [frame, persons] : data) {
    for (const auto& [person, regions] : persons) {
      TruthPerson tp;
      tp.identity = person;
      tp.present = true;
      tp.boxes.resize(max_region);
      for (const auto& [region, box] : regions) tp.boxes[region] = box;
      truth.frames[frame - 1].push_back(std::move(tp));
    }
  }
  return truth;
}

void save_ground_truth(const std::string& path, const GroundTruth& truth) {
  std::ofstream out = open_output(path);
  for (std::size_t f = 0; f < truth.frames.size(); ++f) {
    for (const TruthPerson& tp : truth.frames[f]) {
      if (!tp.present) continue;
      for (std::size_t l = 0; l < tp.boxes.size(); ++l) {
        nlohmann::json j{{"frame", f + 1},
                         {"person", tp.identity},
                         {"region", l + 1},
                         {"box", box_json(tp.boxes[l])}};
        out << j.dump() << "\n";
      }
    }
  }
}

std::vector<PoseSample> load_annotations(const std::string& path) {
  std::vector<PoseSample> samples;
  for_each_line(path, [&](const nlohmann::json& j, int lineno) {
    const auto& boxes = j.at("boxes");
    int max_region = 0;
    for (const auto& [key, val] : boxes.items()) {
      (void)val;
      max_region = std::max(max_region, std::stoi(key));
    }
    if (max_region < 1) line_error(path, lineno, "no regions in sample");
    PoseSample s;
    s.boxes.resize(max_region);
    for (const auto& [key, val] : boxes.items()) {
      s.boxes[std::stoi(key) - 1] = parse_box(val, path, lineno);
    }
    samples.push_back(std::move(s));
  });
  return samples;
}

void save_annotations(const std::string& path,
                      const std::vector<PoseSample>& samples) {
  std::ofstream out = open_output(path);
  for (const PoseSample& s : samples) {
    nlohmann::json boxes = nlohmann::json::object();
    for (std::size_t l = 0; l < s.boxes.size(); ++l) {
      boxes[std::to_string(l + 1)] = box_json(s.boxes[l]);
    }
    out << nlohmann::json{{"boxes", boxes}}.dump() << "\n";
  }
}

std::vector<AppearanceRaster> load_rasters(const std::string& path) {
  std::vector<AppearanceRaster> rasters;
  for_each_line(path, [&](const nlohmann::json& j, int lineno) {
    const int frame = j.at("frame").get<int>();
    AppearanceRaster r;
    r.width = j.at("width").get<int>();
    r.height = j.at("height").get<int>();
    r.bins = j.at("bins").get<int>();
    r.bin_map.reserve(std::size_t(r.width) * r.height);
    for (const auto& run : j.at("rle")) {
      const int bin = run[0].get<int>() - 1;
      const int count = run[1].get<int>();
      if (bin < 0 || bin >= r.bins) line_error(path, lineno, "bin out of range");
      r.bin_map.insert(r.bin_map.end(), count, std::uint16_t(bin));
    }
    if (r.bin_map.size() != std::size_t(r.width) * r.height) {
      line_error(path, lineno, "rle does not cover width*height pixels");
    }
    if (rasters.size() < std::size_t(frame)) rasters.resize(frame);
    rasters[frame - 1] = std::move(r);
  });
  return rasters;
}

void save_rasters(const std::string& path,
                  const std::vector<AppearanceRaster>& rasters) {
  std::ofstream out = open_output(path);
  for (std::size_t f = 0; f < rasters.size(); ++f) {
    const AppearanceRaster& r = rasters[f];
    nlohmann::json rle = nlohmann::json::array();
    std::size_t i = 0;
    while (i < r.bin_map.size()) {
      std::size_t j = i;
      while (j < r.bin_map.size() && r.bin_map[j] == r.bin_map[i]) ++j;
      rle.push_back({r.bin_map[i] + 1, j - i});
      i = j;
    }
    nlohmann::json obj{{"frame", f + 1},
                       {"width", r.width},
                       {"height", r.height},
                       {"bins", r.bins},
                       {"rle", rle}};
    out << obj.dump() << "\n";
  }
}

void save_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << "\n";
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in = open_input(path);
  nlohmann::json j;
  in >> j;
  return j;
}

void RunConfig::validate() const {
  if (image_width <= 0 || image_height <= 0) {
    throw std::invalid_argument("config.image_size: must be positive");
  }
  if (regions < 1) throw std::invalid_argument("config.regions: must be >= 1");
  if (region_of_detector.empty()) {
    throw std::invalid_argument("config.detectors: at least one detector");
  }
  for (const auto& [det, region] : region_of_detector) {
    if (region < 0 || region >= regions) {
      throw std::invalid_argument("config.detectors: detector " +
                                  std::to_string(det) +
                                  " maps to a region outside [1,L]");
    }
  }
  if (grouping.a < 0.0 || grouping.a > 1.0) {
    throw std::invalid_argument("config.grouping.a: must be in [0,1]");
  }
  if (grouping.tau < 0.0 || grouping.tau > 1.0) {
    throw std::invalid_argument("config.grouping.tau: must be in [0,1]");
  }
  if (!(energy.alpha < 0.0)) {
    throw std::invalid_argument("config.energy.alpha: must be negative");
  }
  const EnergyWeights& lam = energy.lambda;
  for (double w : {lam.det, lam.spa, lam.exc, lam.reg, lam.tra, lam.app}) {
    if (w < 0.0) {
      throw std::invalid_argument("config.energy.lambda: must be >= 0");
    }
  }
  if (!(optimizer.step > 0.0)) {
    throw std::invalid_argument("config.optimizer.step: must be > 0");
  }
  if (!(optimizer.backtrack > 0.0 && optimizer.backtrack < 1.0)) {
    throw std::invalid_argument("config.optimizer.backtrack: must be in (0,1)");
  }
  if (!(optimizer.rel_tol > 0.0)) {
    throw std::invalid_argument("config.optimizer.rel_tol: must be > 0");
  }
  if (spatial.subcategories < 1) {
    throw std::invalid_argument("config.spatial.C: must be >= 1");
  }
  if (identity_delta < 0.0 || identity_delta > 1.0) {
    throw std::invalid_argument("config.delta: must be in [0,1]");
  }
  if (appearance_bins < 1) {
    throw std::invalid_argument("config.appearance_bins: must be >= 1");
  }
  if (!(eval.iou_threshold > 0.0 && eval.iou_threshold < 1.0)) {
    throw std::invalid_argument("config.eval.iou_threshold: must be in (0,1)");
  }
}

TrackerConfig RunConfig::tracker_config() const {
  TrackerConfig cfg;
  cfg.regions = regions;
  cfg.region_of_detector = region_of_detector;
  cfg.grouping = grouping;
  cfg.energy = energy;
  cfg.energy.image_width = image_width;
  cfg.energy.image_height = image_height;
  cfg.optimizer = optimizer;
  cfg.identity_delta = identity_delta;
  cfg.appearance_bins = appearance_bins;
  return cfg;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json detectors = nlohmann::json::array();
  for (const auto& [det, region] : region_of_detector) {
    detectors.push_back({{"detector_id", det}, {"region", region + 1}});
  }
  return {
      {"seed", seed},
      {"image_size", {image_width, image_height}},
      {"regions", regions},
      {"detectors", detectors},
      {"grouping",
       {{"a", grouping.a},
        {"tau", grouping.tau},
        {"literal_depth_kernel", grouping.literal_depth_kernel}}},
      {"energy",
       {{"alpha", energy.alpha},
        {"lambda_det", energy.lambda.det},
        {"lambda_spa", energy.lambda.spa},
        {"lambda_exc", energy.lambda.exc},
        {"lambda_reg", energy.lambda.reg},
        {"lambda_tra", energy.lambda.tra},
        {"lambda_app", energy.lambda.app}}},
      {"optimizer",
       {{"step", optimizer.step},
        {"backtrack", optimizer.backtrack},
        {"max_backtracks", optimizer.max_backtracks},
        {"max_iters", optimizer.max_iters},
        {"rel_tol", optimizer.rel_tol},
        {"boundary_margin", optimizer.boundary_margin},
        {"detection_radius", optimizer.detection_radius}}},
      {"spatial",
       {{"C", spatial.subcategories},
        {"ridge", spatial.ridge},
        {"anchor_region", spatial.anchor_region + 1},
        {"seed", spatial.seed},
        {"kmeans_max_iters", spatial.kmeans_max_iters}}},
      {"appearance", {{"bins", appearance_bins}, {"delta", identity_delta}}},
      {"eval",
       {{"iou_threshold", eval.iou_threshold}, {"region", eval.region + 1}}}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.seed = j.value("seed", 1u);
  if (j.contains("image_size")) {
    cfg.image_width = j["image_size"][0].get<int>();
    cfg.image_height = j["image_size"][1].get<int>();
  }
  cfg.regions = j.value("regions", 2);
  if (j.contains("detectors")) {
    for (const auto& jd : j["detectors"]) {
      cfg.region_of_detector[jd.at("detector_id").get<int>()] =
          jd.at("region").get<int>() - 1;
    }
  }
  if (j.contains("grouping")) {
    const auto& g = j["grouping"];
    cfg.grouping.a = g.value("a", 0.5);
    cfg.grouping.tau = g.value("tau", 0.5);
    cfg.grouping.literal_depth_kernel = g.value("literal_depth_kernel", false);
  }
  if (j.contains("energy")) {
    const auto& e = j["energy"];
    cfg.energy.alpha = e.value("alpha", -10.0);
    cfg.energy.lambda.det = e.value("lambda_det", 1.0);
    cfg.energy.lambda.spa = e.value("lambda_spa", 1.0);
    cfg.energy.lambda.exc = e.value("lambda_exc", 1.0);
    cfg.energy.lambda.reg = e.value("lambda_reg", 1.0);
    cfg.energy.lambda.tra = e.value("lambda_tra", 1.0);
    cfg.energy.lambda.app = e.value("lambda_app", 1.0);
  }
  cfg.energy.image_width = cfg.image_width;
  cfg.energy.image_height = cfg.image_height;
  if (j.contains("optimizer")) {
    const auto& o = j["optimizer"];
    cfg.optimizer.step = o.value("step", 0.05);
    cfg.optimizer.backtrack = o.value("backtrack", 0.5);
    cfg.optimizer.max_backtracks = o.value("max_backtracks", 20);
    cfg.optimizer.max_iters = o.value("max_iters", 500);
    cfg.optimizer.rel_tol = o.value("rel_tol", 1e-6);
    cfg.optimizer.boundary_margin = o.value("boundary_margin", 0.05);
    cfg.optimizer.detection_radius = o.value("detection_radius", 0.1);
  }
  if (j.contains("spatial")) {
    const auto& s = j["spatial"];
    cfg.spatial.subcategories = s.value("C", 4);
    cfg.spatial.ridge = s.value("ridge", 1e-4);
    cfg.spatial.anchor_region = s.value("anchor_region", 1) - 1;
    cfg.spatial.seed = s.value("seed", 7u);
    cfg.spatial.kmeans_max_iters = s.value("kmeans_max_iters", 100);
  }
  cfg.spatial.image_width = cfg.image_width;
  cfg.spatial.image_height = cfg.image_height;
  if (j.contains("appearance")) {
    cfg.appearance_bins = j["appearance"].value("bins", 16);
    cfg.identity_delta = j["appearance"].value("delta", 0.5);
  }
  if (j.contains("eval")) {
    cfg.eval.iou_threshold = j["eval"].value("iou_threshold", 0.5);
    cfg.eval.region = j["eval"].value("region", 1) - 1;
  }
  return cfg;
}

}  // namespace trackfuse
