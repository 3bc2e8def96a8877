#include "trackfuse/pipeline.hpp"

#include <atomic>
#include <sstream>
#include <thread>

namespace trackfuse {

PipelineResult run_tracking(const RunConfig& cfg, const SpatialModel& model,
                            const std::vector<std::vector<Detection>>& detections,
                            const std::vector<AppearanceRaster>& rasters,
                            const GroundTruth* truth) {
  cfg.validate();
  const int n_frames = static_cast<int>(
      std::max(detections.size(), rasters.size()));
  Tracker tracker(cfg.tracker_config(), model);

  const double W = cfg.image_width;
  const double H = cfg.image_height;

  PipelineResult result;
  AppearanceRaster empty_raster;
  empty_raster.width = cfg.image_width;
  empty_raster.height = cfg.image_height;
  empty_raster.bins = cfg.appearance_bins;
  empty_raster.fill(0);

  for (int f = 0; f < n_frames; ++f) {
    const std::vector<Detection> dets =
        f < static_cast<int>(detections.size()) ? detections[f]
                                                : std::vector<Detection>{};
    const AppearanceRaster& raster =
        f < static_cast<int>(rasters.size()) && rasters[f].width > 0
            ? rasters[f]
            : empty_raster;
    tracker.process(dets, raster);

    const TrackerState& state = tracker.state();
    for (int m = 0; m < state.solution.persons; ++m) {
      for (int l = 0; l < state.solution.regions; ++l) {
        const Eigen::Vector4d& b = state.solution.box(m, l);
        TrackBox t;
        t.frame = f + 1;
        t.person_id = state.identities[m];
        t.region = l;
        t.box = {b[0] * W, b[1] * H, b[2] * W, b[3] * H};
        if (t.box.x1 > t.box.x2) std::swap(t.box.x1, t.box.x2);
        if (t.box.y1 > t.box.y2) std::swap(t.box.y1, t.box.y2);
        result.tracks.push_back(t);
      }
    }
  }

  if (truth) {
    result.report = evaluate(result.tracks, *truth, cfg.eval);
  }
  return result;
}

namespace {

struct SweepParam {
  std::string name;
  std::vector<double> values;
};

void apply_param(RunConfig& cfg, const std::string& name, double v) {
  if (name == "a") cfg.grouping.a = v;
  else if (name == "tau") cfg.grouping.tau = v;
  else if (name == "delta") cfg.identity_delta = v;
  else if (name == "alpha") cfg.energy.alpha = v;
  else if (name == "lambda_det") cfg.energy.lambda.det = v;
  else if (name == "lambda_spa") cfg.energy.lambda.spa = v;
  else if (name == "lambda_exc") cfg.energy.lambda.exc = v;
  else if (name == "lambda_reg") cfg.energy.lambda.reg = v;
  else if (name == "lambda_tra") cfg.energy.lambda.tra = v;
  else if (name == "lambda_app") cfg.energy.lambda.app = v;
  else throw std::invalid_argument("sweep: unknown parameter " + name);
}

}  // namespace

std::string run_sweep(const RunConfig& base, const SpatialModel& model,
                      const std::vector<std::vector<Detection>>& detections,
                      const std::vector<AppearanceRaster>& rasters,
                      const GroundTruth& truth, const nlohmann::json& grid,
                      int jobs) {
  std::vector<SweepParam> params;
  for (const auto& [name, values] : grid.items()) {
    params.push_back({name, values.get<std::vector<double>>()});
  }

  std::size_t total = 1;
  for (const SweepParam& p : params) total *= p.values.size();

  std::vector<RunConfig> configs;
  configs.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    RunConfig cfg = base;
    std::size_t rem = idx;
    for (const SweepParam& p : params) {
      apply_param(cfg, p.name, p.values[rem % p.values.size()]);
      rem /= p.values.size();
    }
    configs.push_back(cfg);
  }

  std::vector<std::string> rows(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= total) return;
      const RunConfig& cfg = configs[idx];
      const PipelineResult res =
          run_tracking(cfg, model, detections, rasters, &truth);
      const MotReport& r = *res.report;
      std::ostringstream row;
      row << idx;
      std::size_t rem = idx;
      for (const SweepParam& p : params) {
        row << "," << p.values[rem % p.values.size()];
        rem /= p.values.size();
      }
      row << "," << r.mota << "," << r.motp << "," << r.fp_rate << ","
          << r.fn_rate << "," << r.ids_rate << "," << r.recall << ","
          << r.precision;
      rows[idx] = row.str();
    }
  };

  const int n_workers = std::max(1, std::min<int>(jobs, int(total)));
  std::vector<std::thread> threads;
  for (int i = 0; i < n_workers - 1; ++i) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();

  std::ostringstream csv;
  csv << "index";
  for (const SweepParam& p : params) csv << "," << p.name;
  csv << ",MOTA,MOTP,FP,FN,IDs,Recall,Precision\n";
  for (const std::string& row : rows) csv << row << "\n";
  return csv.str();
}

}  // namespace trackfuse
