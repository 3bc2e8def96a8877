// trackfuse command line: simulate scenarios, train the spatial model,
// run the tracker and evaluate CLEAR MOT metrics.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "trackfuse/pipeline.hpp"

namespace fs = std::filesystem;
using namespace trackfuse;

namespace {

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg =
      path.empty() ? RunConfig{} : RunConfig::from_json(load_json(path));
  cfg.validate();
  return cfg;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir) {
  const ScenarioConfig scenario =
      ScenarioConfig::from_json(load_json(scenario_path));
  const SimulationResult sim = simulate(scenario);
  fs::create_directories(out_dir);
  save_detections(out_dir + "/detections.jsonl", sim.detections);
  save_ground_truth(out_dir + "/groundtruth.jsonl", sim.truth);
  save_rasters(out_dir + "/rasters.jsonl", sim.rasters);
  save_annotations(out_dir + "/train_annotations.jsonl", sim.training);
  std::cout << "wrote " << sim.detections.size() << " frames to " << out_dir
            << "\n";
  return 0;
}

int cmd_train_spatial(const std::string& annotations_path,
                      const std::string& config_path,
                      const std::string& out_path) {
  const RunConfig cfg = load_run_config(config_path);
  const std::vector<PoseSample> samples = load_annotations(annotations_path);
  const SpatialModel model = SpatialModel::fit(samples, cfg.spatial);
  save_json(out_path, model.to_json());
  std::cout << "trained spatial model on " << samples.size() << " samples ("
            << model.subcategory_count() << " subcategories)\n";
  return 0;
}

int cmd_track(const std::string& config_path, const std::string& det_path,
              const std::string& raster_path, const std::string& model_path,
              const std::string& out_path, const std::string& truth_path,
              const std::string& report_path, const std::string& overlay_path) {
  const RunConfig cfg = load_run_config(config_path);
  const SpatialModel model = SpatialModel::from_json(load_json(model_path));
  const auto detections = load_detections(det_path);
  std::vector<AppearanceRaster> rasters;
  if (!raster_path.empty()) rasters = load_rasters(raster_path);

  GroundTruth truth;
  const bool with_truth = !truth_path.empty();
  if (with_truth) truth = load_ground_truth(truth_path);

  const PipelineResult result = run_tracking(cfg, model, detections, rasters,
                                             with_truth ? &truth : nullptr);
  save_tracks(out_path, result.tracks);
  if (!overlay_path.empty()) save_tracks(overlay_path, result.tracks);
  if (result.report) {
    std::cout << result.report->to_text();
    if (!report_path.empty()) save_json(report_path, result.report->to_json());
  }
  return 0;
}

int cmd_evaluate(const std::string& tracks_path, const std::string& truth_path,
                 const std::string& config_path, const std::string& out_path,
                 bool text) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = load_run_config(config_path);
  const auto tracks = load_tracks(tracks_path);
  const GroundTruth truth = load_ground_truth(truth_path);
  const MotReport report = evaluate(tracks, truth, cfg.eval);
  if (text) {
    std::cout << report.to_text();
  } else {
    std::cout << report.to_json().dump(2) << "\n";
  }
  if (!out_path.empty()) save_json(out_path, report.to_json());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& det_path,
              const std::string& raster_path, const std::string& model_path,
              const std::string& truth_path, const std::string& grid_path,
              const std::string& out_path, int jobs) {
  const RunConfig cfg = load_run_config(config_path);
  const SpatialModel model = SpatialModel::from_json(load_json(model_path));
  const auto detections = load_detections(det_path);
  std::vector<AppearanceRaster> rasters;
  if (!raster_path.empty()) rasters = load_rasters(raster_path);
  const GroundTruth truth = load_ground_truth(truth_path);
  const nlohmann::json grid = load_json(grid_path);

  const std::string csv =
      run_sweep(cfg, model, detections, rasters, truth, grid, jobs);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << csv;
  std::cout << "wrote sweep results to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-detector fusion tracker"};
  app.require_subcommand(1);

  std::string scenario, out_dir, annotations, config, model_path, detections,
      rasters, tracks_out, truth, report, overlay, tracks_in, grid, csv_out;
  bool text = false;
  int jobs = 1;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic sequence");
  sim->add_option("--scenario", scenario, "scenario JSON")->required();
  sim->add_option("--out", out_dir, "output directory")->required();

  auto* train = app.add_subcommand("train-spatial",
                                   "fit the deformable spatial model");
  train->add_option("--annotations", annotations, "pose sample JSONL")
      ->required();
  train->add_option("--config", config, "run config JSON");
  train->add_option("--out", model_path, "model output JSON")->required();

  auto* track = app.add_subcommand("track", "run the tracker on detections");
  track->add_option("--config", config, "run config JSON");
  track->add_option("--detections", detections, "detections JSONL")->required();
  track->add_option("--rasters", rasters, "appearance rasters JSONL");
  track->add_option("--model", model_path, "spatial model JSON")->required();
  track->add_option("--out", tracks_out, "tracks output JSONL")->required();
  track->add_option("--truth", truth, "ground truth JSONL (enables report)");
  track->add_option("--report", report, "report output JSON");
  track->add_option("--overlay", overlay,
                    "write per-frame box geometry for external plotting");

  auto* eval = app.add_subcommand("evaluate", "CLEAR MOT evaluation");
  eval->add_option("--tracks", tracks_in, "tracks JSONL")->required();
  eval->add_option("--truth", truth, "ground truth JSONL")->required();
  eval->add_option("--config", config, "run config JSON");
  eval->add_option("--out", report, "report output JSON");
  eval->add_flag("--text", text, "print the aligned text table");

  auto* sweep = app.add_subcommand("sweep", "grid sweep over parameters");
  sweep->add_option("--config", config, "run config JSON");
  sweep->add_option("--detections", detections, "detections JSONL")->required();
  sweep->add_option("--rasters", rasters, "appearance rasters JSONL");
  sweep->add_option("--model", model_path, "spatial model JSON")->required();
  sweep->add_option("--truth", truth, "ground truth JSONL")->required();
  sweep->add_option("--grid", grid, "grid JSON: {param: [values...]}")
      ->required();
  sweep->add_option("--out", csv_out, "CSV output path")->required();
  sweep->add_option("--jobs", jobs, "parallel workers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(scenario, out_dir);
    if (train->parsed()) return cmd_train_spatial(annotations, config, model_path);
    if (track->parsed())
      return cmd_track(config, detections, rasters, model_path, tracks_out,
                       truth, report, overlay);
    if (eval->parsed())
      return cmd_evaluate(tracks_in, truth, config, report, text);
    if (sweep->parsed())
      return cmd_sweep(config, detections, rasters, model_path, truth, grid,
                       csv_out, jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
