// Microbenchmarks for the hot paths: softmin, appearance feature
// extraction, detection grouping, the full energy with gradient, and one
// fixed-M optimization.

#include <benchmark/benchmark.h>

#include <random>

#include "trackfuse/energy.hpp"
#include "trackfuse/grouping.hpp"
#include "trackfuse/optimizer.hpp"
#include "trackfuse/spatial_model.hpp"

using namespace trackfuse;

namespace {

BoundingBox random_box(std::mt19937& rng, double lo = 0.05, double hi = 0.95) {
  std::uniform_real_distribution<double> u(lo, hi);
  double x1 = u(rng), x2 = u(rng), y1 = u(rng), y2 = u(rng);
  if (x1 > x2) std::swap(x1, x2);
  if (y1 > y2) std::swap(y1, y2);
  return {x1, y1, std::max(x2, x1 + 0.05), std::max(y2, y1 + 0.05)};
}

Detection random_detection(std::mt19937& rng, int detector_id) {
  Detection d;
  d.box = random_box(rng);
  d.score = 0.8;
  d.detector_id = detector_id;
  d.depth = {std::uniform_real_distribution<double>(1.0, 8.0)(rng), 0.5};
  return d;
}

AppearanceRaster random_raster(std::mt19937& rng, int w = 160, int h = 120,
                               int bins = 16) {
  AppearanceRaster r;
  r.width = w;
  r.height = h;
  r.bins = bins;
  r.bin_map.resize(std::size_t(w) * h);
  std::uniform_int_distribution<int> bin(0, bins - 1);
  for (auto& b : r.bin_map) b = std::uint16_t(bin(rng));
  return r;
}

FrameContext random_context(std::mt19937& rng, const SpatialModel& model,
                            int groups) {
  FrameContext ctx;
  ctx.model = &model;
  ctx.region_of_detector = {{0, 0}, {1, 1}};
  for (int g = 0; g < groups; ++g) {
    DetectionGroup grp;
    grp.members.push_back(random_detection(rng, 0));
    grp.members.push_back(random_detection(rng, 1));
    ctx.groups.push_back(grp);
  }
  return ctx;
}

void BM_Softmin(benchmark::State& state) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> z(std::size_t(state.range(0)));
  for (double& v : z) v = u(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(softmin(z, -10.0));
  }
}
BENCHMARK(BM_Softmin)->Arg(4)->Arg(16)->Arg(64);

void BM_ExtractFeature(benchmark::State& state) {
  std::mt19937 rng(2);
  const AppearanceRaster raster = random_raster(rng);
  const BoundingBox box{40, 30, 90, 100};
  const bool with_jacobian = state.range(0) != 0;
  Eigen::MatrixXd d_psi;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        extract_feature(raster, box, with_jacobian ? &d_psi : nullptr));
  }
}
BENCHMARK(BM_ExtractFeature)->Arg(0)->Arg(1);

void BM_Grouping(benchmark::State& state) {
  std::mt19937 rng(3);
  const int per_detector = int(state.range(0));
  std::map<int, std::vector<Detection>> frame;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < per_detector; ++i) {
      frame[k].push_back(random_detection(rng, k));
    }
  }
  const GroupingConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(group_all_detectors(frame, cfg));
  }
}
BENCHMARK(BM_Grouping)->Arg(4)->Arg(16);

void BM_TotalEnergyGrad(benchmark::State& state) {
  std::mt19937 rng(4);
  const SpatialModel model = SpatialModel::identity(2, 4);
  const AppearanceRaster raster = random_raster(rng);
  const int persons = int(state.range(0));
  FrameContext ctx = random_context(rng, model, persons);
  FrameSolution sol(2, persons);
  FrameSolution prev(2, persons);
  std::vector<Eigen::Vector4d> vel(std::size_t(2) * persons,
                                   Eigen::Vector4d::Zero());
  std::vector<AppearanceFeature> feats;
  for (auto& b : sol.boxes) b = random_box(rng).to_vector();
  for (auto& b : prev.boxes) b = random_box(rng).to_vector();
  for (const auto& b : prev.boxes) {
    feats.push_back(extract_feature(
        raster, {b[0] * raster.width, b[1] * raster.height,
                 b[2] * raster.width, b[3] * raster.height}));
  }
  ctx.prev = &prev;
  ctx.velocities = &vel;
  ctx.m_star = persons;
  ctx.raster = &raster;
  ctx.prev_features = &feats;

  EnergyConfig ecfg;
  ecfg.image_width = raster.width;
  ecfg.image_height = raster.height;
  Eigen::VectorXd grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(total_energy(sol, ctx, ecfg, &grad));
  }
}
BENCHMARK(BM_TotalEnergyGrad)->Arg(1)->Arg(4)->Arg(8);

void BM_OptimizeFixedM(benchmark::State& state) {
  std::mt19937 rng(5);
  const SpatialModel model = SpatialModel::identity(2, 4);
  const int persons = int(state.range(0));
  FrameContext ctx = random_context(rng, model, persons);
  EnergyConfig ecfg;
  ecfg.alpha = -50.0;
  ecfg.lambda = {1.0, 1.0, 1e-3, 0.05, 0.0, 0.0};
  OptimizerConfig ocfg;
  ocfg.max_iters = 50;
  FrameSolution init(2, persons);
  for (auto& b : init.boxes) b = random_box(rng).to_vector();
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_fixed_m(init, ctx, ecfg, ocfg));
  }
}
BENCHMARK(BM_OptimizeFixedM)->Arg(1)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
