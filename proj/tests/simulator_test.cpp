#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "trackfuse/simulator.hpp"

using namespace trackfuse;

namespace {

ScenarioConfig two_person_scenario() {
  ScenarioConfig cfg;
  cfg.seed = 42;
  cfg.width = 160;
  cfg.height = 120;
  cfg.frames = 40;
  cfg.bins = 16;
  // the two trajectories cross mid-sequence; keep detections exact anyway
  cfg.occlusion_miss_rate = 0.0;

  PersonSpec a;
  a.id = 1;
  a.body_width = 24;
  a.body_height = 70;
  a.base_depth = 3.0;
  a.signature_bins = {2, 3};
  a.segments = {{1, 40, 40, 60, 1.5, 0.0}};
  a.poses = {{1, 40, Pose::Standing}};

  PersonSpec b;
  b.id = 2;
  b.body_width = 26;
  b.body_height = 72;
  b.base_depth = 6.0;
  b.signature_bins = {4, 5};
  b.segments = {{5, 35, 120, 58, -1.0, 0.2}};
  b.poses = {{5, 35, Pose::Sitting}};

  cfg.persons = {a, b};

  DetectorSpec body;
  body.detector_id = 0;
  body.region = kBodyRegion;
  DetectorSpec head;
  head.detector_id = 1;
  head.region = kHeadRegion;
  cfg.detectors = {body, head};
  return cfg;
}

}  // namespace

TEST_CASE("head_from_body follows the pose geometry") {
  const BoundingBox body{10, 20, 30, 90};  // w=20 h=70, center (20,55)
  const BoundingBox st = head_from_body(Pose::Standing, body);
  CHECK(st.x1 == doctest::Approx(15.0));
  CHECK(st.x2 == doctest::Approx(25.0));
  CHECK(st.y1 == doctest::Approx(20.0));
  CHECK(st.y2 == doctest::Approx(30.0));

  const BoundingBox si = head_from_body(Pose::Sitting, body);
  CHECK(si.y2 == doctest::Approx(34.0));

  const BoundingBox lying{10, 20, 80, 40};  // lateral: w=70 h=20, cy=30
  const BoundingBox ly = head_from_body(Pose::Lying, lying);
  CHECK(ly.x1 == doctest::Approx(10.0));
  CHECK(ly.x2 == doctest::Approx(20.0));
  CHECK(ly.y1 == doctest::Approx(25.0));
  CHECK(ly.y2 == doctest::Approx(35.0));
}

TEST_CASE("pose strings round trip") {
  for (Pose p : {Pose::Standing, Pose::Sitting, Pose::Lying}) {
    CHECK(pose_from_string(pose_to_string(p)) == p);
  }
  CHECK_THROWS_AS(pose_from_string("crouching"), std::invalid_argument);
}

TEST_CASE("noise-free detectors reproduce the ground truth exactly") {
  ScenarioConfig cfg = two_person_scenario();
  const SimulationResult sim = simulate(cfg);

  REQUIRE(sim.truth.frames.size() == 40);
  REQUIRE(sim.detections.size() == 40);
  for (int f = 0; f < 40; ++f) {
    std::size_t expected = 0;
    for (const TruthPerson& tp : sim.truth.frames[f]) {
      if (tp.present) expected += 2;  // one per detector
    }
    REQUIRE(sim.detections[f].size() == expected);
    // every detection coincides with the truth box of its region
    for (const Detection& d : sim.detections[f]) {
      const int region = d.detector_id == 0 ? kBodyRegion : kHeadRegion;
      bool found = false;
      for (const TruthPerson& tp : sim.truth.frames[f]) {
        if (!tp.present) continue;
        if ((tp.boxes[region].to_vector() - d.box.to_vector()).norm() < 1e-9) {
          found = true;
          break;
        }
      }
      CHECK(found);
    }
  }
  // person 2 only exists on frames 5..35
  CHECK_FALSE(sim.truth.frames[0][1].present);
  CHECK(sim.truth.frames[10][1].present);
  CHECK_FALSE(sim.truth.frames[37][1].present);
}

TEST_CASE("motion follows the segment's constant velocity") {
  const ScenarioConfig cfg = two_person_scenario();
  const SimulationResult sim = simulate(cfg);
  // frame 10 (index 9): center = 40 + 1.5 * 9 = 53.5
  const BoundingBox& b = sim.truth.frames[9][0].boxes[kBodyRegion];
  CHECK(b.center_x() == doctest::Approx(53.5));
  CHECK(b.center_y() == doctest::Approx(60.0));
  CHECK(b.width() == doctest::Approx(24.0));
}

TEST_CASE("rasters carry per-person signature stripes") {
  const ScenarioConfig cfg = two_person_scenario();
  const SimulationResult sim = simulate(cfg);
  const AppearanceRaster& r = sim.rasters[9];
  const BoundingBox& body = sim.truth.frames[9][0].boxes[kBodyRegion];
  // upper stripe bin 2, lower stripe bin 3
  const int cx = int(body.center_x());
  CHECK(r.at(cx, int(body.y1 + body.height() * 0.25)) == 2);
  CHECK(r.at(cx, int(body.y1 + body.height() * 0.75)) == 3);
  // far corner is background
  CHECK(r.at(2, 2) == cfg.background_bin);
}

TEST_CASE("simulation is deterministic under a fixed seed") {
  ScenarioConfig cfg = two_person_scenario();
  cfg.detectors[0].miss_rate = 0.3;
  cfg.detectors[0].position_noise_std = 1.5;
  cfg.detectors[1].fp_rate = 0.5;
  const SimulationResult a = simulate(cfg);
  const SimulationResult b = simulate(cfg);
  REQUIRE(a.detections.size() == b.detections.size());
  for (std::size_t f = 0; f < a.detections.size(); ++f) {
    REQUIRE(a.detections[f].size() == b.detections[f].size());
    for (std::size_t i = 0; i < a.detections[f].size(); ++i) {
      CHECK(a.detections[f][i].box.x1 == b.detections[f][i].box.x1);
      CHECK(a.detections[f][i].score == b.detections[f][i].score);
      CHECK(a.detections[f][i].depth.mean == b.detections[f][i].depth.mean);
    }
  }

  cfg.seed = 43;
  const SimulationResult c = simulate(cfg);
  bool differs = false;
  for (std::size_t f = 0; f < a.detections.size() && !differs; ++f) {
    differs = a.detections[f].size() != c.detections[f].size();
  }
  CHECK(differs);
}

TEST_CASE("empirical miss rate is within 3 sigma of the binomial mean") {
  ScenarioConfig cfg = two_person_scenario();
  cfg.frames = 400;
  cfg.persons[0].segments = {{1, 400, 60, 60, 0.0, 0.0}};
  cfg.persons[0].poses = {{1, 400, Pose::Standing}};
  cfg.persons.resize(1);  // single person, no occlusion in play
  cfg.detectors.resize(1);
  cfg.detectors[0].miss_rate = 0.3;

  const SimulationResult sim = simulate(cfg);
  int hits = 0;
  for (const auto& frame : sim.detections) hits += int(frame.size());
  const double n = 400.0, p = 0.7;
  const double sigma = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(hits - n * p) <= 3.0 * sigma);
}

TEST_CASE("detection scores stay in (0, 1]") {
  ScenarioConfig cfg = two_person_scenario();
  cfg.detectors[0].fp_rate = 1.0;
  const SimulationResult sim = simulate(cfg);
  for (const auto& frame : sim.detections) {
    for (const Detection& d : frame) {
      CHECK(d.score > 0.0);
      CHECK(d.score <= 1.0);
    }
  }
}

TEST_CASE("training samples cover the poses and satisfy the generators") {
  ScenarioConfig cfg = two_person_scenario();
  cfg.training_samples_per_pose = 30;
  const SimulationResult sim = simulate(cfg);
  REQUIRE(sim.training.size() == 90);
  // each sample's head is the exact pose map of its body for some pose
  for (const PoseSample& s : sim.training) {
    REQUIRE(s.boxes.size() == 2);
    bool ok = false;
    for (Pose p : {Pose::Standing, Pose::Sitting, Pose::Lying}) {
      const BoundingBox h = head_from_body(p, s.boxes[kBodyRegion]);
      if ((h.to_vector() - s.boxes[kHeadRegion].to_vector()).norm() < 1e-9) {
        ok = true;
      }
    }
    CHECK(ok);
    // samples live in normalized coordinates
    CHECK(s.boxes[0].x1 >= 0.0);
    CHECK(s.boxes[0].x2 <= 1.0);
    CHECK(s.boxes[0].y2 <= 1.0);
  }
}

TEST_CASE("scenario JSON round trip") {
  ScenarioConfig cfg = two_person_scenario();
  cfg.detectors[0].miss_rate = 0.25;
  cfg.detectors[1].fp_rate = 0.75;
  const ScenarioConfig back = ScenarioConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.persons[0].signature_bins == cfg.persons[0].signature_bins);
  CHECK(back.detectors[1].region == kHeadRegion);
  CHECK(back.persons[1].segments[0].vx == doctest::Approx(-1.0));
}
