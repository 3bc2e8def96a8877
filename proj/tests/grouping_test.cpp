#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "trackfuse/grouping.hpp"

using namespace trackfuse;

namespace {

Detection det(int id, const BoundingBox& b, double depth_mean,
              double depth_std = 0.5, double score = 0.9) {
  Detection d;
  d.box = b;
  d.score = score;
  d.detector_id = id;
  d.depth = {depth_mean, depth_std};
  return d;
}

}  // namespace

TEST_CASE("pair_probability blends overlap and depth") {
  GroupingConfig cfg;  // a = 0.5
  // identical box and depth -> probability 1
  const Detection d1 = det(0, {0.2, 0.2, 0.4, 0.6}, 3.0);
  const Detection d2 = det(1, {0.2, 0.2, 0.4, 0.6}, 3.0);
  CHECK(pair_probability(d1, d2, cfg) == doctest::Approx(1.0));

  // disjoint boxes, same depth -> only the depth half remains
  const Detection far = det(1, {0.7, 0.7, 0.9, 0.9}, 3.0);
  CHECK(pair_probability(d1, far, cfg) == doctest::Approx(0.5));

  // a = 1 ignores depth entirely
  cfg.a = 1.0;
  const Detection off_depth = det(1, {0.2, 0.2, 0.4, 0.6}, 100.0);
  CHECK(pair_probability(d1, off_depth, cfg) == doctest::Approx(1.0));
}

TEST_CASE("pair_probability rejects same-detector pairs") {
  GroupingConfig cfg;
  const Detection d1 = det(0, {0.2, 0.2, 0.4, 0.6}, 3.0);
  const Detection d2 = det(0, {0.2, 0.2, 0.4, 0.6}, 3.0);
  CHECK_THROWS_AS(pair_probability(d1, d2, cfg), std::invalid_argument);
}

TEST_CASE("group_two_sets merges above tau and keeps leftovers") {
  GroupingConfig cfg;  // tau = 0.5
  std::vector<DetectionGroup> groups{
      {{det(0, {0.1, 0.1, 0.3, 0.5}, 2.0)}},
      {{det(0, {0.6, 0.1, 0.8, 0.5}, 5.0)}},
  };
  const std::vector<Detection> heads{
      det(1, {0.62, 0.1, 0.68, 0.2}, 5.0),  // inside group 1's body
      det(1, {0.4, 0.8, 0.5, 0.9}, 9.0),    // matches nothing
  };
  const auto out = group_two_sets(groups, heads, cfg);
  REQUIRE(out.size() == 3);
  CHECK(out[0].members.size() == 1);
  REQUIRE(out[1].members.size() == 2);
  CHECK(out[1].members[1].detector_id == 1);
  CHECK(out[2].members.size() == 1);
  CHECK(out[2].members[0].detector_id == 1);
}

TEST_CASE("a probability exactly at tau does not merge") {
  GroupingConfig cfg;
  cfg.a = 1.0;  // overlap only
  cfg.tau = 0.5;
  // half-overlapping equal boxes: p = 0.5 == tau, must stay separate;
  // dyadic coordinates keep the ratio exactly representable
  std::vector<DetectionGroup> groups{{{det(0, {0.0, 0.0, 0.25, 0.25}, 1.0)}}};
  const auto out =
      group_two_sets(groups, {det(1, {0.125, 0.0, 0.375, 0.25}, 1.0)}, cfg);
  CHECK(out.size() == 2);
}

TEST_CASE("each group holds at most one detection per detector") {
  GroupingConfig cfg;
  // two near-identical detections from detector 1 both match group 0; only
  // one may join, the other becomes a singleton
  std::vector<DetectionGroup> groups{{{det(0, {0.2, 0.2, 0.5, 0.8}, 3.0)}}};
  const auto out = group_two_sets(
      groups,
      {det(1, {0.2, 0.2, 0.5, 0.8}, 3.0), det(1, {0.21, 0.2, 0.5, 0.8}, 3.0)},
      cfg);
  REQUIRE(out.size() == 2);
  CHECK(out[0].members.size() == 2);
  CHECK(out[1].members.size() == 1);
}

TEST_CASE("group_all_detectors partitions the input") {
  GroupingConfig cfg;
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<int, std::vector<Detection>> frame;
    std::uniform_int_distribution<int> count(0, 5);
    std::size_t total = 0;
    for (int k = 0; k < 3; ++k) {
      const int n = count(rng);
      for (int i = 0; i < n; ++i)
        frame[k].push_back(testutil::random_detection(rng, k));
      total += std::size_t(n);
    }
    const auto groups = group_all_detectors(frame, cfg);
    std::size_t seen = 0;
    for (const auto& g : groups) {
      std::set<int> detectors;
      for (const auto& m : g.members) {
        CHECK(detectors.insert(m.detector_id).second);  // one per detector
        ++seen;
      }
      CHECK(!g.members.empty());
    }
    CHECK(seen == total);
  }
}

TEST_CASE("greedy grouping matches the naive oracle on 500 random frames") {
  GroupingConfig cfg;
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> count(0, 6);
  for (int trial = 0; trial < 500; ++trial) {
    std::map<int, std::vector<Detection>> frame;
    for (int k = 0; k < 3; ++k) {
      const int n = count(rng);
      for (int i = 0; i < n; ++i)
        frame[k].push_back(testutil::random_detection(rng, k));
    }
    const auto fast = group_all_detectors(frame, cfg);
    const auto slow = testutil::naive_group_all(frame, cfg);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t g = 0; g < fast.size(); ++g) {
      REQUIRE(fast[g].members.size() == slow[g].members.size());
      for (std::size_t m = 0; m < fast[g].members.size(); ++m) {
        CHECK(fast[g].members[m].detector_id ==
              slow[g].members[m].detector_id);
        CHECK(fast[g].members[m].box.x1 ==
              doctest::Approx(slow[g].members[m].box.x1));
        CHECK(fast[g].members[m].box.y2 ==
              doctest::Approx(slow[g].members[m].box.y2));
      }
    }
  }
}
