#include "trackfuse/spatial_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

namespace trackfuse {

namespace {

Eigen::Matrix<double, 4, 5> identity_projection() {
  Eigen::Matrix<double, 4, 5> a = Eigen::Matrix<double, 4, 5>::Zero();
  a.block<4, 4>(0, 0).setIdentity();
  return a;
}

Eigen::Matrix<double, 5, 1> homogeneous(const BoundingBox& b) {
  Eigen::Matrix<double, 5, 1> h;
  h << b.x1, b.y1, b.x2, b.y2, 1.0;
  return h;
}

// Deterministic weighted index pick in [0, w.size()).
std::size_t weighted_pick(const std::vector<double>& w, std::mt19937& rng) {
  double total = 0.0;
  for (double v : w) total += v;
  if (total <= 0.0) {
    return std::uniform_int_distribution<std::size_t>(0, w.size() - 1)(rng);
  }
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (std::size_t i = 0; i < w.size(); ++i) {
    u -= w[i];
    if (u <= 0.0) return i;
  }
  return w.size() - 1;
}

struct KMeansResult {
  std::vector<Eigen::VectorXd> centroids;
  std::vector<int> labels;
};

KMeansResult kmeans(const std::vector<Eigen::VectorXd>& feats, int k,
                    unsigned seed, int max_iters) {
  const std::size_t n = feats.size();
  std::mt19937 rng(seed);

  // k-means++ seeding
  std::vector<Eigen::VectorXd> centroids;
  centroids.push_back(
      feats[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> d2(n);
  while (static_cast<int>(centroids.size()) < k) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const auto& c : centroids) {
        best = std::min(best, (feats[i] - c).squaredNorm());
      }
      d2[i] = best;
    }
    centroids.push_back(feats[weighted_pick(d2, rng)]);
  }

  std::vector<int> labels(n, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best_c = 0;
      double best = std::numeric_limits<double>::max();
      for (int c = 0; c < k; ++c) {
        const double d = (feats[i] - centroids[c]).squaredNorm();
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      if (labels[i] != best_c) {
        labels[i] = best_c;
        changed = true;
      }
    }

    std::vector<Eigen::VectorXd> sums(
        k, Eigen::VectorXd::Zero(feats[0].size()));
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[labels[i]] += feats[i];
      ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids[c] = sums[c] / counts[c];
      } else {
        // re-seed an empty cluster from the farthest point
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = (feats[i] - centroids[labels[i]]).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centroids[c] = feats[far];
        changed = true;
      }
    }
    if (!changed) break;
  }
  return {std::move(centroids), std::move(labels)};
}

}  // namespace

Eigen::VectorXd pose_feature(const PoseSample& sample, int anchor_region) {
  const int regions = static_cast<int>(sample.boxes.size());
  if (anchor_region < 0 || anchor_region >= regions) {
    throw std::invalid_argument("pose_feature: anchor region out of range");
  }
  const BoundingBox& anchor = sample.boxes[anchor_region];
  if (anchor.area() <= 0.0) {
    throw std::invalid_argument("pose_feature: zero-area anchor box");
  }
  Eigen::VectorXd f(3 * (regions - 1));
  int idx = 0;
  for (int l = 0; l < regions; ++l) {
    if (l == anchor_region) continue;
    const BoundingBox& b = sample.boxes[l];
    f[idx++] = (b.center_x() - anchor.center_x()) / anchor.width();
    f[idx++] = (b.center_y() - anchor.center_y()) / anchor.height();
    const double ratio = std::max(b.area(), 1e-12) / anchor.area();
    f[idx++] = 0.5 * std::log(ratio);
  }
  return f;
}

int SpatialModel::index(int c, int from, int to) const {
  return (c * regions_ + from) * regions_ + to;
}

const SpatialModel::Projection& SpatialModel::matrix(int c, int from,
                                                     int to) const {
  return projections_.at(index(c, from, to));
}

SpatialModel::Projection& SpatialModel::matrix(int c, int from, int to) {
  return projections_.at(index(c, from, to));
}

BoundingBox SpatialModel::project(int c, int from, int to,
                                  const BoundingBox& box) const {
  const Eigen::Vector4d y = matrix(c, from, to) * homogeneous(box);
  BoundingBox out{std::min(y[0], y[2]), std::min(y[1], y[3]),
                  std::max(y[0], y[2]), std::max(y[1], y[3])};
  return out;
}

std::vector<BoundingBox> SpatialModel::predict_configuration(
    int c, int region, const BoundingBox& box) const {
  std::vector<BoundingBox> out(regions_);
  for (int l = 0; l < regions_; ++l) {
    out[l] = (l == region) ? box : project(c, region, l, box);
  }
  return out;
}

SpatialModel SpatialModel::identity(int regions, int subcategories) {
  SpatialModel m;
  m.regions_ = regions;
  m.subcategories_ = subcategories;
  m.projections_.assign(
      static_cast<std::size_t>(subcategories) * regions * regions,
      identity_projection());
  m.centroids_.assign(subcategories,
                      Eigen::VectorXd::Zero(std::max(1, 3 * (regions - 1))));
  return m;
}

SpatialModel SpatialModel::fit(const std::vector<PoseSample>& samples,
                               const SpatialModelConfig& cfg,
                               std::vector<int>* labels_out) {
  if (samples.empty()) {
    throw std::invalid_argument("SpatialModel::fit: no training samples");
  }
  const int regions = static_cast<int>(samples[0].boxes.size());
  for (const PoseSample& s : samples) {
    if (static_cast<int>(s.boxes.size()) != regions) {
      throw std::invalid_argument(
          "SpatialModel::fit: inconsistent region count across samples");
    }
  }

  std::vector<Eigen::VectorXd> feats;
  feats.reserve(samples.size());
  for (const PoseSample& s : samples) {
    feats.push_back(pose_feature(s, cfg.anchor_region));
  }

  std::set<std::vector<double>> distinct;
  for (const auto& f : feats) {
    distinct.insert(std::vector<double>(f.data(), f.data() + f.size()));
  }
  if (static_cast<int>(distinct.size()) < cfg.subcategories) {
    throw std::invalid_argument(
        "SpatialModel::fit: fewer distinct samples than subcategories");
  }

  KMeansResult km =
      kmeans(feats, cfg.subcategories, cfg.seed, cfg.kmeans_max_iters);
  if (labels_out) *labels_out = km.labels;

  SpatialModel model;
  model.regions_ = regions;
  model.subcategories_ = cfg.subcategories;
  model.ridge_ = cfg.ridge;
  model.anchor_region_ = cfg.anchor_region;
  model.image_width_ = cfg.image_width;
  model.image_height_ = cfg.image_height;
  model.centroids_ = std::move(km.centroids);
  model.projections_.assign(
      static_cast<std::size_t>(cfg.subcategories) * regions * regions,
      identity_projection());

  for (int c = 0; c < cfg.subcategories; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (km.labels[i] == c) members.push_back(i);
    }
    const int n = static_cast<int>(members.size());
    if (n == 0) continue;  // keeps identity projections for a dead cluster
    Eigen::MatrixXd design(n, 5);
    for (int from = 0; from < regions; ++from) {
      for (int i = 0; i < n; ++i) {
        design.row(i) = homogeneous(samples[members[i]].boxes[from]);
      }
      const Eigen::Matrix<double, 5, 5> gram =
          design.transpose() * design +
          cfg.ridge * Eigen::Matrix<double, 5, 5>::Identity();
      const auto solver = gram.ldlt();
      for (int to = 0; to < regions; ++to) {
        if (to == from) continue;
        Eigen::MatrixXd target(n, 4);
        for (int i = 0; i < n; ++i) {
          target.row(i) = samples[members[i]].boxes[to].to_vector();
        }
        // A = Y^T X (X^T X + r I)^-1, solved column-block wise
        const Eigen::MatrixXd rhs = design.transpose() * target;  // 5 x 4
        model.matrix(c, from, to) = solver.solve(rhs).transpose();
      }
    }
  }
  return model;
}

nlohmann::json SpatialModel::to_json() const {
  nlohmann::json j;
  j["C"] = subcategories_;
  j["L"] = regions_;
  j["ridge"] = ridge_;
  j["anchor_region"] = anchor_region_ + 1;
  j["image_size"] = {image_width_, image_height_};
  nlohmann::json cents = nlohmann::json::array();
  for (const auto& c : centroids_) {
    cents.push_back(std::vector<double>(c.data(), c.data() + c.size()));
  }
  j["centroids"] = cents;
  nlohmann::json proj = nlohmann::json::object();
  for (int c = 0; c < subcategories_; ++c) {
    for (int from = 0; from < regions_; ++from) {
      for (int to = 0; to < regions_; ++to) {
        if (from == to) continue;
        const Projection& a = matrix(c, from, to);
        std::vector<double> flat;
        flat.reserve(20);
        for (int r = 0; r < 4; ++r) {
          for (int col = 0; col < 5; ++col) flat.push_back(a(r, col));
        }
        const std::string key = std::to_string(c + 1) + "/" +
                                std::to_string(from + 1) + "/" +
                                std::to_string(to + 1);
        proj[key] = flat;
      }
    }
  }
  j["projections"] = proj;
  return j;
}

SpatialModel SpatialModel::from_json(const nlohmann::json& j) {
  SpatialModel m;
  m.subcategories_ = j.at("C").get<int>();
  m.regions_ = j.at("L").get<int>();
  m.ridge_ = j.value("ridge", 0.0);
  m.anchor_region_ = j.value("anchor_region", 1) - 1;
  if (j.contains("image_size")) {
    m.image_width_ = j["image_size"][0].get<int>();
    m.image_height_ = j["image_size"][1].get<int>();
  }
  for (const auto& c : j.at("centroids")) {
    const auto v = c.get<std::vector<double>>();
    m.centroids_.push_back(
        Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
  }
  m.projections_.assign(
      static_cast<std::size_t>(m.subcategories_) * m.regions_ * m.regions_,
      identity_projection());
  for (const auto& [key, val] : j.at("projections").items()) {
    int c = 0, from = 0, to = 0;
    if (std::sscanf(key.c_str(), "%d/%d/%d", &c, &from, &to) != 3) {
      throw std::invalid_argument("SpatialModel: bad projection key " + key);
    }
    const auto flat = val.get<std::vector<double>>();
    if (flat.size() != 20) {
      throw std::invalid_argument("SpatialModel: projection must be 4x5");
    }
    Projection& a = m.matrix(c - 1, from - 1, to - 1);
    for (int r = 0; r < 4; ++r) {
      for (int col = 0; col < 5; ++col) a(r, col) = flat[r * 5 + col];
    }
  }
  for (const Projection& a : m.projections_) {
    if (!a.allFinite()) {
      throw std::invalid_argument("SpatialModel: non-finite matrix entry");
    }
  }
  return m;
}

}  // namespace trackfuse
