#include "trackfuse/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

namespace trackfuse {

namespace {

constexpr double kForbidden = 1e9;

// Hungarian algorithm (potentials formulation) for square min-cost
// assignment. Returns assignment[row] = column.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::max());
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = std::numeric_limits<double>::max();
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

}  // namespace

nlohmann::json MotReport::to_json() const {
  return {{"MOTA", mota},
          {"MOTP", motp},
          {"FP", fp_rate},
          {"FN", fn_rate},
          {"IDs", ids_rate},
          {"Recall", recall},
          {"Precision", precision},
          {"counts",
           {{"gt", gt_total},
            {"fp", false_positives},
            {"fn", false_negatives},
            {"id_switches", id_switches},
            {"matches", matches}}}};
}

std::string MotReport::to_text() const {
  char buf[256];
  std::string out =
      "    MOTA     MOTP       FP       FN      IDs   Recall  Precision\n";
  std::snprintf(buf, sizeof(buf),
                "%8.2f %8.2f %8.2f %8.2f %8.2f %8.2f %10.2f\n", 100.0 * mota,
                100.0 * motp, 100.0 * fp_rate, 100.0 * fn_rate,
                100.0 * ids_rate, 100.0 * recall, 100.0 * precision);
  out += buf;
  return out;
}

MotReport evaluate(const std::vector<TrackBox>& tracks,
                   const GroundTruth& truth, const EvalConfig& cfg) {
  const int n_frames = static_cast<int>(truth.frames.size());
  std::vector<std::vector<TrackBox>> by_frame(n_frames);
  for (const TrackBox& t : tracks) {
    if (t.region != cfg.region) continue;
    if (t.frame < 1 || t.frame > n_frames) {
      throw std::invalid_argument(
          "evaluate: track frame outside the ground-truth range");
    }
    by_frame[t.frame - 1].push_back(t);
  }

  MotReport rep;
  double motp_sum = 0.0;
  std::map<int, int> corr;        // gt identity -> track id, current
  std::map<int, int> last_match;  // gt identity -> last matched track id

  for (int f = 0; f < n_frames; ++f) {
    struct GtBox {
      int identity;
      BoundingBox box;
    };
    std::vector<GtBox> gt;
    for (const TruthPerson& tp : truth.frames[f]) {
      if (tp.present) gt.push_back({tp.identity, tp.boxes[cfg.region]});
    }
    const auto& trk = by_frame[f];
    rep.gt_total += static_cast<long>(gt.size());

    std::vector<bool> gt_used(gt.size(), false), trk_used(trk.size(), false);
    std::map<int, int> new_corr;

    // keep still-valid correspondences from the previous frame
    for (std::size_t gi = 0; gi < gt.size(); ++gi) {
      const auto it = corr.find(gt[gi].identity);
      if (it == corr.end()) continue;
      for (std::size_t ti = 0; ti < trk.size(); ++ti) {
        if (trk_used[ti] || trk[ti].person_id != it->second) continue;
        const double overlap = iou(gt[gi].box, trk[ti].box);
        if (overlap >= cfg.iou_threshold) {
          gt_used[gi] = true;
          trk_used[ti] = true;
          new_corr[gt[gi].identity] = trk[ti].person_id;
          rep.matches += 1;
          motp_sum += overlap;
        }
        break;
      }
    }

    // optimal assignment for the rest
    std::vector<std::size_t> free_gt, free_trk;
    for (std::size_t gi = 0; gi < gt.size(); ++gi)
      if (!gt_used[gi]) free_gt.push_back(gi);
    for (std::size_t ti = 0; ti < trk.size(); ++ti)
      if (!trk_used[ti]) free_trk.push_back(ti);
    if (!free_gt.empty() && !free_trk.empty()) {
      const int n = static_cast<int>(std::max(free_gt.size(), free_trk.size()));
      std::vector<std::vector<double>> cost(n, std::vector<double>(n, kForbidden));
      for (std::size_t a = 0; a < free_gt.size(); ++a) {
        for (std::size_t b = 0; b < free_trk.size(); ++b) {
          const double overlap = iou(gt[free_gt[a]].box, trk[free_trk[b]].box);
          if (overlap >= cfg.iou_threshold) cost[a][b] = 1.0 - overlap;
        }
      }
      const std::vector<int> assign = hungarian(cost);
      for (std::size_t a = 0; a < free_gt.size(); ++a) {
        const int b = assign[a];
        if (b < 0 || b >= static_cast<int>(free_trk.size())) continue;
        if (cost[a][b] >= kForbidden) continue;
        const std::size_t gi = free_gt[a];
        const std::size_t ti = free_trk[static_cast<std::size_t>(b)];
        gt_used[gi] = true;
        trk_used[ti] = true;
        const int gt_id = gt[gi].identity;
        const int trk_id = trk[ti].person_id;
        new_corr[gt_id] = trk_id;
        rep.matches += 1;
        motp_sum += iou(gt[gi].box, trk[ti].box);
        const auto last = last_match.find(gt_id);
        if (last != last_match.end() && last->second != trk_id) {
          rep.id_switches += 1;
        }
      }
    }

    for (std::size_t gi = 0; gi < gt.size(); ++gi)
      if (!gt_used[gi]) rep.false_negatives += 1;
    for (std::size_t ti = 0; ti < trk.size(); ++ti)
      if (!trk_used[ti]) rep.false_positives += 1;

    corr = new_corr;
    for (const auto& [gt_id, trk_id] : new_corr) last_match[gt_id] = trk_id;
  }

  const double gt_n = std::max<long>(1, rep.gt_total);
  rep.mota = 1.0 - double(rep.false_positives + rep.false_negatives +
                          rep.id_switches) /
                       gt_n;
  rep.motp = rep.matches > 0 ? motp_sum / rep.matches : 0.0;
  rep.fp_rate = rep.false_positives / gt_n;
  rep.fn_rate = rep.false_negatives / gt_n;
  rep.ids_rate = rep.id_switches / gt_n;
  rep.recall = double(rep.gt_total - rep.false_negatives) / gt_n;
  const long emitted = rep.matches + rep.false_positives;
  rep.precision = emitted > 0 ? double(rep.matches) / emitted : 0.0;
  return rep;
}

}  // namespace trackfuse
