#include "wcmkg/folds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wcmkg/rng.hpp"

namespace wcmkg {

std::vector<std::vector<std::string>> FoldAssignment::fold_sites() const {
  std::vector<std::vector<std::string>> out(fold_count);
  for (const auto& [site, fold] : site_to_fold) out.at(fold).push_back(site);
  return out;
}

void FoldAssignment::validate(const std::vector<SiteSeries>& sites) const {
  if (fold_count < 1) throw InvariantViolation("fold_count must be >= 1");
  std::vector<int> counts(fold_count, 0);
  for (const SiteSeries& s : sites) {
    auto it = site_to_fold.find(s.site_id);
    if (it == site_to_fold.end()) {
      throw InvariantViolation("site '" + s.site_id + "' has no fold");
    }
    if (it->second < 0 || it->second >= fold_count) {
      throw InvariantViolation("site '" + s.site_id + "' mapped to fold " +
                               std::to_string(it->second));
    }
    counts[it->second] += 1;
  }
  if (site_to_fold.size() != sites.size()) {
    throw InvariantViolation("fold assignment covers " +
                             std::to_string(site_to_fold.size()) +
                             " sites, dataset has " +
                             std::to_string(sites.size()));
  }
  for (int f = 0; f < fold_count; ++f) {
    if (counts[f] == 0) {
      throw InvariantViolation("fold " + std::to_string(f) + " is empty");
    }
  }
}

namespace {

struct Point {
  double x, y;
};

double sq_dist(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

int nearest(const Point& p, const std::vector<Point>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centroids.size()); ++c) {
    const double d = sq_dist(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

FoldAssignment assign_spatial_folds(const std::vector<SiteSeries>& sites,
                                    int fold_count, std::uint64_t seed) {
  if (fold_count < 2) throw TooFewSites("fold_count must be >= 2");
  if (static_cast<int>(sites.size()) < fold_count) {
    throw TooFewSites("need at least " + std::to_string(fold_count) +
                      " sites for " + std::to_string(fold_count) +
                      " folds, got " + std::to_string(sites.size()));
  }

  std::vector<Point> pts(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    pts[i] = {sites[i].x, sites[i].y};
  }

  // k-means++ seeding.
  Rng rng(seed);
  std::vector<Point> centroids;
  centroids.push_back(pts[rng.index(pts.size())]);
  while (static_cast<int>(centroids.size()) < fold_count) {
    std::vector<double> d2(pts.size());
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Point& c : centroids) best = std::min(best, sq_dist(pts[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform(0.0, total);
      double acc = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(pts.size());  // all points coincide
    }
    centroids.push_back(pts[pick]);
  }

  // Lloyd iterations until the assignment is stable.
  std::vector<int> assign(pts.size(), -1);
  for (int iter = 0; iter < 1000; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const int c = nearest(pts[i], centroids);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }

    std::vector<Point> sums(fold_count, {0.0, 0.0});
    std::vector<int> counts(fold_count, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      sums[assign[i]].x += pts[i].x;
      sums[assign[i]].y += pts[i].y;
      counts[assign[i]] += 1;
    }
    for (int c = 0; c < fold_count; ++c) {
      if (counts[c] == 0) {
        // Reseed an empty cluster with the point farthest from its centroid.
        std::size_t far_i = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          const double d = sq_dist(pts[i], centroids[assign[i]]);
          if (d > far_d && counts[assign[i]] > 1) {
            far_d = d;
            far_i = i;
          }
        }
        counts[assign[far_i]] -= 1;
        sums[assign[far_i]].x -= pts[far_i].x;
        sums[assign[far_i]].y -= pts[far_i].y;
        assign[far_i] = c;
        sums[c] = pts[far_i];
        counts[c] = 1;
        changed = true;
      }
      centroids[c] = {sums[c].x / counts[c], sums[c].y / counts[c]};
    }
    if (!changed) break;
  }

  // Stable fold numbering: order clusters by centroid coordinates.
  std::vector<int> order(fold_count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (centroids[a].x != centroids[b].x) return centroids[a].x < centroids[b].x;
    return centroids[a].y < centroids[b].y;
  });
  std::vector<int> relabel(fold_count);
  for (int rank = 0; rank < fold_count; ++rank) relabel[order[rank]] = rank;

  FoldAssignment fa;
  fa.fold_count = fold_count;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    fa.site_to_fold[sites[i].site_id] = relabel[assign[i]];
  }
  fa.validate(sites);
  return fa;
}

}  // namespace wcmkg
