#pragma once

// Miscue fraction vectors, k-means with silhouette model selection,
// cluster -> skill-class labeling and balanced subsets.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lexiscreen/corpus.hpp"
#include "lexiscreen/error.hpp"
#include "lexiscreen/random.hpp"
#include "lexiscreen/skill_class.hpp"

namespace lexiscreen {

using Point = std::vector<double>;

// ---------------------------------------------------------------------------
// Miscue fractions

enum class MiscueVariant { A, B };

/// Variant A: (C, S1, Sm+D, M, I). Variant B: (C+S1, Sm+D, M, I).
inline std::vector<std::string_view> miscue_dimensions(MiscueVariant v) {
  if (v == MiscueVariant::A) return {"C", "S1", "SmD", "M", "I"};
  return {"CS1", "SmD", "M", "I"};
}

inline Point miscue_fractions(const Transcription& t, MiscueVariant variant) {
  if (t.words.empty()) throw Error(ErrorCode::EmptyTranscription, "no words");
  Point a(5, 0.0);
  for (const auto& w : t.words) {
    switch (w.label) {
      case WordLabel::C: a[0] += 1; break;
      case WordLabel::S1: a[1] += 1; break;
      case WordLabel::Sm:
      case WordLabel::D: a[2] += 1; break;
      case WordLabel::M: a[3] += 1; break;
      case WordLabel::I: a[4] += 1; break;
    }
  }
  const double n = double(t.words.size());
  for (auto& v : a) v /= n;
  if (variant == MiscueVariant::A) return a;
  return {a[0] + a[1], a[2], a[3], a[4]};
}

// ---------------------------------------------------------------------------
// k-means

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

struct ClusterModel {
  int k = 0;
  std::vector<Point> centroids;
  std::vector<int> assignments;
  double inertia = 0.0;
  std::uint64_t seed = 0;
  double silhouette = 0.0;
  int restart = 0;                      // index of the winning restart
  int repair_events = 0;                // empty-cluster repairs in that restart
  std::vector<double> inertia_history;  // after every centroid update
};

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
};

namespace detail {

inline std::vector<Point> kmeans_plus_plus(std::span<const Point> points, int k, Rng& rng) {
  std::vector<Point> centers;
  centers.push_back(points[rng.index(points.size())]);
  std::vector<double> d2(points.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      pick = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        target -= d2[i];
        if (target < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(points.size());
    }
    centers.push_back(points[pick]);
  }
  return centers;
}

/// Nearest centroid; on ties the current assignment (if any) wins, then the
/// lower index.
inline int nearest(std::span<const double> p, const std::vector<Point>& centroids, int current) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centroids.size()); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (current >= 0 && squared_distance(p, centroids[current]) == best_d) return current;
  return best;
}

struct LloydResult {
  std::vector<Point> centroids;
  std::vector<int> assignments;
  double inertia = 0.0;
  int repairs = 0;
  std::vector<double> history;
};

inline LloydResult lloyd(std::span<const Point> points, std::vector<Point> centroids,
                         int max_iterations) {
  const int k = static_cast<int>(centroids.size());
  const std::size_t dim = points.front().size();
  LloydResult r;
  r.assignments.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) r.assignments[i] = nearest(points[i], centroids, -1);

  for (int it = 0; it < max_iterations; ++it) {
    // Empty clusters take the point farthest from its own centroid.
    std::vector<int> sizes(k, 0);
    for (int a : r.assignments) ++sizes[a];
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = points.size();
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (sizes[r.assignments[i]] < 2) continue;
        const double d = squared_distance(points[i], centroids[r.assignments[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == points.size()) continue;
      --sizes[r.assignments[far]];
      r.assignments[far] = c;
      sizes[c] = 1;
      ++r.repairs;
    }

    std::vector<Point> sums(k, Point(dim, 0.0));
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t d = 0; d < dim; ++d) sums[r.assignments[i]][d] += points[i][d];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) centroids[c][d] = sums[c][d] / double(sizes[c]);
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      inertia += squared_distance(points[i], centroids[r.assignments[i]]);
    }
    r.history.push_back(inertia);
    r.inertia = inertia;

    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int a = nearest(points[i], centroids, r.assignments[i]);
      if (a != r.assignments[i]) {
        r.assignments[i] = a;
        changed = true;
      }
    }
    if (!changed) break;
  }
  r.centroids = std::move(centroids);
  return r;
}

}  // namespace detail

inline double silhouette(std::span<const Point> points, std::span<const int> assignments);

/// k-means++ seeding and Lloyd iterations, best inertia over restarts.
/// Restart r uses seed derive_seed(seed, r); ties keep the earlier restart.
inline ClusterModel kmeans(std::span<const Point> points, int k, std::uint64_t seed,
                           const KMeansOptions& opt = {}) {
  if (k < 1 || static_cast<int>(points.size()) < k) {
    throw Error(ErrorCode::TooFewPoints,
                std::to_string(points.size()) + " points for K=" + std::to_string(k));
  }
  ClusterModel best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    auto res = detail::lloyd(points, detail::kmeans_plus_plus(points, k, rng), opt.max_iterations);
    if (res.inertia < best.inertia) {
      best.k = k;
      best.centroids = std::move(res.centroids);
      best.assignments = std::move(res.assignments);
      best.inertia = res.inertia;
      best.restart = r;
      best.repair_events = res.repairs;
      best.inertia_history = std::move(res.history);
    }
  }
  best.seed = seed;
  std::vector<int> distinct(best.assignments);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  best.silhouette = distinct.size() >= 2 ? silhouette(points, best.assignments) : 0.0;
  return best;
}

/// Mean silhouette, Euclidean distance; samples in singleton clusters score 0.
inline double silhouette(std::span<const Point> points, std::span<const int> assignments) {
  std::map<int, int> relabel;
  for (int a : assignments) relabel.emplace(a, 0);
  if (relabel.size() < 2) throw Error(ErrorCode::SingleCluster, "silhouette needs >= 2 clusters");
  int next = 0;
  for (auto& [label, idx] : relabel) idx = next++;
  const std::size_t n = points.size();
  const int k = next;
  std::vector<int> cluster(n), sizes(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cluster[i] = relabel[assignments[i]];
    ++sizes[cluster[i]];
  }
  double total = 0.0;
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[cluster[i]] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[cluster[j]] += std::sqrt(squared_distance(points[i], points[j]));
    }
    const double a = sums[cluster[i]] / double(sizes[cluster[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c != cluster[i]) b = std::min(b, sums[c] / double(sizes[c]));
    }
    const double m = std::max(a, b);
    total += m > 0.0 ? (b - a) / m : 0.0;
  }
  return total / double(n);
}

struct SweepPoint {
  int k = 0;
  double silhouette = 0.0;
  double inertia = 0.0;
};

/// One k-means fit per K in [k_min, k_max], all with the same seed.
inline std::vector<SweepPoint> sweep_k(std::span<const Point> points, int k_min, int k_max,
                                       std::uint64_t seed, const KMeansOptions& opt = {}) {
  const int n = static_cast<int>(points.size());
  if (k_min < 2 || k_max < k_min || k_max > n - 1) {
    throw Error(ErrorCode::TooFewPoints, "K range [" + std::to_string(k_min) + ", " +
                                             std::to_string(k_max) + "] not within [2, " +
                                             std::to_string(n - 1) + "]");
  }
  std::vector<SweepPoint> out;
  for (int k = k_min; k <= k_max; ++k) {
    const auto model = kmeans(points, k, seed, opt);
    out.push_back({k, model.silhouette, model.inertia});
  }
  return out;
}

inline int best_k(std::span<const SweepPoint> sweep) {
  return std::max_element(sweep.begin(), sweep.end(), [](const auto& a, const auto& b) {
           return a.silhouette < b.silhouette;
         })->k;
}

/// Variant-B 3-cluster labeling: highest C+S1 centroid is C_A; of the other
/// two, the higher M centroid is M_A and the remaining one I_A.
inline std::vector<SkillClass> label_clusters(const ClusterModel& model) {
  if (model.k != 3 || model.centroids.size() != 3 || model.centroids.front().size() != 4) {
    throw Error(ErrorCode::DimensionMismatch, "labeling needs K=3 in variant-B space");
  }
  const auto& c = model.centroids;
  int correct = 0;
  for (int i = 1; i < 3; ++i) {
    if (c[i][0] > c[correct][0]) correct = i;
  }
  int first = -1, second = -1;
  for (int i = 0; i < 3; ++i) {
    if (i == correct) continue;
    (first < 0 ? first : second) = i;
  }
  if (std::abs(c[first][2] - c[second][2]) <= 1e-9) {
    throw Error(ErrorCode::AmbiguousLabeling, "remaining centroids tie on the M fraction");
  }
  const int missed = c[first][2] > c[second][2] ? first : second;
  std::vector<SkillClass> labels(3, SkillClass::I_A);
  labels[correct] = SkillClass::C_A;
  labels[missed] = SkillClass::M_A;
  return labels;
}

/// Per-class quotas of target/3 (remainder dealt in class order), capped by
/// class size with any shortfall dealt round-robin to classes with spare
/// members. Each class is shuffled by `seed` and its first quota ids taken.
inline std::vector<std::string> balanced_subset(std::span<const std::string> ids,
                                                std::span<const SkillClass> labels,
                                                std::size_t target_total, std::uint64_t seed) {
  std::array<std::vector<std::string>, 3> members;
  for (std::size_t i = 0; i < ids.size(); ++i) members[index_of(labels[i])].push_back(ids[i]);
  for (auto& m : members) std::sort(m.begin(), m.end());
  target_total = std::min(target_total, ids.size());

  std::array<std::size_t, 3> quota{};
  for (int c = 0; c < 3; ++c) quota[c] = target_total / 3 + (std::size_t(c) < target_total % 3 ? 1 : 0);
  std::size_t shortfall = 0;
  for (int c = 0; c < 3; ++c) {
    if (quota[c] > members[c].size()) {
      shortfall += quota[c] - members[c].size();
      quota[c] = members[c].size();
    }
  }
  while (shortfall > 0) {
    bool placed = false;
    for (int c = 0; c < 3 && shortfall > 0; ++c) {
      if (quota[c] < members[c].size()) {
        ++quota[c];
        --shortfall;
        placed = true;
      }
    }
    if (!placed) break;
  }

  std::vector<std::string> out;
  for (int c = 0; c < 3; ++c) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    auto shuffled = members[c];
    rng.shuffle(shuffled);
    out.insert(out.end(), shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto pairs = [](double n) { return n * (n - 1) / 2.0; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [key, n] : joint) index += pairs(n);
  for (const auto& [key, n] : ra) sa += pairs(n);
  for (const auto& [key, n] : rb) sb += pairs(n);
  const double total = pairs(double(a.size()));
  const double expected = total > 0 ? sa * sb / total : 0.0;
  const double max_index = (sa + sb) / 2.0;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace lexiscreen
