#pragma once

// Independent reference computations shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "langnav/classifier.hpp"
#include "langnav/geometry.hpp"
#include "langnav/random.hpp"

namespace oracle {

// |a - n| / max(|a|, |n|, floor). The floor keeps entries that are zero up to
// rounding (|g| < 1e-6) from producing meaningless ratios.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheck {
  double worst = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  std::size_t entries = 0;
};

// Central differences of the mean batch loss w.r.t. every parameter entry.
inline GradCheck finite_difference_check(std::span<const langnav::LabeledPhrase> batch, langnav::ModelParams params,
                                         langnav::Architecture arch, double step = 1e-5) {
  auto mean_loss = [&](const langnav::ModelParams& p) {
    double total = 0.0;
    for (const auto& s : batch) total += langnav::loss(langnav::classify(s.phrase.tokens, p, arch).probs, s.label);
    return total / static_cast<double>(batch.size());
  };
  const auto analytic = langnav::gradients(batch, params, arch);
  const auto grad_views = langnav::tensor_views(analytic.gradient);
  const auto names = langnav::tensor_names(params);
  auto views = langnav::tensor_views(params);
  GradCheck out;
  for (std::size_t t = 0; t < views.size(); ++t) {
    for (std::size_t i = 0; i < views[t].size(); ++i) {
      const double keep = views[t][i];
      views[t][i] = keep + step;
      const double up = mean_loss(params);
      views[t][i] = keep - step;
      const double down = mean_loss(params);
      views[t][i] = keep;
      const double numeric = (up - down) / (2.0 * step);
      const double err = relative_error(grad_views[t][i], numeric);
      ++out.entries;
      if (err > out.worst) {
        out.worst = err;
        out.worst_tensor = std::string(names[t]);
        out.worst_index = i;
      }
    }
  }
  return out;
}

// Random tiny classification batch: vocabulary ids in [2, vocab), lengths 1..max_len.
inline std::vector<langnav::LabeledPhrase> random_batch(langnav::Rng& rng, int n, int vocab, int max_len) {
  std::vector<langnav::LabeledPhrase> out;
  for (int k = 0; k < n; ++k) {
    langnav::LabeledPhrase s;
    const auto len = 1 + rng.below(static_cast<std::size_t>(max_len));
    for (std::size_t i = 0; i < len; ++i) s.phrase.tokens.push_back(2 + static_cast<int>(rng.below(vocab - 2)));
    s.label = static_cast<langnav::Label>(rng.below(3));
    out.push_back(std::move(s));
  }
  return out;
}

// Perturbs every parameter so that gates are away from their init regime.
inline void scramble(langnav::ModelParams& params, langnav::Rng& rng, double scale) {
  for (auto v : langnav::tensor_views(params)) {
    for (auto& x : v) x = rng.uniform(-scale, scale);
  }
}

// Plain Dijkstra over an 8-connected grid with integer edge weights. Edge
// weights are supplied by the caller so the oracle shares nothing with the
// planner's search. Returns max() when unreachable.
template <typename Weight>
std::uint64_t dijkstra(int width, int height, std::span<const std::uint8_t> cost, int start, int goal,
                       Weight&& weight) {
  constexpr auto inf = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> dist(cost.size(), inf);
  using Item = std::pair<std::uint64_t, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[start] = 0;
  open.push({0, start});
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (d != dist[u]) continue;
    if (u == goal) return d;
    const int ux = u % width;
    const int uy = u / width;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int vx = ux + dx;
        const int vy = uy + dy;
        if (vx < 0 || vy < 0 || vx >= width || vy >= height) continue;
        const int v = vy * width + vx;
        if (cost[v] == 255) continue;
        const std::uint64_t nd = d + weight(dx != 0 && dy != 0, cost[v]);
        if (nd < dist[v]) {
          dist[v] = nd;
          open.push({nd, v});
        }
      }
    }
  }
  return inf;
}

// Brute-force squared distance (cells) to the nearest seed.
inline std::vector<double> brute_force_sq_edt(std::span<const std::uint8_t> seeds, int width, int height) {
  std::vector<double> out(seeds.size(), 1e20);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int sy = 0; sy < height; ++sy) {
        for (int sx = 0; sx < width; ++sx) {
          if (!seeds[sy * width + sx]) continue;
          const double d = double(x - sx) * (x - sx) + double(y - sy) * (y - sy);
          out[y * width + x] = std::min(out[y * width + x], d);
        }
      }
    }
  }
  return out;
}

// Edge weights written out independently of the planner: step x (128 + c)
// in units of 2^16, diagonals rounded up.
inline std::uint64_t edge_weight(bool diagonal, std::uint8_t c) {
  const long double straight = (128.0L + c) * 65536.0L;
  return static_cast<std::uint64_t>(diagonal ? std::ceil(std::sqrt(2.0L) * straight) : straight);
}

// Random costmap cells: lethal with probability `lethal`, otherwise a cost
// in [0, 254] drawn from a few bands so both cheap and expensive cells occur.
inline std::vector<std::uint8_t> random_costs(langnav::Rng& rng, int width, int height, double lethal) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * height);
  for (auto& c : out) {
    if (rng.chance(lethal)) {
      c = 255;
    } else if (rng.chance(0.5)) {
      c = 0;
    } else {
      c = static_cast<std::uint8_t>(rng.below(255));
    }
  }
  return out;
}

// Minimum over a densely sampled polyline of the distance to `p`, returned
// as an arc length.
inline double brute_force_projection(std::span<const langnav::Vec2> pts, langnav::Vec2 p, int samples_per_segment) {
  double best = std::numeric_limits<double>::infinity();
  double best_arc = 0.0;
  double arc = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double len = std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
    for (int k = 0; k <= samples_per_segment; ++k) {
      const double t = double(k) / samples_per_segment;
      const double x = pts[i - 1].x + t * (pts[i].x - pts[i - 1].x);
      const double y = pts[i - 1].y + t * (pts[i].y - pts[i - 1].y);
      const double d = std::hypot(x - p.x, y - p.y);
      if (d < best) {
        best = d;
        best_arc = arc + t * len;
      }
    }
    arc += len;
  }
  return best_arc;
}

}  // namespace oracle
