#include "langnav/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "langnav/error.hpp"

namespace langnav::kernels {
namespace {

// Felzenszwalb-Huttenlocher lower envelope of parabolas, one line at a time.
void edt_1d(const double* f, double* d, int n, std::ptrdiff_t stride, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (int q = 1; q < n; ++q) {
    const double fq = f[q * stride];
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((fq + double(q) * q) - (f[p * stride] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k] || k == 0) break;
      --k;
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere
      v[0] = q;
      z[0] = -kFar;
      z[1] = kFar;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q * stride] = std::min(kFar, dq * dq + f[v[k] * stride]);
  }
}

template <typename Fn>
void for_range(int n, Execution exec, Fn&& fn) {
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) fn(i);
  } else {
    for (int i = 0; i < n; ++i) fn(i);
  }
}

void add_scaled_into(ModelParams& total, const ModelParams& part) {
  auto dst = tensor_views(total);
  auto src = tensor_views(static_cast<const ModelParams&>(part));
  for (std::size_t t = 0; t < dst.size(); ++t) {
    for (std::size_t i = 0; i < dst[t].size(); ++i) dst[t][i] += src[t][i];
  }
}

void set_zero(ModelParams& p) {
  for (auto view : tensor_views(p)) std::fill(view.begin(), view.end(), 0.0);
}

}  // namespace

std::vector<double> squared_distance_transform(std::span<const std::uint8_t> seeds, int width, int height,
                                               Execution exec) {
  if (width <= 0 || height <= 0 || seeds.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::ShapeMismatch, "distance transform: seed mask does not match grid size");
  }
  std::vector<double> f(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) f[i] = seeds[i] ? 0.0 : kFar;
  std::vector<double> tmp(f.size());
  const int longest = std::max(width, height);
  // columns
  auto column = [&](int x) {
    std::vector<int> v(static_cast<std::size_t>(longest));
    std::vector<double> z(static_cast<std::size_t>(longest) + 1);
    edt_1d(f.data() + x, tmp.data() + x, height, width, v.data(), z.data());
  };
  auto row = [&](int y) {
    std::vector<int> v(static_cast<std::size_t>(longest));
    std::vector<double> z(static_cast<std::size_t>(longest) + 1);
    const std::size_t off = static_cast<std::size_t>(y) * width;
    edt_1d(tmp.data() + off, f.data() + off, width, 1, v.data(), z.data());
  };
  for_range(width, exec, column);
  for_range(height, exec, row);
  return f;
}

void rasterize_disks(std::span<std::uint8_t> mask, int width, int height, Vec2 origin, double resolution,
                     std::span<const Disk> disks, Execution exec) {
  if (mask.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::ShapeMismatch, "rasterize: mask does not match grid size");
  }
  for_range(height, exec, [&](int y) {
    const double cy = origin.y + (y + 0.5) * resolution;
    for (int x = 0; x < width; ++x) {
      const double cx = origin.x + (x + 0.5) * resolution;
      for (const auto& d : disks) {
        const double dx = cx - d.center.x;
        const double dy = cy - d.center.y;
        if (dx * dx + dy * dy <= d.radius * d.radius) {
          mask[static_cast<std::size_t>(y) * width + x] = 1;
          break;
        }
      }
    }
  });
}

std::uint8_t inflation_cost(double distance_m, const InflationParams& params) {
  if (distance_m > params.inflation_radius) return 0;
  const double c = std::round(254.0 * std::exp(-params.decay * (distance_m - params.robot_radius)));
  return static_cast<std::uint8_t>(std::min(254.0, c));
}

std::vector<std::uint8_t> inflate(std::span<const std::uint8_t> lethal, int width, int height,
                                  const InflationParams& params, Execution exec) {
  const auto sq = squared_distance_transform(lethal, width, height, exec);
  std::vector<std::uint8_t> cost(sq.size(), 0);
  for_range(height, exec, [&](int y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      if (lethal[i]) {
        cost[i] = kLethal;
      } else if (sq[i] < kFar) {
        cost[i] = inflation_cost(std::sqrt(sq[i]) * params.resolution, params);
      }
    }
  });
  return cost;
}

LossAndGradient batch_gradients(std::span<const LabeledPhrase> batch, const ModelParams& params, Architecture arch,
                                Execution exec) {
  if (batch.empty()) throw Error(ErrorCode::EmptyInput, "gradient of an empty batch");
  const int n = static_cast<int>(batch.size());
  const double scale = 1.0 / n;
  LossAndGradient out{0.0, zeros_like(params)};
  std::vector<double> losses(batch.size());
  if (exec == Execution::Parallel) {
    std::vector<ModelParams> parts(batch.size(), zeros_like(params));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
      losses[i] = accumulate_sample_gradient(batch[i], params, arch, parts[i], scale);
    }
    for (int i = 0; i < n; ++i) add_scaled_into(out.gradient, parts[i]);
  } else {
    ModelParams part = zeros_like(params);
    for (int i = 0; i < n; ++i) {
      set_zero(part);
      losses[i] = accumulate_sample_gradient(batch[i], params, arch, part, scale);
      add_scaled_into(out.gradient, part);
    }
  }
  for (double l : losses) out.loss += l;
  out.loss *= scale;
  return out;
}

std::vector<Classification> batch_classify(std::span<const Phrase> phrases, const ModelParams& params,
                                           Architecture arch, Execution exec) {
  std::vector<Classification> out(phrases.size());
  for_range(static_cast<int>(phrases.size()), exec,
            [&](int i) { out[i] = classify(phrases[i].tokens, params, arch); });
  return out;
}

}  // namespace langnav::kernels
