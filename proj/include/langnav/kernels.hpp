#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "langnav/classifier.hpp"
#include "langnav/geometry.hpp"

// Data-parallel kernels. Every kernel takes an Execution tag; Serial is the
// reference and Parallel (OpenMP) must produce bit-identical results.
namespace langnav::kernels {

enum class Execution { Serial, Parallel };

// Large finite stand-in for "no seed", so the lower envelope never sees inf - inf.
inline constexpr double kFar = 1e20;

// Exact squared Euclidean distance (in cells) from every cell to the nearest
// seed cell, measured between cell centers. Row-major, width x height.
// Cells are kFar when there is no seed at all.
std::vector<double> squared_distance_transform(std::span<const std::uint8_t> seeds, int width, int height,
                                               Execution exec = Execution::Serial);

struct Disk {
  Vec2 center;
  double radius = 0.0;
};

// Sets mask[i] = 1 for every cell whose center satisfies
// (x - x0)^2 + (y - y0)^2 <= a^2 for some disk. Other cells are left as they are.
void rasterize_disks(std::span<std::uint8_t> mask, int width, int height, Vec2 origin, double resolution,
                     std::span<const Disk> disks, Execution exec = Execution::Serial);

struct InflationParams {
  double resolution = 0.05;
  double robot_radius = 0.2;
  double inflation_radius = 0.6;
  double decay = 3.0;
};

inline constexpr std::uint8_t kLethal = 255;
inline constexpr std::uint8_t kInscribed = 254;

// Lethal cells get 255; others min(254, round(254 exp(-decay (d - r_robot))))
// when the distance d to the nearest lethal cell is within the inflation
// radius, else 0.
std::vector<std::uint8_t> inflate(std::span<const std::uint8_t> lethal, int width, int height,
                                  const InflationParams& params, Execution exec = Execution::Serial);

std::uint8_t inflation_cost(double distance_m, const InflationParams& params);

// Mean loss and gradient. Per-sample gradients go to private buffers and are
// summed in sample order, so both executions agree bit for bit.
LossAndGradient batch_gradients(std::span<const LabeledPhrase> batch, const ModelParams& params, Architecture arch,
                                Execution exec = Execution::Serial);

std::vector<Classification> batch_classify(std::span<const Phrase> phrases, const ModelParams& params,
                                           Architecture arch, Execution exec = Execution::Serial);

}  // namespace langnav::kernels
