#include <cmath>

#include "doctest.h"
#include "langnav/kernels.hpp"
#include "langnav/random.hpp"
#include "oracles.hpp"

using namespace langnav;
using namespace langnav::kernels;

namespace {

std::vector<std::uint8_t> random_mask(Rng& rng, int w, int h, double density) {
  std::vector<std::uint8_t> m(static_cast<std::size_t>(w) * h);
  for (auto& v : m) v = rng.chance(density) ? 1 : 0;
  return m;
}

}  // namespace

TEST_CASE("distance transform equals brute force") {
  Rng rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 1 + static_cast<int>(rng.below(25));
    const int h = 1 + static_cast<int>(rng.below(25));
    const auto m = random_mask(rng, w, h, trial % 4 == 0 ? 0.005 : 0.08);
    const auto want = oracle::brute_force_sq_edt(m, w, h);
    CHECK(squared_distance_transform(m, w, h, Execution::Serial) == want);
    CHECK(squared_distance_transform(m, w, h, Execution::Parallel) == want);
  }
  const std::vector<std::uint8_t> none(12, 0);
  for (double d : squared_distance_transform(none, 4, 3)) CHECK(d == kFar);
  CHECK_THROWS(squared_distance_transform(none, 5, 3));
}

TEST_CASE("disk rasterization follows the region predicate") {
  Rng rng(2);
  const int w = 60;
  const int h = 50;
  const Vec2 origin{-1.3, 2.1};
  const double res = 0.05;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Disk> disks;
    for (int k = 0; k < 4; ++k) {
      disks.push_back({{origin.x + rng.uniform(-0.5, 3.5), origin.y + rng.uniform(-0.5, 3.0)}, rng.uniform(0.05, 0.9)});
    }
    std::vector<std::uint8_t> serial(w * h, 0);
    std::vector<std::uint8_t> parallel(w * h, 0);
    rasterize_disks(serial, w, h, origin, res, disks, Execution::Serial);
    rasterize_disks(parallel, w, h, origin, res, disks, Execution::Parallel);
    CHECK(serial == parallel);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double cx = origin.x + (x + 0.5) * res;
        const double cy = origin.y + (y + 0.5) * res;
        bool inside = false;
        for (const auto& d : disks) {
          inside = inside || (cx - d.center.x) * (cx - d.center.x) + (cy - d.center.y) * (cy - d.center.y) <=
                                 d.radius * d.radius;
        }
        CHECK(serial[y * w + x] == (inside ? 1 : 0));
      }
    }
  }
}

TEST_CASE("inflation profile") {
  const InflationParams p;
  CHECK(inflation_cost(0.0, p) == 254);
  CHECK(inflation_cost(0.2, p) == 254);
  CHECK(inflation_cost(0.3, p) == static_cast<int>(std::round(254.0 * std::exp(-0.3))));
  CHECK(inflation_cost(0.6, p) == static_cast<int>(std::round(254.0 * std::exp(-1.2))));
  CHECK(inflation_cost(0.6001, p) == 0);
  int prev = 255;
  for (double d = 0.0; d < 1.0; d += 0.001) {
    const int c = inflation_cost(d, p);
    CHECK(c <= prev);
    prev = c;
  }
}

TEST_CASE("inflate serial and parallel agree") {
  Rng rng(3);
  const auto m = random_mask(rng, 70, 40, 0.01);
  const auto a = inflate(m, 70, 40, {}, Execution::Serial);
  CHECK(a == inflate(m, 70, 40, {}, Execution::Parallel));
  for (std::size_t i = 0; i < m.size(); ++i) CHECK((a[i] == kLethal) == (m[i] == 1));
}

TEST_CASE("batch gradients are bit-identical across executions") {
  Rng rng(4);
  for (auto arch : {Architecture::Lstm, Architecture::BiLstm, Architecture::AttBiLstm}) {
    auto params = init_params(arch, {20, 6, 7}, 2);
    oracle::scramble(params, rng, 0.4);
    const auto batch = oracle::random_batch(rng, 33, 20, 8);
    const auto s = batch_gradients(batch, params, arch, Execution::Serial);
    const auto p = batch_gradients(batch, params, arch, Execution::Parallel);
    CHECK(s.loss == p.loss);
    const auto vs = tensor_views(s.gradient);
    const auto vp = tensor_views(p.gradient);
    for (std::size_t t = 0; t < vs.size(); ++t) CHECK(std::equal(vs[t].begin(), vs[t].end(), vp[t].begin()));
  }
}

TEST_CASE("batch classify matches per-phrase classify") {
  Rng rng(5);
  auto params = init_params(Architecture::AttBiLstm, {20, 6, 7}, 2);
  oracle::scramble(params, rng, 0.5);
  std::vector<Phrase> phrases;
  for (const auto& s : oracle::random_batch(rng, 25, 20, 8)) phrases.push_back(s.phrase);
  const auto out = batch_classify(phrases, params, Architecture::AttBiLstm, Execution::Parallel);
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    const auto one = classify(phrases[i].tokens, params, Architecture::AttBiLstm);
    CHECK(out[i].label == one.label);
    CHECK(out[i].probs == one.probs);
  }
}
