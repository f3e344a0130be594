#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gm/preparation.hpp"
#include "gm/rng.hpp"
#include "test_support.hpp"

using namespace gm;

namespace {

// Reference gap filler, written against the recovery contract rather than the
// implementation: interior runs are linear interpolation between the nearest
// detected neighbours, boundary runs copy the nearest detected value.
std::vector<double> fill_gaps_reference(const std::vector<double>& values,
                                        const std::vector<bool>& detected) {
  const int n = static_cast<int>(values.size());
  std::vector<double> out(values);
  int first = -1, last = -1;
  for (int t = 0; t < n; ++t) {
    if (detected[t]) {
      if (first < 0) first = t;
      last = t;
    }
  }
  if (first < 0) return out;  // untouched; caller handles never-detected
  for (int t = 0; t < n; ++t) {
    if (detected[t]) continue;
    if (t < first) {
      out[t] = values[first];
    } else if (t > last) {
      out[t] = values[last];
    } else {
      int a = t;
      while (!detected[a]) --a;
      int b = t;
      while (!detected[b]) ++b;
      double f = static_cast<double>(t - a) / static_cast<double>(b - a);
      out[t] = values[a] + f * (values[b] - values[a]);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("recovery matches the interpolation oracle on random fixtures") {
  Rng rng(2024);
  for (int fixture = 0; fixture < 100; ++fixture) {
    const int frames = 20 + static_cast<int>(rng.next_below(120));
    // smooth-ish per-point motion so interpolation errors would stand out
    std::vector<double> base_x(KeypointLayout::total), vel_x(base_x.size());
    std::vector<double> base_y(base_x.size()), vel_y(base_x.size());
    for (std::size_t p = 0; p < base_x.size(); ++p) {
      base_x[p] = rng.uniform(0, 500);
      base_y[p] = rng.uniform(0, 500);
      vel_x[p] = rng.uniform(-2, 2);
      vel_y[p] = rng.uniform(-2, 2);
    }
    auto track = testsupport::make_track(frames, [&](int p, int t) {
      return Vec2{base_x[p] + vel_x[p] * t + 3.0 * std::sin(0.1 * t + p),
                  base_y[p] + vel_y[p] * t + 2.0 * std::cos(0.05 * t)};
    });

    // knock out random runs per point; point 7 loses every frame
    for (int p = 0; p < KeypointLayout::total; ++p) {
      int losses = static_cast<int>(rng.next_below(4));
      for (int l = 0; l < losses; ++l) {
        int start = static_cast<int>(rng.next_below(frames));
        int len = 1 + static_cast<int>(rng.next_below(6));
        for (int t = start; t < std::min(frames, start + len); ++t) {
          track.frames[t].detected[p] = 0;
        }
      }
    }
    for (int t = 0; t < frames; ++t) track.frames[t].detected[7] = 0;
    // keep at least one frame detectable overall
    track.frames[0].detected[3] = 1;

    std::vector<std::vector<double>> truth_x(KeypointLayout::total),
        truth_y(KeypointLayout::total);
    std::vector<std::vector<bool>> mask(KeypointLayout::total);
    for (int p = 0; p < KeypointLayout::total; ++p) {
      for (int t = 0; t < frames; ++t) {
        truth_x[p].push_back(track.frames[t].coords[p].x);
        truth_y[p].push_back(track.frames[t].coords[p].y);
        mask[p].push_back(track.frames[t].detected[p] != 0);
      }
    }

    PoseTrack recovered = recover_partial_detections(track);
    for (int p = 0; p < KeypointLayout::total; ++p) {
      bool ever = false;
      for (int t = 0; t < frames; ++t) ever = ever || mask[p][t];
      if (!ever) {
        for (int t = 0; t < frames; ++t) {
          CHECK(recovered.frames[t].coords[p].x == -1.0);
          CHECK(recovered.frames[t].coords[p].y == -1.0);
          CHECK(!recovered.frames[t].detected[p]);
        }
        continue;
      }
      auto want_x = fill_gaps_reference(truth_x[p], mask[p]);
      auto want_y = fill_gaps_reference(truth_y[p], mask[p]);
      for (int t = 0; t < frames; ++t) {
        CHECK(std::abs(recovered.frames[t].coords[p].x - want_x[t]) <= 1e-9);
        CHECK(std::abs(recovered.frames[t].coords[p].y - want_y[t]) <= 1e-9);
        CHECK(recovered.frames[t].detected[p]);
      }
    }
  }
}

TEST_CASE("recovery leaves fully detected tracks untouched") {
  auto track = testsupport::make_static_track(20);
  auto recovered = recover_partial_detections(track);
  for (int t = 0; t < 20; ++t) {
    for (int p = 0; p < KeypointLayout::total; ++p) {
      CHECK(recovered.frames[t].coords[p].x == track.frames[t].coords[p].x);
    }
  }
}

TEST_CASE("smoothing keeps a constant series") {
  SmoothingConfig cfg;
  std::vector<double> values(192, 3.7);
  smooth_channel(values, cfg);
  for (double v : values) CHECK(std::abs(v - 3.7) < 1e-9);
}

TEST_CASE("smoothing preserves a kept-bin sinusoid") {
  SmoothingConfig cfg;  // keeps bins 0..4 of each 64-frame window
  const int n = 128;
  std::vector<double> values(n), original(n);
  for (int t = 0; t < n; ++t) {
    values[t] = std::sin(2.0 * std::numbers::pi * 2.0 * (t % 64) / 64.0);
    original[t] = values[t];
  }
  smooth_channel(values, cfg);
  double err = 0.0, norm = 0.0;
  for (int t = 0; t < n; ++t) {
    err += (values[t] - original[t]) * (values[t] - original[t]);
    norm += original[t] * original[t];
  }
  CHECK(std::sqrt(err / norm) < 1e-9);
}

TEST_CASE("smoothing removes an above-cutoff sinusoid") {
  SmoothingConfig cfg;
  const int n = 128;
  std::vector<double> values(n);
  for (int t = 0; t < n; ++t) {
    values[t] = std::sin(2.0 * std::numbers::pi * 10.0 * (t % 64) / 64.0);
  }
  smooth_channel(values, cfg);
  for (double v : values) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("smoothing preserves each window's mean") {
  SmoothingConfig cfg;
  Rng rng(5);
  const int n = 64 * 3 + 40;  // three full windows plus a 40-frame tail
  std::vector<double> values(n), original(n);
  for (int t = 0; t < n; ++t) {
    values[t] = rng.uniform(-5, 5);
    original[t] = values[t];
  }
  smooth_channel(values, cfg);
  int start = 0;
  while (start < n) {
    int len = std::min(64, n - start);
    double before = 0.0, after = 0.0;
    for (int t = start; t < start + len; ++t) {
      before += original[t];
      after += values[t];
    }
    CHECK(std::abs(before - after) / len < 1e-9);
    start += len;
  }
}

TEST_CASE("short tails below twice the kept bins stay raw") {
  SmoothingConfig cfg;  // tail must be >= 10 frames to be transformed
  const int n = 64 + 8;
  Rng rng(6);
  std::vector<double> values(n), original(n);
  for (int t = 0; t < n; ++t) {
    values[t] = rng.uniform(-5, 5);
    original[t] = values[t];
  }
  smooth_channel(values, cfg);
  for (int t = 64; t < n; ++t) CHECK(values[t] == original[t]);
  // ... while a 10-frame tail is transformed
  std::vector<double> longer(64 + 10);
  for (auto& v : longer) v = rng.uniform(-5, 5);
  auto copy = longer;
  smooth_channel(longer, cfg);
  bool changed = false;
  for (int t = 64; t < 74; ++t) changed = changed || longer[t] != copy[t];
  CHECK(changed);
}

TEST_CASE("track smoothing skips never-detected points") {
  auto track = testsupport::make_track(70, [&](int p, int t) {
    return Vec2{100.0 + p + std::sin(0.8 * t), 50.0 + p * 0.5};
  });
  for (int t = 0; t < 70; ++t) {
    track.frames[t].detected[9] = 0;
    track.frames[t].coords[9] = {-1.0, -1.0};
  }
  SmoothingConfig cfg;
  auto smoothed = smooth_track(track, cfg);
  for (int t = 0; t < 70; ++t) {
    CHECK(smoothed.frames[t].coords[9].x == -1.0);
    CHECK(!smoothed.frames[t].detected[9]);
  }
  // a detectable point's high-frequency wiggle shrinks
  double raw_var = 0.0, smooth_var = 0.0;
  for (int t = 1; t < 64; ++t) {
    raw_var += std::abs(track.frames[t].coords[3].x -
                        track.frames[t - 1].coords[3].x);
    smooth_var += std::abs(smoothed.frames[t].coords[3].x -
                           smoothed.frames[t - 1].coords[3].x);
  }
  CHECK(smooth_var < 0.2 * raw_var);
}

TEST_CASE("smoothing config validation") {
  SmoothingConfig bad;
  bad.window_length = 8;  // below 2 x keep_frequencies
  CHECK_THROWS(bad.validate());
  SmoothingConfig ok;
  ok.validate();
}
