#include "gm/preparation.hpp"

#include <cmath>
#include <vector>

#include "gm/errors.hpp"

namespace gm {

void SmoothingConfig::validate() const {
  if (window_length <= 0 || keep_frequencies <= 0) {
    throw ValidationError("smoothing: window_length and keep_frequencies must be positive");
  }
  if (window_length < 2 * keep_frequencies) {
    throw ValidationError("smoothing: window_length must be at least 2 x keep_frequencies");
  }
}

PoseTrack recover_partial_detections(PoseTrack track) {
  const int n = track.frame_count();
  if (n == 0) throw ValidationError("recover_partial_detections: empty track");
  const int points = static_cast<int>(track.frames[0].coords.size());

  for (int p = 0; p < points; ++p) {
    bool any_detected = false;
    for (const auto& f : track.frames) {
      if (f.detected[p]) {
        any_detected = true;
        break;
      }
    }
    if (!any_detected) {
      for (auto& f : track.frames) f.coords[p] = {-1.0, -1.0};
      continue;
    }

    int i = 0;
    while (i < n) {
      if (track.frames[i].detected[p]) {
        ++i;
        continue;
      }
      int run_start = i;
      while (i < n && !track.frames[i].detected[p]) ++i;
      int run_end = i - 1;  // inclusive
      int prev = run_start - 1;
      int next = i < n ? i : -1;
      for (int t = run_start; t <= run_end; ++t) {
        Vec2 v;
        if (prev >= 0 && next >= 0) {
          double alpha = static_cast<double>(t - prev) / (next - prev);
          const Vec2& a = track.frames[prev].coords[p];
          const Vec2& b = track.frames[next].coords[p];
          v = {a.x + alpha * (b.x - a.x), a.y + alpha * (b.y - a.y)};
        } else if (prev >= 0) {
          v = track.frames[prev].coords[p];
        } else {
          v = track.frames[next].coords[p];
        }
        track.frames[t].coords[p] = v;
        track.frames[t].detected[p] = 1;
      }
    }
  }
  return track;
}

namespace {

// cos/sin basis rows for the retained bins of an n-sample window.
struct Basis {
  int n = 0;
  int bins = 0;
  std::vector<double> cos_table;  // bins x n
  std::vector<double> sin_table;

  void build(int length, int keep) {
    n = length;
    bins = keep;
    cos_table.assign(static_cast<std::size_t>(bins) * n, 0.0);
    sin_table.assign(static_cast<std::size_t>(bins) * n, 0.0);
    for (int k = 0; k < bins; ++k) {
      for (int t = 0; t < n; ++t) {
        double angle = 2.0 * M_PI * k * t / n;
        cos_table[static_cast<std::size_t>(k) * n + t] = std::cos(angle);
        sin_table[static_cast<std::size_t>(k) * n + t] = std::sin(angle);
      }
    }
  }
};

void smooth_window(std::span<double> window, const Basis& basis) {
  const int n = basis.n;
  const int bins = basis.bins;
  // Forward coefficients for the retained bins only.
  std::vector<double> re(bins, 0.0), im(bins, 0.0);
  for (int k = 0; k < bins; ++k) {
    const double* c = &basis.cos_table[static_cast<std::size_t>(k) * n];
    const double* s = &basis.sin_table[static_cast<std::size_t>(k) * n];
    double sum_re = 0.0, sum_im = 0.0;
    for (int t = 0; t < n; ++t) {
      sum_re += window[t] * c[t];
      sum_im -= window[t] * s[t];
    }
    re[k] = sum_re;
    im[k] = sum_im;
  }
  // Inverse with bins >= keep zeroed. Conjugate partners of bins 1..keep-1
  // fold into the factor 2 (all retained bins lie strictly below Nyquist).
  for (int t = 0; t < n; ++t) {
    double acc = re[0];
    for (int k = 1; k < bins; ++k) {
      const double* c = &basis.cos_table[static_cast<std::size_t>(k) * n];
      const double* s = &basis.sin_table[static_cast<std::size_t>(k) * n];
      acc += 2.0 * (re[k] * c[t] - im[k] * s[t]);
    }
    window[t] = acc / n;
  }
}

}  // namespace

void smooth_channel(std::span<double> values, const SmoothingConfig& cfg) {
  cfg.validate();
  const int total = static_cast<int>(values.size());
  const int full = cfg.window_length;

  Basis basis;
  basis.build(full, cfg.keep_frequencies);

  int offset = 0;
  while (offset + full <= total) {
    smooth_window(values.subspan(offset, full), basis);
    offset += full;
  }
  int tail = total - offset;
  if (tail >= 2 * cfg.keep_frequencies) {
    Basis tail_basis;
    tail_basis.build(tail, cfg.keep_frequencies);
    smooth_window(values.subspan(offset, tail), tail_basis);
  }
  // Shorter tails are left unsmoothed.
}

PoseTrack smooth_track(PoseTrack track, const SmoothingConfig& cfg) {
  cfg.validate();
  const int n = track.frame_count();
  if (n == 0) return track;
  const int points = static_cast<int>(track.frames[0].coords.size());

  std::vector<double> channel(n);
  for (int p = 0; p < points; ++p) {
    if (!point_usable(track, p)) continue;
    for (int axis = 0; axis < 2; ++axis) {
      for (int t = 0; t < n; ++t) {
        const Vec2& v = track.frames[t].coords[p];
        channel[t] = axis == 0 ? v.x : v.y;
      }
      smooth_channel(channel, cfg);
      for (int t = 0; t < n; ++t) {
        Vec2& v = track.frames[t].coords[p];
        (axis == 0 ? v.x : v.y) = channel[t];
      }
    }
  }
  return track;
}

}  // namespace gm
