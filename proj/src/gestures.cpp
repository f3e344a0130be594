#include "gm/gestures.hpp"

#include <algorithm>
#include <cmath>

#include "gm/errors.hpp"

namespace gm {

void DetectorConfig::validate() const {
  if (window_length <= 0) {
    throw ValidationError("detector: window_length must be positive");
  }
  if (!auto_threshold && !(movement_threshold > 0)) {
    throw ValidationError("detector: movement_threshold must be positive");
  }
  if (end_patience <= 0) {
    throw ValidationError("detector: end_patience must be positive");
  }
  if (min_gesture_windows < 1) {
    throw ValidationError("detector: min_gesture_windows must be at least 1");
  }
}

namespace {

MovementSeries movement_over_points(const PoseTrack& track,
                                    const std::vector<int>& points) {
  const int n = track.frame_count();
  MovementSeries series;
  series.values.assign(n, 0.0);

  std::vector<int> usable;
  for (int p : points) {
    if (point_usable(track, p)) usable.push_back(p);
  }
  if (usable.empty()) {
    series.empty_unit = true;
    return series;
  }
  for (int t = 1; t < n; ++t) {
    double sum = 0.0;
    for (int p : usable) {
      const Vec2& a = track.frames[t - 1].coords[p];
      const Vec2& b = track.frames[t].coords[p];
      sum += std::hypot(b.x - a.x, b.y - a.y);
    }
    series.values[t] = sum / static_cast<double>(usable.size());
  }
  return series;
}

}  // namespace

MovementSeries unit_movement_series(const PoseTrack& track,
                                    const DetectionUnit& unit) {
  return movement_over_points(track, unit.point_indices);
}

MovementSeries whole_body_movement_series(const PoseTrack& track) {
  std::vector<int> all(KeypointLayout::total);
  for (int p = 0; p < KeypointLayout::total; ++p) all[p] = p;
  return movement_over_points(track, all);
}

WindowSeries window_average(const MovementSeries& series, int window_length) {
  if (window_length < 1) {
    throw ValidationError("window_average: window_length must be at least 1");
  }
  WindowSeries windows;
  windows.window_length = window_length;
  windows.source_frames = static_cast<int>(series.values.size());
  const int n = windows.source_frames;
  for (int start = 0; start < n; start += window_length) {
    int end = std::min(start + window_length, n);
    double sum = 0.0;
    for (int t = start; t < end; ++t) sum += series.values[t];
    windows.values.push_back(sum / static_cast<double>(end - start));
  }
  return windows;
}

std::vector<WindowSpan> detect_window_spans(const std::vector<double>& windows,
                                            double threshold,
                                            const DetectorConfig& cfg) {
  cfg.validate();
  std::vector<WindowSpan> spans;
  int start = -1;
  int below_count = 0;
  const int n = static_cast<int>(windows.size());
  for (int i = 0; i < n; ++i) {
    if (windows[i] >= threshold) {
      if (start < 0) start = i;
      below_count = 0;
    } else if (start >= 0) {
      ++below_count;
      if (below_count == cfg.end_patience) {
        // End is the final window that exceeded the threshold.
        int end = i - cfg.end_patience;
        if (end - start >= cfg.min_gesture_windows) {
          spans.push_back({start, end});
        }
        start = -1;
        below_count = 0;
      }
    }
  }
  if (start >= 0) {
    int end = n - 1;
    if (end - start >= cfg.min_gesture_windows) {
      spans.push_back({start, end});
    }
  }
  return spans;
}

std::vector<GestureSpan> detect_gestures(const WindowSeries& windows,
                                         double threshold,
                                         const DetectorConfig& cfg,
                                         UnitName unit, int track_index) {
  auto window_spans = detect_window_spans(windows.values, threshold, cfg);
  std::vector<GestureSpan> spans;
  spans.reserve(window_spans.size());
  const int l = windows.window_length;
  for (const auto& ws : window_spans) {
    GestureSpan g;
    g.unit = unit;
    g.track_index = track_index;
    g.start_frame = ws.start_window * l;
    g.end_frame = std::min((ws.end_window + 1) * l - 1, windows.source_frames - 1);
    spans.push_back(g);
  }
  return spans;
}

double auto_movement_threshold(const std::vector<WindowSeries>& all_windows) {
  std::vector<double> pooled;
  for (const auto& ws : all_windows) {
    pooled.insert(pooled.end(), ws.values.begin(), ws.values.end());
  }
  if (pooled.empty()) {
    throw ValidationError("auto threshold: no window averages available");
  }
  std::sort(pooled.begin(), pooled.end());
  double rank = 0.75 * static_cast<double>(pooled.size() - 1);
  std::size_t lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= pooled.size()) return pooled.back();
  double frac = rank - static_cast<double>(lo);
  return pooled[lo] + frac * (pooled[lo + 1] - pooled[lo]);
}

}  // namespace gm
