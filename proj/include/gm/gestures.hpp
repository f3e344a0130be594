#pragma once

#include <vector>

#include "gm/pose_model.hpp"

namespace gm {

// Per-frame average movement of a point group. values[t] is the mean L2
// displacement into frame t (values[0] = 0), so the series has one entry per
// track frame.
struct MovementSeries {
  std::vector<double> values;
  bool empty_unit = false;  // no usable points contributed
};

struct WindowSeries {
  std::vector<double> values;  // mean movement per window
  int window_length = 10;
  int source_frames = 0;
};

// Inclusive frame range of sustained movement in one detection unit. Frames
// are track local; spans never cross a track boundary.
struct GestureSpan {
  UnitName unit = UnitName::head;
  int start_frame = 0;
  int end_frame = 0;
  int track_index = 0;
};

struct DetectorConfig {
  int window_length = 10;          // frames per detection window
  double movement_threshold = 0.5; // px/frame; ignored when auto_threshold
  bool auto_threshold = false;     // per-sample 75th percentile instead
  int end_patience = 3;            // consecutive quiet windows that end a gesture
  int min_gesture_windows = 3;     // minimum end - start window distance

  void validate() const;
};

// Mean per-frame displacement over the unit's usable points. Unusable points
// are excluded from the denominator; a unit with none yields all zeros and is
// flagged empty.
MovementSeries unit_movement_series(const PoseTrack& track,
                                    const DetectionUnit& unit);

// Same, over every usable layout point.
MovementSeries whole_body_movement_series(const PoseTrack& track);

WindowSeries window_average(const MovementSeries& series, int window_length);

struct WindowSpan {
  int start_window = 0;
  int end_window = 0;  // inclusive
};

// The detection scan over window averages: a gesture starts at the first
// window at or above the threshold and ends before end_patience consecutive
// windows below it; an open gesture is closed at the final window. Kept iff
// end - start >= min_gesture_windows.
std::vector<WindowSpan> detect_window_spans(const std::vector<double>& windows,
                                            double threshold,
                                            const DetectorConfig& cfg);

// Window spans converted to track-local frame ranges.
std::vector<GestureSpan> detect_gestures(const WindowSeries& windows,
                                         double threshold,
                                         const DetectorConfig& cfg,
                                         UnitName unit, int track_index);

// 75th percentile (linear interpolation between order statistics) of all
// window averages pooled across a sample's tracked units.
double auto_movement_threshold(const std::vector<WindowSeries>& all_windows);

}  // namespace gm
