#pragma once

#include <span>

#include "gm/pose_model.hpp"

namespace gm {

struct SmoothingConfig {
  int window_length = 64;
  int keep_frequencies = 5;

  void validate() const;
};

// Fills partial detection losses per point: interior runs by linear
// interpolation between the two closest detected frames, boundary runs by
// holding the nearest detected value. Recovered frames are marked detected.
// A point never detected in the track gets coords (-1, -1) in every frame and
// stays undetected (unusable for movement).
PoseTrack recover_partial_detections(PoseTrack track);

// Low-pass smoothing of one coordinate channel: consecutive windows of
// window_length frames; within each window, frequency bins at and above
// keep_frequencies are zeroed (conjugate partners of the kept bins retained so
// the result is real) and the window is reconstructed. A final short window is
// transformed at its own length, or left as-is when shorter than
// 2 x keep_frequencies.
void smooth_channel(std::span<double> values, const SmoothingConfig& cfg);

// Applies smooth_channel to every point's x and y series independently.
// Fully-undetected points are left as stored by recovery.
PoseTrack smooth_track(PoseTrack track, const SmoothingConfig& cfg);

}  // namespace gm
