#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gm {

// BODY_25 skeleton plus two 21-point hand blocks, 67 points total.
// Index space: 0..24 body, 25..45 left hand, 46..66 right hand.
struct KeypointLayout {
  static constexpr int body_point_count = 25;
  static constexpr int hand_point_count = 21;
  static constexpr int total = body_point_count + 2 * hand_point_count;
  static constexpr int left_hand_offset = body_point_count;
  static constexpr int right_hand_offset = body_point_count + hand_point_count;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct PoseFrame {
  std::vector<Vec2> coords;       // length = KeypointLayout::total
  std::vector<std::uint8_t> detected;  // same length; 0 when estimator emitted no point

  bool full_failure() const;  // no point detected at all
};

// Contiguous run of frames between full-detection failures.
struct PoseTrack {
  std::vector<PoseFrame> frames;
  double fps = 30.0;
  int origin_start = 0;  // frame range within the source sample, inclusive
  int origin_end = 0;

  int frame_count() const { return static_cast<int>(frames.size()); }
};

// A point is usable within a track if it was detected in at least one frame.
// After recovery this means it is detected in every frame.
bool point_usable(const PoseTrack& track, int point);

enum class UnitName {
  left_hand,
  right_hand,
  head,
  left_knee,
  right_knee,
  left_foot,
  right_foot,
};

// Smallest point group scanned for gestures.
struct DetectionUnit {
  UnitName name;
  std::vector<int> point_indices;
};

enum class LocalisationName { hands, head, legs, feet };

// Body region whose units' gestures pool into one feature block.
struct Localisation {
  LocalisationName name;
  std::vector<DetectionUnit> units;
};

const char* to_string(UnitName name);
const char* to_string(LocalisationName name);
UnitName unit_from_string(const std::string& s);
LocalisationName localisation_from_string(const std::string& s);

DetectionUnit detection_unit(UnitName name);

// Fixed unit mapping for one of the four localisation names.
std::vector<DetectionUnit> localisation_points(LocalisationName name);

Localisation make_localisation(LocalisationName name);

// Validates, deduplicates, and orders the set canonically
// (hands, head, legs, feet).
std::vector<Localisation> make_localisations(
    const std::vector<LocalisationName>& names);

// hands, head, legs. Feet is opt-in.
std::vector<Localisation> default_localisations();

}  // namespace gm
