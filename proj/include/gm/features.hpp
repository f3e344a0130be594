#pragma once

#include <string>
#include <vector>

#include "gm/gestures.hpp"
#include "gm/pose_model.hpp"

namespace gm {

// Detection output for one unit within one track.
struct UnitTrackData {
  DetectionUnit unit;
  MovementSeries movement;
  std::vector<GestureSpan> spans;  // track-local frames, ascending
};

struct AnalyzedTrack {
  int frame_count = 0;
  MovementSeries body_movement;  // all layout points
  std::vector<UnitTrackData> units;
};

// Everything feature extraction needs for one sample. Separator frames are
// already gone; total frames is the sum of track lengths.
struct AnalyzedSample {
  std::string sample_id;
  std::vector<AnalyzedTrack> tracks;

  long total_frames() const;
};

// Per-gesture elapsed gap since the previous gesture of the same unit (track
// start for the first), as a proportion of the sample's total frames.
std::vector<double> gesture_surprise(const std::vector<GestureSpan>& spans,
                                     long total_frames);

// Order: frame movement, gesture movement share, surprise, movement std dev,
// gesture count. Gesture-based values are -1 when the sample has no gestures
// at all (count stays 0).
struct OverallFeatures {
  double frame_movement = 0.0;
  double gesture_movement_share = -1.0;
  double gesture_surprise = -1.0;
  double gesture_deviation = -1.0;
  double gesture_count = 0.0;
};

OverallFeatures overall_features(const AnalyzedSample& sample);

// Order: length, count, average movement, total movement, surprise. All -1
// when the localisation has no gestures.
struct LocalisedFeatures {
  double length = -1.0;
  double count = -1.0;
  double average_movement = -1.0;
  double total_movement = -1.0;
  double surprise = -1.0;
};

LocalisedFeatures localised_features(const AnalyzedSample& sample,
                                     const Localisation& localisation);

struct FeatureVector {
  std::string sample_id;
  std::vector<double> values;
};

// Notation tokens in vector order: O-FM O-GM O-GS O-GD O-GC, then
// [GL GC GA GT GS] per localisation (Hn-, He-, L-, F- prefixes).
std::vector<std::string> feature_names(
    const std::vector<Localisation>& localisations);

std::string localisation_token(LocalisationName name);

FeatureVector assemble_feature_vector(
    const AnalyzedSample& sample,
    const std::vector<Localisation>& localisations);

struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<std::string> sample_ids;
  std::vector<std::string> participant_ids;
  std::vector<std::vector<double>> rows;

  int feature_count() const { return static_cast<int>(names.size()); }
  int sample_count() const { return static_cast<int>(rows.size()); }

  // Rejects vectors whose layout disagrees with the matrix.
  void add(const FeatureVector& vec, const std::string& participant_id,
           const std::vector<std::string>& expected_names);
};

}  // namespace gm
