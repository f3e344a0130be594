#include "gm/features.hpp"

#include <cmath>

#include "gm/errors.hpp"

namespace gm {

long AnalyzedSample::total_frames() const {
  long total = 0;
  for (const auto& track : tracks) total += track.frame_count;
  return total;
}

std::vector<double> gesture_surprise(const std::vector<GestureSpan>& spans,
                                     long total_frames) {
  std::vector<double> out;
  out.reserve(spans.size());
  const double n = static_cast<double>(total_frames);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    long gap = i == 0 ? spans[i].start_frame
                      : spans[i].start_frame - spans[i - 1].end_frame - 1;
    out.push_back(static_cast<double>(gap) / n);
  }
  return out;
}

namespace {

double span_movement_sum(const UnitTrackData& unit, const GestureSpan& span) {
  double sum = 0.0;
  for (int t = span.start_frame; t <= span.end_frame; ++t) {
    sum += unit.movement.values[t];
  }
  return sum;
}

double span_movement_stddev(const UnitTrackData& unit,
                            const GestureSpan& span) {
  int len = span.end_frame - span.start_frame + 1;
  double mean = span_movement_sum(unit, span) / len;
  double acc = 0.0;
  for (int t = span.start_frame; t <= span.end_frame; ++t) {
    double d = unit.movement.values[t] - mean;
    acc += d * d;
  }
  return std::sqrt(acc / len);
}

}  // namespace

OverallFeatures overall_features(const AnalyzedSample& sample) {
  OverallFeatures out;
  const long total_frames = sample.total_frames();
  if (total_frames == 0) throw ValidationError("overall_features: empty sample");

  double body_sum = 0.0;
  double body_in_gesture = 0.0;
  long gesture_count = 0;
  double surprise_sum = 0.0;
  double deviation_sum = 0.0;

  for (const auto& track : sample.tracks) {
    // Union of gesture-active frames across all units; each frame counts once.
    std::vector<std::uint8_t> active(track.frame_count, 0);
    for (const auto& unit : track.units) {
      for (const auto& span : unit.spans) {
        for (int t = span.start_frame; t <= span.end_frame; ++t) active[t] = 1;
      }
      gesture_count += static_cast<long>(unit.spans.size());
      for (double s : gesture_surprise(unit.spans, total_frames)) {
        surprise_sum += s;
      }
      for (const auto& span : unit.spans) {
        deviation_sum += span_movement_stddev(unit, span);
      }
    }
    for (int t = 0; t < track.frame_count; ++t) {
      body_sum += track.body_movement.values[t];
      if (active[t]) body_in_gesture += track.body_movement.values[t];
    }
  }

  out.frame_movement = body_sum / static_cast<double>(total_frames);
  if (gesture_count == 0) {
    out.gesture_movement_share = -1.0;
    out.gesture_surprise = -1.0;
    out.gesture_deviation = -1.0;
    out.gesture_count = 0.0;
  } else {
    out.gesture_movement_share = body_sum > 0.0 ? body_in_gesture / body_sum : 0.0;
    out.gesture_surprise = surprise_sum / gesture_count;
    out.gesture_deviation = deviation_sum / gesture_count;
    out.gesture_count =
        static_cast<double>(gesture_count) / static_cast<double>(total_frames);
  }
  return out;
}

LocalisedFeatures localised_features(const AnalyzedSample& sample,
                                     const Localisation& localisation) {
  LocalisedFeatures out;
  const long total_frames = sample.total_frames();
  if (total_frames == 0) {
    throw ValidationError("localised_features: empty sample");
  }

  auto in_localisation = [&](UnitName name) {
    for (const auto& unit : localisation.units) {
      if (unit.name == name) return true;
    }
    return false;
  };

  long count = 0;
  long length_sum = 0;
  double movement_sum = 0.0;
  double mean_movement_sum = 0.0;
  double surprise_sum = 0.0;

  for (const auto& track : sample.tracks) {
    for (const auto& unit : track.units) {
      if (!in_localisation(unit.unit.name)) continue;
      count += static_cast<long>(unit.spans.size());
      for (const auto& span : unit.spans) {
        int len = span.end_frame - span.start_frame + 1;
        length_sum += len;
        double sum = span_movement_sum(unit, span);
        movement_sum += sum;
        mean_movement_sum += sum / len;
      }
      for (double s : gesture_surprise(unit.spans, total_frames)) {
        surprise_sum += s;
      }
    }
  }

  if (count == 0) return out;  // all -1

  const double n = static_cast<double>(total_frames);
  out.length = (static_cast<double>(length_sum) / count) / n;
  out.count = static_cast<double>(count) / n;
  out.average_movement = mean_movement_sum / count;
  out.total_movement = movement_sum / n;
  out.surprise = surprise_sum / count;
  return out;
}

std::string localisation_token(LocalisationName name) {
  switch (name) {
    case LocalisationName::hands: return "Hn";
    case LocalisationName::head: return "He";
    case LocalisationName::legs: return "L";
    case LocalisationName::feet: return "F";
  }
  return "?";
}

std::vector<std::string> feature_names(
    const std::vector<Localisation>& localisations) {
  std::vector<std::string> names = {"O-FM", "O-GM", "O-GS", "O-GD", "O-GC"};
  for (const auto& loc : localisations) {
    std::string prefix = localisation_token(loc.name) + "-";
    for (const char* suffix : {"GL", "GC", "GA", "GT", "GS"}) {
      names.push_back(prefix + suffix);
    }
  }
  return names;
}

FeatureVector assemble_feature_vector(
    const AnalyzedSample& sample,
    const std::vector<Localisation>& localisations) {
  FeatureVector vec;
  vec.sample_id = sample.sample_id;
  OverallFeatures overall = overall_features(sample);
  vec.values = {overall.frame_movement, overall.gesture_movement_share,
                overall.gesture_surprise, overall.gesture_deviation,
                overall.gesture_count};
  for (const auto& loc : localisations) {
    LocalisedFeatures f = localised_features(sample, loc);
    vec.values.insert(vec.values.end(),
                      {f.length, f.count, f.average_movement, f.total_movement,
                       f.surprise});
  }
  for (double v : vec.values) {
    if (!std::isfinite(v)) {
      throw ValidationError("non-finite feature value in sample " +
                            sample.sample_id);
    }
  }
  return vec;
}

void FeatureMatrix::add(const FeatureVector& vec,
                        const std::string& participant_id,
                        const std::vector<std::string>& expected_names) {
  if (names.empty() && rows.empty()) {
    names = expected_names;
  } else if (names != expected_names) {
    throw ValidationError(
        "feature configuration mismatch between samples (sample " +
        vec.sample_id + ")");
  }
  if (vec.values.size() != names.size()) {
    throw ValidationError("feature vector length mismatch for sample " +
                          vec.sample_id);
  }
  sample_ids.push_back(vec.sample_id);
  participant_ids.push_back(participant_id);
  rows.push_back(vec.values);
}

}  // namespace gm
