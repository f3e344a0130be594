#include "gm/pose_model.hpp"

#include <algorithm>

#include "gm/errors.hpp"

namespace gm {

bool PoseFrame::full_failure() const {
  return std::none_of(detected.begin(), detected.end(),
                      [](std::uint8_t d) { return d != 0; });
}

bool point_usable(const PoseTrack& track, int point) {
  for (const auto& frame : track.frames) {
    if (frame.detected[point]) return true;
  }
  return false;
}

const char* to_string(UnitName name) {
  switch (name) {
    case UnitName::left_hand: return "left_hand";
    case UnitName::right_hand: return "right_hand";
    case UnitName::head: return "head";
    case UnitName::left_knee: return "left_knee";
    case UnitName::right_knee: return "right_knee";
    case UnitName::left_foot: return "left_foot";
    case UnitName::right_foot: return "right_foot";
  }
  return "?";
}

const char* to_string(LocalisationName name) {
  switch (name) {
    case LocalisationName::hands: return "hands";
    case LocalisationName::head: return "head";
    case LocalisationName::legs: return "legs";
    case LocalisationName::feet: return "feet";
  }
  return "?";
}

UnitName unit_from_string(const std::string& s) {
  for (UnitName u : {UnitName::left_hand, UnitName::right_hand, UnitName::head,
                     UnitName::left_knee, UnitName::right_knee,
                     UnitName::left_foot, UnitName::right_foot}) {
    if (s == to_string(u)) return u;
  }
  throw ValidationError("unknown detection unit: " + s);
}

LocalisationName localisation_from_string(const std::string& s) {
  for (LocalisationName l : {LocalisationName::hands, LocalisationName::head,
                             LocalisationName::legs, LocalisationName::feet}) {
    if (s == to_string(l)) return l;
  }
  throw ValidationError("unknown localisation: " + s);
}

namespace {

std::vector<int> fingertip_indices(int hand_offset) {
  // Tip of thumb and of each finger within a 21-point hand block.
  return {hand_offset + 4, hand_offset + 8, hand_offset + 12, hand_offset + 16,
          hand_offset + 20};
}

}  // namespace

DetectionUnit detection_unit(UnitName name) {
  switch (name) {
    case UnitName::left_hand:
      return {name, fingertip_indices(KeypointLayout::left_hand_offset)};
    case UnitName::right_hand:
      return {name, fingertip_indices(KeypointLayout::right_hand_offset)};
    case UnitName::head:
      // Nose, eyes, and ears from the body model.
      return {name, {0, 15, 16, 17, 18}};
    case UnitName::left_knee:
      return {name, {13}};
    case UnitName::right_knee:
      return {name, {10}};
    case UnitName::left_foot:
      // Ankle, big toe, small toe, heel.
      return {name, {14, 19, 20, 21}};
    case UnitName::right_foot:
      return {name, {11, 22, 23, 24}};
  }
  throw ValidationError("unknown detection unit");
}

std::vector<DetectionUnit> localisation_points(LocalisationName name) {
  switch (name) {
    case LocalisationName::hands:
      return {detection_unit(UnitName::left_hand),
              detection_unit(UnitName::right_hand)};
    case LocalisationName::head:
      return {detection_unit(UnitName::head)};
    case LocalisationName::legs:
      return {detection_unit(UnitName::left_knee),
              detection_unit(UnitName::right_knee)};
    case LocalisationName::feet:
      return {detection_unit(UnitName::left_foot),
              detection_unit(UnitName::right_foot)};
  }
  throw ValidationError("unknown localisation");
}

Localisation make_localisation(LocalisationName name) {
  return {name, localisation_points(name)};
}

std::vector<Localisation> make_localisations(
    const std::vector<LocalisationName>& names) {
  // Canonical ordering keeps feature vectors comparable across runs.
  const LocalisationName order[] = {LocalisationName::hands,
                                    LocalisationName::head,
                                    LocalisationName::legs,
                                    LocalisationName::feet};
  std::vector<Localisation> out;
  for (LocalisationName want : order) {
    auto n = std::count(names.begin(), names.end(), want);
    if (n > 1) {
      throw ValidationError(std::string("duplicate localisation: ") +
                            to_string(want));
    }
    if (n == 1) out.push_back(make_localisation(want));
  }
  return out;
}

std::vector<Localisation> default_localisations() {
  return make_localisations({LocalisationName::hands, LocalisationName::head,
                             LocalisationName::legs});
}

}  // namespace gm
