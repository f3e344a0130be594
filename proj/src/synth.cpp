#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "gm/csv.hpp"
#include "gm/errors.hpp"
#include "gm/eval.hpp"
#include "gm/parallel.hpp"
#include "gm/rng.hpp"
#include "gm/synth.hpp"

namespace gm {

namespace {

// One full rotation of the planted circular motion takes 32 frames, i.e.
// frequency bin 2 of the 64-frame smoothing window: the trajectory passes the
// low-pass stage unchanged. Durations snap to whole rotations so a gesture
// ends where it started and the smoother sees no step discontinuity.
constexpr int kMotionPeriod = 32;

constexpr std::array<std::pair<double, double>, 25> kBodyBase = {{
    {960, 200},   // 0 nose
    {960, 300},   // 1 neck
    {860, 300},   // 2 right shoulder
    {820, 420},   // 3 right elbow
    {800, 540},   // 4 right wrist
    {1060, 300},  // 5 left shoulder
    {1100, 420},  // 6 left elbow
    {1120, 540},  // 7 left wrist
    {960, 600},   // 8 mid hip
    {910, 600},   // 9 right hip
    {900, 780},   // 10 right knee
    {895, 960},   // 11 right ankle
    {1010, 600},  // 12 left hip
    {1020, 780},  // 13 left knee
    {1025, 960},  // 14 left ankle
    {940, 185},   // 15 right eye
    {980, 185},   // 16 left eye
    {920, 195},   // 17 right ear
    {1000, 195},  // 18 left ear
    {1030, 1000}, // 19 left big toe
    {1045, 1000}, // 20 left small toe
    {1020, 975},  // 21 left heel
    {890, 1000},  // 22 right big toe
    {875, 1000},  // 23 right small toe
    {900, 975},   // 24 right heel
}};

constexpr std::array<UnitName, 7> kUnits = {
    UnitName::left_hand, UnitName::right_hand, UnitName::head,
    UnitName::left_knee, UnitName::right_knee, UnitName::left_foot,
    UnitName::right_foot};

// Points that physically move during a unit's gesture. Hands move as whole
// 21-point blocks; the detector itself only reads the fingertips.
std::vector<int> motion_points(UnitName unit) {
  switch (unit) {
    case UnitName::left_hand: {
      std::vector<int> pts;
      for (int i = 0; i < KeypointLayout::hand_point_count; ++i) {
        pts.push_back(KeypointLayout::left_hand_offset + i);
      }
      return pts;
    }
    case UnitName::right_hand: {
      std::vector<int> pts;
      for (int i = 0; i < KeypointLayout::hand_point_count; ++i) {
        pts.push_back(KeypointLayout::right_hand_offset + i);
      }
      return pts;
    }
    case UnitName::head: return {0, 15, 16, 17, 18};
    case UnitName::left_knee: return {13};
    case UnitName::right_knee: return {10};
    case UnitName::left_foot: return {14, 19, 20, 21};
    case UnitName::right_foot: return {11, 22, 23, 24};
  }
  return {};
}

struct PlannedSpan {
  int start = 0;
  int end = 0;
  double phase = 0.0;
};

std::vector<PlannedSpan> plan_unit_spans(Rng& rng, const ClassParams& params,
                                         double fps, int total_frames) {
  std::vector<PlannedSpan> spans;
  if (params.gesture_rate_per_min <= 0.0) return spans;
  double mean_gap = std::max(
      params.min_gap_s,
      60.0 / params.gesture_rate_per_min - params.mean_duration_s);
  double clock_s = 0.0;
  while (true) {
    double gap;
    do {
      gap = rng.exponential(mean_gap);
    } while (gap < params.min_gap_s);
    double duration;
    do {
      duration = rng.normal(params.mean_duration_s, params.duration_std_s);
    } while (duration < params.min_duration_s);
    int duration_frames = static_cast<int>(
        std::lround(duration * fps / kMotionPeriod)) * kMotionPeriod;
    duration_frames = std::max(duration_frames, kMotionPeriod);
    int start = static_cast<int>(std::lround((clock_s + gap) * fps));
    int end = start + duration_frames - 1;
    if (end >= total_frames - 6) break;
    PlannedSpan span;
    span.start = start;
    span.end = end;
    span.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    spans.push_back(span);
    clock_s = static_cast<double>(end + 1) / fps;
  }
  return spans;
}

bool spans_overlap(int a0, int a1, int b0, int b1) {
  return a0 <= b1 && b0 <= a1;
}

double quantize(double v) { return std::round(v * 100.0) / 100.0; }

struct SampleOutput {
  SampleTruth truth;
  std::string pose_relpath;
  double label_value = 0.0;
};

SampleOutput generate_sample(const SynthConfig& cfg, int sample_index,
                             int participant_index, int class_label,
                             const std::filesystem::path& out_dir) {
  const ClassParams& params =
      class_label == 1 ? cfg.positive : cfg.negative;
  const int total_frames =
      static_cast<int>(std::lround(cfg.duration_s * cfg.fps));
  Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(sample_index));

  char sid[16], pid[16];
  std::snprintf(sid, sizeof sid, "s%03d", sample_index + 1);
  std::snprintf(pid, sizeof pid, "p%03d", participant_index + 1);

  SampleOutput out;
  out.truth.sample_id = sid;
  out.truth.participant_id = pid;
  out.truth.class_label = class_label;
  out.pose_relpath = std::string("poses/") + sid + ".json";

  // Per-sample stance offset; all draws below follow a fixed order so the
  // output is byte-identical for a given (seed, sample_index).
  double offset_x = rng.uniform(-40.0, 40.0);
  double offset_y = rng.uniform(-25.0, 25.0);

  std::vector<Vec2> base(KeypointLayout::total);
  for (int p = 0; p < KeypointLayout::body_point_count; ++p) {
    base[p] = {kBodyBase[p].first + offset_x, kBodyBase[p].second + offset_y};
  }
  for (int h = 0; h < 2; ++h) {
    int offset = h == 0 ? KeypointLayout::left_hand_offset
                        : KeypointLayout::right_hand_offset;
    const Vec2& wrist = base[h == 0 ? 7 : 4];
    for (int j = 0; j < KeypointLayout::hand_point_count; ++j) {
      base[offset + j] = {wrist.x - 20.0 + 2.0 * j,
                          wrist.y + 20.0 + 3.0 * (j % 5)};
    }
  }

  std::array<std::vector<PlannedSpan>, kUnits.size()> unit_spans;
  for (std::size_t u = 0; u < kUnits.size(); ++u) {
    unit_spans[u] = plan_unit_spans(rng, params, cfg.fps, total_frames);
    for (const PlannedSpan& s : unit_spans[u]) {
      out.truth.spans.push_back(TruthSpan{kUnits[u], s.start, s.end});
    }
  }

  const double delta_theta = 2.0 * std::numbers::pi / kMotionPeriod;
  const double radius = params.amplitude_px / (2.0 * std::sin(delta_theta / 2));

  std::vector<std::vector<Vec2>> coords(
      total_frames, std::vector<Vec2>(KeypointLayout::total));
  std::vector<std::vector<char>> lost(
      total_frames, std::vector<char>(KeypointLayout::total, 0));

  std::array<std::vector<int>, kUnits.size()> unit_motion;
  for (std::size_t u = 0; u < kUnits.size(); ++u) {
    unit_motion[u] = motion_points(kUnits[u]);
  }
  std::array<std::size_t, kUnits.size()> cursor{};

  for (int t = 0; t < total_frames; ++t) {
    std::array<Vec2, kUnits.size()> unit_offset{};
    for (std::size_t u = 0; u < kUnits.size(); ++u) {
      while (cursor[u] < unit_spans[u].size() &&
             unit_spans[u][cursor[u]].end < t) {
        ++cursor[u];
      }
      if (cursor[u] < unit_spans[u].size()) {
        const PlannedSpan& s = unit_spans[u][cursor[u]];
        if (t >= s.start) {
          double theta = s.phase + delta_theta * (t - s.start);
          unit_offset[u] = {radius * (std::cos(theta) - std::cos(s.phase)),
                            radius * (std::sin(theta) - std::sin(s.phase))};
        }
      }
    }
    std::vector<int> owner(KeypointLayout::total, -1);
    for (std::size_t u = 0; u < kUnits.size(); ++u) {
      for (int p : unit_motion[u]) owner[p] = static_cast<int>(u);
    }
    for (int p = 0; p < KeypointLayout::total; ++p) {
      Vec2 pos = base[p];
      if (owner[p] >= 0) {
        pos.x += unit_offset[owner[p]].x;
        pos.y += unit_offset[owner[p]].y;
      }
      pos.x += rng.normal(0.0, params.jitter_std_px);
      pos.y += rng.normal(0.0, params.jitter_std_px);
      coords[t][p] = {quantize(pos.x), quantize(pos.y)};
    }
  }

  if (params.partial_loss_prob > 0.0) {
    for (int p = 0; p < KeypointLayout::total; ++p) {
      int t = 0;
      while (t < total_frames) {
        if (rng.next_double() < params.partial_loss_prob) {
          int len = 1 + static_cast<int>(rng.next_below(4));
          for (int i = t; i < std::min(total_frames, t + len); ++i) {
            lost[i][p] = 1;
          }
          t += len;
        } else {
          ++t;
        }
      }
    }
  }

  if (params.full_failure_prob > 0.0) {
    int seconds = static_cast<int>(cfg.duration_s);
    for (int sec = 0; sec < seconds; ++sec) {
      if (rng.next_double() >= params.full_failure_prob) continue;
      int f0 = static_cast<int>(sec * cfg.fps) +
               static_cast<int>(rng.next_below(
                   static_cast<std::uint64_t>(std::max(1.0, cfg.fps))));
      int len = 1 + static_cast<int>(rng.next_below(3));
      int f1 = std::min(total_frames - 1, f0 + len - 1);
      if (f0 >= total_frames) continue;
      bool hits_gesture = false;
      for (const TruthSpan& s : out.truth.spans) {
        if (spans_overlap(f0 - 1, f1 + 1, s.start_frame, s.end_frame)) {
          hits_gesture = true;
          break;
        }
      }
      if (hits_gesture) continue;  // separators never cut planted gestures
      for (int t = f0; t <= f1; ++t) {
        for (int p = 0; p < KeypointLayout::total; ++p) lost[t][p] = 1;
      }
    }
  }

  std::string text;
  text.reserve(static_cast<std::size_t>(total_frames) * 1400);
  text += "{\"layout\":\"body25+hands\",\"fps\":";
  text += format_double(cfg.fps);
  text += ",\"frames\":[";
  for (int t = 0; t < total_frames; ++t) {
    if (t > 0) text += ',';
    text += '[';
    for (int p = 0; p < KeypointLayout::total; ++p) {
      if (p > 0) text += ',';
      if (lost[t][p]) {
        text += "[0,0,0]";
      } else {
        text += '[';
        text += format_double(coords[t][p].x);
        text += ',';
        text += format_double(coords[t][p].y);
        text += ",0.9]";
      }
    }
    text += ']';
  }
  text += "]}\n";

  std::filesystem::path pose_path = out_dir / out.pose_relpath;
  std::ofstream file(pose_path, std::ios::binary);
  if (!file) throw IoError("cannot write " + pose_path.string());
  file << text;
  if (!file.good()) throw IoError("failed writing " + pose_path.string());

  if (auto threshold = default_label_threshold(cfg.label)) {
    out.label_value = class_label == 1 ? *threshold + 1 : *threshold;
  } else {
    out.label_value = class_label;
  }
  return out;
}

}  // namespace

SynthConfig synth_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("synth config JSON parse failure: ") + e.what());
  }
  if (!j.is_object()) {
    throw ValidationError("synth config: expected a JSON object");
  }
  auto reject_unknown = [](const nlohmann::json& obj, const char* where,
                           std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) {
        throw ValidationError(std::string("synth config: unknown key '") +
                              key + "' in " + where);
      }
    }
  };
  reject_unknown(j, "synth config",
                 {"participants_per_class", "samples_per_participant", "fps",
                  "duration_s", "label", "seed", "positive", "negative"});
  SynthConfig cfg;
  if (j.contains("participants_per_class")) {
    cfg.participants_per_class = j["participants_per_class"].get<int>();
  }
  if (j.contains("samples_per_participant")) {
    cfg.samples_per_participant = j["samples_per_participant"].get<int>();
  }
  if (j.contains("fps")) cfg.fps = j["fps"].get<double>();
  if (j.contains("duration_s")) cfg.duration_s = j["duration_s"].get<double>();
  if (j.contains("label")) cfg.label = j["label"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  auto read_class = [&](const char* key, ClassParams& params) {
    if (!j.contains(key)) return;
    const nlohmann::json& c = j[key];
    reject_unknown(c, key,
                   {"gesture_rate_per_min", "mean_duration_s",
                    "duration_std_s", "min_duration_s", "min_gap_s",
                    "amplitude_px", "jitter_std_px", "partial_loss_prob",
                    "full_failure_prob"});
    if (c.contains("gesture_rate_per_min")) {
      params.gesture_rate_per_min = c["gesture_rate_per_min"].get<double>();
    }
    if (c.contains("mean_duration_s")) {
      params.mean_duration_s = c["mean_duration_s"].get<double>();
    }
    if (c.contains("duration_std_s")) {
      params.duration_std_s = c["duration_std_s"].get<double>();
    }
    if (c.contains("min_duration_s")) {
      params.min_duration_s = c["min_duration_s"].get<double>();
    }
    if (c.contains("min_gap_s")) params.min_gap_s = c["min_gap_s"].get<double>();
    if (c.contains("amplitude_px")) {
      params.amplitude_px = c["amplitude_px"].get<double>();
    }
    if (c.contains("jitter_std_px")) {
      params.jitter_std_px = c["jitter_std_px"].get<double>();
    }
    if (c.contains("partial_loss_prob")) {
      params.partial_loss_prob = c["partial_loss_prob"].get<double>();
    }
    if (c.contains("full_failure_prob")) {
      params.full_failure_prob = c["full_failure_prob"].get<double>();
    }
  };
  read_class("positive", cfg.positive);
  read_class("negative", cfg.negative);
  cfg.validate();
  return cfg;
}

void SynthConfig::validate() const {
  if (participants_per_class < 1) {
    throw ValidationError("synth: participants_per_class must be >= 1");
  }
  if (samples_per_participant < 1) {
    throw ValidationError("synth: samples_per_participant must be >= 1");
  }
  if (fps <= 0) throw ValidationError("synth: fps must be positive");
  if (duration_s <= 0) throw ValidationError("synth: duration must be positive");
  if (label.empty()) throw ValidationError("synth: label name is empty");
  for (const ClassParams* p : {&positive, &negative}) {
    if (p->gesture_rate_per_min < 0) {
      throw ValidationError("synth: gesture rate must be >= 0");
    }
    if (p->mean_duration_s <= 0 || p->min_duration_s <= 0 ||
        p->min_gap_s <= 0) {
      throw ValidationError("synth: durations and gaps must be positive");
    }
    if (p->duration_std_s < 0 || p->jitter_std_px < 0) {
      throw ValidationError("synth: standard deviations must be >= 0");
    }
    if (p->amplitude_px <= 0) {
      throw ValidationError("synth: amplitude must be positive");
    }
    if (p->partial_loss_prob < 0 || p->partial_loss_prob >= 1 ||
        p->full_failure_prob < 0 || p->full_failure_prob >= 1) {
      throw ValidationError("synth: probabilities must lie in [0, 1)");
    }
  }
}

SynthDataset generate_dataset(const SynthConfig& cfg,
                              const std::filesystem::path& out_dir, int jobs) {
  cfg.validate();
  SynthDataset result;
  if (cfg.duration_s < std::max(cfg.positive.mean_duration_s,
                                cfg.negative.mean_duration_s)) {
    result.warnings.push_back(
        "sample duration is shorter than the mean gesture duration");
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "poses", ec);
  if (ec) {
    throw IoError("cannot create " + (out_dir / "poses").string() + ": " +
                  ec.message());
  }

  const int participants = 2 * cfg.participants_per_class;
  const int total = participants * cfg.samples_per_participant;
  std::vector<SampleOutput> outputs(total);
  parallel_for(static_cast<std::size_t>(total), jobs, [&](std::size_t i) {
    int participant = static_cast<int>(i) / cfg.samples_per_participant;
    int class_label = participant >= cfg.participants_per_class ? 1 : 0;
    outputs[i] = generate_sample(cfg, static_cast<int>(i), participant,
                                 class_label, out_dir);
  });

  result.manifest_path = out_dir / "manifest.csv";
  std::ofstream manifest(result.manifest_path, std::ios::binary);
  if (!manifest) {
    throw IoError("cannot write " + result.manifest_path.string());
  }
  manifest << "sample_id,participant_id,fps,pose_path," << cfg.label << "\n";
  for (const SampleOutput& s : outputs) {
    manifest << s.truth.sample_id << ',' << s.truth.participant_id << ','
             << format_double(cfg.fps) << ',' << s.pose_relpath << ','
             << format_double(s.label_value) << "\n";
  }
  if (!manifest.good()) {
    throw IoError("failed writing " + result.manifest_path.string());
  }

  result.truth_path = out_dir / "truth.jsonl";
  std::ofstream truth(result.truth_path, std::ios::binary);
  if (!truth) throw IoError("cannot write " + result.truth_path.string());
  for (const SampleOutput& s : outputs) {
    for (const TruthSpan& span : s.truth.spans) {
      truth << "{\"sample_id\":\"" << s.truth.sample_id
            << "\",\"track\":-1,\"unit\":\"" << to_string(span.unit)
            << "\",\"start_frame\":" << span.start_frame
            << ",\"end_frame\":" << span.end_frame << "}\n";
    }
    result.truth.push_back(s.truth);
  }
  if (!truth.good()) {
    throw IoError("failed writing " + result.truth_path.string());
  }
  return result;
}

double span_iou(const TruthSpan& a, const TruthSpan& b) {
  int inter = std::min(a.end_frame, b.end_frame) -
              std::max(a.start_frame, b.start_frame) + 1;
  if (inter <= 0) return 0.0;
  int len_a = a.end_frame - a.start_frame + 1;
  int len_b = b.end_frame - b.start_frame + 1;
  return static_cast<double>(inter) /
         static_cast<double>(len_a + len_b - inter);
}

PlantScore plant_report(const std::vector<TruthSpan>& detected,
                        const std::vector<TruthSpan>& truth,
                        double iou_threshold) {
  struct Pair {
    double iou;
    std::size_t truth_index;
    std::size_t detected_index;
  };
  std::vector<Pair> pairs;
  for (std::size_t ti = 0; ti < truth.size(); ++ti) {
    for (std::size_t di = 0; di < detected.size(); ++di) {
      if (truth[ti].unit != detected[di].unit) continue;
      double iou = span_iou(truth[ti], detected[di]);
      if (iou >= iou_threshold) pairs.push_back({iou, ti, di});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.truth_index != b.truth_index) return a.truth_index < b.truth_index;
    return a.detected_index < b.detected_index;
  });
  std::vector<char> truth_used(truth.size(), 0);
  std::vector<char> detected_used(detected.size(), 0);
  int matched = 0;
  for (const Pair& p : pairs) {
    if (truth_used[p.truth_index] || detected_used[p.detected_index]) continue;
    truth_used[p.truth_index] = 1;
    detected_used[p.detected_index] = 1;
    ++matched;
  }
  PlantScore score;
  score.matched = matched;
  score.truth_count = static_cast<int>(truth.size());
  score.detected_count = static_cast<int>(detected.size());
  if (score.truth_count == 0 && score.detected_count == 0) {
    score.precision = score.recall = score.f1 = 1.0;
    return score;
  }
  score.precision = score.detected_count > 0
                        ? static_cast<double>(matched) / score.detected_count
                        : 0.0;
  score.recall = score.truth_count > 0
                     ? static_cast<double>(matched) / score.truth_count
                     : 0.0;
  double pr = score.precision + score.recall;
  score.f1 = pr > 0 ? 2.0 * score.precision * score.recall / pr : 0.0;
  return score;
}

}  // namespace gm
