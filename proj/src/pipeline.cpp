#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gm/csv.hpp"
#include "gm/errors.hpp"
#include "gm/parallel.hpp"
#include "gm/pipeline.hpp"

namespace gm {

using nlohmann::json;

PipelineConfig::PipelineConfig()
    : localisation_names{LocalisationName::hands, LocalisationName::head,
                         LocalisationName::legs} {}

void PipelineConfig::validate() const {
  smoothing.validate();
  detector.validate();
  make_localisations(localisation_names);  // throws on duplicates
  if (!(min_duration_s > 0)) {
    throw ValidationError("config: min_duration_s must be positive");
  }
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string canonical_config_json(const PipelineConfig& cfg) {
  json j;
  j["smoothing"] = {{"window_length", cfg.smoothing.window_length},
                    {"keep_frequencies", cfg.smoothing.keep_frequencies}};
  j["detector"] = {{"window_length", cfg.detector.window_length},
                   {"movement_threshold", cfg.detector.movement_threshold},
                   {"auto_threshold", cfg.detector.auto_threshold},
                   {"end_patience", cfg.detector.end_patience},
                   {"min_gesture_windows", cfg.detector.min_gesture_windows}};
  json locs = json::array();
  for (LocalisationName name : cfg.localisation_names) {
    locs.push_back(to_string(name));
  }
  j["localisations"] = std::move(locs);
  j["min_duration_s"] = cfg.min_duration_s;
  j["seed"] = cfg.seed;
  return j.dump();  // std::map keys, i.e. sorted: stable across runs
}

std::string config_hash(const PipelineConfig& cfg) {
  std::uint64_t h = fnv1a64(canonical_config_json(cfg));
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(h));
  return buffer;
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("config JSON parse failure: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");

  PipelineConfig cfg;
  auto reject_unknown = [](const json& obj, const char* where,
                           std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) {
        throw ValidationError(std::string("config: unknown key '") + key +
                              "' in " + where);
      }
    }
  };
  reject_unknown(j, "config",
                 {"smoothing", "detector", "localisations", "min_duration_s",
                  "seed"});
  if (j.contains("smoothing")) {
    const json& s = j["smoothing"];
    reject_unknown(s, "smoothing", {"window_length", "keep_frequencies"});
    if (s.contains("window_length")) {
      cfg.smoothing.window_length = s["window_length"].get<int>();
    }
    if (s.contains("keep_frequencies")) {
      cfg.smoothing.keep_frequencies = s["keep_frequencies"].get<int>();
    }
  }
  if (j.contains("detector")) {
    const json& d = j["detector"];
    reject_unknown(d, "detector",
                   {"window_length", "movement_threshold", "auto_threshold",
                    "end_patience", "min_gesture_windows"});
    if (d.contains("window_length")) {
      cfg.detector.window_length = d["window_length"].get<int>();
    }
    if (d.contains("movement_threshold")) {
      cfg.detector.movement_threshold = d["movement_threshold"].get<double>();
    }
    if (d.contains("auto_threshold")) {
      cfg.detector.auto_threshold = d["auto_threshold"].get<bool>();
    }
    if (d.contains("end_patience")) {
      cfg.detector.end_patience = d["end_patience"].get<int>();
    }
    if (d.contains("min_gesture_windows")) {
      cfg.detector.min_gesture_windows = d["min_gesture_windows"].get<int>();
    }
  }
  if (j.contains("localisations")) {
    cfg.localisation_names.clear();
    for (const json& name : j["localisations"]) {
      cfg.localisation_names.push_back(
          localisation_from_string(name.get<std::string>()));
    }
  }
  if (j.contains("min_duration_s")) {
    cfg.min_duration_s = j["min_duration_s"].get<double>();
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

std::vector<PreparedSample> run_prepare(const Manifest& manifest,
                                        const PipelineConfig& cfg, int jobs) {
  cfg.validate();
  std::vector<LoadedSample> loaded(manifest.samples.size());
  parallel_for(manifest.samples.size(), jobs, [&](std::size_t i) {
    SampleRecord record = manifest.samples[i];
    double file_fps = 0.0;
    std::vector<PoseFrame> frames = load_pose_sequence(record, &file_fps);
    if (!(record.fps > 0)) record.fps = file_fps;
    if (!(record.fps > 0)) {
      throw ValidationError("sample " + record.sample_id +
                            ": fps missing from both manifest and pose file");
    }
    LoadedSample sample;
    sample.source_frame_count = static_cast<int>(frames.size());
    sample.tracks = split_on_full_failures(frames, record.fps);
    sample.record = std::move(record);
    loaded[i] = std::move(sample);
  });

  loaded = filter_short_samples(std::move(loaded), cfg.min_duration_s);

  std::vector<PreparedSample> prepared(loaded.size());
  parallel_for(loaded.size(), jobs, [&](std::size_t i) {
    PreparedSample out;
    out.record = loaded[i].record;
    out.source_frames = loaded[i].source_frame_count;
    out.tracks.reserve(loaded[i].tracks.size());
    for (PoseTrack& track : loaded[i].tracks) {
      out.tracks.push_back(
          smooth_track(recover_partial_detections(std::move(track)),
                       cfg.smoothing));
    }
    prepared[i] = std::move(out);
  });
  return prepared;
}

namespace {

std::vector<DetectionUnit> configured_units(const PipelineConfig& cfg) {
  std::vector<DetectionUnit> units;
  for (const Localisation& loc : make_localisations(cfg.localisation_names)) {
    for (const DetectionUnit& unit : loc.units) units.push_back(unit);
  }
  return units;
}

// Movement series for every track and configured unit; spans left empty.
AnalyzedSample analyze_movement(const PreparedSample& sample,
                                const std::vector<DetectionUnit>& units) {
  AnalyzedSample analysis;
  analysis.sample_id = sample.record.sample_id;
  analysis.tracks.reserve(sample.tracks.size());
  for (const PoseTrack& track : sample.tracks) {
    AnalyzedTrack at;
    at.frame_count = track.frame_count();
    at.body_movement = whole_body_movement_series(track);
    at.units.reserve(units.size());
    for (const DetectionUnit& unit : units) {
      UnitTrackData data;
      data.unit = unit;
      data.movement = unit_movement_series(track, unit);
      at.units.push_back(std::move(data));
    }
    analysis.tracks.push_back(std::move(at));
  }
  return analysis;
}

}  // namespace

std::vector<DetectedSample> run_detect(
    const std::vector<PreparedSample>& prepared, const PipelineConfig& cfg,
    int jobs) {
  cfg.validate();
  const std::vector<DetectionUnit> units = configured_units(cfg);
  std::vector<DetectedSample> detected(prepared.size());
  parallel_for(prepared.size(), jobs, [&](std::size_t i) {
    DetectedSample out;
    out.sample_id = prepared[i].record.sample_id;
    out.analysis = analyze_movement(prepared[i], units);

    std::vector<std::vector<WindowSeries>> windows(out.analysis.tracks.size());
    std::vector<WindowSeries> pooled;
    for (std::size_t t = 0; t < out.analysis.tracks.size(); ++t) {
      for (const UnitTrackData& data : out.analysis.tracks[t].units) {
        windows[t].push_back(
            window_average(data.movement, cfg.detector.window_length));
      }
      pooled.insert(pooled.end(), windows[t].begin(), windows[t].end());
    }
    out.threshold = cfg.detector.auto_threshold
                        ? auto_movement_threshold(pooled)
                        : cfg.detector.movement_threshold;
    for (std::size_t t = 0; t < out.analysis.tracks.size(); ++t) {
      AnalyzedTrack& at = out.analysis.tracks[t];
      for (std::size_t u = 0; u < at.units.size(); ++u) {
        at.units[u].spans =
            detect_gestures(windows[t][u], out.threshold, cfg.detector,
                            at.units[u].unit.name, static_cast<int>(t));
      }
    }
    detected[i] = std::move(out);
  });
  return detected;
}

FeatureMatrix run_features(const std::vector<DetectedSample>& detected,
                           const std::vector<PreparedSample>& prepared,
                           const PipelineConfig& cfg) {
  if (detected.size() != prepared.size()) {
    throw ValidationError("features: detection/preparation sample mismatch");
  }
  const std::vector<Localisation> localisations =
      make_localisations(cfg.localisation_names);
  FeatureMatrix matrix;
  matrix.names = feature_names(localisations);
  const std::vector<std::string> expected = matrix.names;
  for (std::size_t i = 0; i < detected.size(); ++i) {
    if (detected[i].sample_id != prepared[i].record.sample_id) {
      throw ValidationError("features: sample order mismatch at index " +
                            std::to_string(i));
    }
    FeatureVector vec =
        assemble_feature_vector(detected[i].analysis, localisations);
    matrix.add(vec, prepared[i].record.participant_id, expected);
  }
  return matrix;
}

// ----- checkpoint files -----

namespace {

json labels_to_json(const std::map<std::string, double>& labels) {
  json out = json::object();
  for (const auto& [name, value] : labels) {
    if (std::isnan(value)) {
      out[name] = nullptr;
    } else {
      out[name] = value;
    }
  }
  return out;
}

std::map<std::string, double> labels_from_json(const json& j) {
  std::map<std::string, double> labels;
  for (const auto& [name, value] : j.items()) {
    labels[name] = value.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                   : value.get<double>();
  }
  return labels;
}

}  // namespace

void write_prepared_file(const std::filesystem::path& path,
                         const std::vector<PreparedSample>& samples,
                         const PipelineConfig& cfg) {
  json j;
  j["kind"] = "prepared";
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  json jsamples = json::array();
  for (const PreparedSample& sample : samples) {
    json js;
    js["sample_id"] = sample.record.sample_id;
    js["participant_id"] = sample.record.participant_id;
    js["fps"] = sample.record.fps;
    js["labels"] = labels_to_json(sample.record.labels);
    js["source_frames"] = sample.source_frames;
    json jtracks = json::array();
    for (const PoseTrack& track : sample.tracks) {
      json jt;
      jt["origin_start"] = track.origin_start;
      jt["origin_end"] = track.origin_end;
      json usable = json::array();
      for (int p = 0; p < KeypointLayout::total; ++p) {
        usable.push_back(point_usable(track, p) ? 1 : 0);
      }
      jt["usable"] = std::move(usable);
      json jframes = json::array();
      for (const PoseFrame& frame : track.frames) {
        json jf = json::array();
        for (const Vec2& v : frame.coords) {
          jf.push_back(json::array({v.x, v.y}));
        }
        jframes.push_back(std::move(jf));
      }
      jt["frames"] = std::move(jframes);
      jtracks.push_back(std::move(jt));
    }
    js["tracks"] = std::move(jtracks);
    jsamples.push_back(std::move(js));
  }
  j["samples"] = std::move(jsamples);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump() << "\n";
  if (!out.good()) throw IoError("failed writing " + path.string());
}

PreparedFile read_prepared_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  try {
    if (j.at("kind").get<std::string>() != "prepared") {
      throw ValidationError(path.string() + ": not a prepared checkpoint");
    }
    PreparedFile file;
    file.config_hash = j.at("config_hash").get<std::string>();
    file.seed = j.at("seed").get<std::uint64_t>();
    for (const json& js : j.at("samples")) {
      PreparedSample sample;
      sample.record.sample_id = js.at("sample_id").get<std::string>();
      sample.record.participant_id = js.at("participant_id").get<std::string>();
      sample.record.fps = js.at("fps").get<double>();
      sample.record.labels = labels_from_json(js.at("labels"));
      sample.source_frames = js.at("source_frames").get<int>();
      for (const json& jt : js.at("tracks")) {
        PoseTrack track;
        track.fps = sample.record.fps;
        track.origin_start = jt.at("origin_start").get<int>();
        track.origin_end = jt.at("origin_end").get<int>();
        std::vector<std::uint8_t> usable;
        for (const json& u : jt.at("usable")) {
          usable.push_back(u.get<int>() != 0 ? 1 : 0);
        }
        if (usable.size() != static_cast<std::size_t>(KeypointLayout::total)) {
          throw ValidationError(path.string() + ": bad usable mask length");
        }
        for (const json& jf : jt.at("frames")) {
          if (jf.size() != static_cast<std::size_t>(KeypointLayout::total)) {
            throw ValidationError(path.string() + ": bad frame width");
          }
          PoseFrame frame;
          frame.coords.resize(KeypointLayout::total);
          frame.detected = usable;
          for (int p = 0; p < KeypointLayout::total; ++p) {
            frame.coords[p] = {jf[p][0].get<double>(), jf[p][1].get<double>()};
          }
          track.frames.push_back(std::move(frame));
        }
        sample.tracks.push_back(std::move(track));
      }
      file.samples.push_back(std::move(sample));
    }
    return file;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": malformed prepared checkpoint: " +
                          e.what());
  }
}

void write_gesture_dump(const std::filesystem::path& path,
                        const std::vector<DetectedSample>& detected,
                        const std::vector<PreparedSample>& prepared,
                        const PipelineConfig& cfg) {
  if (detected.size() != prepared.size()) {
    throw ValidationError("gesture dump: detection/preparation mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "{\"kind\":\"gesture_dump\",\"config_hash\":\"" << config_hash(cfg)
      << "\",\"seed\":" << cfg.seed << "}\n";
  for (std::size_t i = 0; i < detected.size(); ++i) {
    const AnalyzedSample& analysis = detected[i].analysis;
    for (std::size_t t = 0; t < analysis.tracks.size(); ++t) {
      int origin = prepared[i].tracks[t].origin_start;
      for (const UnitTrackData& data : analysis.tracks[t].units) {
        for (const GestureSpan& span : data.spans) {
          out << "{\"sample_id\":\"" << analysis.sample_id
              << "\",\"track\":" << t << ",\"unit\":\""
              << to_string(span.unit)
              << "\",\"start_frame\":" << origin + span.start_frame
              << ",\"end_frame\":" << origin + span.end_frame << "}\n";
        }
      }
    }
  }
  if (!out.good()) throw IoError("failed writing " + path.string());
}

GestureDump read_gesture_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  GestureDump dump;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " +
                    e.what());
    }
    try {
      if (line_no == 1) {
        if (j.value("kind", std::string()) != "gesture_dump") {
          throw ValidationError(path.string() + ": not a gesture dump");
        }
        dump.config_hash = j.at("config_hash").get<std::string>();
        dump.seed = j.at("seed").get<std::uint64_t>();
        continue;
      }
      DumpSpan span;
      span.sample_id = j.at("sample_id").get<std::string>();
      span.track = j.at("track").get<int>();
      span.unit = unit_from_string(j.at("unit").get<std::string>());
      span.start_frame = j.at("start_frame").get<int>();
      span.end_frame = j.at("end_frame").get<int>();
      dump.spans.push_back(std::move(span));
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed dump line: " + e.what());
    }
  }
  return dump;
}

std::vector<DetectedSample> attach_spans(
    const std::vector<PreparedSample>& prepared, const GestureDump& dump,
    const PipelineConfig& cfg) {
  cfg.validate();
  const std::vector<DetectionUnit> units = configured_units(cfg);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    index[prepared[i].record.sample_id] = i;
  }

  std::vector<DetectedSample> detected(prepared.size());
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    detected[i].sample_id = prepared[i].record.sample_id;
    detected[i].analysis = analyze_movement(prepared[i], units);
  }

  for (const DumpSpan& span : dump.spans) {
    auto it = index.find(span.sample_id);
    if (it == index.end()) {
      throw ValidationError("gesture dump references unknown sample '" +
                            span.sample_id + "'");
    }
    AnalyzedSample& analysis = detected[it->second].analysis;
    const PreparedSample& sample = prepared[it->second];
    if (span.track < 0 ||
        span.track >= static_cast<int>(analysis.tracks.size())) {
      throw ValidationError("gesture dump: sample '" + span.sample_id +
                            "' has no track " + std::to_string(span.track));
    }
    const PoseTrack& track = sample.tracks[span.track];
    int local_start = span.start_frame - track.origin_start;
    int local_end = span.end_frame - track.origin_start;
    if (local_start < 0 || local_end < local_start ||
        local_end >= track.frame_count()) {
      throw ValidationError("gesture dump: span outside track bounds in '" +
                            span.sample_id + "'");
    }
    bool attached = false;
    for (UnitTrackData& data : analysis.tracks[span.track].units) {
      if (data.unit.name == span.unit) {
        GestureSpan gs;
        gs.unit = span.unit;
        gs.track_index = span.track;
        gs.start_frame = local_start;
        gs.end_frame = local_end;
        data.spans.push_back(gs);
        attached = true;
        break;
      }
    }
    if (!attached) {
      throw ValidationError(
          std::string("gesture dump: unit '") + to_string(span.unit) +
          "' is not part of the configured localisations");
    }
  }
  for (DetectedSample& d : detected) {
    for (AnalyzedTrack& track : d.analysis.tracks) {
      for (UnitTrackData& data : track.units) {
        std::sort(data.spans.begin(), data.spans.end(),
                  [](const GestureSpan& a, const GestureSpan& b) {
                    return a.start_frame < b.start_frame;
                  });
      }
    }
  }
  return detected;
}

void write_feature_csv(const std::filesystem::path& path,
                       const FeatureMatrix& matrix,
                       const std::string& config_hash_value,
                       std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# config_hash=" << config_hash_value << "\n";
  out << "# seed=" << seed << "\n";
  out << "sample_id,participant_id";
  for (const std::string& name : matrix.names) out << ',' << csv_escape(name);
  out << "\n";
  for (int r = 0; r < matrix.sample_count(); ++r) {
    out << csv_escape(matrix.sample_ids[r]) << ','
        << csv_escape(matrix.participant_ids[r]);
    for (double v : matrix.rows[r]) out << ',' << format_double(v);
    out << "\n";
  }
  if (!out.good()) throw IoError("failed writing " + path.string());
}

FeatureFile read_feature_csv(const std::filesystem::path& path) {
  CsvTable table = read_csv(path.string());
  FeatureFile file;
  for (const std::string& comment : table.comments) {
    if (comment.rfind("config_hash=", 0) == 0) {
      file.config_hash = comment.substr(12);
    } else if (comment.rfind("seed=", 0) == 0) {
      file.seed = std::stoull(comment.substr(5));
    }
  }
  if (table.header.size() < 3 || table.header[0] != "sample_id" ||
      table.header[1] != "participant_id") {
    throw ValidationError(path.string() +
                          ": expected sample_id,participant_id,features...");
  }
  file.matrix.names.assign(table.header.begin() + 2, table.header.end());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    file.matrix.sample_ids.push_back(row[0]);
    file.matrix.participant_ids.push_back(row[1]);
    std::vector<double> values;
    values.reserve(row.size() - 2);
    for (std::size_t c = 2; c < row.size(); ++c) {
      values.push_back(parse_double(
          row[c], path.string() + " row " + std::to_string(r + 1) +
                      " column " + file.matrix.names[c - 2]));
    }
    file.matrix.rows.push_back(std::move(values));
  }
  return file;
}

// ----- evaluation drivers -----

EvaluationOutcome run_evaluation(const FeatureMatrix& features,
                                 const Manifest& manifest,
                                 const EvaluationRequest& request,
                                 std::uint64_t seed) {
  if (features.sample_count() == 0) {
    throw ValidationError("evaluation: no feature rows");
  }
  bool label_known = false;
  for (const std::string& column : manifest.label_columns) {
    label_known = label_known || column == request.label;
  }
  if (!label_known) {
    std::string available;
    for (const std::string& column : manifest.label_columns) {
      if (!available.empty()) available += ", ";
      available += column;
    }
    throw ValidationError("evaluation: label '" + request.label +
                          "' not in manifest (available: " + available + ")");
  }

  std::map<std::string, const SampleRecord*> by_id;
  for (const SampleRecord& record : manifest.samples) {
    by_id[record.sample_id] = &record;
  }

  EvaluationOutcome outcome;
  outcome.feature_names = features.names;

  std::vector<double> scores(features.sample_count());
  for (int r = 0; r < features.sample_count(); ++r) {
    auto it = by_id.find(features.sample_ids[r]);
    if (it == by_id.end()) {
      throw ValidationError("evaluation: sample '" + features.sample_ids[r] +
                            "' is not in the manifest");
    }
    if (it->second->participant_id != features.participant_ids[r]) {
      throw ValidationError(
          "evaluation: participant mismatch for sample '" +
          features.sample_ids[r] + "' between features file and manifest");
    }
    scores[r] = it->second->labels.at(request.label);
  }

  if (request.threshold_override) {
    outcome.label_threshold = *request.threshold_override;
  } else if (auto t = default_label_threshold(request.label)) {
    outcome.label_threshold = *t;
  } else {
    outcome.label_threshold = balanced_threshold(scores);
    outcome.warnings.push_back(
        "label '" + request.label +
        "' has no built-in threshold; using the balanced threshold " +
        format_double(outcome.label_threshold));
  }

  BinarizedLabels bin = binarize(scores, outcome.label_threshold);
  for (const std::string& w : bin.warnings) outcome.warnings.push_back(w);

  EvalDataset data;
  data.feature_names = features.names;
  for (std::size_t k = 0; k < bin.kept_rows.size(); ++k) {
    std::size_t r = bin.kept_rows[k];
    data.X.push_back(features.rows[r]);
    data.y.push_back(bin.classes[k]);
    data.participants.push_back(features.participant_ids[r]);
  }
  outcome.rows_used = static_cast<int>(data.X.size());
  if (data.X.empty()) {
    throw ValidationError("evaluation: no samples with a usable label");
  }

  FoldPlan plan = make_folds(data.participants, data.y, request.folds, seed);

  if (request.search) {
    SearchConfig scfg;
    scfg.classifier = request.classifier;
    scfg.max_features = request.max_search_features;
    scfg.allow_large = request.allow_large_search;
    scfg.jobs = request.jobs;
    SearchResult result = feature_search(data, plan, scfg);
    outcome.report = result.best;
    outcome.masks_evaluated = result.masks_evaluated;
  } else {
    int d = features.feature_count();
    if (d > 63) throw ValidationError("evaluation: too many feature columns");
    FeatureMask mask = (FeatureMask{1} << d) - 1;
    outcome.report = cross_validate(request.classifier, data, plan, mask);
  }
  return outcome;
}

std::string evaluation_report_json(const EvaluationOutcome& outcome,
                                   const EvaluationRequest& request,
                                   const std::string& config_hash_value,
                                   std::uint64_t eval_seed) {
  json j;
  j["kind"] = "evaluation_report";
  j["config_hash"] = config_hash_value;
  j["seed"] = eval_seed;
  j["label"] = request.label;
  j["classifier"] = to_string(request.classifier.kind);
  j["thresholds"] = {{"label", outcome.label_threshold}};
  j["per_fold_f1"] = outcome.report.per_fold_f1;
  j["f1_mean"] = outcome.report.f1_mean;
  j["f1_std"] = outcome.report.f1_std;
  j["mask_bits"] = outcome.report.mask;
  json selected = json::array();
  for (int c : mask_indices(outcome.report.mask)) {
    selected.push_back(c < static_cast<int>(outcome.feature_names.size())
                           ? outcome.feature_names[c]
                           : "f" + std::to_string(c));
  }
  j["selected_features"] = std::move(selected);
  j["notation_tokens"] = outcome.report.notation;
  j["degenerate_folds"] = outcome.report.degenerate_folds;
  j["masks_evaluated"] = outcome.masks_evaluated;
  j["rows_used"] = outcome.rows_used;
  j["warnings"] = outcome.warnings;
  return j.dump(2) + "\n";
}

std::string merge_reports(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw ValidationError("report: no input files");
  json combined;
  combined["kind"] = "combined_report";
  json reports = json::array();
  std::string hash;
  std::string hash_origin;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw IoError(path.string() + ": " + e.what());
    }
    std::string h = j.value("config_hash", std::string());
    if (h.empty()) {
      throw ValidationError(path.string() + ": missing config_hash");
    }
    if (hash.empty()) {
      hash = h;
      hash_origin = path.string();
    } else if (h != hash) {
      throw ValidationError("report: config hash mismatch between " +
                            hash_origin + " (" + hash + ") and " +
                            path.string() + " (" + h + ")");
    }
    reports.push_back(std::move(j));
  }
  combined["config_hash"] = hash;
  combined["reports"] = std::move(reports);
  return combined.dump(2) + "\n";
}

}  // namespace gm
