#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gm/eval.hpp"
#include "gm/features.hpp"
#include "gm/gestures.hpp"
#include "gm/ingestion.hpp"
#include "gm/preparation.hpp"

namespace gm {

// Everything that shapes pipeline outputs. The config hash embedded in every
// artifact is derived from this; parallelism is deliberately not part of it.
struct PipelineConfig {
  SmoothingConfig smoothing;
  DetectorConfig detector;
  std::vector<LocalisationName> localisation_names;  // canonical order
  double min_duration_s = 60.0;
  std::uint64_t seed = 0;

  PipelineConfig();
  void validate() const;
};

std::uint64_t fnv1a64(std::string_view text);

// Stable JSON rendering of the config (sorted keys, shortest-round-trip
// numbers); equal configs produce equal strings.
std::string canonical_config_json(const PipelineConfig& cfg);

// 16 lowercase hex characters of FNV-1a 64 over the canonical JSON.
std::string config_hash(const PipelineConfig& cfg);

// Strict parse: unknown keys are rejected.
PipelineConfig pipeline_config_from_json(const std::string& text);

struct PreparedSample {
  SampleRecord record;
  int source_frames = 0;
  std::vector<PoseTrack> tracks;  // recovered and smoothed
};

// Ingest + duration filter + recovery + smoothing for every manifest sample.
std::vector<PreparedSample> run_prepare(const Manifest& manifest,
                                        const PipelineConfig& cfg, int jobs);

struct DetectedSample {
  std::string sample_id;
  double threshold = 0.0;   // resolved per-sample movement threshold
  AnalyzedSample analysis;  // movement series and spans per track and unit
};

std::vector<DetectedSample> run_detect(
    const std::vector<PreparedSample>& prepared, const PipelineConfig& cfg,
    int jobs);

FeatureMatrix run_features(const std::vector<DetectedSample>& detected,
                           const std::vector<PreparedSample>& prepared,
                           const PipelineConfig& cfg);

// ----- checkpoint files -----

struct PreparedFile {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<PreparedSample> samples;
};

void write_prepared_file(const std::filesystem::path& path,
                         const std::vector<PreparedSample>& samples,
                         const PipelineConfig& cfg);
PreparedFile read_prepared_file(const std::filesystem::path& path);

// Gesture dump line, source-frame coordinates (track offset applied).
struct DumpSpan {
  std::string sample_id;
  int track = 0;
  UnitName unit = UnitName::head;
  int start_frame = 0;
  int end_frame = 0;
};

struct GestureDump {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<DumpSpan> spans;
};

void write_gesture_dump(const std::filesystem::path& path,
                        const std::vector<DetectedSample>& detected,
                        const std::vector<PreparedSample>& prepared,
                        const PipelineConfig& cfg);
GestureDump read_gesture_dump(const std::filesystem::path& path);

// Rebuild per-track analysis from a prepared checkpoint plus a span dump
// (movement series recomputed, spans taken from the dump).
std::vector<DetectedSample> attach_spans(
    const std::vector<PreparedSample>& prepared, const GestureDump& dump,
    const PipelineConfig& cfg);

struct FeatureFile {
  std::string config_hash;
  std::uint64_t seed = 0;
  FeatureMatrix matrix;
};

void write_feature_csv(const std::filesystem::path& path,
                       const FeatureMatrix& matrix,
                       const std::string& config_hash, std::uint64_t seed);
FeatureFile read_feature_csv(const std::filesystem::path& path);

// ----- evaluation drivers -----

struct EvaluationRequest {
  std::string label;
  ClassifierConfig classifier;
  std::optional<double> threshold_override;  // label binarization threshold
  bool search = false;
  int folds = 3;
  int max_search_features = 25;
  bool allow_large_search = false;
  int jobs = 1;
};

struct EvaluationOutcome {
  EvalReport report;
  std::vector<std::string> feature_names;  // full column list; mask selects
  double label_threshold = 0.0;
  std::uint64_t masks_evaluated = 0;  // 0 when no search ran
  int rows_used = 0;
  std::vector<std::string> warnings;
};

// Joins feature rows with manifest labels by sample id, binarizes, builds the
// participant-independent fold plan, then cross-validates or searches.
EvaluationOutcome run_evaluation(const FeatureMatrix& features,
                                 const Manifest& manifest,
                                 const EvaluationRequest& request,
                                 std::uint64_t seed);

// config_hash identifies the feature artifact lineage; eval_seed is the fold
// shuffling seed recorded in the report.
std::string evaluation_report_json(const EvaluationOutcome& outcome,
                                   const EvaluationRequest& request,
                                   const std::string& config_hash,
                                   std::uint64_t eval_seed);

// Merges evaluation report JSONs; throws when their config hashes differ.
std::string merge_reports(const std::vector<std::filesystem::path>& paths);

}  // namespace gm
