#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gm/pose_model.hpp"

namespace gm {

// Per-class generation parameters for the planted gesture renewal process.
struct ClassParams {
  double gesture_rate_per_min = 6.0;  // 0 disables gestures for the class
  double mean_duration_s = 2.0;
  double duration_std_s = 0.5;
  double min_duration_s = 1.2;
  double min_gap_s = 1.5;          // keeps planted gestures detector-separable
  double amplitude_px = 2.0;       // per-frame step of unit points in gesture
  double jitter_std_px = 0.1;      // Gaussian noise on every point, every frame
  double partial_loss_prob = 0.0;  // per point-frame chance of a short dropout
  double full_failure_prob = 0.0;  // per second chance of an all-points dropout
};

struct SynthConfig {
  int participants_per_class = 20;
  int samples_per_participant = 1;
  double fps = 30.0;
  double duration_s = 75.0;
  std::string label = "phq8";
  ClassParams positive;
  ClassParams negative;
  std::uint64_t seed = 1;

  void validate() const;
};

// A planted gesture in source-frame coordinates (before track splitting).
struct TruthSpan {
  UnitName unit = UnitName::head;
  int start_frame = 0;
  int end_frame = 0;
};

struct SampleTruth {
  std::string sample_id;
  std::string participant_id;
  int class_label = 0;
  std::vector<TruthSpan> spans;
};

struct SynthDataset {
  std::filesystem::path manifest_path;
  std::filesystem::path truth_path;
  std::vector<SampleTruth> truth;
  std::vector<std::string> warnings;
};

// Strict parse (unknown keys rejected) of the generator configuration.
SynthConfig synth_config_from_json(const std::string& text);

// Writes manifest.csv, poses/*.json and truth.jsonl under out_dir. Pose files
// are byte-identical for a given config and seed at any parallelism.
SynthDataset generate_dataset(const SynthConfig& cfg,
                              const std::filesystem::path& out_dir,
                              int jobs = 1);

struct PlantScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int matched = 0;
  int truth_count = 0;
  int detected_count = 0;
};

// One-to-one greedy matching by descending IoU between spans of the same
// unit; a pair matches when IoU >= iou_threshold.
PlantScore plant_report(const std::vector<TruthSpan>& detected,
                        const std::vector<TruthSpan>& truth,
                        double iou_threshold = 0.5);

double span_iou(const TruthSpan& a, const TruthSpan& b);

}  // namespace gm
