#pragma once

#include <map>
#include <string>
#include <vector>

#include "gm/pose_model.hpp"

namespace gm {

// Points with confidence below this are treated as undetected, like the
// estimator's explicit (0, 0) not-found sentinel.
constexpr double kConfidenceFloor = 0.05;

struct SampleRecord {
  std::string sample_id;
  std::string participant_id;
  double fps = 30.0;
  std::string pose_path;  // resolved against the manifest's directory
  std::map<std::string, double> labels;  // NaN = missing cell
};

struct Manifest {
  std::vector<SampleRecord> samples;     // manifest row order
  std::vector<std::string> label_columns;
};

// CSV with header: sample_id, participant_id, [fps,] pose_path, then zero or
// more numeric label columns.
Manifest load_manifest(const std::string& path);

// Pose JSON: {"layout": "body25+hands", "fps": n, "frames": [[[x,y,c] x 67]..]}
// with c optional (assumed 1.0). A point is detected unless its raw coords are
// exactly (0, 0) or its confidence is below kConfidenceFloor. When fps_out is
// non-null it receives the file's fps value (0 when the file has none).
std::vector<PoseFrame> load_pose_sequence(const SampleRecord& record,
                                          double* fps_out = nullptr);

// Maximal runs of non-full-failure frames become tracks; full-failure frames
// belong to no track.
std::vector<PoseTrack> split_on_full_failures(
    const std::vector<PoseFrame>& frames, double fps);

struct LoadedSample {
  SampleRecord record;
  std::vector<PoseTrack> tracks;
  int source_frame_count = 0;  // including separator frames
};

// Keeps a sample iff source frames / fps >= min_duration seconds. Exactly the
// minimum duration is kept.
std::vector<LoadedSample> filter_short_samples(std::vector<LoadedSample> samples,
                                               double min_duration_s = 60.0);

}  // namespace gm
