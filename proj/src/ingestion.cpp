#include "gm/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "gm/csv.hpp"
#include "gm/errors.hpp"

namespace gm {

namespace {

const std::set<std::string> kReservedColumns = {"sample_id", "participant_id",
                                                "fps", "pose_path"};

}  // namespace

Manifest load_manifest(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.header.empty()) {
    throw ValidationError(path + ": empty manifest, expected a header row");
  }
  for (const char* col : {"sample_id", "participant_id", "pose_path"}) {
    if (table.column(col) < 0) {
      throw ValidationError(path + ": missing required column '" +
                            std::string(col) + "'");
    }
  }
  int id_col = table.column("sample_id");
  int part_col = table.column("participant_id");
  int fps_col = table.column("fps");
  int path_col = table.column("pose_path");

  Manifest manifest;
  for (const auto& name : table.header) {
    if (!kReservedColumns.count(name)) manifest.label_columns.push_back(name);
  }

  auto base_dir = std::filesystem::path(path).parent_path();
  std::set<std::string> seen_ids;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    SampleRecord rec;
    rec.sample_id = row[id_col];
    rec.participant_id = row[part_col];
    if (rec.sample_id.empty()) {
      throw ValidationError(path + ": row " + std::to_string(r + 1) +
                            ": empty sample_id");
    }
    if (rec.participant_id.empty()) {
      throw ValidationError(path + ": row " + std::to_string(r + 1) +
                            ": empty participant_id");
    }
    if (!seen_ids.insert(rec.sample_id).second) {
      throw ValidationError(path + ": duplicate sample_id '" + rec.sample_id +
                            "'");
    }
    if (fps_col >= 0 && !row[fps_col].empty()) {
      rec.fps = parse_double(row[fps_col], path + " row " +
                                               std::to_string(r + 1) +
                                               " column fps");
      if (!(rec.fps > 0)) {
        throw ValidationError(path + ": row " + std::to_string(r + 1) +
                              ": fps must be positive");
      }
    } else {
      rec.fps = 0.0;  // filled from the pose file on load
    }
    std::filesystem::path p(row[path_col]);
    rec.pose_path = p.is_absolute() ? p.string() : (base_dir / p).string();
    for (const auto& label : manifest.label_columns) {
      const std::string& cell = row[table.column(label)];
      if (cell.empty()) {
        rec.labels[label] = std::numeric_limits<double>::quiet_NaN();
      } else {
        rec.labels[label] =
            parse_double(cell, path + " row " + std::to_string(r + 1) +
                                   " column " + label);
      }
    }
    manifest.samples.push_back(std::move(rec));
  }
  return manifest;
}

std::vector<PoseFrame> load_pose_sequence(const SampleRecord& record,
                                          double* fps_out) {
  std::ifstream in(record.pose_path, std::ios::binary);
  if (!in) throw IoError("cannot open pose file " + record.pose_path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(record.pose_path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("frames") ||
      !doc["frames"].is_array()) {
    throw IoError(record.pose_path + ": expected object with a frames array");
  }
  if (doc.value("layout", std::string("body25+hands")) != "body25+hands") {
    throw ValidationError(record.pose_path + ": unsupported layout '" +
                          doc["layout"].get<std::string>() + "'");
  }
  if (fps_out) {
    *fps_out = doc.contains("fps") && doc["fps"].is_number()
                   ? doc["fps"].get<double>()
                   : 0.0;
  }

  std::vector<PoseFrame> frames;
  frames.reserve(doc["frames"].size());
  int frame_index = 0;
  for (const auto& jframe : doc["frames"]) {
    if (!jframe.is_array() ||
        jframe.size() != static_cast<std::size_t>(KeypointLayout::total)) {
      throw IoError(record.pose_path + ": frame " +
                    std::to_string(frame_index) + " has " +
                    std::to_string(jframe.size()) + " points, expected " +
                    std::to_string(KeypointLayout::total));
    }
    PoseFrame frame;
    frame.coords.resize(KeypointLayout::total);
    frame.detected.resize(KeypointLayout::total);
    for (int p = 0; p < KeypointLayout::total; ++p) {
      const auto& jp = jframe[p];
      if (!jp.is_array() || jp.size() < 2 || jp.size() > 3) {
        throw IoError(record.pose_path + ": frame " +
                      std::to_string(frame_index) + " point " +
                      std::to_string(p) + " is not [x, y] or [x, y, c]");
      }
      double x = jp[0].get<double>();
      double y = jp[1].get<double>();
      double c = jp.size() == 3 ? jp[2].get<double>() : 1.0;
      frame.coords[p] = {x, y};
      frame.detected[p] = (x != 0.0 || y != 0.0) && c >= kConfidenceFloor;
    }
    frames.push_back(std::move(frame));
    ++frame_index;
  }
  return frames;
}

std::vector<PoseTrack> split_on_full_failures(
    const std::vector<PoseFrame>& frames, double fps) {
  if (frames.empty()) {
    throw ValidationError("split_on_full_failures: no frames");
  }
  std::vector<PoseTrack> tracks;
  std::size_t i = 0;
  while (i < frames.size()) {
    if (frames[i].full_failure()) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < frames.size() && !frames[i].full_failure()) ++i;
    PoseTrack track;
    track.fps = fps;
    track.origin_start = static_cast<int>(start);
    track.origin_end = static_cast<int>(i) - 1;
    track.frames.assign(frames.begin() + start, frames.begin() + i);
    tracks.push_back(std::move(track));
  }
  return tracks;
}

std::vector<LoadedSample> filter_short_samples(std::vector<LoadedSample> samples,
                                               double min_duration_s) {
  std::vector<LoadedSample> kept;
  kept.reserve(samples.size());
  for (auto& sample : samples) {
    double fps = sample.record.fps;
    if (!(fps > 0)) {
      throw ValidationError("sample " + sample.record.sample_id +
                            ": fps unknown, cannot filter by duration");
    }
    if (static_cast<double>(sample.source_frame_count) / fps >=
        min_duration_s) {
      kept.push_back(std::move(sample));
    }
  }
  return kept;
}

}  // namespace gm
