#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gm/errors.hpp"
#include "gm/pipeline.hpp"
#include "gm/synth.hpp"
#include "test_support.hpp"

using namespace gm;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_lower_hex(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) || (c >= 'a' && c <= 'f');
  });
}

// Small generated corpus shared by the artifact round-trip tests; split
// the positive samples so prepared files carry nonzero track origins.
struct Corpus {
  TempDir dir{"pipe"};
  Manifest manifest;
  PipelineConfig cfg;
  std::vector<PreparedSample> prepared;

  Corpus() {
    SynthConfig synth;
    synth.participants_per_class = 2;
    synth.seed = 9;
    synth.positive.full_failure_prob = 0.25;
    synth.negative.gesture_rate_per_min = 3.0;
    synth.negative.amplitude_px = 1.4;
    auto dataset = generate_dataset(synth, dir.path(), 1);
    manifest = load_manifest(dataset.manifest_path.string());
    prepared = run_prepare(manifest, cfg, 2);
  }
};

// Hand-built features/manifest pair: eight participants, one sample each,
// label values straddling the built-in phq8 threshold of 7.
struct EvalFixture {
  FeatureMatrix features;
  Manifest manifest;

  EvalFixture() {
    features.names = {"alpha", "beta"};
    double label_values[8] = {5, 5, 6, 6, 9, 9, 9, 9};
    for (int i = 0; i < 8; ++i) {
      std::string id = "s" + std::to_string(i + 1);
      std::string participant = "q" + std::to_string(i + 1);
      features.sample_ids.push_back(id);
      features.participant_ids.push_back(participant);
      double cls = label_values[i] > 7 ? 1.0 : 0.0;
      features.rows.push_back({2.0 * cls + 0.01 * i, 0.5 - 0.02 * i});

      SampleRecord rec;
      rec.sample_id = id;
      rec.participant_id = participant;
      rec.labels["phq8"] = label_values[i];
      rec.labels["custom"] = label_values[i] + 10.0;
      manifest.samples.push_back(rec);
    }
    manifest.label_columns = {"phq8", "custom"};
  }
};

EvaluationRequest lin_request(const std::string& label) {
  EvaluationRequest request;
  request.label = label;
  request.classifier.kind = ClassifierKind::lin;
  request.classifier.seed = 4;
  return request;
}

}  // namespace

TEST_CASE("config hashes are stable and sensitive") {
  PipelineConfig cfg;
  std::string h = config_hash(cfg);
  CHECK(h.size() == 16);
  CHECK(is_lower_hex(h));
  CHECK(config_hash(cfg) == h);
  CHECK(canonical_config_json(cfg) == canonical_config_json(cfg));

  PipelineConfig seeded = cfg;
  seeded.seed = 1;
  CHECK(config_hash(seeded) != h);
  PipelineConfig tuned = cfg;
  tuned.detector.movement_threshold = 0.75;
  CHECK(config_hash(tuned) != h);
  PipelineConfig trimmed = cfg;
  trimmed.localisation_names = {LocalisationName::hands};
  CHECK(config_hash(trimmed) != h);

  // pin the rendering: a silent format change would corrupt artifact reuse
  CHECK(h == "ec907c6cb293aaa2");
}

TEST_CASE("config json parsing") {
  PipelineConfig cfg;
  cfg.detector.auto_threshold = true;
  cfg.seed = 9;
  cfg.localisation_names = {LocalisationName::hands, LocalisationName::head};
  PipelineConfig reparsed =
      pipeline_config_from_json(canonical_config_json(cfg));
  CHECK(config_hash(reparsed) == config_hash(cfg));

  PipelineConfig partial = pipeline_config_from_json(
      R"({"detector": {"movement_threshold": 0.75}, "seed": 4})");
  CHECK(partial.detector.movement_threshold == 0.75);
  CHECK(partial.seed == 4);
  CHECK(partial.smoothing.window_length == 64);
  CHECK(partial.localisation_names.size() == 3);

  CHECK_THROWS_AS(pipeline_config_from_json(R"({"typo": 1})"),
                  ValidationError);
  CHECK_THROWS_AS(pipeline_config_from_json(R"({"detector": {"typo": 1}})"),
                  ValidationError);
  CHECK_THROWS_AS(pipeline_config_from_json("not json"), IoError);
}

TEST_CASE("prepared checkpoints round trip") {
  Corpus corpus;
  bool multi_track = false;
  for (const auto& sample : corpus.prepared) {
    multi_track = multi_track || sample.tracks.size() > 1;
  }
  CHECK(multi_track);  // the fixture plants full failures

  auto path = corpus.dir.file("prepared.json");
  write_prepared_file(path, corpus.prepared, corpus.cfg);
  PreparedFile file = read_prepared_file(path);
  CHECK(file.config_hash == config_hash(corpus.cfg));
  CHECK(file.seed == corpus.cfg.seed);
  REQUIRE(file.samples.size() == corpus.prepared.size());
  for (std::size_t i = 0; i < file.samples.size(); ++i) {
    const PreparedSample& got = file.samples[i];
    const PreparedSample& want = corpus.prepared[i];
    CHECK(got.record.sample_id == want.record.sample_id);
    CHECK(got.record.participant_id == want.record.participant_id);
    CHECK(got.record.fps == want.record.fps);
    CHECK(got.record.labels == want.record.labels);
    CHECK(got.source_frames == want.source_frames);
    REQUIRE(got.tracks.size() == want.tracks.size());
    for (std::size_t k = 0; k < got.tracks.size(); ++k) {
      const PoseTrack& gt = got.tracks[k];
      const PoseTrack& wt = want.tracks[k];
      CHECK(gt.fps == wt.fps);
      CHECK(gt.origin_start == wt.origin_start);
      CHECK(gt.origin_end == wt.origin_end);
      REQUIRE(gt.frames.size() == wt.frames.size());
      for (std::size_t f = 0; f < gt.frames.size(); ++f) {
        for (int p = 0; p < KeypointLayout::total; ++p) {
          // bitwise: the writer uses shortest-round-trip doubles
          CHECK(gt.frames[f].coords[p].x == wt.frames[f].coords[p].x);
          CHECK(gt.frames[f].coords[p].y == wt.frames[f].coords[p].y);
          CHECK(gt.frames[f].detected[p] == wt.frames[f].detected[p]);
        }
      }
    }
  }
}

TEST_CASE("gesture dumps round trip and rebuild detection") {
  Corpus corpus;
  auto detected = run_detect(corpus.prepared, corpus.cfg, 2);

  auto path = corpus.dir.file("gestures.jsonl");
  write_gesture_dump(path, detected, corpus.prepared, corpus.cfg);
  GestureDump dump = read_gesture_dump(path);
  CHECK(dump.config_hash == config_hash(corpus.cfg));
  CHECK(dump.seed == corpus.cfg.seed);
  CHECK(!dump.spans.empty());
  for (const DumpSpan& span : dump.spans) {
    bool known = false;
    for (const auto& sample : corpus.prepared) {
      if (sample.record.sample_id != span.sample_id) continue;
      known = true;
      CHECK(span.start_frame >= 0);
      CHECK(span.end_frame < sample.source_frames);  // source coordinates
    }
    CHECK(known);
  }

  auto rebuilt = attach_spans(corpus.prepared, dump, corpus.cfg);
  FeatureMatrix direct = run_features(detected, corpus.prepared, corpus.cfg);
  FeatureMatrix staged = run_features(rebuilt, corpus.prepared, corpus.cfg);
  CHECK(staged.names == direct.names);
  CHECK(staged.sample_ids == direct.sample_ids);
  REQUIRE(staged.rows.size() == direct.rows.size());
  for (std::size_t r = 0; r < staged.rows.size(); ++r) {
    for (std::size_t c = 0; c < staged.rows[r].size(); ++c) {
      CHECK(staged.rows[r][c] == direct.rows[r][c]);
    }
  }
}

TEST_CASE("attach_spans rejects inconsistent dumps") {
  Corpus corpus;
  GestureDump dump;
  dump.config_hash = config_hash(corpus.cfg);
  DumpSpan span;
  span.sample_id = "nobody";
  span.unit = UnitName::head;
  span.end_frame = 31;
  dump.spans = {span};
  CHECK_THROWS_AS(attach_spans(corpus.prepared, dump, corpus.cfg),
                  ValidationError);

  dump.spans[0].sample_id = corpus.prepared[0].record.sample_id;
  dump.spans[0].track = 99;
  CHECK_THROWS_AS(attach_spans(corpus.prepared, dump, corpus.cfg),
                  ValidationError);

  dump.spans[0].track = 0;
  dump.spans[0].start_frame = 0;
  dump.spans[0].end_frame = corpus.prepared[0].source_frames + 50;
  CHECK_THROWS_AS(attach_spans(corpus.prepared, dump, corpus.cfg),
                  ValidationError);

  dump.spans[0].end_frame = 31;
  dump.spans[0].unit = UnitName::left_foot;  // feet are not configured
  CHECK_THROWS_AS(attach_spans(corpus.prepared, dump, corpus.cfg),
                  ValidationError);
}

TEST_CASE("feature csv round trips") {
  Corpus corpus;
  auto detected = run_detect(corpus.prepared, corpus.cfg, 1);
  FeatureMatrix matrix = run_features(detected, corpus.prepared, corpus.cfg);

  auto path = corpus.dir.file("features.csv");
  write_feature_csv(path, matrix, config_hash(corpus.cfg), corpus.cfg.seed);
  FeatureFile file = read_feature_csv(path);
  CHECK(file.config_hash == config_hash(corpus.cfg));
  CHECK(file.seed == corpus.cfg.seed);
  CHECK(file.matrix.names == matrix.names);
  CHECK(file.matrix.sample_ids == matrix.sample_ids);
  CHECK(file.matrix.participant_ids == matrix.participant_ids);
  REQUIRE(file.matrix.rows.size() == matrix.rows.size());
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    for (std::size_t c = 0; c < matrix.rows[r].size(); ++c) {
      CHECK(file.matrix.rows[r][c] == matrix.rows[r][c]);
    }
  }
}

TEST_CASE("evaluation joins features with labels") {
  EvalFixture fx;

  SUBCASE("built-in threshold and full mask without search") {
    auto outcome = run_evaluation(fx.features, fx.manifest, lin_request("phq8"),
                                  7);
    CHECK(outcome.label_threshold == 7.0);
    CHECK(outcome.rows_used == 8);
    CHECK(outcome.masks_evaluated == 0);
    CHECK(outcome.report.mask == 0b11u);
    CHECK(outcome.report.per_fold_f1.size() == 3);
    CHECK(outcome.report.f1_mean == 1.0);
    CHECK(outcome.warnings.empty());
  }
  SUBCASE("threshold override wins") {
    auto request = lin_request("phq8");
    request.threshold_override = 5.5;  // moves the 6s into the upper class
    auto outcome = run_evaluation(fx.features, fx.manifest, request, 7);
    CHECK(outcome.label_threshold == 5.5);
    CHECK(outcome.rows_used == 8);
  }
  SUBCASE("unknown labels fall back to the balanced threshold") {
    auto outcome = run_evaluation(fx.features, fx.manifest,
                                  lin_request("custom"), 7);
    // balanced cut of {15,15,16,16,19,19,19,19}
    CHECK(outcome.label_threshold == 16.0);
    REQUIRE(!outcome.warnings.empty());
    CHECK(outcome.warnings[0].find("balanced") != std::string::npos);
  }
  SUBCASE("search reports the masks it visited") {
    auto request = lin_request("phq8");
    request.search = true;
    auto outcome = run_evaluation(fx.features, fx.manifest, request, 7);
    CHECK(outcome.masks_evaluated == 3);
    CHECK(outcome.report.f1_mean == 1.0);
    CHECK(mask_size(outcome.report.mask) >= 1);
  }
  SUBCASE("missing label values drop rows with a warning") {
    auto broken = fx.manifest;
    broken.samples[2].labels["phq8"] = kNaN;
    auto outcome = run_evaluation(fx.features, broken, lin_request("phq8"), 7);
    CHECK(outcome.rows_used == 7);
    REQUIRE(!outcome.warnings.empty());
    CHECK(outcome.warnings[0].find("row 2") != std::string::npos);
  }
  SUBCASE("mismatches are refused") {
    CHECK_THROWS_AS(
        run_evaluation(fx.features, fx.manifest, lin_request("missing"), 7),
        ValidationError);

    auto renamed = fx.features;
    renamed.participant_ids[0] = "zzz";
    CHECK_THROWS_AS(
        run_evaluation(renamed, fx.manifest, lin_request("phq8"), 7),
        ValidationError);

    auto orphan = fx.features;
    orphan.sample_ids[0] = "nope";
    CHECK_THROWS_AS(
        run_evaluation(orphan, fx.manifest, lin_request("phq8"), 7),
        ValidationError);
  }
}

TEST_CASE("evaluation reports carry the full summary") {
  EvalFixture fx;
  auto request = lin_request("phq8");
  request.search = true;
  auto outcome = run_evaluation(fx.features, fx.manifest, request, 7);
  std::string text = evaluation_report_json(outcome, request, "cafe0123", 7);
  auto j = nlohmann::json::parse(text);
  CHECK(j["kind"] == "evaluation_report");
  CHECK(j["config_hash"] == "cafe0123");
  CHECK(j["seed"] == 7);
  CHECK(j["label"] == "phq8");
  CHECK(j["classifier"] == "lin");
  CHECK(j["thresholds"]["label"] == 7.0);
  CHECK(j["per_fold_f1"].size() == 3);
  CHECK(j["f1_mean"] == 1.0);
  CHECK(j.contains("f1_std"));
  CHECK(j["mask_bits"] == outcome.report.mask);
  CHECK(j["selected_features"].size() == mask_size(outcome.report.mask));
  for (const auto& name : j["selected_features"]) {
    bool known = name == "alpha" || name == "beta";
    CHECK(known);
  }
  CHECK(j["notation_tokens"].size() == j["selected_features"].size());
  CHECK(j["degenerate_folds"].is_array());
  CHECK(j["degenerate_folds"].empty());
  CHECK(j["masks_evaluated"] == 3);
  CHECK(j["rows_used"] == 8);
  CHECK(j["warnings"].is_array());
}

TEST_CASE("report merging") {
  EvalFixture fx;
  TempDir dir("merge");
  auto lin_outcome =
      run_evaluation(fx.features, fx.manifest, lin_request("phq8"), 7);
  auto rf_request = lin_request("phq8");
  rf_request.classifier.kind = ClassifierKind::rf;
  auto rf_outcome = run_evaluation(fx.features, fx.manifest, rf_request, 7);

  auto a = dir.file("lin.json");
  auto b = dir.file("rf.json");
  write_file(a, evaluation_report_json(lin_outcome, lin_request("phq8"),
                                       "cafe0123", 7));
  write_file(b, evaluation_report_json(rf_outcome, rf_request, "cafe0123", 7));
  auto combined = nlohmann::json::parse(merge_reports({a, b}));
  CHECK(combined["kind"] == "combined_report");
  CHECK(combined["config_hash"] == "cafe0123");
  REQUIRE(combined["reports"].size() == 2);
  CHECK(combined["reports"][0]["classifier"] == "lin");
  CHECK(combined["reports"][1]["classifier"] == "rf");

  auto c = dir.file("other.json");
  write_file(c, evaluation_report_json(lin_outcome, lin_request("phq8"),
                                       "beef4567", 7));
  try {
    merge_reports({a, c});
    FAIL("expected a hash mismatch error");
  } catch (const ValidationError& e) {
    std::string message = e.what();
    CHECK(message.find("cafe0123") != std::string::npos);
    CHECK(message.find("beef4567") != std::string::npos);
    CHECK(message.find("other.json") != std::string::npos);
  }

  CHECK_THROWS_AS(merge_reports({dir.file("absent.json")}), IoError);
  CHECK_THROWS_AS(merge_reports({}), ValidationError);
}
