#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <initializer_list>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gm/cli.hpp"
#include "gm/pipeline.hpp"
#include "test_support.hpp"

using namespace gm;
using testsupport::TempDir;
using testsupport::read_file;
using testsupport::write_file;

namespace {

// Runs the CLI in-process with cout/cerr captured so test logs stay clean.
struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult cli(std::initializer_list<std::string> args) {
  std::vector<std::string> storage = {"gmeta"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : storage) argv.push_back(a.c_str());

  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  CliResult result;
  result.code = run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

std::string path_of(const std::filesystem::path& p) { return p.string(); }

// One generated dataset reused across the workflow cases below.
struct Workspace {
  TempDir dir{"cli"};
  std::string data;
  std::string manifest;

  Workspace() {
    write_file(dir.file("synth.json"), R"({
      "participants_per_class": 2,
      "seed": 5,
      "negative": {"gesture_rate_per_min": 3.0, "amplitude_px": 1.4}
    })");
    data = path_of(dir.file("data"));
    auto made = cli({"synth", "--out", data, "--config",
                     path_of(dir.file("synth.json"))});
    REQUIRE(made.code == 0);
    manifest = data + "/manifest.csv";
    REQUIRE(std::filesystem::exists(manifest));
    REQUIRE(std::filesystem::exists(data + "/truth.jsonl"));
  }
};

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"--help"}).out.find("synth") != std::string::npos);
  CHECK(cli({}).code == 1);
  CHECK(cli({"bogus-subcommand"}).code == 1);
  CHECK(cli({"prepare"}).code == 1);  // --manifest and --out are required

  TempDir dir("cli_err");
  auto missing = cli({"prepare", "--manifest", path_of(dir.file("absent.csv")),
                      "--out", path_of(dir.file("p.json"))});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("error:") != std::string::npos);

  write_file(dir.file("m.csv"), "sample_id,participant_id,pose_path\n");
  auto unexpected =
      cli({"prepare", "--manifest", path_of(dir.file("m.csv")), "--out",
           path_of(dir.file("p.json")), "--bogus"});
  CHECK(unexpected.code == 1);

  CHECK(cli({"detect", "--out", path_of(dir.file("g.jsonl"))}).code == 1);
  auto both = cli({"detect", "--prepared", "a", "--manifest", "b", "--out",
                   path_of(dir.file("g.jsonl"))});
  CHECK(both.code == 1);
}

TEST_CASE("staged and single-shot features agree byte for byte") {
  Workspace ws;
  std::string prepared = path_of(ws.dir.file("prepared.json"));
  std::string gestures = path_of(ws.dir.file("gestures.jsonl"));
  std::string staged = path_of(ws.dir.file("staged.csv"));
  std::string single = path_of(ws.dir.file("single.csv"));
  std::string threaded = path_of(ws.dir.file("threaded.csv"));

  CHECK(cli({"prepare", "--manifest", ws.manifest, "--out", prepared}).code ==
        0);
  CHECK(cli({"detect", "--prepared", prepared, "--out", gestures}).code == 0);
  CHECK(cli({"features", "--prepared", prepared, "--gestures", gestures,
             "--out", staged})
            .code == 0);
  CHECK(cli({"features", "--manifest", ws.manifest, "--out", single}).code ==
        0);
  CHECK(cli({"features", "--manifest", ws.manifest, "--jobs", "3", "--out",
             threaded})
            .code == 0);

  CHECK(read_file(staged) == read_file(single));
  CHECK(read_file(threaded) == read_file(single));
}

TEST_CASE("artifacts from a different config are refused") {
  Workspace ws;
  std::string tuned = path_of(ws.dir.file("tuned.json"));
  REQUIRE(cli({"prepare", "--manifest", ws.manifest, "--movement-threshold",
               "0.8", "--out", tuned})
              .code == 0);

  PipelineConfig defaults;
  PipelineConfig raised = defaults;
  raised.detector.movement_threshold = 0.8;

  auto refused =
      cli({"detect", "--prepared", tuned, "--out",
           path_of(ws.dir.file("g.jsonl"))});
  CHECK(refused.code == 1);
  CHECK(refused.err.find(config_hash(defaults)) != std::string::npos);
  CHECK(refused.err.find(config_hash(raised)) != std::string::npos);

  auto accepted = cli({"detect", "--prepared", tuned, "--movement-threshold",
                       "0.8", "--out", path_of(ws.dir.file("g.jsonl"))});
  CHECK(accepted.code == 0);
}

TEST_CASE("config files apply and flags override them") {
  Workspace ws;
  write_file(ws.dir.file("pipe.json"),
             R"({"detector": {"movement_threshold": 0.8}})");
  std::string from_file = path_of(ws.dir.file("from_file.json"));
  std::string overridden = path_of(ws.dir.file("overridden.json"));

  REQUIRE(cli({"prepare", "--manifest", ws.manifest, "--config",
               path_of(ws.dir.file("pipe.json")), "--out", from_file})
              .code == 0);
  REQUIRE(cli({"prepare", "--manifest", ws.manifest, "--config",
               path_of(ws.dir.file("pipe.json")), "--movement-threshold",
               "0.9", "--out", overridden})
              .code == 0);

  PipelineConfig file_cfg;
  file_cfg.detector.movement_threshold = 0.8;
  PipelineConfig flag_cfg;
  flag_cfg.detector.movement_threshold = 0.9;
  CHECK(read_prepared_file(from_file).config_hash == config_hash(file_cfg));
  CHECK(read_prepared_file(overridden).config_hash == config_hash(flag_cfg));
}

TEST_CASE("evaluate and search write parseable deterministic reports") {
  Workspace ws;
  std::string features = path_of(ws.dir.file("features.csv"));
  REQUIRE(cli({"features", "--manifest", ws.manifest, "--out", features})
              .code == 0);

  std::string report = path_of(ws.dir.file("report.json"));
  auto run = cli({"evaluate", "--features", features, "--manifest",
                  ws.manifest, "--label", "phq8", "--folds", "2", "--out",
                  report});
  REQUIRE(run.code == 0);
  auto j = nlohmann::json::parse(read_file(report));
  CHECK(j["kind"] == "evaluation_report");
  CHECK(j["label"] == "phq8");
  CHECK(j["classifier"] == "lin");
  CHECK(j["config_hash"] == config_hash(PipelineConfig{}));
  CHECK(j["per_fold_f1"].size() == 2);
  CHECK(j["masks_evaluated"] == 0);

  std::string again = path_of(ws.dir.file("report_again.json"));
  REQUIRE(cli({"evaluate", "--features", features, "--manifest", ws.manifest,
               "--label", "phq8", "--folds", "2", "--out", again})
              .code == 0);
  CHECK(read_file(report) == read_file(again));

  std::string rf_report = path_of(ws.dir.file("report_rf.json"));
  REQUIRE(cli({"evaluate", "--features", features, "--manifest", ws.manifest,
               "--label", "phq8", "--classifier", "rf", "--folds", "2",
               "--out", rf_report})
              .code == 0);
  CHECK(nlohmann::json::parse(read_file(rf_report))["classifier"] == "rf");

  std::string searched = path_of(ws.dir.file("searched.json"));
  REQUIRE(cli({"search", "--features", features, "--manifest", ws.manifest,
               "--label", "phq8", "--folds", "2", "--out", searched})
              .code == 0);
  auto s = nlohmann::json::parse(read_file(searched));
  CHECK(s["masks_evaluated"] == (1u << 20) - 1);
  CHECK(s["mask_bits"] > 0);

  std::string merged = path_of(ws.dir.file("merged.json"));
  REQUIRE(cli({"report", report, rf_report, "--out", merged}).code == 0);
  auto m = nlohmann::json::parse(read_file(merged));
  CHECK(m["kind"] == "combined_report");
  CHECK(m["reports"].size() == 2);

  write_file(ws.dir.file("foreign.json"),
             "{\"config_hash\": \"0123456789abcdef\"}\n");
  auto mixed = cli({"report", report, path_of(ws.dir.file("foreign.json")),
                    "--out", merged});
  CHECK(mixed.code == 1);
  CHECK(mixed.err.find("0123456789abcdef") != std::string::npos);
}
