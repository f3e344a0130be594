#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gm/csv.hpp"
#include "gm/errors.hpp"
#include "gm/ingestion.hpp"
#include "test_support.hpp"

using namespace gm;
using testsupport::TempDir;
using testsupport::pose_json;
using testsupport::write_file;

TEST_CASE("csv parsing handles quotes, comments and CRLF") {
  auto table = parse_csv(
      "# config_hash=abc\r\n# seed=7\r\na,b,c\r\n1,\"x,y\",\"he said "
      "\"\"hi\"\"\"\r\n2,,3\r\n",
      "inline");
  REQUIRE(table.comments.size() == 2);
  CHECK(table.comments[0] == "config_hash=abc");
  CHECK(table.comments[1] == "seed=7");
  CHECK(table.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][1] == "x,y");
  CHECK(table.rows[0][2] == "he said \"hi\"");
  CHECK(table.rows[1][1] == "");
  CHECK(table.column("b") == 1);
  CHECK(table.column("missing") == -1);
}

TEST_CASE("csv rejects ragged rows with the line number") {
  try {
    parse_csv("a,b\n1,2\n3\n", "inline");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-8, 123456.789, 0.0, -0.0}) {
    CHECK(parse_double(format_double(v), "t") == v);
  }
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("parse_double rejects trailing garbage") {
  CHECK_THROWS_AS(parse_double("1.5x", "ctx"), ValidationError);
  CHECK_THROWS_AS(parse_double("", "ctx"), ValidationError);
  CHECK(parse_double("-3.25", "ctx") == -3.25);
}

TEST_CASE("manifest loading") {
  TempDir dir("manifest");
  write_file(dir.file("m.csv"),
             "sample_id,participant_id,fps,pose_path,phq8,gad7\n"
             "s1,p1,30,poses/s1.json,9,\n"
             "s2,p2,,poses/s2.json,4,6\n");
  Manifest m = load_manifest(dir.file("m.csv"));
  CHECK(m.label_columns == std::vector<std::string>{"phq8", "gad7"});
  REQUIRE(m.samples.size() == 2);
  CHECK(m.samples[0].fps == 30.0);
  CHECK(m.samples[1].fps == 0.0);  // to be filled from the pose file
  CHECK(m.samples[0].labels.at("phq8") == 9.0);
  CHECK(std::isnan(m.samples[0].labels.at("gad7")));
  // relative pose paths resolve against the manifest directory
  CHECK(m.samples[0].pose_path == dir.file("poses/s1.json"));
}

TEST_CASE("manifest validation errors") {
  TempDir dir("manifest_bad");
  write_file(dir.file("dup.csv"),
             "sample_id,participant_id,pose_path\ns1,p1,a.json\ns1,p2,b.json\n");
  CHECK_THROWS_AS(load_manifest(dir.file("dup.csv")), ValidationError);

  write_file(dir.file("nocol.csv"), "sample_id,pose_path\ns1,a.json\n");
  CHECK_THROWS_AS(load_manifest(dir.file("nocol.csv")), ValidationError);

  write_file(dir.file("badfps.csv"),
             "sample_id,participant_id,fps,pose_path\ns1,p1,-5,a.json\n");
  CHECK_THROWS_AS(load_manifest(dir.file("badfps.csv")), ValidationError);

  CHECK_THROWS_AS(load_manifest(dir.file("missing.csv")), IoError);
}

namespace {

SampleRecord record_for(const std::string& path) {
  SampleRecord rec;
  rec.sample_id = "s";
  rec.participant_id = "p";
  rec.pose_path = path;
  return rec;
}

}  // namespace

TEST_CASE("pose sequence detection rules") {
  TempDir dir("pose");
  auto track = testsupport::make_static_track(3);
  // point 5: explicit (0,0) not-found sentinel in frame 1
  track.frames[1].coords[5] = {0.0, 0.0};
  auto text = pose_json(track.frames, 25.0);
  // point 6 frame 2: valid coords but confidence below the floor
  auto pos = text.find("[106,212,0.9]", text.rfind("[["));
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 13, "[106,212,0.01]");
  write_file(dir.file("p.json"), text);

  double fps = 0.0;
  auto frames = load_pose_sequence(record_for(dir.file("p.json")), &fps);
  CHECK(fps == 25.0);
  REQUIRE(frames.size() == 3);
  CHECK(!frames[1].detected[5]);
  CHECK(frames[0].detected[5]);
  CHECK(!frames[2].detected[6]);
  CHECK(frames[2].coords[6].x == 106.0);
}

TEST_CASE("pose sequence without confidence assumes detected") {
  TempDir dir("pose_noc");
  std::string text = "{\"layout\":\"body25+hands\",\"frames\":[[";
  for (int p = 0; p < KeypointLayout::total; ++p) {
    if (p) text += ",";
    text += "[1.5,2.5]";
  }
  text += "]]}";
  write_file(dir.file("p.json"), text);
  double fps = -1.0;
  auto frames = load_pose_sequence(record_for(dir.file("p.json")), &fps);
  CHECK(fps == 0.0);  // file carries no fps
  CHECK(frames[0].detected[10]);
}

TEST_CASE("pose sequence errors carry indices") {
  TempDir dir("pose_bad");
  write_file(dir.file("arity.json"),
             "{\"layout\":\"body25+hands\",\"frames\":[[[1,2,3]]]}");
  try {
    load_pose_sequence(record_for(dir.file("arity.json")));
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("frame 0") != std::string::npos);
  }

  write_file(dir.file("layout.json"),
             "{\"layout\":\"coco\",\"frames\":[]}");
  CHECK_THROWS_AS(load_pose_sequence(record_for(dir.file("layout.json"))),
                  ValidationError);

  write_file(dir.file("garbage.json"), "not json");
  CHECK_THROWS_AS(load_pose_sequence(record_for(dir.file("garbage.json"))),
                  IoError);
}

TEST_CASE("splitting on full failures") {
  auto track = testsupport::make_static_track(7);
  auto fail = [&](int t) {
    track.frames[t].detected.assign(KeypointLayout::total, 0);
  };
  fail(0);
  fail(3);
  fail(4);
  auto tracks = split_on_full_failures(track.frames, 30.0);
  REQUIRE(tracks.size() == 2);
  CHECK(tracks[0].origin_start == 1);
  CHECK(tracks[0].origin_end == 2);
  CHECK(tracks[0].frame_count() == 2);
  CHECK(tracks[1].origin_start == 5);
  CHECK(tracks[1].origin_end == 6);
  CHECK(tracks[0].fps == 30.0);

  auto all_bad = testsupport::make_static_track(3);
  for (int t = 0; t < 3; ++t) {
    all_bad.frames[t].detected.assign(KeypointLayout::total, 0);
  }
  CHECK(split_on_full_failures(all_bad.frames, 30.0).empty());

  CHECK_THROWS_AS(split_on_full_failures({}, 30.0), ValidationError);
}

TEST_CASE("duration filter keeps the exact minimum") {
  auto make = [](int frames, double fps) {
    LoadedSample s;
    s.record.sample_id = "s" + std::to_string(frames);
    s.record.fps = fps;
    s.source_frame_count = frames;
    return s;
  };
  std::vector<LoadedSample> in;
  in.push_back(make(1800, 30.0));  // exactly 60 s
  in.push_back(make(1799, 30.0));  // just under
  in.push_back(make(3000, 30.0));
  auto kept = filter_short_samples(std::move(in), 60.0);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].source_frame_count == 1800);
  CHECK(kept[1].source_frame_count == 3000);

  std::vector<LoadedSample> bad;
  bad.push_back(make(100, 0.0));
  CHECK_THROWS_AS(filter_short_samples(std::move(bad), 60.0), ValidationError);
}
