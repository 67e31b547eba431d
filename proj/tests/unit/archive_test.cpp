#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "headroom/archive.hpp"
#include "headroom/error.hpp"

namespace headroom {
namespace {

Observation sample_observation() {
  Observation o;
  o.query_tokens[0] = 3;
  o.query_tokens[255] = 63;
  o.plan_tokens[1] = 17;
  o.sql = "SELECT COUNT(*) FROM A WHERE A.s = 'it''s';";
  o.default_plan = "A";
  o.witness_plan = "A";
  o.l_default = 12345;
  o.l_witness = 6789;
  o.count = 4;
  o.relative = relative_headroom(o.l_default, o.l_witness, false);
  o.absolute = absolute_headroom(o.l_default, o.l_witness, false);
  o.objective = o.relative;
  o.eligible = false;
  o.iteration = 7;
  o.timestamp = 99;
  o.seed = 18446744073709551615ULL;
  o.phase = "bo";
  return o;
}

TEST(HeadroomArithmeticTest, RelativeAndAbsolute) {
  EXPECT_DOUBLE_EQ(relative_headroom(50'000'000, 2'500'000, false), 20.0);
  EXPECT_DOUBLE_EQ(absolute_headroom(50'000'000, 2'500'000, false), 47'500'000.0);
  EXPECT_DOUBLE_EQ(relative_headroom(7, 7, false), 1.0);
  EXPECT_DOUBLE_EQ(relative_headroom(9, 0, false), 9.0);
  EXPECT_DOUBLE_EQ(relative_headroom(100, 1600, true), 0.0);
  EXPECT_DOUBLE_EQ(absolute_headroom(100, 1600, true), -1600.0);
  EXPECT_DOUBLE_EQ(objective_value(ObjectiveMode::Absolute, 2.0, -5.0), -5.0);
  EXPECT_DOUBLE_EQ(objective_value(ObjectiveMode::Relative, 2.0, -5.0), 2.0);
}

TEST(ArchiveTest, JsonRoundTrip) {
  const auto o = sample_observation();
  const auto line = observation_to_json(o);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(observation_from_json(line), o);
  EXPECT_EQ(observation_to_json(observation_from_json(line)), line);
}

TEST(ArchiveTest, FileRoundTripIsByteStable) {
  auto second = sample_observation();
  second.timestamp = 100;
  second.witness_timed_out = true;
  second.relative = 0.0;
  const std::vector<Observation> archive = {sample_observation(), second};
  const auto dir = testing::scratch_dir("archive");
  write_archive(dir / "a.jsonl", archive);
  const auto restored = read_archive(dir / "a.jsonl");
  EXPECT_EQ(restored, archive);
  EXPECT_EQ(archive_to_jsonl(restored), read_file(dir / "a.jsonl"));
}

TEST(ArchiveTest, MalformedLinesNameTheLine) {
  const auto good = observation_to_json(sample_observation());
  try {
    parse_archive(good + "\n{\"sql\": 1}\n", "runs.jsonl");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("runs.jsonl:2"), std::string::npos) << e.what();
  }
}

TEST(ArchiveTest, ModeNames) {
  EXPECT_EQ(parse_objective_mode("relative"), ObjectiveMode::Relative);
  EXPECT_EQ(parse_objective_mode("absolute"), ObjectiveMode::Absolute);
  EXPECT_EQ(to_string(ObjectiveMode::Absolute), "absolute");
  EXPECT_THROW(parse_objective_mode("ratio"), Error);
}

}  // namespace
}  // namespace headroom
