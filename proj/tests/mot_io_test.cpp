#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "wtrack/mot_io.hpp"

namespace wtrack {
namespace {

DetectionSet parse_det(const std::string& text) {
  std::istringstream in(text);
  return parse_detections(in);
}

SequenceData parse_gt(const std::string& text) {
  std::istringstream in(text);
  return parse_ground_truth(in);
}

TEST(ReadDetectionsTest, FieldMapping) {
  const DetectionSet set = parse_det("1,-1,10,20,30,40,0.9,-1,-1,-1\n");
  ASSERT_EQ(set.frames.size(), 1u);
  const Detection& d = set.frames.at(1).at(0);
  EXPECT_EQ(d.frame, 1);
  EXPECT_EQ(d.box, (BoundingBox{10, 20, 30, 40}));
  EXPECT_EQ(d.confidence, 0.9);
}

TEST(ReadDetectionsTest, EmptyInput) {
  const DetectionSet set = parse_det("");
  EXPECT_TRUE(set.frames.empty());
  EXPECT_EQ(set.last_frame(), 0);
}

TEST(ReadDetectionsTest, SixFieldsNamesLineOne) {
  try {
    parse_det("1,-1,10,20,30,40\n");
    FAIL() << "expected MotFormatError";
  } catch (const MotFormatError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(ReadDetectionsTest, NonNumericNamesLine) {
  try {
    parse_det("1,-1,1,1,1,1,0.5\n2,-1,abc,1,1,1,0.5\n");
    FAIL() << "expected MotFormatError";
  } catch (const MotFormatError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(ReadDetectionsTest, CrlfAndBlankLines) {
  const DetectionSet set = parse_det("1,-1,1,2,3,4,0.5\r\n\r\n2,-1,5,6,7,8,0.25\r\n");
  EXPECT_EQ(set.size(), 2u);
  EXPECT_EQ(set.frames.at(2)[0].confidence, 0.25);
}

TEST(ReadDetectionsTest, ClampsConfidence) {
  const DetectionSet set = parse_det("1,-1,1,2,3,4,1.5\n1,-1,1,2,3,4,-0.2\n");
  EXPECT_EQ(set.clamped_confidences, 2);
  EXPECT_EQ(set.frames.at(1)[0].confidence, 1.0);
  EXPECT_EQ(set.frames.at(1)[1].confidence, 0.0);
}

TEST(ReadDetectionsTest, RejectsDegenerateBoxWithDiagnostic) {
  const DetectionSet set = parse_det("1,-1,1,2,0,4,0.5\n1,-1,1,2,3,4,0.5\n");
  EXPECT_EQ(set.size(), 1u);
  ASSERT_EQ(set.diagnostics.size(), 1u);
  EXPECT_NE(set.diagnostics[0].find("line 1"), std::string::npos);
}

TEST(ReadDetectionsTest, GroupsByFrameInOrder) {
  const DetectionSet set = parse_det("3,-1,1,1,1,1,0.5\n1,-1,1,1,1,1,0.5\n3,-1,2,2,2,2,0.5\n");
  EXPECT_EQ(set.size(), 3u);
  EXPECT_EQ(set.frames.begin()->first, 1);
  EXPECT_EQ(set.frames.at(3).size(), 2u);
}

TEST(ReadGroundTruthTest, OneRecord) {
  const SequenceData seq = parse_gt("1,3,0,0,10,10,1,1,1.0\n");
  ASSERT_EQ(seq.records.size(), 1u);
  EXPECT_EQ(seq.records[0].id, 3);
  EXPECT_TRUE(seq.records[0].evaluable);
}

TEST(ReadGroundTruthTest, FlagZeroIsParsedButNotEvaluable) {
  const SequenceData seq = parse_gt("1,3,0,0,10,10,0,1,1.0\n1,4,0,0,10,10,1,1,1.0\n");
  EXPECT_EQ(seq.records.size(), 2u);
  EXPECT_EQ(seq.evaluable_count(), 1u);
}

TEST(ReadGroundTruthTest, NonPersonClassIsNotEvaluable) {
  const SequenceData seq = parse_gt("1,3,0,0,10,10,1,3,1.0\n");
  EXPECT_EQ(seq.evaluable_count(), 0u);
}

TEST(ReadGroundTruthTest, DuplicateFrameIdIsError) {
  EXPECT_THROW(parse_gt("1,3,0,0,10,10,1,1,1\n1,3,5,5,10,10,1,1,1\n"), MotFormatError);
}

TEST(WriteResultsTest, SingleRow) {
  const std::vector<TrackedDetection> rows{{{1, {10, 20, 30.125, 40}, 0.9}, 7}};
  EXPECT_EQ(format_results(rows), "1,7,10.00,20.00,30.12,40.00,0.900000,-1,-1,-1\n");
}

TEST(WriteResultsTest, UnsortedInputIsError) {
  const std::vector<TrackedDetection> rows{{{2, {0, 0, 1, 1}, 0.9}, 1}, {{1, {0, 0, 1, 1}, 0.9}, 1}};
  EXPECT_THROW(format_results(rows), std::invalid_argument);
}

TEST(WriteResultsTest, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "wtrack_mot_io_test";
  std::filesystem::create_directories(dir);
  const std::vector<TrackedDetection> rows{{{1, {1.5, 2.25, 30, 40}, 0.75}, 2}, {{2, {3, 4, 5, 6}, 0.5}, 1}};
  write_results(dir / "res.txt", rows);
  const DetectionSet back = read_detections(dir / "res.txt");
  EXPECT_EQ(back.frames.at(1)[0].box, rows[0].detection.box);
  EXPECT_EQ(back.frames.at(2)[0].confidence, 0.5);
  const SequenceData res = read_results(dir / "res.txt");
  EXPECT_EQ(res.records[0].id, 2);
  EXPECT_THROW(read_results(dir / "missing.txt"), MotIoError);
  std::filesystem::remove_all(dir);
}

TEST(MotIoPropertyTest, RewriteIsByteStable) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(0, 1920), size(1, 300), conf(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TrackedDetection> rows;
    for (int f = 1; f <= 20; ++f)
      for (int id = 1; id <= 1 + trial % 5; ++id)
        rows.push_back({{f, {pos(rng), pos(rng), size(rng), size(rng)}, conf(rng)}, id});
    const std::string once = format_results(rows);
    std::istringstream in(once);
    const SequenceData back = parse_results(in);
    ASSERT_EQ(back.records.size(), rows.size());
    std::vector<TrackedDetection> again;
    for (const MotRecord& r : back.records) again.push_back({{r.frame, r.box, r.confidence}, r.id});
    EXPECT_EQ(format_results(again), once);

    std::istringstream din(once);
    const DetectionSet dets = parse_detections(din);
    EXPECT_EQ(dets.size(), rows.size());
  }
}

TEST(MotIoPropertyTest, GroundTruthRewriteIsByteStable) {
  const std::string text = "1,1,10.50,20.00,30.00,40.00,1,1,0.75\n1,2,1.00,2.00,3.00,4.00,0,7,1.00\n";
  EXPECT_EQ(format_ground_truth(parse_gt(text)), text);
}

}  // namespace
}  // namespace wtrack
