// Copyright 2026 The pgmkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pgmkit/mask_io.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <limits>

#include "oracles/oracles.hpp"
#include "test_util.hpp"

namespace pgmkit {
namespace {

using testing::read_bytes;
using testing::TempDir;
using testing::write_bytes;

std::string p5(std::size_t w, std::size_t h, unsigned maxval, const std::string& raster) {
  return "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n" +
         std::to_string(maxval) + "\n" + raster;
}

std::string le_float(float f) {
  std::string s(4, '\0');
  std::memcpy(s.data(), &f, 4);
  return s;
}

TEST(NetpbmTest, Maxval255FullScaleIsOne) {
  TempDir dir;
  write_bytes(dir / "a.pgm", p5(1, 1, 255, std::string(1, char(255))));
  const auto g = read_grid(dir / "a.pgm", GridFormat::kNetpbmGray);
  ASSERT_EQ(g.width(), 1u);
  ASSERT_EQ(g.height(), 1u);
  EXPECT_EQ(g(0, 0), 1.0);
}

TEST(NetpbmTest, ZeroSampleIsZero) {
  const auto g = parse_real_grid(p5(1, 1, 255, std::string(1, '\0')), GridFormat::kNetpbmGray);
  EXPECT_EQ(g(0, 0), 0.0);
}

TEST(NetpbmTest, SixteenBitSamplesAreBigEndianAndScaled) {
  // 32768 / 65535 = 0.500007629510948... (long division by hand).
  const std::string raster{char(0x80), char(0x00)};
  const auto g = parse_real_grid(p5(1, 1, 65535, raster), GridFormat::kNetpbmGray);
  EXPECT_NEAR(g(0, 0), 0.50000763, 5e-9);
  EXPECT_DOUBLE_EQ(g(0, 0), 0.500007629510948);
}

TEST(NetpbmTest, HeaderCommentsAndRowOrder) {
  const std::string bytes = "P5 # magic\n# a comment line\n2 2\n# max\n255\n" +
                            std::string{char(0), char(51), char(102), char(255)};
  const auto g = parse_real_grid(bytes, GridFormat::kNetpbmGray);
  EXPECT_EQ(g(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(g(1, 0), 0.2);
  EXPECT_DOUBLE_EQ(g(0, 1), 0.4);
  EXPECT_EQ(g(1, 1), 1.0);
}

TEST(NetpbmTest, MalformedHeaderReportsOffset) {
  try {
    parse_real_grid("P5\n2 x\n255\n", GridFormat::kNetpbmGray);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 5u);
  }
  EXPECT_THROW(parse_real_grid("P6\n1 1\n255\n\x01", GridFormat::kNetpbmGray), ParseError);
  EXPECT_THROW(parse_real_grid("P5\n2 2\n255\n\x01", GridFormat::kNetpbmGray), ParseError);
  EXPECT_THROW(parse_real_grid("P5\n1 1\n0\n\x01", GridFormat::kNetpbmGray), ParseError);
  EXPECT_THROW(parse_real_grid("P5\n1 1\n70000\n\x01", GridFormat::kNetpbmGray), ParseError);
  EXPECT_THROW(parse_real_grid("P5\n1 1\n100\n\xff", GridFormat::kNetpbmGray), ParseError);
}

TEST(NetpbmTest, MissingFileIsIoError) {
  EXPECT_THROW(read_grid("/nonexistent/dir/mask.pgm", GridFormat::kNetpbmGray), IoError);
}

TEST(NetpbmTest, Gray16WriteMapsUnitIntervalToFullScale) {
  const RealGrid zeros(2, 2, 0.0);
  const std::string z = serialize_grid(zeros, GridFormat::kNetpbmGray16);
  EXPECT_EQ(z, "P5\n2 2\n65535\n" + std::string(8, '\0'));

  const RealGrid one(1, 1, 1.0);
  const std::string o = serialize_grid(one, GridFormat::kNetpbmGray16);
  EXPECT_EQ(o.substr(o.size() - 2), std::string("\xff\xff"));

  const RealGrid hot(1, 1, 1.5);
  EXPECT_THROW(serialize_grid(hot, GridFormat::kNetpbmGray16), RangeError);
}

TEST(NetpbmTest, Gray16RoundTripWithinOneStep) {
  oracle::Rng rng(7);
  const auto g = oracle::random_grid(rng, 13, 9);
  const auto back = parse_real_grid(serialize_grid(g, GridFormat::kNetpbmGray16),
                                    GridFormat::kNetpbmGray);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_LE(std::abs(back.values()[i] - g.values()[i]), 1.0 / 65535.0);
}

TEST(PfmTest, RowsAreStoredBottomToTop) {
  // 1x2 grid: disk row 0 is the bottom image row.
  const std::string bytes = "Pf\n1 2\n-1.0\n" + le_float(0.25f) + le_float(0.75f);
  const auto g = parse_real_grid(bytes, GridFormat::kPfmFloat);
  EXPECT_EQ(g(0, 0), 0.75);
  EXPECT_EQ(g(0, 1), 0.25);
  EXPECT_EQ(serialize_grid(g, GridFormat::kPfmFloat), bytes);
}

TEST(PfmTest, BigEndianAccepted) {
  std::string be = le_float(0.5f);
  std::swap(be[0], be[3]);
  std::swap(be[1], be[2]);
  const auto g = parse_real_grid("Pf\n1 1\n1.0\n" + be, GridFormat::kPfmFloat);
  EXPECT_EQ(g(0, 0), 0.5);
}

TEST(PfmTest, RandomGridRoundTripIsBitExact) {
  oracle::Rng rng(11);
  TempDir dir;
  const auto g = oracle::random_grid(rng, 64, 64);
  write_grid(g, dir / "g.pfm", GridFormat::kPfmFloat);
  const auto first = read_bytes(dir / "g.pfm");
  const auto back = read_grid(dir / "g.pfm", GridFormat::kPfmFloat);
  write_grid(back, dir / "g2.pfm", GridFormat::kPfmFloat);
  EXPECT_EQ(read_bytes(dir / "g2.pfm"), first);
  // Values already representable in float32 come back unchanged.
  EXPECT_EQ(read_grid(dir / "g2.pfm", GridFormat::kPfmFloat), back);
}

TEST(PfmTest, OutOfRangeValuesRejectedForLuminance) {
  const std::string hot = "Pf\n1 1\n-1.0\n" + le_float(1.5f);
  EXPECT_THROW(LuminanceGrid(parse_real_grid(hot, GridFormat::kPfmFloat)), RangeError);
  EXPECT_EQ(parse_real_grid(hot, GridFormat::kPfmFloat)(0, 0), 1.5);
  const std::string nan =
      "Pf\n1 1\n-1.0\n" + le_float(std::numeric_limits<float>::quiet_NaN());
  EXPECT_THROW(LuminanceGrid(parse_real_grid(nan, GridFormat::kPfmFloat)), RangeError);

  TempDir dir;
  write_bytes(dir / "hot.pfm", hot);
  EXPECT_THROW(read_grid(dir / "hot.pfm", GridFormat::kPfmFloat), RangeError);
}

TEST(PfmTest, MalformedHeader) {
  EXPECT_THROW(parse_real_grid("PF\n1 1\n-1.0\n", GridFormat::kPfmFloat), ParseError);
  EXPECT_THROW(parse_real_grid("Pf\n1 1\nabc\n0000", GridFormat::kPfmFloat), ParseError);
  EXPECT_THROW(parse_real_grid("Pf\n2 2\n-1.0\n0000", GridFormat::kPfmFloat), ParseError);
}

TEST(RleTest, DecodesColumnMajorBackgroundFirst) {
  const std::vector<std::uint64_t> counts{3, 2, 1};
  const BinaryMask m = decode_rle(counts, 2, 3);
  // Column-major index i -> (x = i / h, y = i % h); foreground at 3 and 4.
  std::vector<bool> expect_cm{false, false, false, true, true, false};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(m(i / 2, i % 2), expect_cm[i]) << i;
  EXPECT_EQ(m.count(), 2u);
}

TEST(RleTest, LeadingZeroRunAndAllBackground) {
  const std::vector<std::uint64_t> full{0, 6}, empty{6};
  EXPECT_EQ(decode_rle(full, 2, 3).count(), 6u);
  EXPECT_EQ(decode_rle(empty, 2, 3).count(), 0u);
}

TEST(RleTest, CountMismatchIsParseError) {
  const std::vector<std::uint64_t> counts{3, 2};
  EXPECT_THROW(decode_rle(counts, 2, 3), ParseError);
}

TEST(RleTest, EncodeDecodeRoundTripRandomMasks) {
  oracle::Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t w = rng.between(1, 32), h = rng.between(1, 32);
    const BinaryMask m = oracle::random_mask(rng, w, h, rng.uniform());
    const auto counts = encode_rle(m);
    ASSERT_EQ(decode_rle(counts, h, w), m) << "trial " << trial;
  }
}

TEST(InstanceTest, AreaMatchesPopcountAndBboxIsTight) {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t w = rng.between(1, 20), h = rng.between(1, 20);
    const BinaryMask m = oracle::random_mask(rng, w, h, rng.uniform() * 0.3);
    const InstanceAnnotation a(0, m);
    EXPECT_EQ(a.area(), oracle::popcount(m));
    const auto b = a.bbox();
    if (a.area() == 0) {
      EXPECT_EQ(b, BoundingBox{});
      continue;
    }
    std::size_t inside = 0;
    bool left = false, right = false, top = false, bottom = false;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        if (!m(x, y)) continue;
        inside += x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
        left |= x == b.x;
        right |= x == b.x + b.w - 1;
        top |= y == b.y;
        bottom |= y == b.y + b.h - 1;
      }
    EXPECT_EQ(inside, a.area());
    EXPECT_TRUE(left && right && top && bottom);
  }
}

TEST(InstanceTest, EmptyMaskHasSentinelBox) {
  const InstanceAnnotation a(3, BinaryMask(4, 4));
  EXPECT_EQ(a.area(), 0u);
  EXPECT_EQ(a.bbox(), (BoundingBox{0, 0, 0, 0}));
}

TEST(DetectionTest, ScoreMustBeInUnitInterval) {
  EXPECT_THROW(Detection(0, 1.5, BinaryMask(1, 1)), RangeError);
  EXPECT_THROW(Detection(0, std::nan(""), BinaryMask(1, 1)), RangeError);
}

TEST(MaskConversionTest, LuminanceRoundTripIsLossless) {
  oracle::Rng rng(9);
  const BinaryMask m = oracle::random_mask(rng, 7, 5);
  EXPECT_EQ(to_mask(to_luminance(m)), m);
}

constexpr const char* kOneInstance = R"({
  "images": [{"id": 1, "width": 3, "height": 2}],
  "annotations": [{"image_id": 1, "category_id": 0, "rle": [3, 2, 1]}]
})";

TEST(AnnotationTest, GroundTruthFromRle) {
  const auto images = parse_annotations(kOneInstance, RecordKind::kGroundTruth);
  ASSERT_EQ(images.size(), 1u);
  EXPECT_EQ(images[0].image_id, 1);
  ASSERT_EQ(images[0].instances.size(), 1u);
  EXPECT_EQ(images[0].instances[0].area(), 2u);
  EXPECT_EQ(images[0].instances[0].category_id(), 0);
  EXPECT_TRUE(images[0].detections.empty());
}

TEST(AnnotationTest, EmptyAnnotationList) {
  EXPECT_TRUE(parse_annotations(R"({"images": [], "annotations": []})",
                                RecordKind::kGroundTruth)
                  .empty());
}

TEST(AnnotationTest, PredictionCarriesScore) {
  const auto images = parse_annotations(R"({
    "images": [{"id": 4, "width": 3, "height": 2}],
    "annotations": [{"image_id": 4, "category_id": 2, "rle": [3, 2, 1], "score": 0.9}]
  })",
                                        RecordKind::kPrediction);
  ASSERT_EQ(images[0].detections.size(), 1u);
  EXPECT_EQ(images[0].detections[0].score(), 0.9);
  EXPECT_EQ(images[0].detections[0].area(), 2u);
}

TEST(AnnotationTest, MissingScoreOnPredictionIsSchemaError) {
  EXPECT_THROW(parse_annotations(kOneInstance, RecordKind::kPrediction), SchemaError);
}

TEST(AnnotationTest, UnknownEncodingIsParseError) {
  EXPECT_THROW(parse_annotations(R"({
    "images": [{"id": 1, "width": 3, "height": 2}],
    "annotations": [{"image_id": 1, "category_id": 0, "segmentation": "abc"}]
  })",
                                 RecordKind::kGroundTruth),
               ParseError);
}

TEST(AnnotationTest, SchemaViolations) {
  EXPECT_THROW(parse_annotations(R"({"annotations": [{"image_id": 9, "category_id": 0,
                                     "rle": [1]}]})",
                                 RecordKind::kGroundTruth),
               SchemaError);
  EXPECT_THROW(parse_annotations("[1, 2]", RecordKind::kGroundTruth), SchemaError);
  EXPECT_THROW(parse_annotations(R"({"images": [{"id": 1, "width": 3}]})",
                                 RecordKind::kGroundTruth),
               SchemaError);
  try {
    parse_annotations(R"({"images": [}")", RecordKind::kGroundTruth);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(e.offset(), ParseError::npos);
  }
}

TEST(AnnotationTest, MaskFileResolvedRelativeToJson) {
  TempDir dir;
  write_bytes(dir / "m.pgm", p5(3, 2, 255, std::string{char(0), char(255), char(0),
                                                        char(255), char(255), char(0)}));
  write_bytes(dir / "gt.json", R"({
    "images": [{"id": 1, "width": 3, "height": 2}],
    "annotations": [{"image_id": 1, "category_id": 5, "mask_file": "m.pgm"}]
  })");
  const auto images = load_annotations(dir / "gt.json", RecordKind::kGroundTruth);
  ASSERT_EQ(images[0].instances.size(), 1u);
  EXPECT_EQ(images[0].instances[0].area(), 3u);
  EXPECT_EQ(images[0].instances[0].bbox(), (BoundingBox{0, 0, 2, 2}));
}

}  // namespace
}  // namespace pgmkit
