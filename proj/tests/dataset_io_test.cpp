// Copyright 2026 The MLRN Authors.
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

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dataset_io.hpp"
#include "generator.hpp"
#include "support/zip_writer.hpp"

namespace mlrn {
namespace {

namespace fs = std::filesystem;

std::string temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mlrn_dataset_io_test";
  fs::create_directories(dir);
  return (dir / name).string();
}

std::vector<SampleRecord> small_set(std::size_t n, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.triples_per_sample = 2;
  return generate_dataset(n, cfg);
}

void expect_format_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_dataset(bytes);
    FAIL() << "corrupt dataset accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat) << e.what();
  }
}

TEST(DatasetFile, RoundTrip) {
  const auto samples = small_set(100, 1);
  const std::string path = temp_path("roundtrip.mpgm");
  write_dataset(samples, path);
  EXPECT_EQ(read_dataset(path), samples);
}

TEST(DatasetFile, LayoutMatchesFormat) {
  const auto samples = small_set(2, 2);
  const auto bytes = encode_dataset(samples);
  ASSERT_GE(bytes.size(), 16u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MPGM");
  EXPECT_EQ(bytes[4] | (bytes[5] << 8), kDatasetVersion);
  EXPECT_EQ(bytes[6], 2);
  for (int i = 7; i < 14; ++i) EXPECT_EQ(bytes[i], 0);
  EXPECT_EQ(bytes[14] | (bytes[15] << 8), 32);
  std::size_t expected = 16 + 4;
  for (const SampleRecord& r : samples) expected += 16 * 32 * 32 + 2 + 3 * r.triples.size();
  EXPECT_EQ(bytes.size(), expected);
  // First record: panels, target, triple count, codes.
  const std::size_t after_panels = 16 + 16 * 32 * 32;
  EXPECT_EQ(bytes[after_panels], samples[0].target);
  EXPECT_EQ(bytes[after_panels + 1], samples[0].triples.size());
  EXPECT_EQ(bytes[after_panels + 2], static_cast<std::uint8_t>(samples[0].triples[0].object));
  EXPECT_EQ(bytes[after_panels + 3], static_cast<std::uint8_t>(samples[0].triples[0].attribute));
  EXPECT_EQ(bytes[after_panels + 4], static_cast<std::uint8_t>(samples[0].triples[0].relation));
}

TEST(DatasetFile, EmptyDataset) {
  const std::string path = temp_path("empty.mpgm");
  write_dataset({}, path, 32);
  EXPECT_TRUE(read_dataset(path).empty());
}

TEST(DatasetFile, CorruptionRejected) {
  const auto bytes = encode_dataset(small_set(3, 3));
  auto bad_magic = bytes;
  bad_magic[1] ^= 0xff;
  expect_format_error(bad_magic);
  auto bad_version = bytes;
  bad_version[4] = 9;
  expect_format_error(bad_version);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 10);
  expect_format_error(truncated);
  auto flipped = bytes;
  flipped[100] ^= 0x01;
  expect_format_error(flipped);
  expect_format_error({});
}

TEST(DatasetFile, MissingFileIsIoError) {
  try {
    read_dataset(temp_path("does_not_exist.mpgm"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(DatasetFile, MixedImageSizesRejected) {
  auto samples = small_set(2, 4);
  samples[1].image_size = 16;
  samples[1].panels.resize(16 * 16 * 16);
  EXPECT_THROW(encode_dataset(samples), Error);
}

TEST(Downscale, ConstantCheckerboardAndShape) {
  Tensor<float> c({1, 160, 160}, std::vector<float>(160 * 160, 0.25f));
  const Tensor<float> dc = downscale(c);
  EXPECT_EQ(dc.shape(), (Shape{1, 80, 80}));
  for (float v : dc.data()) EXPECT_EQ(v, 0.25f);

  Tensor<float> board({8, 8});
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x) board[y * 8 + x] = (x + y) % 2 ? 1.0f : -1.0f;
  const Tensor<float> db = downscale(board);
  EXPECT_EQ(db.shape(), (Shape{4, 4}));
  for (float v : db.data()) EXPECT_EQ(v, 0.0f);

  EXPECT_THROW(downscale(Tensor<float>({1, 7, 8})), Error);
}

std::vector<std::uint8_t> panel_bytes(std::size_t s, std::uint64_t seed) {
  std::vector<std::uint8_t> out(16 * s * s);
  Rng rng(seed);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.below(256));
  return out;
}

std::string write_npz(const std::string& name, const std::vector<testing::ZipMember>& members, bool deflate) {
  const std::string path = temp_path(name);
  write_file(path, testing::zip_bytes(members, deflate));
  return path;
}

TEST(ExternalRecord, RoundTripsDocumentedLayout) {
  const std::size_t s = 8;
  const auto pixels = panel_bytes(s, 5);
  const std::vector<std::uint8_t> target{5, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<std::uint8_t> triples{1, 1, 2, 0, 0, 3};
  for (bool deflate : {false, true}) {
    const std::string path = write_npz(deflate ? "rec_deflate.npz" : "rec_stored.npz",
                                       {{"image.npy", testing::npy_bytes("|u1", {16, s, s}, pixels)},
                                        {"target.npy", testing::npy_bytes("<i8", {}, target)},
                                        {"meta_target.npy", testing::npy_bytes("|u1", {3}, {1, 2, 3})},
                                        {"triples.npy", testing::npy_bytes("|u1", {2, 3}, triples)}},
                                       deflate);
    ExternalLayout layout;
    layout.source_size = s;
    layout.output_size = s / 2;
    const SampleRecord r = load_external_record(path, layout);
    EXPECT_NO_THROW(r.validate());
    EXPECT_EQ(r.image_size, s / 2);
    EXPECT_EQ(r.target, 5);
    ASSERT_EQ(r.triples.size(), 2u);
    EXPECT_EQ(r.triples[0], (StructureTriple{ObjectType::kShape, AttributeType::kPosition, RelationType::kXor}));
    EXPECT_EQ(r.triples[1], (StructureTriple{ObjectType::kLine, AttributeType::kColor, RelationType::kProgression}));
    // Panel 3, output pixel (1, 2) is the mean of its 2x2 source block.
    const std::size_t base = 3 * s * s;
    double mean = 0.0;
    for (std::size_t dy = 0; dy < 2; ++dy)
      for (std::size_t dx = 0; dx < 2; ++dx) mean += pixels[base + (2 + dy) * s + 4 + dx] / 127.5 - 1.0;
    mean /= 4.0;
    const std::uint8_t got = r.panel(3)[1 * (s / 2) + 2];
    EXPECT_NEAR(got / 127.5 - 1.0, mean, 0.5 / 127.5 + 1e-12);
  }
}

TEST(ExternalRecord, EndpointPixelsExact) {
  const std::size_t s = 4;
  std::vector<std::uint8_t> pixels(16 * s * s, 255);
  std::fill(pixels.begin(), pixels.begin() + static_cast<std::ptrdiff_t>(s * s), 0);
  const std::string path = write_npz("endpoints.npz",
                                     {{"image.npy", testing::npy_bytes("|u1", {16, s, s}, pixels)},
                                      {"target.npy", testing::npy_bytes("|u1", {1}, {7})}},
                                     true);
  ExternalLayout layout;
  layout.source_size = s;
  layout.output_size = s / 2;
  const SampleRecord r = load_external_record(path, layout);
  EXPECT_TRUE(r.triples.empty());
  EXPECT_EQ(r.target, 7);
  for (std::uint8_t b : r.panel(0)) EXPECT_EQ(b / 127.5 - 1.0, -1.0);
  for (std::uint8_t b : r.panel(1)) EXPECT_EQ(b / 127.5 - 1.0, 1.0);
}

TEST(ExternalRecord, RejectsBadInputs) {
  const std::size_t s = 4;
  const auto pixels = panel_bytes(s, 6);
  ExternalLayout layout;
  layout.source_size = s;
  layout.output_size = s / 2;
  auto code_of = [&](const std::string& path, const ExternalLayout& l) {
    try {
      load_external_record(path, l);
    } catch (const Error& e) {
      return e.code();
    }
    return static_cast<ErrorCode>(0);
  };
  const std::string bad_target = write_npz("bad_target.npz",
                                           {{"image.npy", testing::npy_bytes("|u1", {16, s, s}, pixels)},
                                            {"target.npy", testing::npy_bytes("|u1", {1}, {9})}},
                                           false);
  EXPECT_EQ(code_of(bad_target, layout), ErrorCode::kDomain);
  const std::string missing =
      write_npz("missing.npz", {{"image.npy", testing::npy_bytes("|u1", {16, s, s}, pixels)}}, false);
  EXPECT_EQ(code_of(missing, layout), ErrorCode::kFormat);
  const std::string wrong_size = write_npz("wrong_size.npz",
                                           {{"image.npy", testing::npy_bytes("|u1", {16, s, s}, pixels)},
                                            {"target.npy", testing::npy_bytes("|u1", {1}, {1})}},
                                           false);
  ExternalLayout other = layout;
  other.source_size = 8;
  other.output_size = 4;
  EXPECT_NE(code_of(wrong_size, other), static_cast<ErrorCode>(0));
  const std::string not_zip = temp_path("not_zip.npz");
  write_file(not_zip, {1, 2, 3, 4, 5});
  EXPECT_EQ(code_of(not_zip, layout), ErrorCode::kFormat);
}

}  // namespace
}  // namespace mlrn
