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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "encoding.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace mlrn {
namespace {

MEConfig cfg(std::size_t d, double sigma, EncodingVariant v) { return MEConfig{d, sigma, v}; }

class BothVariants : public ::testing::TestWithParam<EncodingVariant> {};

TEST_P(BothVariants, ExactAtCenters) {
  for (std::size_t d : {2u, 5u, 8u, 20u}) {
    const MEConfig c = cfg(d, 0.28, GetParam());
    for (std::size_t j = 0; j < d; ++j) {
      const double x = c.center(j);
      EXPECT_EQ(encode_component(x, j, c), 1.0) << "d=" << d << " j=" << j;
    }
  }
}

TEST_P(BothVariants, RangeShapeAndNearestPeak) {
  const MEConfig c = cfg(7, 0.22, GetParam());
  Rng rng(3);
  std::vector<double> xs(500);
  for (double& x : xs) x = rng.uniform(-1.0, 1.0);
  const std::vector<double> enc = magnitude_encode(xs, c);
  ASSERT_EQ(enc.size(), xs.size() * c.d);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::size_t nearest = 0;
    for (std::size_t j = 1; j < c.d; ++j)
      if (std::abs(xs[i] - c.center(j)) < std::abs(xs[i] - c.center(nearest))) nearest = j;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < c.d; ++j) {
      const double v = enc[i * c.d + j];
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      if (v > enc[i * c.d + arg]) arg = j;
    }
    EXPECT_EQ(arg, nearest) << "x=" << xs[i];
  }
}

TEST_P(BothVariants, TieGoesToLowerIndex) {
  const MEConfig c = cfg(5, 0.22, GetParam());
  const double mid = 0.5 * (c.center(1) + c.center(2));
  const std::vector<double> enc = magnitude_encode(std::vector<double>{mid}, c);
  std::size_t arg = 0;
  for (std::size_t j = 0; j < c.d; ++j)
    if (enc[j] > enc[arg]) arg = j;
  EXPECT_EQ(arg, 1u);
}

TEST_P(BothVariants, MirrorSymmetry) {
  const MEConfig c = cfg(6, 0.3, GetParam());
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const double x = rng.uniform(-1.0, 1.0);
    for (std::size_t j = 0; j < c.d; ++j)
      EXPECT_NEAR(encode_component(-x, j, c), encode_component(x, c.d - 1 - j, c), 1e-12);
  }
}

TEST_P(BothVariants, DomainChecks) {
  const MEConfig c = cfg(5, 0.22, GetParam());
  const std::vector<double> edge{1.0 + 5e-7, -1.0 - 5e-7};
  const std::vector<double> enc = magnitude_encode(edge, c);
  EXPECT_EQ(enc[4], 1.0);
  EXPECT_EQ(enc[5], 1.0);
  for (double bad : {1.0 + 1e-5, -1.01, static_cast<double>(NAN), static_cast<double>(INFINITY)}) {
    try {
      magnitude_encode(std::vector<double>{bad}, c);
      FAIL() << "accepted " << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDomain);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Encoding, BothVariants,
                         ::testing::Values(EncodingVariant::kGaussian, EncodingVariant::kTriangle));

TEST(Gaussian, SpotValue) {
  const MEConfig c = cfg(5, 0.22, EncodingVariant::kGaussian);
  const std::vector<double> enc = magnitude_encode_gaussian(std::vector<double>{0.0}, c);
  EXPECT_EQ(enc[2], 1.0);
  EXPECT_NEAR(enc[1], 0.0756, 1e-4);
  EXPECT_NEAR(enc[1], std::exp(-0.25 / (2 * 0.22 * 0.22)), 1e-15);
  EXPECT_EQ(enc[0], enc[4]);
}

TEST(Gaussian, StrictlyPositive) {
  const MEConfig c = cfg(20, 0.28, EncodingVariant::kGaussian);
  const std::vector<double> enc = magnitude_encode_gaussian(std::vector<double>{-1.0, 0.13, 1.0}, c);
  for (double v : enc) EXPECT_GT(v, 0.0);
}

TEST(Gaussian, LeftEdge) {
  const std::vector<double> enc =
      magnitude_encode_gaussian(std::vector<double>{-1.0}, cfg(5, 0.22, EncodingVariant::kGaussian));
  EXPECT_EQ(enc[0], 1.0);
}

TEST(Gaussian, PanelShape) {
  const std::vector<double> x(6400, 0.5);
  EXPECT_EQ(magnitude_encode(x, cfg(20, 0.28, EncodingVariant::kGaussian)).size(), 6400u * 20u);
}

TEST(Triangle, SupportIsOneGap) {
  const MEConfig c = cfg(6, 0.28, EncodingVariant::kTriangle);
  for (std::size_t j = 0; j < c.d; ++j) {
    const std::vector<double> enc = magnitude_encode_triangle(std::vector<double>{c.center(j)}, c);
    for (std::size_t k = 0; k < c.d; ++k) {
      const std::size_t dist = j > k ? j - k : k - j;
      if (dist == 0) EXPECT_EQ(enc[k], 1.0);
      if (dist >= 1) EXPECT_NEAR(enc[k], 0.0, 1e-12);
    }
  }
}

TEST(Triangle, MidpointIsHalf) {
  const MEConfig c = cfg(5, 0.28, EncodingVariant::kTriangle);
  for (std::size_t j = 0; j + 1 < c.d; ++j) {
    const double mid = 0.5 * (c.center(j) + c.center(j + 1));
    const std::vector<double> enc = magnitude_encode_triangle(std::vector<double>{mid}, c);
    EXPECT_NEAR(enc[j], 0.5, 1e-12);
    EXPECT_NEAR(enc[j + 1], 0.5, 1e-12);
  }
}

TEST(Triangle, PartitionOfUnityForTwoComponents) {
  const MEConfig c = cfg(2, 0.28, EncodingVariant::kTriangle);
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const double x = rng.uniform(-1.0, 1.0);
    const std::vector<double> enc = magnitude_encode_triangle(std::vector<double>{x}, c);
    EXPECT_NEAR(enc[0] + enc[1], 1.0, 1e-12);
  }
}

TEST(MEConfig, Validation) {
  EXPECT_THROW(cfg(1, 0.2, EncodingVariant::kGaussian).validate(), Error);
  EXPECT_THROW(cfg(4, 0.0, EncodingVariant::kGaussian).validate(), Error);
  EXPECT_NO_THROW(cfg(2, 0.1, EncodingVariant::kTriangle).validate());
  EXPECT_EQ(parse_encoding_variant(to_string(EncodingVariant::kTriangle)), EncodingVariant::kTriangle);
  EXPECT_THROW(parse_encoding_variant("cosine"), Error);
}

TEST(PixelEncodingTable, MatchesDirectEncoding) {
  const MEConfig c = cfg(8, 0.28, EncodingVariant::kGaussian);
  const PixelEncodingTable table(c);
  EXPECT_EQ(byte_to_unit(0), -1.0);
  EXPECT_EQ(byte_to_unit(255), 1.0);
  for (int b = 0; b < 256; ++b) {
    const std::vector<double> direct =
        magnitude_encode(std::vector<double>{byte_to_unit(static_cast<std::uint8_t>(b))}, c);
    for (std::size_t j = 0; j < c.d; ++j) EXPECT_EQ(table.row(static_cast<std::uint8_t>(b))[j], direct[j]);
  }
}

}  // namespace
}  // namespace mlrn
