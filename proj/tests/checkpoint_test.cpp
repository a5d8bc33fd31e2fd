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

#include <bit>
#include <filesystem>

#include <gtest/gtest.h>

#include "checkpoint.hpp"
#include "config.hpp"

namespace mlrn {
namespace {

bool same_params(const ModelParams<float>& a, const ModelParams<float>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.entries()[i].first != b.entries()[i].first) return false;
    if (a.entries()[i].second.shape() != b.entries()[i].second.shape()) return false;
    if (a.entries()[i].second.storage() != b.entries()[i].second.storage()) return false;
  }
  return true;
}

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.model = TrainConfig::micro_model();
  c.model.relation_layers = 1;
  c.params = init_params<float>(c.model, 3);
  OptimizerState s = OptimizerState::create(c.params);
  for (auto& [name, t] : c.params.entries()) {
    t.enable_grad();
    for (std::size_t i = 0; i < t.size(); ++i) t.grad()[i] = static_cast<float>(i % 7) * 0.01f - 0.03f;
  }
  lamb_step(c.params, s, OptimizerConfig{}, 1e-3);
  c.optimizer = s;
  c.epoch = 12;
  c.iteration = (std::uint64_t{1} << 40) + 12345;
  return c;
}

TEST(TensorFile, ByteLayout) {
  const NamedTensors t{{"ab", Tensor<float>({2, 1}, {1.5f, -2.0f})}};
  const auto bytes = encode_tensors(t);
  const std::vector<std::uint8_t> head{'M', 'L', 'R', 'N', 1, 0, 1, 0, 0, 0, 2, 0, 'a', 'b', 2, 2, 0, 0, 0, 1, 0, 0, 0};
  ASSERT_EQ(bytes.size(), head.size() + 8);
  EXPECT_TRUE(std::equal(head.begin(), head.end(), bytes.begin()));
  const std::uint32_t v = std::bit_cast<std::uint32_t>(1.5f);
  EXPECT_EQ(bytes[head.size()], v & 0xff);
  EXPECT_EQ(bytes[head.size() + 3], v >> 24);
  const NamedTensors back = decode_tensors(bytes);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].first, "ab");
  EXPECT_EQ(back[0].second.storage(), t[0].second.storage());
}

TEST(TensorFile, CorruptionRejected) {
  auto bytes = encode_tensors({{"x", Tensor<float>({3})}});
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_tensors(bad), Error);
  bad = bytes;
  bad[4] = 7;
  EXPECT_THROW(decode_tensors(bad), Error);
  bad = bytes;
  bad.resize(bad.size() - 1);
  EXPECT_THROW(decode_tensors(bad), Error);
  bad = bytes;
  bad.push_back(0);
  EXPECT_THROW(decode_tensors(bad), Error);
}

TEST(Checkpoint, RoundTripIsExact) {
  const Checkpoint c = sample_checkpoint();
  const Checkpoint back = decode_checkpoint(encode_checkpoint(c));
  EXPECT_TRUE(same_params(back.params, c.params));
  ASSERT_TRUE(back.optimizer.has_value());
  EXPECT_TRUE(*back.optimizer == *c.optimizer);
  EXPECT_EQ(back.epoch, 12u);
  EXPECT_EQ(back.iteration, c.iteration);
  EXPECT_EQ(format_model_config(back.model), format_model_config(c.model));
  EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(c));
}

TEST(Checkpoint, NamesFollowConvention) {
  const Checkpoint c = sample_checkpoint();
  const NamedTensors t = decode_tensors(encode_checkpoint(c));
  auto has = [&](const std::string& name) {
    return std::any_of(t.begin(), t.end(), [&](const auto& e) { return e.first == name; });
  };
  EXPECT_TRUE(has("meta/model"));
  EXPECT_TRUE(has("opt/step"));
  EXPECT_TRUE(has("train/epoch"));
  for (const auto& [name, tensor] : c.params.entries()) {
    EXPECT_TRUE(has(name)) << name;
    EXPECT_TRUE(has("opt/m/" + name)) << name;
    EXPECT_TRUE(has("opt/v/" + name)) << name;
  }
}

TEST(Checkpoint, WithoutOptimizer) {
  Checkpoint c = sample_checkpoint();
  c.optimizer.reset();
  const Checkpoint back = decode_checkpoint(encode_checkpoint(c));
  EXPECT_FALSE(back.optimizer.has_value());
  EXPECT_TRUE(same_params(back.params, c.params));
}

TEST(Checkpoint, ShapeMismatchRejected) {
  Checkpoint c = sample_checkpoint();
  c.model.relation_layers = 2;  // params were built for one layer
  EXPECT_THROW(decode_checkpoint(encode_checkpoint(c)), Error);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "mlrn_checkpoint_test.ckpt").string();
  const Checkpoint c = sample_checkpoint();
  save_checkpoint(path, c);
  const Checkpoint back = load_checkpoint(path);
  EXPECT_TRUE(same_params(back.params, c.params));
  EXPECT_THROW(load_checkpoint(path + ".missing"), Error);
}

}  // namespace
}  // namespace mlrn
