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

#include "checkpoint.hpp"

#include <bit>
#include <cstring>

#include "config.hpp"
#include "dataset_io.hpp"
#include "error.hpp"

namespace mlrn {

namespace {

constexpr char kMagic[4] = {'M', 'L', 'R', 'N'};

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
}

struct Reader {
  const std::vector<std::uint8_t>& b;
  std::size_t pos = 0;

  template <typename U>
  U get() {
    require(pos + sizeof(U) <= b.size(), ErrorCode::kFormat, "checkpoint truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<std::uint64_t>(b[pos + i]) << (8 * i);
    pos += sizeof(U);
    return static_cast<U>(v);
  }
};

// Exact u64 storage in float32: four 16-bit limbs.
Tensor<float> u64_tensor(std::uint64_t v) {
  Tensor<float> t({4});
  for (std::size_t i = 0; i < 4; ++i) t[i] = static_cast<float>((v >> (16 * i)) & 0xffff);
  return t;
}

std::uint64_t tensor_u64(const Tensor<float>& t, const std::string& name) {
  require(t.size() == 4, ErrorCode::kFormat, "checkpoint tensor '" + name + "' is not a counter");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v |= static_cast<std::uint64_t>(t[i]) << (16 * i);
  return v;
}

Tensor<float> text_tensor(const std::string& s) {
  Tensor<float> t({s.size()});
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = static_cast<unsigned char>(s[i]);
  return t;
}

std::string tensor_text(const Tensor<float>& t) {
  std::string s(t.size(), '\0');
  for (std::size_t i = 0; i < t.size(); ++i) s[i] = static_cast<char>(static_cast<unsigned char>(t[i]));
  return s;
}

}  // namespace

std::vector<std::uint8_t> encode_tensors(const NamedTensors& tensors) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_le<std::uint16_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    require(name.size() <= UINT16_MAX && t.rank() <= UINT8_MAX, ErrorCode::kInvalidArgument,
            "tensor '" + name + "' cannot be stored");
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (float v : t.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

NamedTensors decode_tensors(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 10 && std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorCode::kFormat,
          "not a checkpoint file (bad magic)");
  Reader r{bytes, 4};
  const auto version = r.get<std::uint16_t>();
  require(version == kCheckpointVersion, ErrorCode::kFormat, "unsupported checkpoint version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  NamedTensors out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = r.get<std::uint16_t>();
    require(r.pos + len <= bytes.size(), ErrorCode::kFormat, "checkpoint truncated");
    std::string name(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos),
                     bytes.begin() + static_cast<std::ptrdiff_t>(r.pos + len));
    r.pos += len;
    const auto rank = r.get<std::uint8_t>();
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint32_t>();
    const std::size_t n = shape_size(shape);
    require(r.pos + 4 * n <= bytes.size(), ErrorCode::kFormat, "checkpoint truncated in '" + name + "'");
    Tensor<float> t(shape);
    for (std::size_t k = 0; k < n; ++k) t[k] = std::bit_cast<float>(r.get<std::uint32_t>());
    out.emplace_back(std::move(name), std::move(t));
  }
  require(r.pos == bytes.size(), ErrorCode::kFormat, "trailing bytes in checkpoint");
  return out;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  check_params(ckpt.params, ckpt.model);
  NamedTensors t;
  t.emplace_back("meta/model", text_tensor(format_model_config(ckpt.model)));
  for (const auto& [name, p] : ckpt.params.entries()) t.emplace_back(name, Tensor<float>(p.shape(), p.storage()));
  t.emplace_back("train/epoch", u64_tensor(ckpt.epoch));
  t.emplace_back("train/iteration", u64_tensor(ckpt.iteration));
  if (ckpt.optimizer) {
    ckpt.optimizer->check_matches(ckpt.params);
    t.emplace_back("opt/step", u64_tensor(ckpt.optimizer->step));
    for (const Moments& m : ckpt.optimizer->moments) {
      t.emplace_back("opt/m/" + m.name, m.m);
      t.emplace_back("opt/v/" + m.name, m.v);
    }
  }
  return encode_tensors(t);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  NamedTensors tensors = decode_tensors(bytes);
  Checkpoint ckpt;
  bool have_meta = false;
  std::optional<std::uint64_t> step;
  std::vector<std::pair<std::string, Tensor<float>>> m_list, v_list;
  for (auto& [name, t] : tensors) {
    if (name == "meta/model") {
      ckpt.model = parse_model_config(tensor_text(t));
      have_meta = true;
    } else if (name == "train/epoch") {
      ckpt.epoch = tensor_u64(t, name);
    } else if (name == "train/iteration") {
      ckpt.iteration = tensor_u64(t, name);
    } else if (name == "opt/step") {
      step = tensor_u64(t, name);
    } else if (name.rfind("opt/m/", 0) == 0) {
      m_list.emplace_back(name.substr(6), std::move(t));
    } else if (name.rfind("opt/v/", 0) == 0) {
      v_list.emplace_back(name.substr(6), std::move(t));
    } else {
      ckpt.params.add(name, std::move(t));
    }
  }
  require(have_meta, ErrorCode::kFormat, "checkpoint lacks the model description");
  check_params(ckpt.params, ckpt.model);
  if (step) {
    require(m_list.size() == v_list.size(), ErrorCode::kFormat, "checkpoint optimizer moments incomplete");
    OptimizerState s;
    s.step = *step;
    for (std::size_t i = 0; i < m_list.size(); ++i) {
      require(m_list[i].first == v_list[i].first, ErrorCode::kFormat, "checkpoint optimizer moments out of order");
      s.moments.push_back({m_list[i].first, std::move(m_list[i].second), std::move(v_list[i].second)});
    }
    s.check_matches(ckpt.params);
    ckpt.optimizer = std::move(s);
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) { write_file(path, encode_checkpoint(ckpt)); }

Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path)); }

}  // namespace mlrn
