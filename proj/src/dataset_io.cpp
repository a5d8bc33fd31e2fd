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

#include "dataset_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "encoding.hpp"
#include "error.hpp"

namespace mlrn {

namespace {

constexpr char kMagic[4] = {'M', 'P', 'G', 'M'};
constexpr std::size_t kHeaderBytes = 4 + 2 + 8 + 2;

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
}

template <typename U>
U get_le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<U>(v);
}

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorCode::kIo, "read error on '" + path + "'");
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  require(static_cast<bool>(out), ErrorCode::kIo, "write error on '" + path + "'");
}

std::vector<std::uint8_t> encode_dataset(const std::vector<SampleRecord>& samples, std::size_t image_size) {
  if (!samples.empty()) image_size = samples.front().image_size;
  require(image_size <= UINT16_MAX, ErrorCode::kInvalidArgument, "image_size does not fit the dataset header");
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_le<std::uint16_t>(out, kDatasetVersion);
  put_le<std::uint64_t>(out, samples.size());
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(image_size));
  for (const SampleRecord& s : samples) {
    s.validate();
    require(s.image_size == image_size, ErrorCode::kInvalidArgument, "mixed image sizes in one dataset");
    require(s.triples.size() <= UINT8_MAX, ErrorCode::kInvalidArgument, "too many triples in a sample");
    out.insert(out.end(), s.panels.begin(), s.panels.end());
    out.push_back(s.target);
    out.push_back(static_cast<std::uint8_t>(s.triples.size()));
    for (const StructureTriple& t : s.triples) {
      out.push_back(static_cast<std::uint8_t>(t.object));
      out.push_back(static_cast<std::uint8_t>(t.attribute));
      out.push_back(static_cast<std::uint8_t>(t.relation));
    }
  }
  put_le<std::uint32_t>(out, crc32_of(out.data() + kHeaderBytes, out.size() - kHeaderBytes));
  return out;
}

std::vector<SampleRecord> decode_dataset(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= kHeaderBytes + 4, ErrorCode::kFormat, "dataset file truncated (no header)");
  require(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorCode::kFormat, "not a dataset file (bad magic)");
  const auto version = get_le<std::uint16_t>(bytes.data() + 4);
  require(version == kDatasetVersion, ErrorCode::kFormat, "unsupported dataset version " + std::to_string(version));
  const auto count = get_le<std::uint64_t>(bytes.data() + 6);
  const auto size = get_le<std::uint16_t>(bytes.data() + 14);
  const std::size_t payload_end = bytes.size() - 4;
  const std::uint32_t stored = get_le<std::uint32_t>(bytes.data() + payload_end);
  require(crc32_of(bytes.data() + kHeaderBytes, payload_end - kHeaderBytes) == stored, ErrorCode::kFormat,
          "dataset checksum mismatch (file corrupt or truncated)");

  const std::size_t panel_bytes = kPanelsPerSample * static_cast<std::size_t>(size) * size;
  std::vector<SampleRecord> out;
  std::size_t pos = kHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i) {
    require(pos + panel_bytes + 2 <= payload_end, ErrorCode::kFormat, "dataset truncated in sample " + std::to_string(i));
    SampleRecord s;
    s.image_size = size;
    s.panels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + panel_bytes));
    pos += panel_bytes;
    s.target = bytes[pos++];
    const std::size_t k = bytes[pos++];
    require(pos + 3 * k <= payload_end, ErrorCode::kFormat, "dataset truncated in sample " + std::to_string(i));
    for (std::size_t t = 0; t < k; ++t, pos += 3) {
      require(bytes[pos] <= 1 && bytes[pos + 1] <= 4 && bytes[pos + 2] <= 4, ErrorCode::kFormat,
              "invalid triple code in sample " + std::to_string(i));
      s.triples.push_back({static_cast<ObjectType>(bytes[pos]), static_cast<AttributeType>(bytes[pos + 1]),
                           static_cast<RelationType>(bytes[pos + 2])});
    }
    s.validate();
    out.push_back(std::move(s));
  }
  require(pos == payload_end, ErrorCode::kFormat, "trailing bytes after the last sample");
  return out;
}

void write_dataset(const std::vector<SampleRecord>& samples, const std::string& path, std::size_t image_size) {
  write_file(path, encode_dataset(samples, image_size));
}

std::vector<SampleRecord> read_dataset(const std::string& path) { return decode_dataset(read_file(path)); }

Tensor<float> downscale(const Tensor<float>& image) {
  require(image.rank() == 2 || image.rank() == 3, ErrorCode::kShapeMismatch, "downscale expects [C,H,W] or [H,W]");
  const std::size_t c = image.rank() == 3 ? image.dim(0) : 1;
  const std::size_t h = image.dim(image.rank() - 2);
  const std::size_t w = image.dim(image.rank() - 1);
  require(h % 2 == 0 && w % 2 == 0, ErrorCode::kShapeMismatch,
          "downscale needs even dimensions, got " + shape_string(image.shape()));
  Shape shape = image.shape();
  shape[shape.size() - 2] = h / 2;
  shape[shape.size() - 1] = w / 2;
  Tensor<float> out(shape);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h / 2; ++y)
      for (std::size_t x = 0; x < w / 2; ++x) {
        const float* src = image.data().data() + ch * h * w + 2 * y * w + 2 * x;
        const double s = static_cast<double>(src[0]) + src[1] + src[w] + src[w + 1];
        out[ch * (h / 2) * (w / 2) + y * (w / 2) + x] = static_cast<float>(s / 4.0);
      }
  return out;
}

// ---------------------------------------------------------------------------
// .npz members

namespace {

struct NpyArray {
  char kind = 0;  // 'u', 'i', 'f', 'b'
  std::size_t item = 0;
  bool little = true;
  Shape shape;
  std::vector<std::uint8_t> data;

  std::size_t count() const { return shape_size(shape); }
  double at(std::size_t i) const {
    const std::uint8_t* p = data.data() + i * item;
    std::uint8_t buf[8];
    for (std::size_t k = 0; k < item; ++k) buf[k] = little ? p[k] : p[item - 1 - k];
    if (kind == 'f') {
      if (item == 4) {
        float f;
        std::memcpy(&f, buf, 4);
        return f;
      }
      double d;
      std::memcpy(&d, buf, 8);
      return d;
    }
    std::uint64_t u = 0;
    for (std::size_t k = 0; k < item; ++k) u |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
    if (kind == 'i' && item < 8 && (u >> (8 * item - 1)) & 1) u |= ~0ULL << (8 * item);
    return kind == 'i' ? static_cast<double>(static_cast<std::int64_t>(u)) : static_cast<double>(u);
  }
};

std::string dict_value(const std::string& header, const std::string& key) {
  const std::size_t k = header.find("'" + key + "'");
  require(k != std::string::npos, ErrorCode::kFormat, "npy header lacks '" + key + "'");
  std::size_t p = header.find(':', k);
  require(p != std::string::npos, ErrorCode::kFormat, "malformed npy header");
  ++p;
  while (p < header.size() && header[p] == ' ') ++p;
  std::size_t e = p;
  if (header[p] == '(') {
    e = header.find(')', p);
    require(e != std::string::npos, ErrorCode::kFormat, "malformed npy shape");
    return header.substr(p, e - p + 1);
  }
  if (header[p] == '\'') {
    e = header.find('\'', p + 1);
    require(e != std::string::npos, ErrorCode::kFormat, "malformed npy header");
    return header.substr(p + 1, e - p - 1);
  }
  while (e < header.size() && header[e] != ',' && header[e] != '}') ++e;
  return header.substr(p, e - p);
}

NpyArray parse_npy(const std::vector<std::uint8_t>& b, const std::string& name) {
  require(b.size() >= 10 && std::memcmp(b.data(), "\x93NUMPY", 6) == 0, ErrorCode::kFormat,
          "member '" + name + "' is not an npy array");
  const int major = b[6];
  std::size_t header_len = 0, offset = 0;
  if (major == 1) {
    header_len = get_le<std::uint16_t>(b.data() + 8);
    offset = 10;
  } else {
    require(b.size() >= 12, ErrorCode::kFormat, "truncated npy header in '" + name + "'");
    header_len = get_le<std::uint32_t>(b.data() + 8);
    offset = 12;
  }
  require(offset + header_len <= b.size(), ErrorCode::kFormat, "truncated npy header in '" + name + "'");
  const std::string header(b.begin() + static_cast<std::ptrdiff_t>(offset),
                           b.begin() + static_cast<std::ptrdiff_t>(offset + header_len));
  NpyArray a;
  const std::string descr = dict_value(header, "descr");
  require(descr.size() >= 3, ErrorCode::kFormat, "unsupported dtype '" + descr + "' in '" + name + "'");
  a.little = descr[0] != '>';
  a.kind = descr[1];
  a.item = static_cast<std::size_t>(std::stoul(descr.substr(2)));
  require((a.kind == 'u' || a.kind == 'i' || a.kind == 'b' || (a.kind == 'f' && (a.item == 4 || a.item == 8))) &&
              a.item >= 1 && a.item <= 8,
          ErrorCode::kFormat, "unsupported dtype '" + descr + "' in '" + name + "'");
  if (a.kind == 'b') a.kind = 'u';
  require(dict_value(header, "fortran_order").find("False") != std::string::npos, ErrorCode::kFormat,
          "fortran-ordered arrays are not supported ('" + name + "')");
  const std::string shape = dict_value(header, "shape");
  std::size_t p = 1;
  while (p < shape.size()) {
    while (p < shape.size() && !std::isdigit(static_cast<unsigned char>(shape[p]))) ++p;
    if (p >= shape.size()) break;
    std::size_t e = p;
    while (e < shape.size() && std::isdigit(static_cast<unsigned char>(shape[e]))) ++e;
    a.shape.push_back(static_cast<std::size_t>(std::stoull(shape.substr(p, e - p))));
    p = e;
  }
  const std::size_t bytes = a.count() * a.item;
  require(offset + header_len + bytes <= b.size(), ErrorCode::kFormat, "truncated npy data in '" + name + "'");
  a.data.assign(b.begin() + static_cast<std::ptrdiff_t>(offset + header_len),
                b.begin() + static_cast<std::ptrdiff_t>(offset + header_len + bytes));
  return a;
}

std::vector<std::uint8_t> inflate_raw(const std::uint8_t* src, std::size_t n, std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs{};
  require(inflateInit2(&zs, -MAX_WBITS) == Z_OK, ErrorCode::kFormat, "zlib init failed");
  zs.next_in = const_cast<Bytef*>(src);
  zs.avail_in = static_cast<uInt>(n);
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(expected);
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  require(rc == Z_STREAM_END && zs.total_out == expected, ErrorCode::kFormat, "corrupt deflate stream in archive");
  return out;
}

// Member name (without ".npy") -> raw member bytes.
std::map<std::string, std::vector<std::uint8_t>> read_zip(const std::vector<std::uint8_t>& z, const std::string& path) {
  require(z.size() >= 22, ErrorCode::kFormat, "'" + path + "' is not an archive");
  std::size_t eocd = std::string::npos;
  for (std::size_t i = z.size() - 22 + 1; i-- > 0 && z.size() - i <= 22 + 65535;)
    if (get_le<std::uint32_t>(z.data() + i) == 0x06054b50) {
      eocd = i;
      break;
    }
  require(eocd != std::string::npos, ErrorCode::kFormat, "'" + path + "' has no zip directory");
  const std::size_t entries = get_le<std::uint16_t>(z.data() + eocd + 10);
  std::size_t p = get_le<std::uint32_t>(z.data() + eocd + 16);
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (std::size_t e = 0; e < entries; ++e) {
    require(p + 46 <= z.size() && get_le<std::uint32_t>(z.data() + p) == 0x02014b50, ErrorCode::kFormat,
            "corrupt zip directory in '" + path + "'");
    const auto method = get_le<std::uint16_t>(z.data() + p + 10);
    const std::size_t csize = get_le<std::uint32_t>(z.data() + p + 20);
    const std::size_t usize = get_le<std::uint32_t>(z.data() + p + 24);
    const std::size_t nlen = get_le<std::uint16_t>(z.data() + p + 28);
    const std::size_t xlen = get_le<std::uint16_t>(z.data() + p + 30);
    const std::size_t clen = get_le<std::uint16_t>(z.data() + p + 32);
    const std::size_t local = get_le<std::uint32_t>(z.data() + p + 42);
    require(csize != 0xffffffffu && usize != 0xffffffffu && local != 0xffffffffu, ErrorCode::kFormat,
            "zip64 archives are not supported");
    std::string name(z.begin() + static_cast<std::ptrdiff_t>(p + 46),
                     z.begin() + static_cast<std::ptrdiff_t>(p + 46 + nlen));
    p += 46 + nlen + xlen + clen;
    require(local + 30 <= z.size() && get_le<std::uint32_t>(z.data() + local) == 0x04034b50, ErrorCode::kFormat,
            "corrupt zip member '" + name + "'");
    const std::size_t start = local + 30 + get_le<std::uint16_t>(z.data() + local + 26) +
                              get_le<std::uint16_t>(z.data() + local + 28);
    require(start + csize <= z.size(), ErrorCode::kFormat, "truncated zip member '" + name + "'");
    std::vector<std::uint8_t> data;
    if (method == 0) {
      data.assign(z.begin() + static_cast<std::ptrdiff_t>(start),
                  z.begin() + static_cast<std::ptrdiff_t>(start + csize));
    } else if (method == 8) {
      data = inflate_raw(z.data() + start, csize, usize);
    } else {
      fail(ErrorCode::kFormat, "unsupported zip compression method " + std::to_string(method));
    }
    if (name.size() > 4 && name.compare(name.size() - 4, 4, ".npy") == 0) name.resize(name.size() - 4);
    out[name] = std::move(data);
  }
  return out;
}

}  // namespace

SampleRecord load_external_record(const std::string& path, const ExternalLayout& layout) {
  require(layout.source_size > 0 && layout.output_size > 0 && layout.source_size % layout.output_size == 0,
          ErrorCode::kInvalidArgument, "unknown layout: source size must be a multiple of the output size");
  const std::size_t factor = layout.source_size / layout.output_size;
  require((factor & (factor - 1)) == 0, ErrorCode::kInvalidArgument,
          "unknown layout: downscale factor must be a power of two");
  const auto members = read_zip(read_file(path), path);
  auto member = [&](const std::string& key) {
    auto it = members.find(key);
    require(it != members.end(), ErrorCode::kFormat, "archive '" + path + "' lacks array '" + key + "'");
    return parse_npy(it->second, key);
  };

  const NpyArray image = member(layout.image_key);
  const Shape want{kPanelsPerSample, layout.source_size, layout.source_size};
  require(image.shape == want && image.kind == 'u' && image.item == 1, ErrorCode::kFormat,
          "array '" + layout.image_key + "' must be uint8 " + shape_string(want) + ", got " + shape_string(image.shape));
  const NpyArray target = member(layout.target_key);
  require(target.count() == 1, ErrorCode::kFormat, "array '" + layout.target_key + "' must hold one value");
  const double t = target.at(0);
  require(t >= 0 && t < static_cast<double>(kCandidates) && t == std::floor(t), ErrorCode::kDomain,
          "target " + std::to_string(t) + " outside 0..7");

  Tensor<float> unit(want);
  for (std::size_t i = 0; i < unit.size(); ++i) unit[i] = static_cast<float>(byte_to_unit(image.data[i]));
  while (unit.dim(1) > layout.output_size) unit = downscale(unit);

  SampleRecord rec;
  rec.image_size = layout.output_size;
  rec.target = static_cast<std::uint8_t>(t);
  rec.panels.resize(unit.size());
  for (std::size_t i = 0; i < unit.size(); ++i)
    rec.panels[i] = static_cast<std::uint8_t>(std::clamp(std::lround((unit[i] + 1.0) * 127.5), 0L, 255L));

  if (auto it = members.find(layout.triples_key); it != members.end()) {
    const NpyArray tr = parse_npy(it->second, layout.triples_key);
    require(tr.count() % 3 == 0, ErrorCode::kFormat, "triples array must have 3 codes per row");
    for (std::size_t k = 0; k < tr.count(); k += 3) {
      const double o = tr.at(k), a = tr.at(k + 1), r = tr.at(k + 2);
      require(o >= 0 && o <= 1 && a >= 0 && a <= 4 && r >= 0 && r <= 4, ErrorCode::kFormat, "invalid triple code");
      rec.triples.push_back({static_cast<ObjectType>(o), static_cast<AttributeType>(a), static_cast<RelationType>(r)});
    }
  }
  return rec;
}

}  // namespace mlrn
