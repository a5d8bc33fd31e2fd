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

#include "zip_writer.hpp"

#include <stdexcept>

#include <zlib.h>

namespace mlrn::testing {

namespace {

void le16(std::vector<std::uint8_t>& o, std::uint32_t v) {
  o.push_back(static_cast<std::uint8_t>(v));
  o.push_back(static_cast<std::uint8_t>(v >> 8));
}

void le32(std::vector<std::uint8_t>& o, std::uint32_t v) {
  le16(o, v & 0xffff);
  le16(o, v >> 16);
}

std::vector<std::uint8_t> deflate_raw(const std::vector<std::uint8_t>& in) {
  z_stream zs{};
  if (deflateInit2(&zs, 6, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw std::runtime_error("deflateInit2");
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(in.size())));
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  if (deflate(&zs, Z_FINISH) != Z_STREAM_END) throw std::runtime_error("deflate");
  out.resize(zs.total_out);
  deflateEnd(&zs);
  return out;
}

}  // namespace

std::vector<std::uint8_t> npy_bytes(const std::string& descr, const std::vector<std::size_t>& shape,
                                    const std::vector<std::uint8_t>& data) {
  std::string dims;
  for (std::size_t i = 0; i < shape.size(); ++i) dims += (i ? ", " : "") + std::to_string(shape[i]);
  if (shape.size() == 1) dims += ",";
  std::string header = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': (" + dims + "), }";
  while ((10 + header.size() + 1) % 64 != 0) header += ' ';
  header += '\n';
  std::vector<std::uint8_t> out{0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
  le16(out, static_cast<std::uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

std::vector<std::uint8_t> zip_bytes(const std::vector<ZipMember>& members, bool deflate) {
  std::vector<std::uint8_t> out, central;
  for (const ZipMember& m : members) {
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, m.bytes.data(), static_cast<uInt>(m.bytes.size())));
    const std::vector<std::uint8_t> payload = deflate ? deflate_raw(m.bytes) : m.bytes;
    const std::uint32_t offset = static_cast<std::uint32_t>(out.size());
    const std::uint16_t method = deflate ? 8 : 0;
    le32(out, 0x04034b50);
    le16(out, 20);
    le16(out, 0);
    le16(out, method);
    le16(out, 0);
    le16(out, 0);
    le32(out, crc);
    le32(out, static_cast<std::uint32_t>(payload.size()));
    le32(out, static_cast<std::uint32_t>(m.bytes.size()));
    le16(out, static_cast<std::uint32_t>(m.name.size()));
    le16(out, 0);
    out.insert(out.end(), m.name.begin(), m.name.end());
    out.insert(out.end(), payload.begin(), payload.end());

    le32(central, 0x02014b50);
    le16(central, 20);
    le16(central, 20);
    le16(central, 0);
    le16(central, method);
    le16(central, 0);
    le16(central, 0);
    le32(central, crc);
    le32(central, static_cast<std::uint32_t>(payload.size()));
    le32(central, static_cast<std::uint32_t>(m.bytes.size()));
    le16(central, static_cast<std::uint32_t>(m.name.size()));
    le16(central, 0);
    le16(central, 0);
    le16(central, 0);
    le16(central, 0);
    le32(central, 0);
    le32(central, offset);
    central.insert(central.end(), m.name.begin(), m.name.end());
  }
  const std::uint32_t cd_offset = static_cast<std::uint32_t>(out.size());
  out.insert(out.end(), central.begin(), central.end());
  le32(out, 0x06054b50);
  le16(out, 0);
  le16(out, 0);
  le16(out, static_cast<std::uint32_t>(members.size()));
  le16(out, static_cast<std::uint32_t>(members.size()));
  le32(out, static_cast<std::uint32_t>(central.size()));
  le32(out, cd_offset);
  le16(out, 0);
  return out;
}

}  // namespace mlrn::testing
