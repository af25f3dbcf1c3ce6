// evalkit/detail/zip_reader.hpp
//
// Minimal read-only ZIP container support: end-of-central-directory scan,
// central directory walk, stored and deflate entries (raw inflate via
// zlib), CRC-32 verification.  Deliberately not a general archiver — no
// zip64, no encryption, no spanning; the submission validator maps those
// to its error taxonomy instead of supporting them.
//
// Copyright 2026  Evalkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EVALKIT_DETAIL_ZIP_READER_HPP_
#define EVALKIT_DETAIL_ZIP_READER_HPP_

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

namespace evalkit {
namespace detail {

enum class ZipErrorKind {
  BadContainer,       // structurally not a readable zip
  Encrypted,          // entry has the encryption flag set
  UnsupportedMethod,  // compression method other than stored/deflate
  CrcMismatch,        // extracted bytes fail the recorded CRC-32
};

class ZipError : public std::runtime_error {
 public:
  ZipError(ZipErrorKind kind, const std::string &msg)
      : std::runtime_error(msg), kind_(kind) {}
  ZipErrorKind kind() const { return kind_; }

 private:
  ZipErrorKind kind_;
};

struct ZipEntryInfo {
  std::string name;
  bool is_directory = false;
  bool encrypted = false;
  std::uint16_t method = 0;  // 0 = stored, 8 = deflate
  std::uint32_t crc32 = 0;
  std::uint64_t compressed_size = 0;
  std::uint64_t uncompressed_size = 0;
  std::uint64_t local_header_offset = 0;
};

namespace zipimpl {

inline std::uint16_t ReadU16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

inline std::uint32_t ReadU32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) |
         (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

constexpr std::uint32_t kEocdSignature = 0x06054b50;
constexpr std::uint32_t kCentralSignature = 0x02014b50;
constexpr std::uint32_t kLocalSignature = 0x04034b50;
constexpr std::size_t kEocdMinSize = 22;

// The EOCD record sits at the end, possibly followed by a comment of up to
// 65535 bytes; scan backwards for its signature.
inline std::size_t FindEocd(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kEocdMinSize)
    throw ZipError(ZipErrorKind::BadContainer, "too small to be a zip archive");
  std::size_t lowest =
      bytes.size() > kEocdMinSize + 65535 ? bytes.size() - kEocdMinSize - 65535 : 0;
  for (std::size_t pos = bytes.size() - kEocdMinSize;; --pos) {
    if (ReadU32(bytes, pos) == kEocdSignature) {
      std::size_t comment_len = ReadU16(bytes, pos + 20);
      if (pos + kEocdMinSize + comment_len == bytes.size()) return pos;
    }
    if (pos == lowest) break;
  }
  throw ZipError(ZipErrorKind::BadContainer,
                 "end-of-central-directory record not found");
}

}  // namespace zipimpl

inline std::vector<ZipEntryInfo> ListZipEntries(std::span<const std::uint8_t> bytes) {
  using namespace zipimpl;
  std::size_t eocd = FindEocd(bytes);
  std::uint16_t disk = ReadU16(bytes, eocd + 4);
  std::uint16_t cd_disk = ReadU16(bytes, eocd + 6);
  std::uint16_t entries_here = ReadU16(bytes, eocd + 8);
  std::uint16_t entries_total = ReadU16(bytes, eocd + 10);
  std::uint32_t cd_size = ReadU32(bytes, eocd + 12);
  std::uint32_t cd_offset = ReadU32(bytes, eocd + 16);
  if (disk != 0 || cd_disk != 0 || entries_here != entries_total)
    throw ZipError(ZipErrorKind::BadContainer, "split zip archives not supported");
  if (entries_total == 0xFFFF || cd_offset == 0xFFFFFFFF || cd_size == 0xFFFFFFFF)
    throw ZipError(ZipErrorKind::BadContainer, "zip64 archives not supported");
  if (static_cast<std::uint64_t>(cd_offset) + cd_size > eocd)
    throw ZipError(ZipErrorKind::BadContainer, "central directory out of bounds");

  std::vector<ZipEntryInfo> out;
  std::size_t pos = cd_offset;
  for (std::uint16_t i = 0; i < entries_total; ++i) {
    if (pos + 46 > bytes.size() || ReadU32(bytes, pos) != kCentralSignature)
      throw ZipError(ZipErrorKind::BadContainer,
                     "central directory entry " + std::to_string(i) + " corrupt");
    ZipEntryInfo e;
    std::uint16_t flags = ReadU16(bytes, pos + 8);
    e.encrypted = (flags & 0x0001) != 0;
    e.method = ReadU16(bytes, pos + 10);
    e.crc32 = ReadU32(bytes, pos + 16);
    e.compressed_size = ReadU32(bytes, pos + 20);
    e.uncompressed_size = ReadU32(bytes, pos + 24);
    std::uint16_t name_len = ReadU16(bytes, pos + 28);
    std::uint16_t extra_len = ReadU16(bytes, pos + 30);
    std::uint16_t comment_len = ReadU16(bytes, pos + 32);
    std::uint32_t external_attr = ReadU32(bytes, pos + 38);
    e.local_header_offset = ReadU32(bytes, pos + 42);
    if (pos + 46 + name_len > bytes.size())
      throw ZipError(ZipErrorKind::BadContainer, "entry name out of bounds");
    e.name.assign(reinterpret_cast<const char *>(bytes.data() + pos + 46), name_len);
    e.is_directory = (!e.name.empty() && e.name.back() == '/') ||
                     (external_attr & 0x10) != 0;  // MS-DOS directory bit
    out.push_back(std::move(e));
    pos += 46u + name_len + extra_len + comment_len;
  }
  return out;
}

inline std::vector<std::uint8_t> ReadZipEntry(std::span<const std::uint8_t> bytes,
                                              const ZipEntryInfo &entry) {
  using namespace zipimpl;
  if (entry.encrypted)
    throw ZipError(ZipErrorKind::Encrypted,
                   "entry '" + entry.name + "' is encrypted");
  if (entry.method != 0 && entry.method != 8)
    throw ZipError(ZipErrorKind::UnsupportedMethod,
                   "entry '" + entry.name + "' uses unsupported compression method " +
                       std::to_string(entry.method));
  std::size_t pos = entry.local_header_offset;
  if (pos + 30 > bytes.size() || ReadU32(bytes, pos) != kLocalSignature)
    throw ZipError(ZipErrorKind::BadContainer,
                   "local header for '" + entry.name + "' corrupt");
  // Local name/extra lengths may differ from the central record; trust local.
  std::uint16_t name_len = ReadU16(bytes, pos + 26);
  std::uint16_t extra_len = ReadU16(bytes, pos + 28);
  std::size_t data_off = pos + 30 + name_len + extra_len;
  if (data_off + entry.compressed_size > bytes.size())
    throw ZipError(ZipErrorKind::BadContainer,
                   "entry data for '" + entry.name + "' out of bounds");
  std::span<const std::uint8_t> raw =
      bytes.subspan(data_off, entry.compressed_size);

  std::vector<std::uint8_t> data;
  if (entry.method == 0) {
    if (entry.compressed_size != entry.uncompressed_size)
      throw ZipError(ZipErrorKind::BadContainer,
                     "stored entry '" + entry.name + "' has inconsistent sizes");
    data.assign(raw.begin(), raw.end());
  } else {
    data.resize(entry.uncompressed_size);
    z_stream zs;
    std::memset(&zs, 0, sizeof(zs));
    // Negative window bits: raw deflate stream, no zlib wrapper.
    if (inflateInit2(&zs, -15) != Z_OK)
      throw ZipError(ZipErrorKind::BadContainer, "inflate initialization failed");
    zs.next_in = const_cast<Bytef *>(raw.data());
    zs.avail_in = static_cast<uInt>(raw.size());
    zs.next_out = data.data();
    zs.avail_out = static_cast<uInt>(data.size());
    int rc = inflate(&zs, Z_FINISH);
    bool complete = rc == Z_STREAM_END && zs.total_out == entry.uncompressed_size;
    inflateEnd(&zs);
    if (!complete)
      throw ZipError(ZipErrorKind::BadContainer,
                     "entry '" + entry.name + "' fails to decompress");
  }
  std::uint32_t crc = static_cast<std::uint32_t>(
      ::crc32(0L, data.empty() ? Z_NULL : data.data(),
              static_cast<uInt>(data.size())));
  if (crc != entry.crc32)
    throw ZipError(ZipErrorKind::CrcMismatch,
                   "entry '" + entry.name + "' fails its CRC-32 check");
  return data;
}

}  // namespace detail
}  // namespace evalkit

#endif  // EVALKIT_DETAIL_ZIP_READER_HPP_
