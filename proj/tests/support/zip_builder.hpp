// Copyright 2026  Evalkit Authors

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

// Test-only ZIP writer.  Produces archives byte-by-byte (local headers,
// central directory, end record) without sharing any code with the library's
// reader, and exposes knobs for deliberately malformed output: bogus
// encryption flags, unsupported compression methods, wrong checksums,
// inflated declared sizes, and directory entries.

#ifndef EVALKIT_TESTS_SUPPORT_ZIP_BUILDER_HPP_
#define EVALKIT_TESTS_SUPPORT_ZIP_BUILDER_HPP_

#include <zlib.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace testsupport {

struct ZipEntrySpec {
  std::string name;
  std::string data;
  bool deflate = false;
  // Corruption knobs.
  bool mark_encrypted = false;                       // set general-purpose bit 0
  std::optional<std::uint16_t> force_method;         // override method field
  std::optional<std::uint32_t> force_crc;            // override stored CRC-32
  std::optional<std::uint32_t> force_uncompressed;   // override declared size
  bool directory_attr = false;                       // MS-DOS directory bit
};

class ZipBuilder {
 public:
  ZipBuilder &Add(std::string name, std::string data, bool deflate = false) {
    ZipEntrySpec e;
    e.name = std::move(name);
    e.data = std::move(data);
    e.deflate = deflate;
    entries_.push_back(std::move(e));
    return *this;
  }

  ZipBuilder &AddSpec(ZipEntrySpec spec) {
    entries_.push_back(std::move(spec));
    return *this;
  }

  ZipBuilder &SetComment(std::string comment) {
    comment_ = std::move(comment);
    return *this;
  }

  std::string Build() const {
    std::string out;
    struct Central {
      ZipEntrySpec spec;
      std::uint32_t crc = 0;
      std::uint32_t csize = 0;
      std::uint32_t usize = 0;
      std::uint32_t offset = 0;
      std::uint16_t flags = 0;
      std::uint16_t method = 0;
    };
    std::vector<Central> centrals;

    for (const ZipEntrySpec &e : entries_) {
      Central c;
      c.spec = e;
      c.offset = static_cast<std::uint32_t>(out.size());
      std::string payload = e.deflate ? RawDeflate(e.data) : e.data;
      c.crc = e.force_crc ? *e.force_crc : Crc32(e.data);
      c.csize = static_cast<std::uint32_t>(payload.size());
      c.usize = e.force_uncompressed
                    ? *e.force_uncompressed
                    : static_cast<std::uint32_t>(e.data.size());
      c.flags = e.mark_encrypted ? 0x0001 : 0x0000;
      c.method = e.force_method ? *e.force_method
                                : static_cast<std::uint16_t>(e.deflate ? 8 : 0);

      Put32(out, 0x04034b50);              // local file header signature
      Put16(out, 20);                      // version needed
      Put16(out, c.flags);
      Put16(out, c.method);
      Put16(out, 0);                       // mod time
      Put16(out, 0);                       // mod date
      Put32(out, c.crc);
      Put32(out, c.csize);
      Put32(out, c.usize);
      Put16(out, static_cast<std::uint16_t>(e.name.size()));
      Put16(out, 0);                       // extra length
      out += e.name;
      out += payload;
      centrals.push_back(std::move(c));
    }

    std::uint32_t cd_offset = static_cast<std::uint32_t>(out.size());
    for (const Central &c : centrals) {
      Put32(out, 0x02014b50);              // central directory signature
      Put16(out, 20);                      // version made by
      Put16(out, 20);                      // version needed
      Put16(out, c.flags);
      Put16(out, c.method);
      Put16(out, 0);                       // mod time
      Put16(out, 0);                       // mod date
      Put32(out, c.crc);
      Put32(out, c.csize);
      Put32(out, c.usize);
      Put16(out, static_cast<std::uint16_t>(c.spec.name.size()));
      Put16(out, 0);                       // extra length
      Put16(out, 0);                       // comment length
      Put16(out, 0);                       // disk number start
      Put16(out, 0);                       // internal attributes
      Put32(out, c.spec.directory_attr ? 0x10u : 0u);  // external attributes
      Put32(out, c.offset);
      out += c.spec.name;
    }
    std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_offset;

    Put32(out, 0x06054b50);                // end of central directory
    Put16(out, 0);                         // this disk
    Put16(out, 0);                         // disk with central directory
    Put16(out, static_cast<std::uint16_t>(centrals.size()));
    Put16(out, static_cast<std::uint16_t>(centrals.size()));
    Put32(out, cd_size);
    Put32(out, cd_offset);
    Put16(out, static_cast<std::uint16_t>(comment_.size()));
    out += comment_;
    return out;
  }

 private:
  static void Put16(std::string &out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
  }

  static void Put32(std::string &out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }

  static std::uint32_t Crc32(const std::string &data) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef *>(data.data()),
              static_cast<uInt>(data.size())));
  }

  static std::string RawDeflate(const std::string &data) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK) {
      throw std::runtime_error("deflateInit2 failed");
    }
    std::string out(deflateBound(&zs, static_cast<uLong>(data.size())), '\0');
    zs.next_in =
        reinterpret_cast<Bytef *>(const_cast<char *>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef *>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = ::deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw std::runtime_error("deflate failed");
    out.resize(zs.total_out);
    return out;
  }

  std::vector<ZipEntrySpec> entries_;
  std::string comment_;
};

}  // namespace testsupport

#endif  // EVALKIT_TESTS_SUPPORT_ZIP_BUILDER_HPP_
