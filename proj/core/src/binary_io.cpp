// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The beamcraft Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "beamcraft/binary_io.hpp"
#include "beamcraft/errors.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace beamcraft
{

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state) noexcept
{
    for (const std::uint8_t b : bytes)
    {
        state ^= b;
        state *= 0x100000001b3ULL;
    }
    return state;
}

void ByteWriter::put_u32(std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_u64(std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::put_bytes(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }

void ByteWriter::put_text(std::string_view text)
{
    const auto *p = reinterpret_cast<const std::uint8_t *>(text.data());
    bytes_.insert(bytes_.end(), p, p + text.size());
}

void ByteReader::require(std::size_t n) const
{
    if (n > remaining())
        throw Error(ErrorCode::ChecksumMismatch, "unexpected end of data");
}

std::uint8_t ByteReader::get_u8()
{
    require(1);
    return bytes_[pos_++];
}

std::uint32_t ByteReader::get_u32()
{
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
}

std::uint64_t ByteReader::get_u64()
{
    require(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
}

double ByteReader::get_f64() { return std::bit_cast<double>(get_u64()); }

std::span<const std::uint8_t> ByteReader::get_bytes(std::size_t n)
{
    require(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::span<const std::uint8_t> verify_trailing_checksum(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 8)
        throw Error(ErrorCode::ChecksumMismatch, "file too short for checksum");
    const auto payload = bytes.first(bytes.size() - 8);
    ByteReader tail(bytes.last(8));
    if (tail.get_u64() != fnv1a64(payload))
        throw Error(ErrorCode::ChecksumMismatch, "checksum does not match payload");
    return payload;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw Error(ErrorCode::IoFailure, "read failed for " + path.string());
    return bytes;
}

void write_file_atomic(const std::filesystem::path &path, std::span<const std::uint8_t> bytes)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::IoFailure, "cannot open " + tmp.string() + " for writing");
        out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out)
            throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, "rename to " + path.string() + " failed: " + ec.message());
}

std::string hex_digest(std::uint64_t digest)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << digest;
    return os.str();
}

} // namespace beamcraft
