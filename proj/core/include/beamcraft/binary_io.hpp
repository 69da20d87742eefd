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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace beamcraft
{

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state = 0xcbf29ce484222325ULL) noexcept;

// Little-endian byte sink for the on-disk formats.
class ByteWriter
{
public:
    void put_u8(std::uint8_t v) { bytes_.push_back(v); }
    void put_u32(std::uint32_t v);
    void put_u64(std::uint64_t v);
    void put_f64(double v);
    void put_bytes(std::span<const std::uint8_t> data);
    void put_text(std::string_view text);

    // Appends FNV-1a over everything written so far.
    void put_checksum() { put_u64(fnv1a64(bytes_)); }

    const std::vector<std::uint8_t> &bytes() const noexcept { return bytes_; }
    std::vector<std::uint8_t> take() noexcept { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

// Bounds-checked little-endian reader. Reading past the end throws
// ChecksumMismatch: a short file is a corrupted file.
class ByteReader
{
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t get_u8();
    std::uint32_t get_u32();
    std::uint64_t get_u64();
    double get_f64();
    std::span<const std::uint8_t> get_bytes(std::size_t n);

    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    void require(std::size_t n) const;

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

// Verifies that the trailing u64 of bytes equals FNV-1a of everything before
// it; throws ChecksumMismatch otherwise. Returns the payload without the
// checksum.
std::span<const std::uint8_t> verify_trailing_checksum(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path &path);

// Writes via a temporary sibling and rename, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path &path, std::span<const std::uint8_t> bytes);

std::string hex_digest(std::uint64_t digest);

} // namespace beamcraft
