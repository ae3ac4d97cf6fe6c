/*
 *  Copyright 2026 The poirec Authors. All Rights Reserved.
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */
#include "poirec/binary_io.hpp"

#include "poirec/errors.hpp"

namespace poirec::io {

BinaryWriter::BinaryWriter(const std::filesystem::path& path, std::string_view magic)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw DataError("cannot open " + path.string() + " for writing");
  out_.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void BinaryWriter::u64(std::uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
void BinaryWriter::i64(std::int64_t v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
void BinaryWriter::f64(double v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }

void BinaryWriter::doubles(std::span<const double> v) {
  u64(v.size());
  out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
}

void BinaryWriter::u32s(std::span<const std::uint32_t> v) {
  u64(v.size());
  out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
}

void BinaryWriter::string(std::string_view s) {
  u64(s.size());
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::close() {
  out_.close();
  if (!out_) throw DataError("failed writing " + path_.string());
}

BinaryReader::BinaryReader(const std::filesystem::path& path, std::string_view magic)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw DataError("cannot open " + path.string());
  std::string got(magic.size(), '\0');
  read(got.data(), got.size());
  if (got != magic) throw DataError(path.string() + " is not a " + std::string(magic) + " file");
}

void BinaryReader::read(void* dst, std::size_t n) {
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (!in_) throw DataError("truncated file " + path_.string());
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v = 0;
  read(&v, sizeof v);
  return v;
}

std::int64_t BinaryReader::i64() {
  std::int64_t v = 0;
  read(&v, sizeof v);
  return v;
}

double BinaryReader::f64() {
  double v = 0;
  read(&v, sizeof v);
  return v;
}

std::vector<double> BinaryReader::doubles() {
  std::vector<double> v(u64());
  read(v.data(), v.size() * sizeof(double));
  return v;
}

std::vector<std::uint32_t> BinaryReader::u32s() {
  std::vector<std::uint32_t> v(u64());
  read(v.data(), v.size() * sizeof(std::uint32_t));
  return v;
}

std::string BinaryReader::string() {
  std::string s(u64(), '\0');
  read(s.data(), s.size());
  return s;
}

}  // namespace poirec::io
