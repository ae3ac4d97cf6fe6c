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
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poirec::io {

// Little helpers for the native-endian checkpoint files. Doubles are written
// as raw bytes so a save/load cycle is bit-exact.
class BinaryWriter {
 public:
  BinaryWriter(const std::filesystem::path& path, std::string_view magic);

  void u64(std::uint64_t v);
  void i64(std::int64_t v);
  void f64(double v);
  void doubles(std::span<const double> v);
  void u32s(std::span<const std::uint32_t> v);
  void string(std::string_view s);
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class BinaryReader {
 public:
  BinaryReader(const std::filesystem::path& path, std::string_view magic);

  std::uint64_t u64();
  std::int64_t i64();
  double f64();
  std::vector<double> doubles();
  std::vector<std::uint32_t> u32s();
  std::string string();

 private:
  void read(void* dst, std::size_t n);

  std::ifstream in_;
  std::filesystem::path path_;
};

}  // namespace poirec::io
