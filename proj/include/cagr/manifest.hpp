// Copyright 2026 The CAGR Authors.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cagr {

/// Hex SHA-1 of "blob <size>\0<content>", the id git gives the file content.
std::string git_blob_hash(const std::filesystem::path& path);

/// Everything needed to re-run a command identically.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config;  // resolved key = value text, may be empty
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::string> outputs;

  /// Writes `file_name` into `dir`, hashing every input file.
  void write(const std::filesystem::path& dir, const std::string& file_name = "manifest.json") const;
};

}  // namespace cagr
