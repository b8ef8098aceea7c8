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

#include "cagr/manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iterator>

#include "json.hpp"

#include "cagr/errors.hpp"

namespace cagr {

std::string git_blob_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string header = "blob " + std::to_string(content.size());
  header.push_back('\0');

  const std::string blob = header + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &length, EVP_sha1(), nullptr) != 1) {
    throw DataError("sha1 failed for " + path.string());
  }

  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    const unsigned char b = digest[i];
    hex.push_back(kHex[b >> 4]);
    hex.push_back(kHex[b & 15]);
  }
  return hex;
}

void RunManifest::write(const std::filesystem::path& dir, const std::string& file_name) const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["argv"] = argv;
  j["seed"] = seed;
  j["config"] = config;
  nlohmann::ordered_json in = nlohmann::ordered_json::object();
  for (const auto& p : inputs) in[p.string()] = git_blob_hash(p);
  j["inputs"] = in;
  j["outputs"] = outputs;
  std::ofstream out(dir / file_name);
  if (!out) throw DataError("cannot write manifest in " + dir.string());
  out << j.dump(2) << '\n';
}

}  // namespace cagr
