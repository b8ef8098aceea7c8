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

#include "cagr/model_params.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace cagr {

void ModelShape::validate() const {
  if (d < 1 || heads < 1) throw UsageError("d and h must be positive");
  if (d % heads != 0) {
    throw UsageError("d (" + std::to_string(d) + ") must be divisible by h (" +
                     std::to_string(heads) + ")");
  }
  if (views < 0 || users < 0 || items < 0) throw UsageError("negative model dimension");
}

namespace {

constexpr char kMagic[8] = {'C', 'A', 'G', 'R', 'M', 'O', 'D', 'L'};

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in, const std::string& what) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw DataError("model file truncated while reading " + what);
  }
  return to_little(v);
}

}  // namespace

void save_model(const ModelState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kModelFormatVersion);
  const ModelShape& s = state.shape;
  for (std::int32_t v : {s.d, s.heads, s.views, s.users, s.items}) put<std::uint32_t>(out, v);
  state.visit([&](const char* name, const std::vector<float>& data) {
    const std::uint32_t len = static_cast<std::uint32_t>(std::strlen(name));
    put(out, len);
    out.write(name, len);
    put<std::uint64_t>(out, data.size());
    if constexpr (std::endian::native == std::endian::little) {
      out.write(reinterpret_cast<const char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(float)));
    } else {
      for (float x : data) put(out, x);
    }
  });
  if (!out) throw DataError("write failed for " + path.string());
}

ModelState load_model(const std::filesystem::path& path, const ModelShape* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic)) throw DataError("model file truncated while reading magic");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError(path.string() + " is not a model file (bad magic)");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kModelFormatVersion) {
    throw DataError("unsupported model format version " + std::to_string(version) +
                    " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  ModelShape shape;
  shape.d = static_cast<std::int32_t>(get<std::uint32_t>(in, "d"));
  shape.heads = static_cast<std::int32_t>(get<std::uint32_t>(in, "h"));
  shape.views = static_cast<std::int32_t>(get<std::uint32_t>(in, "view count"));
  shape.users = static_cast<std::int32_t>(get<std::uint32_t>(in, "user count"));
  shape.items = static_cast<std::int32_t>(get<std::uint32_t>(in, "item count"));
  try {
    shape.validate();
  } catch (const UsageError& e) {
    throw DataError(std::string("model header: ") + e.what());
  }
  if (expected != nullptr && !(*expected == shape)) {
    throw DataError("model shape mismatch: file has d=" + std::to_string(shape.d) +
                    " h=" + std::to_string(shape.heads) + " views=" + std::to_string(shape.views) +
                    " users=" + std::to_string(shape.users) + " items=" +
                    std::to_string(shape.items) + ", expected d=" + std::to_string(expected->d) +
                    " h=" + std::to_string(expected->heads) + " views=" +
                    std::to_string(expected->views) + " users=" + std::to_string(expected->users) +
                    " items=" + std::to_string(expected->items));
  }

  ModelState state = init_model<float>(shape, 0, InitOptions{.zero = true});
  std::map<std::string, std::vector<float>*> arrays;
  state.visit([&](const char* name, std::vector<float>& v) { arrays[name] = &v; });
  std::size_t seen = 0;
  while (seen < arrays.size()) {
    const auto len = get<std::uint32_t>(in, "array name length");
    if (len > 64) throw DataError("corrupt array name length " + std::to_string(len));
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw DataError("model file truncated while reading array name");
    auto it = arrays.find(name);
    if (it == arrays.end()) throw DataError("unexpected array '" + name + "' in model file");
    const auto count = get<std::uint64_t>(in, name + " size");
    if (count != it->second->size()) {
      throw DataError("array '" + name + "' has " + std::to_string(count) + " elements, expected " +
                      std::to_string(it->second->size()));
    }
    std::vector<float>& data = *it->second;
    if (!in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(count * sizeof(float)))) {
      throw DataError("model file truncated inside array '" + name + "'");
    }
    if constexpr (std::endian::native == std::endian::big) {
      for (float& x : data) x = to_little(x);
    }
    ++seen;
  }
  return state;
}

}  // namespace cagr
