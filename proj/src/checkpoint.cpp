// Copyright 2026 The strictnas Authors.
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

#include "strictnas/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "strictnas/binary_io.hpp"

namespace strictnas {

using nlohmann::ordered_json;

std::filesystem::path manifest_path(const std::filesystem::path& base) {
  auto p = base;
  p += ".json";
  return p;
}

std::filesystem::path blob_path(const std::filesystem::path& base) {
  auto p = base;
  p += ".bin";
  return p;
}

std::string hex64(std::uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(value));
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_checkpoint(const std::filesystem::path& base, const Supernet& net) {
  const auto& params = net.params();
  ordered_json manifest;
  manifest["format"] = "strictnas-checkpoint";
  manifest["version"] = 1;
  manifest["space_fingerprint"] = hex64(net.space().fingerprint());
  manifest["layers"] = net.space().num_layers();
  manifest["choices"] = net.space().choices_per_layer();
  manifest["seed"] = net.init_seed();
  manifest["step"] = net.step();
  manifest["total_bp"] = net.counters().total_bp();
  manifest["counters"] = net.counters().raw();
  manifest["blob"] = blob_path(base).filename().string();
  ordered_json tensors = ordered_json::array();
  std::ostringstream blob(std::ios::binary);
  std::int64_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& spec = params.spec(i);
    tensors.push_back({{"name", spec.name}, {"rows", spec.rows}, {"cols", spec.cols}, {"offset", offset}});
    const auto& m = params[i];
    for (Eigen::Index j = 0; j < m.size(); ++j) io::write_le(blob, m.data()[j]);
    offset += m.size();
  }
  manifest["blob_floats"] = offset;
  manifest["tensors"] = std::move(tensors);
  write_file_atomic(blob_path(base), blob.str());
  write_file_atomic(manifest_path(base), manifest.dump(2) + "\n");
}

Supernet load_checkpoint(const std::filesystem::path& base, const SearchSpace& space) {
  std::ifstream mf(manifest_path(base));
  if (!mf) throw IoError("cannot open checkpoint manifest " + manifest_path(base).string());
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(mf);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint manifest " + manifest_path(base).string() + ": " + e.what());
  }
  if (manifest.value("format", "") != "strictnas-checkpoint") throw IoError("not a strictnas checkpoint");
  const auto expected = hex64(space.fingerprint());
  const auto found = manifest.at("space_fingerprint").get<std::string>();
  if (found != expected) {
    throw IoError("checkpoint " + base.string() + " was written for search space " + found +
                  " but the configured space is " + expected);
  }
  auto params = ParamSet<float>(std::make_shared<const NetworkLayout>(space));
  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != params.size()) throw IoError("checkpoint tensor table does not match the space");
  std::ifstream blob(blob_path(base), std::ios::binary);
  if (!blob) throw IoError("cannot open checkpoint blob " + blob_path(base).string());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = tensors[i];
    const auto& spec = params.spec(i);
    if (t.at("name").get<std::string>() != spec.name || t.at("rows").get<int>() != spec.rows ||
        t.at("cols").get<int>() != spec.cols) {
      throw IoError("checkpoint tensor " + std::to_string(i) + " does not match " + spec.name);
    }
    for (Eigen::Index j = 0; j < params[i].size(); ++j) params[i].data()[j] = io::read_le<float>(blob);
  }
  if (blob.peek() != std::char_traits<char>::eof()) throw IoError("checkpoint blob has trailing data");
  auto counters = FairnessCounters::from_raw(space.num_layers(), space.choices_per_layer(),
                                             manifest.at("counters").get<std::vector<std::int64_t>>(),
                                             manifest.at("total_bp").get<std::int64_t>());
  return Supernet(std::move(params), std::move(counters), manifest.at("step").get<std::int64_t>(),
                  manifest.at("seed").get<std::uint64_t>());
}

}  // namespace strictnas
