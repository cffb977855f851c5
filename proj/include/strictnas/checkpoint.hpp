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

#pragma once

#include <filesystem>
#include <string>

#include "strictnas/supernet.hpp"

namespace strictnas {

/// A checkpoint is two files: `<base>.json`, a manifest with the space
/// fingerprint, seed, step, update counters and the ordered tensor table
/// (name, rows, cols, offset), and `<base>.bin`, every tensor's values as
/// little-endian f32 concatenated in manifest order (column-major within a
/// tensor). Both are written under temporary names and renamed into place.
void save_checkpoint(const std::filesystem::path& base, const Supernet& net);

/// Loads a checkpoint written for `space`. Throws IoError if the manifest's
/// space fingerprint differs or the blob does not match the tensor table.
Supernet load_checkpoint(const std::filesystem::path& base, const SearchSpace& space);

std::filesystem::path manifest_path(const std::filesystem::path& base);
std::filesystem::path blob_path(const std::filesystem::path& base);

/// Hex rendering used for fingerprints in manifests.
std::string hex64(std::uint64_t value);

/// Writes `contents` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace strictnas
