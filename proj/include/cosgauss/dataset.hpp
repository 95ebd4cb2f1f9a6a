// cosgauss/dataset.hpp
//
// Copyright 2026 The cosgauss Authors
//
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

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cosgauss/common.hpp"

namespace cosgauss {

// One row of a manifest: `path,label` with label in {0,1}, no header line.
struct ManifestEntry {
  std::string path;
  int label = 0;
};

using Manifest = std::vector<ManifestEntry>;

// Relative paths in a manifest resolve against the manifest's directory.
inline Manifest read_manifest(const std::string& manifest_path) {
  std::ifstream f(manifest_path);
  if (!f) fail("read_manifest: cannot open " + manifest_path);
  const auto base = std::filesystem::path(manifest_path).parent_path();
  Manifest out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.rfind(',');
    if (comma == std::string::npos)
      fail("read_manifest: missing label column at " + manifest_path + ":" +
           std::to_string(lineno));
    std::string path = line.substr(0, comma);
    std::string label = line.substr(comma + 1);
    if (label != "0" && label != "1")
      fail("read_manifest: label must be 0 or 1 at " + manifest_path + ":" +
           std::to_string(lineno));
    std::filesystem::path p(path);
    if (p.is_relative()) p = base / p;
    out.push_back({p.string(), label == "1" ? 1 : 0});
  }
  return out;
}

inline void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail("write_manifest: cannot open " + path);
  for (const auto& e : m) f << e.path << "," << e.label << "\n";
  if (!f) fail("write_manifest: write failed: " + path);
}

}  // namespace cosgauss
