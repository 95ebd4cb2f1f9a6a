// cosgauss/folds.hpp
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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "cosgauss/checkpoint.hpp"
#include "cosgauss/classifier.hpp"
#include "cosgauss/common.hpp"
#include "cosgauss/dataset.hpp"

namespace cosgauss {

struct FoldSpec {
  int id = 0;
  std::string train_manifest;
  std::string val_manifest;
};

// Folds file: one `id,train_manifest,val_manifest` line per fold, relative
// paths resolved against the folds file's directory.
inline std::vector<FoldSpec> read_folds_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail("read_folds_file: cannot open " + path);
  const auto base = std::filesystem::path(path).parent_path();
  std::vector<FoldSpec> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? std::string::npos
                                      : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      fail("read_folds_file: expected id,train,val at " + path + ":" +
           std::to_string(lineno));
    FoldSpec spec;
    spec.id = std::stoi(line.substr(0, c1));
    auto resolve = [&base](std::string p) {
      std::filesystem::path fp(p);
      if (fp.is_relative()) fp = base / fp;
      return fp.string();
    };
    spec.train_manifest = resolve(line.substr(c1 + 1, c2 - c1 - 1));
    spec.val_manifest = resolve(line.substr(c2 + 1));
    out.push_back(spec);
  }
  if (out.empty()) fail("read_folds_file: no folds in " + path);
  return out;
}

struct FoldResult {
  int id = 0;
  double auc = 0.0;
};

struct FoldReport {
  std::vector<FoldResult> folds;
  double average = 0.0;
};

inline FoldReport make_fold_report(const std::vector<FoldResult>& folds) {
  check_arg(!folds.empty(), "make_fold_report: no folds");
  FoldReport r;
  r.folds = folds;
  double sum = 0.0;
  for (const auto& f : folds) sum += f.auc;
  r.average = sum / static_cast<double>(folds.size());
  return r;
}

// fold,auc rows plus an avg row; AUC as a percentage with one decimal.
inline std::string fold_report_csv(const FoldReport& r) {
  std::string out = "fold,auc\n";
  char buf[64];
  for (const auto& f : r.folds) {
    std::snprintf(buf, sizeof(buf), "%d,%.1f\n", f.id, 100.0 * f.auc);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "avg,%.1f\n", 100.0 * r.average);
  out += buf;
  return out;
}

// Per fold: fresh model (fold-offset seed), optional filter transfer, train,
// score the validation manifest. Any failure aborts with the fold id.
inline FoldReport run_folds(const std::vector<FoldSpec>& folds,
                            const BackendSetup& setup, const TrainConfig& base,
                            const Checkpoint* init,
                            bool init_relevance = false) {
  check_arg(!folds.empty(), "run_folds: needs at least one fold");
  std::vector<FoldResult> results;
  for (const auto& fold : folds) {
    try {
      Manifest train = read_manifest(fold.train_manifest);
      Manifest val = read_manifest(fold.val_manifest);
      std::set<std::string> train_paths;
      for (const auto& e : train) train_paths.insert(e.path);
      for (const auto& e : val)
        if (train_paths.count(e.path))
          fail("train and validation manifests overlap at " + e.path);
      TrainConfig cfg = base;
      cfg.seed = base.seed + static_cast<std::uint64_t>(fold.id);
      Rng rng(model_init_seed(cfg.seed));
      BackendModel model = make_backend(setup, rng);
      if (init) transfer_filters(*init, model, init_relevance);
      train_supervised(train, val, cfg, model);
      std::vector<LoadedSample> vs = load_samples(val, model.sample_rate);
      ScoredSet set;
      for (const auto& s : vs)
        set.push_back({predict_waveform(model, s.wave), s.label});
      results.push_back({fold.id, roc_auc(set)});
    } catch (const std::exception& e) {
      fail("run_folds: fold " + std::to_string(fold.id) + " failed: " +
           e.what());
    }
  }
  return make_fold_report(results);
}

}  // namespace cosgauss
