// cosgauss/auc.hpp
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

#include <algorithm>
#include <cmath>
#include <vector>

#include "cosgauss/common.hpp"

namespace cosgauss {

struct ScoredSample {
  double score = 0.0;
  int label = 0;
};

using ScoredSet = std::vector<ScoredSample>;

// Mann-Whitney AUC: (#{pos > neg} + 0.5 #{ties}) / (#pos * #neg), computed by
// one sort and a walk over tie groups. Tied pairs are credited half, so the
// result matches pairwise counting exactly.
inline double roc_auc(const ScoredSet& set) {
  std::size_t n_pos = 0, n_neg = 0;
  for (const auto& s : set) {
    check_arg(std::isfinite(s.score), "roc_auc: scores must be finite");
    check_arg(s.label == 0 || s.label == 1, "roc_auc: labels must be 0 or 1");
    if (s.label == 1)
      ++n_pos;
    else
      ++n_neg;
  }
  if (n_pos == 0 || n_neg == 0)
    fail("roc_auc: both classes must be present");
  ScoredSet sorted = set;
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredSample& a, const ScoredSample& b) {
              return a.score < b.score;
            });
  double u = 0.0;
  std::size_t neg_below = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    std::size_t g_pos = 0, g_neg = 0;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      if (sorted[j].label == 1)
        ++g_pos;
      else
        ++g_neg;
      ++j;
    }
    u += static_cast<double>(g_pos) * static_cast<double>(neg_below);
    u += 0.5 * static_cast<double>(g_pos) * static_cast<double>(g_neg);
    neg_below += g_neg;
    i = j;
  }
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace cosgauss
