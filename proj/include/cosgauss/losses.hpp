// cosgauss/losses.hpp
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
#include <span>

#include "cosgauss/common.hpp"

namespace cosgauss {

// Binary cross entropy on a pre-sigmoid logit:
//   loss = softplus(logit) - y * logit
//   d loss / d logit = sigmoid(logit) - y
// Finite for every finite logit.
struct BceResult {
  double loss = 0.0;
  double dlogit = 0.0;
};

inline BceResult bce_loss(double logit, int label) {
  check_arg(label == 0 || label == 1, "bce_loss: label must be 0 or 1");
  BceResult r;
  r.loss = softplus(logit) - static_cast<double>(label) * logit;
  r.dlogit = sigmoid(logit) - static_cast<double>(label);
  return r;
}

// InfoNCE over one positive and N negatives:
//   loss = logsumexp(pos, negs) - pos
// Gradients are softmax probabilities (positive gets p_pos - 1).
struct InfoNceResult {
  double loss = 0.0;
  double dpos = 0.0;
  Vec dnegs;
  bool positive_wins = false;  // pos strictly above every negative
};

inline InfoNceResult info_nce_loss(double pos, std::span<const double> negs) {
  check_arg(!negs.empty(), "info_nce_loss: needs at least one negative");
  double mx = pos;
  for (double s : negs) mx = std::max(mx, s);
  double z = std::exp(pos - mx);
  const double zpos = z;
  for (double s : negs) z += std::exp(s - mx);
  InfoNceResult r;
  r.loss = std::log(z) + mx - pos;
  r.dpos = zpos / z - 1.0;
  r.dnegs.resize(negs.size());
  r.positive_wins = true;
  for (std::size_t j = 0; j < negs.size(); ++j) {
    r.dnegs[j] = std::exp(negs[j] - mx) / z;
    if (negs[j] >= pos) r.positive_wins = false;
  }
  return r;
}

}  // namespace cosgauss
