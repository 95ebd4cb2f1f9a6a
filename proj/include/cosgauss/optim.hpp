// cosgauss/optim.hpp
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

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cosgauss/common.hpp"

namespace cosgauss {

// A named view over one parameter array. Models expose their trainable state
// as an ordered list of these; the same order is used for gradients, Adam
// moments, and checkpoints.
struct ParamRef {
  std::string name;
  double* data = nullptr;
  std::vector<std::size_t> shape;

  std::size_t size() const {
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    return n;
  }
};

using ParamRefs = std::vector<ParamRef>;

inline std::size_t total_size(const ParamRefs& refs) {
  std::size_t n = 0;
  for (const auto& r : refs) n += r.size();
  return n;
}

// Bias-corrected Adam over flat moment buffers sized on first use. Frozen
// groups are skipped entirely (values and moments untouched) but keep their
// slots, so freeze flags can change between steps.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  Vec m, v;
};

inline void adam_update(const ParamRefs& params, const ParamRefs& grads,
                        AdamState& state,
                        const std::function<bool(const std::string&)>& frozen =
                            nullptr) {
  check_arg(params.size() == grads.size(), "adam_update: group count mismatch");
  const std::size_t total = total_size(params);
  if (state.m.empty()) {
    state.m.assign(total, 0.0);
    state.v.assign(total, 0.0);
  }
  check_arg(state.m.size() == total, "adam_update: state size mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  std::size_t off = 0;
  for (std::size_t gi = 0; gi < params.size(); ++gi) {
    const ParamRef& p = params[gi];
    const ParamRef& g = grads[gi];
    check_arg(p.name == g.name && p.size() == g.size(),
              "adam_update: group mismatch at " + p.name);
    const std::size_t n = p.size();
    if (frozen && frozen(p.name)) {
      off += n;
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double grad = g.data[k];
      double& m = state.m[off + k];
      double& v = state.v[off + k];
      m = state.beta1 * m + (1.0 - state.beta1) * grad;
      v = state.beta2 * v + (1.0 - state.beta2) * grad * grad;
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      p.data[k] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
    off += n;
  }
}

}  // namespace cosgauss
