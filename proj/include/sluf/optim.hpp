// Copyright 2026 SLUF Authors.
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

#include <cmath>
#include <map>
#include <string>

#include "sluf/graph.hpp"

namespace sluf {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t t = 0;

  struct Moments {
    Tensor m;
    Tensor v;
  };
  std::map<std::string, Moments> moments;
};

// Scales all gradients so their global L2 norm is at most max_norm.
// Returns the pre-clip norm.
inline double clip_global_norm(ParamStore& store, double max_norm) {
  double sq = 0;
  for (const auto& [name, p] : store.all())
    for (double g : p.grad.data) sq += g * g;
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    double scale = max_norm / norm;
    for (auto& [name, p] : store.all())
      for (double& g : p.grad.data) g *= scale;
  }
  return norm;
}

// One bias-corrected Adam update over every parameter in the store,
// applied to a subset if `trainable` is given.
inline void adam_step(AdamState& state, ParamStore& store,
                      const std::map<std::string, bool>* trainable = nullptr) {
  state.t += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (auto& [name, p] : store.all()) {
    if (trainable) {
      auto it = trainable->find(name);
      if (it == trainable->end() || !it->second) continue;
    }
    auto& mo = state.moments[name];
    if (mo.m.data.empty()) {
      mo.m = Tensor(p.value.shape);
      mo.v = Tensor(p.value.shape);
    }
    check(mo.m.same_shape(p.value), "adam_step: moment shape ", shape_str(mo.m.shape),
          " does not match param '", name, "' shape ", shape_str(p.value.shape));
    for (std::size_t i = 0; i < p.value.data.size(); ++i) {
      double g = p.grad.data[i];
      mo.m.data[i] = state.beta1 * mo.m.data[i] + (1.0 - state.beta1) * g;
      mo.v.data[i] = state.beta2 * mo.v.data[i] + (1.0 - state.beta2) * g * g;
      double mhat = mo.m.data[i] / bc1;
      double vhat = mo.v.data[i] / bc2;
      p.value.data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

}  // namespace sluf
