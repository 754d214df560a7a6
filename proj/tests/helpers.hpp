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

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sluf/graph.hpp"

namespace sluf::test {

// Central finite-difference oracle for tape primitives. `fn` builds a
// scalar loss from the given inputs on a fresh tape; the analytic
// gradients from one backward pass are compared against (f(x+h)-f(x-h))/2h
// at every input coordinate. Returns the worst relative error, with the
// denominator floored at 1 so near-zero gradients are compared absolutely.
inline double fd_max_rel_err(
    const std::function<Value(Tape&, const std::vector<Value>&)>& fn,
    const std::vector<Tensor>& inputs, double h = 1e-5) {
  Tape g;
  std::vector<Value> vs;
  vs.reserve(inputs.size());
  for (const auto& t : inputs) vs.push_back(g.input(t));
  Value loss = fn(g, vs);
  g.backward(loss);

  auto eval = [&](std::size_t which, std::size_t coord, double delta) {
    Tape g2;
    std::vector<Value> vs2;
    vs2.reserve(inputs.size());
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      Tensor t = inputs[j];
      if (j == which) t.data[coord] += delta;
      vs2.push_back(g2.input(std::move(t)));
    }
    return g2.value(fn(g2, vs2)).data[0];
  };

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t k = 0; k < inputs[i].data.size(); ++k) {
      double fd = (eval(i, k, h) - eval(i, k, -h)) / (2.0 * h);
      double an = g.grad(vs[i]).data[k];
      double rel = std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

// Finite-difference probe of `probes` randomly chosen parameter
// coordinates of a full model loss. `run(true)` must zero grads, build the
// loss on a fresh tape, run backward, and return the loss; `run(false)`
// must only return the loss for the current parameter values.
inline double model_fd_max_rel_err(ParamStore& store,
                                   const std::function<double(bool)>& run,
                                   int probes, Rng& rng, double h = 1e-5) {
  store.zero_grads();
  run(true);
  std::vector<std::pair<std::string, std::size_t>> coords;
  for (const auto& [name, p] : store.all())
    for (std::size_t k = 0; k < p.value.data.size(); ++k) coords.emplace_back(name, k);
  std::map<std::string, Tensor> grads;
  for (const auto& [name, p] : store.all()) grads.emplace(name, p.grad);

  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const auto& [name, k] =
        coords[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(coords.size()) - 1))];
    double& x = store.at(name).value.data[k];
    double orig = x;
    x = orig + h;
    double lp = run(false);
    x = orig - h;
    double lm = run(false);
    x = orig;
    double fd = (lp - lm) / (2.0 * h);
    double an = grads.at(name).data[k];
    double rel = std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
    worst = std::max(worst, rel);
  }
  return worst;
}

inline Tensor random_tensor(std::vector<std::int64_t> shape, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

// Random values kept away from zero, for kinked ops (relu) where a finite
// difference across the kink is meaningless.
inline Tensor random_tensor_away_from_zero(std::vector<std::int64_t> shape, Rng& rng,
                                           double margin = 1e-2) {
  Tensor t(std::move(shape));
  for (double& v : t.data) {
    double x = rng.uniform(margin, 1.0);
    v = rng.uniform() < 0.5 ? -x : x;
  }
  return t;
}

}  // namespace sluf::test
