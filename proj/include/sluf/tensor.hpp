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

#include <cstdint>
#include <numeric>
#include <vector>

#include "sluf/common.hpp"

namespace sluf {

// Dense row-major tensor of 64-bit floats. Rank 1 and 2 cover every
// quantity in this codebase; higher ranks are permitted but unused.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<double> data;

  Tensor() = default;

  explicit Tensor(std::vector<std::int64_t> s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(numel_of(shape)), 0.0);
  }

  Tensor(std::vector<std::int64_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    check(static_cast<std::int64_t>(data.size()) == numel_of(shape),
          "tensor: ", data.size(), " values for shape ", shape_str(shape));
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static std::int64_t numel_of(const std::vector<std::int64_t>& s) {
    std::int64_t n = 1;
    for (std::int64_t e : s) {
      check(e > 0, "tensor: nonpositive extent in shape ", shape_str(s));
      n *= e;
    }
    return n;
  }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  std::int64_t rank() const { return static_cast<std::int64_t>(shape.size()); }

  // Rows/cols of a rank-2 tensor; rank-1 is treated as a single row.
  std::int64_t rows() const { return rank() == 2 ? shape[0] : 1; }
  std::int64_t cols() const { return shape.empty() ? 1 : shape.back(); }

  double& at(std::int64_t r, std::int64_t c) { return data[static_cast<std::size_t>(r * cols() + c)]; }
  double at(std::int64_t r, std::int64_t c) const { return data[static_cast<std::size_t>(r * cols() + c)]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline bool all_finite(const Tensor& t) {
  for (double v : t.data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace sluf
