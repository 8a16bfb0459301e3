// Copyright 2026 The steplab Authors.
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

#ifndef STEPLAB_LABEL_MATRIX_HPP_
#define STEPLAB_LABEL_MATRIX_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "steplab/nummath.hpp"

namespace steplab {

// Binary rows x T matching matrix with a keep flag per row. Kept rows have at
// least one positive; dropped rows are all zero. `anchor` is the segment the
// row was built around (argmax for step labels, span start for narrations).
struct LabelMatrix {
  DenseMatrix m;
  std::vector<bool> kept;
  std::vector<std::size_t> anchor;
  std::optional<double> gamma;
  std::optional<std::size_t> window;

  std::size_t rows() const { return m.rows(); }
  std::size_t cols() const { return m.cols(); }
  std::size_t KeptCount() const;
  // Throws InvalidArgument when the binary/keep invariants do not hold.
  void Validate() const;
};

}  // namespace steplab

#endif  // STEPLAB_LABEL_MATRIX_HPP_
