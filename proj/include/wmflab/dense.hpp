// Copyright 2025 the wmflab authors
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

#include <Eigen/Dense>

namespace wmflab {

// Dense matrices are Eigen column-major doubles throughout, so that
// vec() (column stacking) is a zero-copy view of the storage.
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Column-stacking view of M. The view aliases M's storage.
inline Eigen::Map<const Vector> vec_view(const DenseMatrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Eigen::Map<Vector> vec_view(DenseMatrix& m) {
  return Eigen::Map<Vector>(m.data(), m.size());
}

// Owning copy of vec(M).
inline Vector vec_flatten(const DenseMatrix& m) { return vec_view(m); }

// Inverse of vec_flatten for a rows x cols target.
inline DenseMatrix unvec(const Vector& v, Index rows, Index cols) {
  return Eigen::Map<const DenseMatrix>(v.data(), rows, cols);
}

}  // namespace wmflab
