// Copyright 2026 The cohflow Authors
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

#include <random>

#include "cohflow/matrix.hpp"

namespace cohflow {

/// Random density operator G G^dagger / Tr(G G^dagger), G complex Ginibre.
template <typename Rng>
DensityOperator random_density(Rng& rng, std::size_t dim = 2) {
  std::normal_distribution<double> normal;
  ComplexMatrix g(dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) g(r, c) = complex(normal(rng), normal(rng));
  ComplexMatrix rho = g * g.adjoint();
  rho *= 1.0 / rho.trace().real();
  return DensityOperator(hermitian_part(rho));
}

}  // namespace cohflow
