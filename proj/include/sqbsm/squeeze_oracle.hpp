// Copyright 2026 The sqbsm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SQBSM_SQUEEZE_ORACLE_HPP
#define SQBSM_SQUEEZE_ORACLE_HPP

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "sqbsm/optics.hpp"

namespace sqbsm {

/// Dense <m|S|n> on a Fock space cut at `dim` levels, computed as the matrix
/// exponential of the truncated generator (1/2)(zeta a^+^2 - zeta* a^2) with
/// zeta = r e^{i phi}.
///
/// Entries near the cutoff are corrupted by truncation; keep at least ~20
/// levels of padding above the largest index you read.
inline Eigen::MatrixXcd squeeze_oracle(int dim, const SqueezeParams &sq) {
    if (dim < 1) {
        throw std::invalid_argument("oracle dimension must be positive");
    }
    const std::complex<double> zeta = std::polar(sq.r, sq.phi);
    Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(dim, dim);
    for (int m = 0; m + 2 < dim; ++m) {
        const double c = 0.5 * std::sqrt(double(m + 1) * double(m + 2));
        gen(m + 2, m) = zeta * c;
        gen(m, m + 2) = -std::conj(zeta) * c;
    }
    return gen.exp();
}

}  // namespace sqbsm

#endif  // SQBSM_SQUEEZE_ORACLE_HPP
