// SPDX-License-Identifier: Apache-2.0
//
// irs-ambc: IRS-assisted ambient backscatter link simulator and DDPG lab
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Reader-side blind estimation: pilot covariances, rank-one refinement,
// the generalized-eigenvector combiner and the sample GRCD.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "ambc/errors.hpp"
#include "ambc/numerics.hpp"
#include "ambc/signal_model.hpp"

namespace ambc {

enum class NoiseEstimate { estimated, known };

// (1/L) sum y y^H over the columns of `samples`.
inline ComplexMatrix estimate_covariance(const ComplexMatrix& samples) {
    if (samples.rows() == 0 || samples.cols() == 0) throw InvalidInput("estimate_covariance: empty sample set");
    ComplexMatrix c = samples * samples.adjoint() / static_cast<double>(samples.cols());
    return 0.5 * (c + c.adjoint());
}

// Projects a covariance estimate onto {a v v^H + p I : a >= 0}: v is the top
// eigenvector, p the mean of the remaining eigenvalues (or `known_noise` when
// given), and a = lambda_max - p clamped at zero.
inline ComplexMatrix refine_covariance(const ComplexMatrix& c, std::optional<double> known_noise = std::nullopt) {
    if (c.rows() < 2) throw InvalidInput("refine_covariance: needs at least two antennas");
    const auto eig = hermitian_eig(c);
    const Eigen::Index m = c.rows();
    const double top = eig.values[m - 1];
    const double noise = known_noise ? *known_noise : eig.values.head(m - 1).mean();
    const double signal = std::max(top - noise, 0.0);
    const ComplexVector v = eig.vectors.col(m - 1);
    ComplexMatrix out = signal * (v * v.adjoint());
    out.diagonal().array() += noise;
    return 0.5 * (out + out.adjoint());
}

// Rotates so the first non-negligible entry is real and positive.
inline ComplexVector canonical_phase(ComplexVector v) {
    const double scale = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]);
        if (mag > 1e-12 * scale) {
            v *= std::conj(v[i]) / mag;
            v[i] = mag;
            break;
        }
    }
    return v;
}

namespace detail {

inline EigenDecomposition generalized_eig_with_jitter(const ComplexMatrix& c1, const ComplexMatrix& c0) {
    try {
        return generalized_hermitian_eig(c1, c0);
    } catch (const DefinitenessError&) {
        const double jitter = 1e-12 * c0.diagonal().real().sum() / static_cast<double>(c0.rows());
        ComplexMatrix loaded = c0;
        loaded.diagonal().array() += jitter;
        return generalized_hermitian_eig(c1, loaded);
    }
}

}  // namespace detail

struct EigenCombinerResult {
    Combiner combiner;
    double lambda_max = 1.0;      // largest eigenvalue of C1 g = lambda C0 g
    double inv_lambda_min = 1.0;  // 1 / smallest eigenvalue
};

// Generalized eigenvector combiner: the eigenvector of lambda+ when
// lambda+ > 1/lambda-, otherwise that of lambda-. Each side comes from its
// own reduction (C1 vs C0, and C0 vs C1) so a tiny lambda- keeps full
// relative accuracy.
inline EigenCombinerResult eigen_combiner_detail(const ComplexMatrix& c0, const ComplexMatrix& c1) {
    if (c0.rows() != c1.rows()) throw ShapeError("eigen_combiner: dimension mismatch");
    const auto forward = detail::generalized_eig_with_jitter(c1, c0);
    const auto reverse = detail::generalized_eig_with_jitter(c0, c1);
    const Eigen::Index m = c0.rows();
    EigenCombinerResult out;
    out.lambda_max = forward.values[m - 1];
    out.inv_lambda_min = reverse.values[m - 1];
    const ComplexVector& pick = out.lambda_max > out.inv_lambda_min ? forward.vectors.col(m - 1)
                                                                      : reverse.vectors.col(m - 1);
    out.combiner = Combiner::normalized(canonical_phase(pick));
    return out;
}

inline Combiner eigen_combiner(const ComplexMatrix& c0, const ComplexMatrix& c1) {
    return eigen_combiner_detail(c0, c1).combiner;
}

inline double quadratic_form(const ComplexMatrix& c, const Combiner& g) {
    return g.weights().dot(c * g.weights()).real();
}

inline double sample_grcd(const ComplexMatrix& c0, const ComplexMatrix& c1, const Combiner& g) {
    const double e0 = quadratic_form(c0, g);
    const double e1 = quadratic_form(c1, g);
    if (!(e0 > 0.0) || !(e1 > 0.0)) throw InvalidStatistics("sample_grcd: non-positive quadratic form");
    return std::max(e1 / e0, e0 / e1);
}

// Refined pilot covariances together with the energies and sample GRCD they
// imply for one combiner.
struct SymbolStatistics {
    ComplexMatrix c0;
    ComplexMatrix c1;
    bool refined = false;
    double energy0 = 0.0;
    double energy1 = 0.0;
    double grcd = 1.0;
};

// Estimates (and for M >= 2 refines) the covariance pair from the raw samples
// of a 0-then-1 pilot pair.
inline std::pair<ComplexMatrix, ComplexMatrix> pilot_covariances(const ComplexMatrix& samples0,
                                                                 const ComplexMatrix& samples1,
                                                                 NoiseEstimate mode, double noise_power) {
    ComplexMatrix c0 = estimate_covariance(samples0);
    ComplexMatrix c1 = estimate_covariance(samples1);
    if (c0.rows() >= 2) {
        std::optional<double> known;
        if (mode == NoiseEstimate::known) known = noise_power;
        c0 = refine_covariance(c0, known);
        c1 = refine_covariance(c1, known);
    }
    return {std::move(c0), std::move(c1)};
}

inline SymbolStatistics symbol_statistics(ComplexMatrix c0, ComplexMatrix c1, bool refined, const Combiner& g) {
    SymbolStatistics s{std::move(c0), std::move(c1), refined};
    s.energy0 = quadratic_form(s.c0, g);
    s.energy1 = quadratic_form(s.c1, g);
    s.grcd = sample_grcd(s.c0, s.c1, g);
    return s;
}

}  // namespace ambc
