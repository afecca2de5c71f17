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

// Small dense complex kernels: Hermitian eigensolver (cyclic Jacobi),
// Cholesky factorization and the generalized Hermitian eigenproblem by
// Cholesky reduction. Matrices here are at most a few dozen rows.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ambc/errors.hpp"

namespace ambc {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

struct EigenDecomposition {
    RealVector values;     // ascending
    ComplexMatrix vectors; // column k pairs with values[k]
};

inline constexpr double kHermitianTolerance = 1e-10;

inline double hermitian_defect(const ComplexMatrix& a) {
    const double norm = a.norm();
    if (norm == 0.0) return 0.0;
    return (a - a.adjoint()).norm() / norm;
}

inline void require_hermitian(const ComplexMatrix& a, const char* who) {
    if (a.rows() == 0 || a.rows() != a.cols())
        throw ShapeError(std::string(who) + ": expected a non-empty square matrix");
    if (!a.allFinite()) throw InvalidInput(std::string(who) + ": non-finite entries");
    if (hermitian_defect(a) >= kHermitianTolerance)
        throw InvalidInput(std::string(who) + ": matrix is not Hermitian");
}

namespace detail {

// One two-sided unitary rotation annihilating a(p,q); accumulates into v.
inline void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, Eigen::Index p, Eigen::Index q) {
    const Complex apq = a(p, q);
    const double mag = std::abs(apq);
    if (mag == 0.0) return;
    const Complex phase = apq / mag;  // e^{i phi}
    const double app = a(p, p).real();
    const double aqq = a(q, q).real();
    const double theta = (aqq - app) / (2.0 * mag);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    // Rotation V = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on the (p, q) plane.
    const Complex conj_phase = std::conj(phase);
    const Eigen::Index n = a.rows();
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex akp = a(k, p);
        const Complex akq = a(k, q);
        a(k, p) = c * akp - s * conj_phase * akq;
        a(k, q) = s * akp + c * conj_phase * akq;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex apk = a(p, k);
        const Complex aqk = a(q, k);
        a(p, k) = c * apk - s * phase * aqk;
        a(q, k) = s * apk + c * phase * aqk;
    }
    a(p, p) = app - t * mag;
    a(q, q) = aqq + t * mag;
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex vkp = v(k, p);
        const Complex vkq = v(k, q);
        v(k, p) = c * vkp - s * conj_phase * vkq;
        v(k, q) = s * vkp + c * conj_phase * vkq;
    }
}

inline double off_diagonal_norm(const ComplexMatrix& a) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (i != j) sum += std::norm(a(i, j));
    return std::sqrt(sum);
}

}  // namespace detail

// Eigenpairs of a Hermitian matrix, eigenvalues ascending, orthonormal
// eigenvectors. Throws InvalidInput for non-Hermitian input and
// NumericalError (with the sweep count) if Jacobi fails to converge.
inline EigenDecomposition hermitian_eig(const ComplexMatrix& input, int max_sweeps = 100) {
    require_hermitian(input, "hermitian_eig");
    const Eigen::Index n = input.rows();
    ComplexMatrix a = 0.5 * (input + input.adjoint());
    ComplexMatrix v = ComplexMatrix::Identity(n, n);
    const double scale = a.norm();

    int sweep = 0;
    if (scale > 0.0) {
        while (detail::off_diagonal_norm(a) > 1e-15 * scale) {
            if (sweep == max_sweeps)
                throw NumericalError("hermitian_eig: Jacobi did not converge after " +
                                         std::to_string(sweep) + " sweeps",
                                     sweep);
            for (Eigen::Index p = 0; p + 1 < n; ++p)
                for (Eigen::Index q = p + 1; q < n; ++q) detail::jacobi_rotate(a, v, p, q);
            ++sweep;
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() < a(j, j).real(); });

    EigenDecomposition out{RealVector(n), ComplexMatrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto src = order[static_cast<std::size_t>(k)];
        out.values[k] = a(src, src).real();
        out.vectors.col(k) = v.col(src).normalized();
    }
    return out;
}

// Lower-triangular L with real positive diagonal such that L L^H = A.
// A pivot at or below 1e-12 * trace(A) / M is reported as DefinitenessError.
inline ComplexMatrix cholesky(const ComplexMatrix& a) {
    require_hermitian(a, "cholesky");
    const Eigen::Index n = a.rows();
    const double trace = a.diagonal().real().sum();
    const double floor = 1e-12 * trace / static_cast<double>(n);
    ComplexMatrix l = ComplexMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = a(j, j).real();
        for (Eigen::Index k = 0; k < j; ++k) pivot -= std::norm(l(j, k));
        if (!(pivot > floor) || !(pivot > 0.0))
            throw DefinitenessError("cholesky: matrix is not positive definite (pivot " +
                                    std::to_string(pivot) + " at column " + std::to_string(j) + ")");
        const double d = std::sqrt(pivot);
        l(j, j) = d;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            Complex sum = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) sum -= l(i, k) * std::conj(l(j, k));
            l(i, j) = sum / d;
        }
    }
    return l;
}

// Solves C1 g = lambda C0 g for Hermitian C1 and Hermitian positive-definite C0.
// Eigenvalues ascending; every eigenvector is scaled to unit Euclidean norm.
inline EigenDecomposition generalized_hermitian_eig(const ComplexMatrix& c1, const ComplexMatrix& c0) {
    require_hermitian(c1, "generalized_hermitian_eig");
    if (c0.rows() != c1.rows() || c0.cols() != c1.cols())
        throw ShapeError("generalized_hermitian_eig: dimension mismatch");
    const ComplexMatrix l = cholesky(c0);
    const auto lower = l.triangularView<Eigen::Lower>();
    // W = L^{-1} C1 L^{-H}
    ComplexMatrix w = lower.solve(c1);
    w = lower.solve(w.adjoint().eval()).adjoint();
    w = 0.5 * (w + w.adjoint()).eval();

    EigenDecomposition reduced = hermitian_eig(w);
    reduced.vectors = l.adjoint().triangularView<Eigen::Upper>().solve(reduced.vectors);
    for (Eigen::Index k = 0; k < reduced.vectors.cols(); ++k) reduced.vectors.col(k).normalize();
    return reduced;
}

}  // namespace ambc
