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

// Node geometry, large-scale path loss and Rayleigh/Rician block fading.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "ambc/errors.hpp"
#include "ambc/numerics.hpp"
#include "ambc/random.hpp"

namespace ambc {

inline constexpr double kSpeedOfLight = 299'792'458.0;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct NodeGeometry {
    Point2 source{-5.0, 0.0};
    Point2 tag{0.0, 0.0};
    Point2 irs{0.0, 5.0};
    Point2 reader{5.0, 0.0};
    double carrier_hz = 2.4e9;
    double path_loss_exponent = 2.5;
    // Extra loss applied to every link on top of d^-exponent. Zero keeps the
    // pure distance law.
    double reference_loss_db = 0.0;

    double wavelength() const { return kSpeedOfLight / carrier_hz; }
    double reference_gain() const { return std::pow(10.0, -reference_loss_db / 10.0); }

    void validate() const {
        const std::array<Point2, 4> nodes{source, tag, irs, reader};
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (std::size_t j = i + 1; j < nodes.size(); ++j)
                if (!(distance(nodes[i], nodes[j]) > 0.0))
                    throw InvalidGeometry("geometry: nodes " + std::to_string(i) + " and " +
                                          std::to_string(j) + " coincide");
        if (!(carrier_hz > 0.0)) throw InvalidGeometry("geometry: carrier frequency must be positive");
        if (!(path_loss_exponent >= 0.0)) throw InvalidGeometry("geometry: negative path-loss exponent");
    }
};

// Linear power gain d^-exponent.
inline double path_loss(double distance_m, double exponent) {
    if (!(distance_m > 0.0)) throw InvalidGeometry("path_loss: distance must be positive");
    return std::pow(distance_m, -exponent);
}

// Entries i.i.d. CN(0, gain), filled column by column.
inline ComplexMatrix draw_rayleigh_block(Eigen::Index rows, Eigen::Index cols, double gain, Rng& rng) {
    ComplexMatrix out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = complex_normal(rng, gain);
    return out;
}

// sqrt(gain) * (sqrt(K/(K+1)) e^{j phi} + sqrt(1/(K+1)) w), w ~ CN(0, 1).
inline ComplexMatrix draw_rician_block(Eigen::Index rows, Eigen::Index cols, double gain, double k_factor,
                                       const RealMatrix& los_phases, Rng& rng) {
    if (!(k_factor >= 0.0)) throw InvalidInput("draw_rician_block: K must be non-negative");
    if (los_phases.rows() != rows || los_phases.cols() != cols)
        throw ShapeError("draw_rician_block: LOS phase matrix has the wrong shape");
    const double amp = std::sqrt(gain);
    const double los = std::sqrt(k_factor / (k_factor + 1.0));
    const double nlos = std::sqrt(1.0 / (k_factor + 1.0));
    ComplexMatrix out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            out(i, j) = amp * (los * std::polar(1.0, los_phases(i, j)) + nlos * complex_normal(rng));
    return out;
}

// Every block of one coherence episode. `irs_reader` is the M x N matrix that
// multiplies the reflection matrix directly (the conjugate-transposed
// IRS-reader channel), so the reflected ambient path is irs_reader * Theta * source_irs.
struct ChannelRealization {
    Complex source_tag{};
    ComplexVector source_irs;     // N
    ComplexVector source_reader;  // M
    ComplexVector tag_reader;     // M
    ComplexVector tag_irs;        // N
    ComplexMatrix irs_reader;     // M x N

    struct Gains {
        double source_tag = 0.0;
        double source_irs = 0.0;
        double source_reader = 0.0;
        double tag_reader = 0.0;
        double tag_irs = 0.0;
        double irs_reader = 0.0;
    } gains;

    Eigen::Index antennas() const { return source_reader.size(); }
    Eigen::Index reflectors() const { return source_irs.size(); }

    void validate() const {
        const auto m = antennas();
        const auto n = reflectors();
        if (m < 1) throw ShapeError("channel: no reader antennas");
        if (tag_reader.size() != m || irs_reader.rows() != m || tag_irs.size() != n || irs_reader.cols() != n)
            throw ShapeError("channel: inconsistent block dimensions");
    }
};

namespace detail {

inline ComplexVector as_vector(const ComplexMatrix& m) { return Eigen::Map<const ComplexVector>(m.data(), m.size()); }

// Deterministic per-link LOS phase 2*pi*d/lambda plus an episode-wide random offset.
inline RealMatrix los_phase_block(Eigen::Index rows, Eigen::Index cols, double link_distance, double wavelength,
                                  Rng& rng) {
    const double phase = 2.0 * std::numbers::pi * link_distance / wavelength + uniform_phase(rng);
    return RealMatrix::Constant(rows, cols, phase);
}

}  // namespace detail

// One realization. IRS links (source-IRS, tag-IRS, IRS-reader) are Rician with
// factor `k_irs`, the others Rayleigh. Each link draws from its own sub-stream
// seeded from `rng`, and blocks are filled reflector by reflector, so a
// realization with N reflectors is a prefix of the same seed with more.
inline ChannelRealization generate_realization(const NodeGeometry& geo, Eigen::Index antennas,
                                               Eigen::Index reflectors, double k_irs, Rng& rng) {
    if (antennas < 1 || reflectors < 1) throw InvalidInput("generate_realization: need M >= 1 and N >= 1");
    geo.validate();

    std::array<Rng, 6> link_rng;
    for (auto& r : link_rng) r.seed(rng());

    const double ref = geo.reference_gain();
    const double eta = geo.path_loss_exponent;
    const double lambda = geo.wavelength();
    const double d_st = distance(geo.source, geo.tag);
    const double d_si = distance(geo.source, geo.irs);
    const double d_sr = distance(geo.source, geo.reader);
    const double d_tr = distance(geo.tag, geo.reader);
    const double d_ti = distance(geo.tag, geo.irs);
    const double d_ir = distance(geo.irs, geo.reader);

    ChannelRealization ch;
    ch.gains = {ref * path_loss(d_st, eta), ref * path_loss(d_si, eta), ref * path_loss(d_sr, eta),
                ref * path_loss(d_tr, eta), ref * path_loss(d_ti, eta), ref * path_loss(d_ir, eta)};

    ch.source_tag = draw_rayleigh_block(1, 1, ch.gains.source_tag, link_rng[0])(0, 0);
    {
        auto phases = detail::los_phase_block(reflectors, 1, d_si, lambda, link_rng[1]);
        ch.source_irs = detail::as_vector(
            draw_rician_block(reflectors, 1, ch.gains.source_irs, k_irs, phases, link_rng[1]));
    }
    ch.source_reader = detail::as_vector(draw_rayleigh_block(antennas, 1, ch.gains.source_reader, link_rng[2]));
    ch.tag_reader = detail::as_vector(draw_rayleigh_block(antennas, 1, ch.gains.tag_reader, link_rng[3]));
    {
        auto phases = detail::los_phase_block(reflectors, 1, d_ti, lambda, link_rng[4]);
        ch.tag_irs =
            detail::as_vector(draw_rician_block(reflectors, 1, ch.gains.tag_irs, k_irs, phases, link_rng[4]));
    }
    {
        auto phases = detail::los_phase_block(antennas, reflectors, d_ir, lambda, link_rng[5]);
        ch.irs_reader = draw_rician_block(antennas, reflectors, ch.gains.irs_reader, k_irs, phases, link_rng[5]);
    }
    return ch;
}

}  // namespace ambc
