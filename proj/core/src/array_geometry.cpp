// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The beamcraft Authors
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

#include "beamcraft/array_geometry.hpp"
#include "beamcraft/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace beamcraft
{

namespace
{
constexpr double coord_tol = 1e-12;

bool finite(double x) { return std::isfinite(x); }
} // namespace

void ArrayConfig::validate() const
{
    if (n_phi < 1 || n_theta < 1)
        throw Error(ErrorCode::InvalidArgument, "array dimensions must be positive");
}

AngleCoords::AngleCoords(double phi, double theta) : phi_(phi), theta_(theta)
{
    if (!finite(phi) || !finite(theta) || phi < -pi / 2 || phi > pi / 2 || theta < 0.0 || theta > pi)
        throw Error(ErrorCode::InvalidArgument,
                    "angles out of range: phi=" + std::to_string(phi) + " theta=" + std::to_string(theta));
}

BeamCoords::BeamCoords(double u, double v) : u_(u), v_(v)
{
    if (!finite(u) || !finite(v) || u < -1.0 || u > 1.0 || v < -1.0 || v > 1.0)
        throw Error(ErrorCode::InvalidArgument,
                    "beamspace coordinates out of range: u=" + std::to_string(u) + " v=" + std::to_string(v));
}

bool BeamCoords::realizable(double tol) const noexcept
{
    return std::abs(u_) <= std::sqrt(std::max(0.0, 1.0 - v_ * v_)) + tol;
}

double BeamVector::norm() const noexcept
{
    double s = 0.0;
    for (const auto &e : elements_)
        s += std::norm(e);
    return std::sqrt(s);
}

cplx inner(std::span<const cplx> a, std::span<const cplx> h) noexcept
{
    double re = 0.0;
    double im = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n)
    {
        // conj(a) * h
        re += a[n].real() * h[n].real() + a[n].imag() * h[n].imag();
        im += a[n].real() * h[n].imag() - a[n].imag() * h[n].real();
    }
    return {re, im};
}

BeamVector upa_response_unchecked(double u, double v, const ArrayConfig &cfg)
{
    const std::size_t n_total = cfg.size();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_total));
    CVec w(n_total);
    for (std::size_t n = 0; n < n_total; ++n)
    {
        const double p = static_cast<double>(horizontal_index(n, cfg));
        const double q = static_cast<double>(vertical_index(n, cfg));
        const double phase = pi * (p * u + q * v);
        w[n] = {scale * std::cos(phase), scale * std::sin(phase)};
    }
    return BeamVector(std::move(w));
}

BeamVector upa_response(const BeamCoords &coords, const ArrayConfig &cfg)
{
    cfg.validate();
    return upa_response_unchecked(coords.u(), coords.v(), cfg);
}

BeamCoords angles_to_beamspace(const AngleCoords &a)
{
    const double u = std::sin(a.phi()) * std::sin(a.theta());
    const double v = std::cos(a.theta());
    return {std::clamp(u, -1.0, 1.0), std::clamp(v, -1.0, 1.0)};
}

AngleCoords beamspace_to_angles(const BeamCoords &b)
{
    const double theta = std::acos(b.v());
    const double s = std::sin(theta);
    if (std::abs(b.v()) == 1.0)
    {
        if (std::abs(b.u()) > coord_tol)
            throw Error(ErrorCode::DegenerateElevation, "azimuth undefined at |v| = 1 with u != 0");
        return {0.0, theta};
    }
    if (std::abs(b.u()) > s + coord_tol)
        throw Error(ErrorCode::UnrealizablePair, "|u| = " + std::to_string(std::abs(b.u())) +
                                                     " exceeds sin(arccos v) = " + std::to_string(s));
    const double ratio = std::clamp(b.u() / s, -1.0, 1.0);
    return {std::asin(ratio), theta};
}

DftCodebook::DftCodebook(const ArrayConfig &cfg) : cfg_(cfg)
{
    cfg.validate();
    const std::size_t n_total = cfg.size();
    beams_.reserve(n_total);
    u_.reserve(n_total);
    v_.reserve(n_total);
    for (std::size_t k = 0; k < cfg.n_phi; ++k)
    {
        for (std::size_t m = 0; m < cfg.n_theta; ++m)
        {
            const double u = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(cfg.n_phi);
            const double v = -1.0 + 2.0 * static_cast<double>(m) / static_cast<double>(cfg.n_theta);
            beams_.push_back(upa_response_unchecked(u, v, cfg));
            u_.push_back(u);
            v_.push_back(v);
        }
    }
}

const BeamVector &DftCodebook::beam(std::size_t index) const
{
    if (index < 1 || index > beams_.size())
        throw Error(ErrorCode::InvalidArgument, "beam index " + std::to_string(index) + " out of range");
    return beams_[index - 1];
}

double DftCodebook::grid_u(std::size_t index) const
{
    beam(index);
    return u_[index - 1];
}

double DftCodebook::grid_v(std::size_t index) const
{
    beam(index);
    return v_[index - 1];
}

} // namespace beamcraft
