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

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace beamcraft
{

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr double pi = 3.14159265358979323846;

// Uniform planar array with n_phi horizontal and n_theta vertical elements.
struct ArrayConfig
{
    std::size_t n_phi = 16;
    std::size_t n_theta = 8;

    std::size_t size() const noexcept { return n_phi * n_theta; }
    void validate() const;

    friend bool operator==(const ArrayConfig &, const ArrayConfig &) = default;
};

// Element n (0-based) sits at horizontal index n / n_theta and vertical index
// n % n_theta, i.e. the layout of a_xy (x) a_z.
inline std::size_t horizontal_index(std::size_t n, const ArrayConfig &cfg) noexcept { return n / cfg.n_theta; }
inline std::size_t vertical_index(std::size_t n, const ArrayConfig &cfg) noexcept { return n % cfg.n_theta; }

// Physical pointing direction. phi in [-pi/2, pi/2], theta in [0, pi].
class AngleCoords
{
public:
    AngleCoords(double phi, double theta);

    double phi() const noexcept { return phi_; }
    double theta() const noexcept { return theta_; }

private:
    double phi_;
    double theta_;
};

// Beamspace coordinates u = sin(phi) sin(theta), v = cos(theta), both in [-1, 1].
class BeamCoords
{
public:
    BeamCoords(double u, double v);

    double u() const noexcept { return u_; }
    double v() const noexcept { return v_; }

    // A pair is physically realizable when u^2 + v^2 <= 1.
    bool realizable(double tol = 1e-12) const noexcept;

private:
    double u_;
    double v_;
};

// A single analog beam: N complex weights on the constant-modulus manifold
// |w_n| = 1/sqrt(N).
class BeamVector
{
public:
    BeamVector() = default;
    explicit BeamVector(CVec elements) : elements_(std::move(elements)) {}

    std::size_t size() const noexcept { return elements_.size(); }
    const CVec &elements() const noexcept { return elements_; }
    CVec &elements() noexcept { return elements_; }
    const cplx &operator[](std::size_t n) const noexcept { return elements_[n]; }

    double norm() const noexcept;

private:
    CVec elements_;
};

using Codebook = std::vector<BeamVector>;

// <a, h> = a^H h.
cplx inner(std::span<const cplx> a, std::span<const cplx> h) noexcept;
inline cplx inner(const BeamVector &a, std::span<const cplx> h) noexcept { return inner(a.elements(), h); }

// Steering vector; element n = exp(j pi [p u + q v]) / sqrt(N) with p, q the
// 0-based horizontal and vertical indices.
BeamVector upa_response(const BeamCoords &coords, const ArrayConfig &cfg);

// Unchecked variant for coordinates known to be finite (grid points, beam
// centroids). Beamspace is 2-periodic so any real (u, v) is meaningful.
BeamVector upa_response_unchecked(double u, double v, const ArrayConfig &cfg);

BeamCoords angles_to_beamspace(const AngleCoords &a);

// Throws UnrealizablePair when |u| > sin(arccos v) and DegenerateElevation
// when |v| = 1 with u != 0.
AngleCoords beamspace_to_angles(const BeamCoords &b);

// Orthonormal DFT codebook on the grid u_k = -1 + 2k/n_phi, v_m = -1 + 2m/n_theta.
// Beam index i (1-based) = k * n_theta + m + 1.
class DftCodebook
{
public:
    explicit DftCodebook(const ArrayConfig &cfg);

    const ArrayConfig &config() const noexcept { return cfg_; }
    std::size_t size() const noexcept { return beams_.size(); }

    // 1-based access, matching dataset labels.
    const BeamVector &beam(std::size_t index) const;
    double grid_u(std::size_t index) const;
    double grid_v(std::size_t index) const;

    static std::size_t index_of(std::size_t k, std::size_t m, const ArrayConfig &cfg) noexcept
    {
        return k * cfg.n_theta + m + 1;
    }

    const Codebook &beams() const noexcept { return beams_; }

private:
    ArrayConfig cfg_;
    Codebook beams_;
    std::vector<double> u_;
    std::vector<double> v_;
};

inline DftCodebook dft_codebook(const ArrayConfig &cfg) { return DftCodebook(cfg); }

} // namespace beamcraft
