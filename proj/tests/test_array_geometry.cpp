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
#include "beamcraft/random.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace beamcraft;

namespace
{

// Independent construction: explicit Kronecker product of the horizontal
// and vertical responses.
CVec kronecker_response(double u, double v, std::size_t n_phi, std::size_t n_theta)
{
    CVec a_xy(n_phi), a_z(n_theta);
    for (std::size_t p = 0; p < n_phi; ++p)
        a_xy[p] = std::polar(1.0 / std::sqrt(double(n_phi)), pi * double(p) * u);
    for (std::size_t q = 0; q < n_theta; ++q)
        a_z[q] = std::polar(1.0 / std::sqrt(double(n_theta)), pi * double(q) * v);
    CVec out;
    for (const auto &x : a_xy)
        for (const auto &z : a_z)
            out.push_back(x * z);
    return out;
}

} // namespace

TEST(ArrayGeometry, AllZeroPhasesOnTwoByTwo)
{
    const auto b = upa_response(BeamCoords(0.0, 0.0), ArrayConfig{2, 2});
    ASSERT_EQ(b.size(), 4u);
    for (std::size_t n = 0; n < 4; ++n)
    {
        EXPECT_NEAR(b[n].real(), 0.5, 1e-15);
        EXPECT_NEAR(b[n].imag(), 0.0, 1e-15);
    }
}

TEST(ArrayGeometry, PhasePiOnSecondElement)
{
    const auto b = upa_response(BeamCoords(1.0, 0.0), ArrayConfig{2, 1});
    EXPECT_NEAR(b[0].real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(b[1].real(), -1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(b[1].imag(), 0.0, 1e-15);
}

TEST(ArrayGeometry, UnitNormAndConstantModulus)
{
    const ArrayConfig cfg;
    Rng rng(5);
    for (int t = 0; t < 200; ++t)
    {
        const auto b = upa_response(BeamCoords(rng.uniform(-1, 1), rng.uniform(-1, 1)), cfg);
        EXPECT_NEAR(b.norm(), 1.0, 1e-12);
        for (const auto &x : b.elements())
            EXPECT_NEAR(std::abs(x), 1.0 / std::sqrt(128.0), 1e-12);
    }
}

TEST(ArrayGeometry, MatchesKroneckerProduct)
{
    Rng rng(9);
    for (const ArrayConfig cfg : {ArrayConfig{16, 8}, ArrayConfig{3, 5}, ArrayConfig{1, 4}})
        for (int t = 0; t < 20; ++t)
        {
            const double u = rng.uniform(-1, 1), v = rng.uniform(-1, 1);
            const auto a = upa_response(BeamCoords(u, v), cfg);
            const auto ref = kronecker_response(u, v, cfg.n_phi, cfg.n_theta);
            for (std::size_t n = 0; n < cfg.size(); ++n)
                EXPECT_LT(std::abs(a[n] - ref[n]), 1e-12);
        }
}

TEST(ArrayGeometry, ElementIndexLayout)
{
    const ArrayConfig cfg;
    // 1-based element n: p = ceil(n / n_theta), q = n - (p - 1) n_theta.
    for (std::size_t n1 = 1; n1 <= cfg.size(); ++n1)
    {
        const std::size_t p = (n1 + cfg.n_theta - 1) / cfg.n_theta;
        const std::size_t q = n1 - (p - 1) * cfg.n_theta;
        EXPECT_EQ(horizontal_index(n1 - 1, cfg), p - 1);
        EXPECT_EQ(vertical_index(n1 - 1, cfg), q - 1);
    }
}

TEST(ArrayGeometry, AnglesToBeamspace)
{
    auto b = angles_to_beamspace(AngleCoords(0.0, pi / 2));
    EXPECT_NEAR(b.u(), 0.0, 1e-15);
    EXPECT_NEAR(b.v(), 0.0, 1e-15);
    b = angles_to_beamspace(AngleCoords(pi / 2, pi / 2));
    EXPECT_NEAR(b.u(), 1.0, 1e-15);
    b = angles_to_beamspace(AngleCoords(pi / 6, pi / 3));
    EXPECT_NEAR(b.u(), 0.4330127018922193, 1e-12);
    EXPECT_NEAR(b.v(), 0.5, 1e-12);
}

TEST(ArrayGeometry, BeamspaceToAngles)
{
    auto a = beamspace_to_angles(BeamCoords(0.0, 0.0));
    EXPECT_NEAR(a.phi(), 0.0, 1e-15);
    EXPECT_NEAR(a.theta(), pi / 2, 1e-15);
    a = beamspace_to_angles(BeamCoords(0.4330127018922193, 0.5));
    EXPECT_NEAR(a.phi(), pi / 6, 1e-12);
    EXPECT_NEAR(a.theta(), pi / 3, 1e-12);
}

TEST(ArrayGeometry, UnrealizableAndDegeneratePairs)
{
    try
    {
        beamspace_to_angles(BeamCoords(0.9, 0.9));
        FAIL() << "expected UnrealizablePair";
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), ErrorCode::UnrealizablePair);
    }
    try
    {
        beamspace_to_angles(BeamCoords(0.3, 1.0));
        FAIL() << "expected DegenerateElevation";
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateElevation);
    }
    // The pole itself is fine when u = 0.
    EXPECT_NEAR(beamspace_to_angles(BeamCoords(0.0, 1.0)).theta(), 0.0, 1e-15);
}

TEST(ArrayGeometry, RejectsOutOfRangeCoordinates)
{
    EXPECT_THROW(AngleCoords(2.0, 0.5), Error);
    EXPECT_THROW(AngleCoords(0.0, -0.1), Error);
    EXPECT_THROW(BeamCoords(1.5, 0.0), Error);
    EXPECT_THROW(BeamCoords(0.0, -1.01), Error);
    EXPECT_THROW((ArrayConfig{0, 8}.validate()), Error);
}

TEST(ArrayGeometry, RoundTripOnInterior)
{
    Rng rng(11);
    for (int t = 0; t < 500; ++t)
    {
        const AngleCoords a(rng.uniform(-1.5, 1.5), rng.uniform(0.05, pi - 0.05));
        const auto back = beamspace_to_angles(angles_to_beamspace(a));
        EXPECT_NEAR(back.phi(), a.phi(), 1e-10);
        EXPECT_NEAR(back.theta(), a.theta(), 1e-10);
    }
}

TEST(DftCodebook, TwoAntennaHandComputation)
{
    const DftCodebook cb(ArrayConfig{2, 1});
    ASSERT_EQ(cb.size(), 2u);
    EXPECT_NEAR(cb.grid_u(1), -1.0, 1e-15);
    EXPECT_NEAR(cb.beam(1)[1].real(), -1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(cb.beam(2)[1].real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_LT(std::abs(inner(cb.beam(1), cb.beam(2).elements())), 1e-15);
}

TEST(DftCodebook, GramIsIdentity)
{
    for (const ArrayConfig cfg : {ArrayConfig{16, 8}, ArrayConfig{4, 3}, ArrayConfig{5, 1}})
    {
        const DftCodebook cb(cfg);
        ASSERT_EQ(cb.size(), cfg.size());
        for (std::size_t i = 1; i <= cb.size(); ++i)
            for (std::size_t j = 1; j <= cb.size(); ++j)
            {
                const double g = std::abs(inner(cb.beam(i), cb.beam(j).elements()));
                EXPECT_NEAR(g, i == j ? 1.0 : 0.0, 1e-10);
            }
    }
}

TEST(DftCodebook, IndexRuleAndGrid)
{
    const ArrayConfig cfg;
    const DftCodebook cb(cfg);
    EXPECT_EQ(cb.size(), 128u);
    for (std::size_t k = 0; k < cfg.n_phi; ++k)
        for (std::size_t m = 0; m < cfg.n_theta; ++m)
        {
            const std::size_t i = DftCodebook::index_of(k, m, cfg);
            EXPECT_DOUBLE_EQ(cb.grid_u(i), -1.0 + 2.0 * double(k) / 16.0);
            EXPECT_DOUBLE_EQ(cb.grid_v(i), -1.0 + 2.0 * double(m) / 8.0);
            const auto ref = upa_response_unchecked(cb.grid_u(i), cb.grid_v(i), cfg);
            for (std::size_t n = 0; n < cfg.size(); ++n)
                EXPECT_EQ(cb.beam(i)[n], ref[n]);
        }
    EXPECT_THROW(cb.beam(0), Error);
    EXPECT_THROW(cb.beam(129), Error);
}
