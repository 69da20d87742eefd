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

#include "beamcraft/errors.hpp"
#include "beamcraft/probe_frontend.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace beamcraft;

namespace
{

Channel random_channel(const ArrayConfig &cfg, Rng &rng)
{
    CVec h(cfg.size());
    for (auto &x : h)
        x = rng.complex_normal(1.0);
    return Channel(h);
}

// Noise-free inner products y_l = h^H w_l.
CVec probe_outputs(const ProbeParams &p, const Channel &h, const ArrayConfig &cfg)
{
    const Codebook w = build_codebook(p, cfg);
    CVec y;
    for (const auto &b : w)
        y.push_back(inner(h.h(), b.elements()));
    return y;
}

// Central difference of y_l with respect to parameter index i.
cplx fd_output(ProbeParams p, std::size_t i, std::size_t l, const Channel &h, const ArrayConfig &cfg, double step)
{
    const double x0 = p.values()[i];
    p.values()[i] = x0 + step;
    const cplx plus = probe_outputs(p, h, cfg)[l];
    p.values()[i] = x0 - step;
    const cplx minus = probe_outputs(p, h, cfg)[l];
    return (plus - minus) / (2.0 * step);
}

double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12}); }

ProbeParams random_angles(std::size_t beams, Rng &rng)
{
    std::vector<AngleCoords> a;
    for (std::size_t l = 0; l < beams; ++l)
        a.emplace_back(rng.uniform(-1.4, 1.4), rng.uniform(0.2, pi - 0.2));
    return ProbeParams::angle_domain(a);
}

ProbeParams random_beams(std::size_t beams, Rng &rng)
{
    std::vector<BeamCoords> b;
    for (std::size_t l = 0; l < beams; ++l)
        b.emplace_back(rng.uniform(-0.95, 0.95), rng.uniform(-0.95, 0.95));
    return ProbeParams::beam_domain(b);
}

ProbeParams random_phases(std::size_t antennas, std::size_t beams, Rng &rng)
{
    std::vector<double> w(antennas * beams);
    for (auto &x : w)
        x = rng.uniform(-pi, pi);
    return ProbeParams::full_matrix(antennas, beams, w);
}

SensingConfig quiet(double tx_dbm = 0.0)
{
    SensingConfig s;
    s.tx_power_dbm = tx_dbm;
    s.noise_enabled = false;
    return s;
}

} // namespace

TEST(BuildCodebook, Examples)
{
    const ArrayConfig cfg;
    const BeamCoords zero(0.0, 0.0);
    const auto beam = build_codebook(ProbeParams::beam_domain(std::span(&zero, 1)), cfg);
    ASSERT_EQ(beam.size(), 1u);
    for (const auto &x : beam[0].elements())
        EXPECT_NEAR(std::abs(x - cplx(1.0 / std::sqrt(128.0), 0.0)), 0.0, 1e-15);

    const AngleCoords broadside(0.0, pi / 2);
    const auto angle = build_codebook(ProbeParams::angle_domain(std::span(&broadside, 1)), cfg);
    for (std::size_t n = 0; n < 128; ++n)
        EXPECT_LT(std::abs(angle[0][n] - beam[0][n]), 1e-15);

    const auto full = build_codebook(ProbeParams::full_matrix(128, 3, std::vector<double>(384, 0.0)), cfg);
    ASSERT_EQ(full.size(), 3u);
    for (const auto &b : full)
        for (const auto &x : b.elements())
            EXPECT_NEAR(x.real(), 1.0 / std::sqrt(128.0), 1e-15);
}

TEST(BuildCodebook, ConstantModulusForEveryVariant)
{
    const ArrayConfig cfg;
    Rng rng(4);
    std::vector<double> perturb(128 * 4);
    for (auto &x : perturb)
        x = rng.uniform(-0.3, 0.3);
    for (const auto &p : {random_angles(4, rng), random_beams(4, rng), random_phases(128, 4, rng)})
        for (const auto &w : {build_codebook(p, cfg), build_codebook(p, cfg, perturb), quantize_phases(p, cfg, 3)})
            for (const auto &b : w)
            {
                EXPECT_NEAR(b.norm(), 1.0, 1e-12);
                for (const auto &x : b.elements())
                    EXPECT_NEAR(std::abs(x), 1.0 / std::sqrt(128.0), 1e-12);
            }
}

TEST(ProbeParams, BoxesAndProjection)
{
    EXPECT_THROW(ProbeParams::from_values(ProbeVariant::BeamDomain, 1, 0, {1.5, 0.0}), Error);
    EXPECT_THROW(ProbeParams::from_values(ProbeVariant::AngleDomain, 1, 0, {0.0, 4.0}), Error);
    EXPECT_THROW(ProbeParams::from_values(ProbeVariant::BeamDomain, 2, 0, {0.0, 0.0}), Error);

    auto b = ProbeParams::from_values(ProbeVariant::BeamDomain, 1, 0, {0.5, -0.5});
    b.values()[0] = 1.7;
    b.values()[1] = -3.0;
    b.project();
    EXPECT_EQ(b.values()[0], 1.0);
    EXPECT_EQ(b.values()[1], -1.0);

    auto a = ProbeParams::from_values(ProbeVariant::AngleDomain, 1, 0, {0.0, 1.0});
    a.values()[0] = -2.0;
    a.values()[1] = 3.5;
    a.project();
    EXPECT_DOUBLE_EQ(a.values()[0], -pi / 2);
    EXPECT_DOUBLE_EQ(a.values()[1], pi);

    auto f = ProbeParams::full_matrix(2, 1, {0.0, 0.0});
    f.values()[0] = pi;
    f.values()[1] = 7.0;
    f.project();
    EXPECT_NEAR(f.values()[0], -pi, 1e-15);
    EXPECT_NEAR(f.values()[1], 7.0 - 2 * pi, 1e-12);
}

TEST(ProbeVariant, Names)
{
    for (const auto v : {ProbeVariant::AngleDomain, ProbeVariant::BeamDomain, ProbeVariant::FullMatrix})
        EXPECT_EQ(parse_probe_variant(to_string(v)), v);
    EXPECT_EQ(to_string(ProbeVariant::FullMatrix), "full_matrix");
    EXPECT_THROW(parse_probe_variant("wide"), Error);
}

TEST(Sensing, CapActiveForMatchedBeam)
{
    const ArrayConfig cfg;
    const BeamCoords c(0.25, -0.5);
    const auto w = build_codebook(ProbeParams::beam_domain(std::span(&c, 1)), cfg);
    const auto s = sense_noise_free(w, Channel(w[0].elements()), quiet(0.0));
    EXPECT_NEAR(s.z[0].real(), 1.0, 1e-12);
    EXPECT_NEAR(s.z[0].imag(), 0.0, 1e-12);
    EXPECT_NEAR(s.power[0], 1.0, 1e-12);
    EXPECT_EQ(s.rsrp_dbm[0], -40.0);
}

TEST(Sensing, LogMapAndFloor)
{
    EXPECT_NEAR(rsrp_from_power(1e-7), -70.0, 1e-12);
    EXPECT_EQ(rsrp_from_power(0.0), -140.0);
    EXPECT_EQ(rsrp_from_power(1e-200), -140.0);
    EXPECT_EQ(rsrp_from_power(10.0), -40.0);

    const DftCodebook cb(ArrayConfig{});
    const Codebook w{cb.beam(5)};
    const auto s = sense_noise_free(w, Channel(cb.beam(6).elements()), quiet());
    EXPECT_LT(s.power[0], 1e-28);
    EXPECT_EQ(s.rsrp_dbm[0], -140.0);
}

TEST(Sensing, PowerIsSquaredModulusAndNoiseIsSeeded)
{
    const ArrayConfig cfg;
    Rng rng(8);
    const Channel h = random_channel(cfg, rng);
    const auto w = build_codebook(random_beams(8, rng), cfg);
    SensingConfig s;
    Rng a(21), b(21);
    const auto o1 = sense(w, h, s, a);
    const auto o2 = sense(w, h, s, b);
    for (std::size_t l = 0; l < 8; ++l)
    {
        EXPECT_DOUBLE_EQ(o1.power[l], std::norm(o1.z[l]));
        EXPECT_EQ(o1.z[l], o2.z[l]);
        EXPECT_GE(o1.rsrp_dbm[l], -140.0);
        EXPECT_LE(o1.rsrp_dbm[l], -40.0);
    }
    EXPECT_NEAR(SensingConfig{}.noise_power_dbm, -94.0, 1e-12);
}

TEST(Sensing, NoiseHasConfiguredPower)
{
    SensingConfig s;
    Rng rng(99);
    double acc = 0.0;
    const std::size_t count = 200000;
    const CVec n = draw_sensing_noise(count, s, rng);
    for (const auto &x : n)
        acc += std::norm(x);
    EXPECT_NEAR(acc / double(count) / s.noise_power_mw(), 1.0, 0.01);
}

TEST(QuantizeRsrp, NearestWithTiesToEven)
{
    const std::vector<double> in{-70.4, -70.5, -40.0, -71.5, -139.6};
    const auto q = quantize_rsrp(in);
    EXPECT_EQ(q, (std::vector<int>{-70, -70, -40, -72, -140}));
    std::vector<double> again(q.begin(), q.end());
    EXPECT_EQ(quantize_rsrp(again), q);
}

TEST(PredictorInput, Scaling)
{
    SensingOutput s;
    s.rsrp_dbm = {-140.0, -90.0, -40.0, -70.4};
    s.power.assign(4, 0.0);
    s.z.assign(4, cplx{});
    const auto raw = predictor_input(s, false);
    EXPECT_EQ(raw[0], -1.0);
    EXPECT_EQ(raw[1], 0.0);
    EXPECT_EQ(raw[2], 1.0);
    EXPECT_NEAR(raw[3], 19.6 / 50.0, 1e-15);
    EXPECT_NEAR(predictor_input(s, true)[3], 20.0 / 50.0, 1e-15);
}

TEST(PowerGradient, LogMapDerivativeAndClamp)
{
    const std::vector<double> up{1.0, 1.0, 1.0, 2.0};
    const std::vector<double> power{1e-9, 1e-16, 1.0, 1e-30 / 2};
    const auto g = power_gradient(up, power);
    EXPECT_NEAR(g[0], 10.0 / (std::log(10.0) * 1e-9) / 50.0, 1e-3);
    EXPECT_EQ(g[1], 0.0); // below -140 dBm
    EXPECT_EQ(g[2], 0.0); // above -40 dBm
    EXPECT_EQ(g[3], 0.0);

    // Finite difference through the log map inside the active range.
    const double p = 3e-8, h = 1e-14;
    const double fd = (normalize_rsrp(rsrp_from_power(p + h)) - normalize_rsrp(rsrp_from_power(p - h))) / (2 * h);
    const std::vector<double> one{1.0}, pv{p};
    EXPECT_NEAR(power_gradient(one, pv)[0] / fd, 1.0, 1e-6);
}

TEST(PaperIndexIdentity, MatchesKroneckerLayout)
{
    const ArrayConfig cfg;
    const auto nt = cfg.n_theta;
    for (std::size_t n = 1; n <= cfg.size(); ++n)
    {
        const std::size_t ceil_term = (n + nt - 1) / nt;
        const long long expr = (long long)n - (long long)(ceil_term * nt) + (long long)nt - 1;
        EXPECT_EQ(expr, (long long)((n - 1) % nt));
        EXPECT_EQ((std::size_t)expr, vertical_index(n - 1, cfg));
    }
}

TEST(AngleGradient, SingleColumnHasNoAzimuthDependence)
{
    const ArrayConfig cfg{1, 8};
    Rng rng(3);
    const Channel h = random_channel(cfg, rng);
    const auto g = grad_z_wrt_angles(random_angles(3, rng), h, cfg);
    for (const auto &x : g)
        EXPECT_EQ(std::abs(x.first), 0.0);
}

TEST(AngleGradient, TwoElementHandComputation)
{
    const ArrayConfig cfg{2, 1};
    const Channel h(CVec{cplx(0, 0), cplx(1, 0)});
    const AngleCoords a(0.0, pi / 2);
    const auto p = ProbeParams::angle_domain(std::span(&a, 1));
    EXPECT_LT(std::abs(probe_outputs(p, h, cfg)[0] - cplx(1.0 / std::sqrt(2.0), 0.0)), 1e-15);

    const BeamCoords b(0.0, 0.0);
    const auto gb = grad_z_wrt_beamspace(ProbeParams::beam_domain(std::span(&b, 1)), h, cfg);
    EXPECT_NEAR(gb[0].first.real(), 0.0, 1e-15);
    EXPECT_NEAR(gb[0].first.imag(), 2.221441469079183, 1e-12);

    // d/dphi = d/du * sin(theta) cos(phi) = j pi / sqrt(2) here.
    const auto ga = grad_z_wrt_angles(p, h, cfg);
    EXPECT_NEAR(ga[0].first.imag(), 2.221441469079183, 1e-12);
    const AngleCoords tilted(0.3, 1.1);
    const auto gt = grad_z_wrt_angles(ProbeParams::angle_domain(std::span(&tilted, 1)), h, cfg);
    const auto bt = angles_to_beamspace(tilted);
    const BeamCoords bt_c(bt.u(), bt.v());
    const auto gbt = grad_z_wrt_beamspace(ProbeParams::beam_domain(std::span(&bt_c, 1)), h, cfg);
    EXPECT_LT(std::abs(gt[0].first - gbt[0].first * std::sin(1.1) * std::cos(0.3)), 1e-14);
}

TEST(AngleGradient, MatchesFiniteDifferences)
{
    const ArrayConfig cfg;
    Rng rng(101);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t)
    {
        const Channel h = random_channel(cfg, rng);
        const auto p = random_angles(1, rng);
        const auto g = grad_z_wrt_angles(p, h, cfg);
        worst = std::max(worst, rel_err(g[0].first, fd_output(p, 0, 0, h, cfg, 1e-6)));
        worst = std::max(worst, rel_err(g[0].second, fd_output(p, 1, 0, h, cfg, 1e-6)));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(BeamspaceGradient, MatchesFiniteDifferences)
{
    const ArrayConfig cfg;
    Rng rng(102);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t)
    {
        const Channel h = random_channel(cfg, rng);
        const auto p = random_beams(1, rng);
        const auto g = grad_z_wrt_beamspace(p, h, cfg);
        worst = std::max(worst, rel_err(g[0].first, fd_output(p, 0, 0, h, cfg, 1e-6)));
        worst = std::max(worst, rel_err(g[0].second, fd_output(p, 1, 0, h, cfg, 1e-6)));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(BeamspaceGradient, ChainRuleAgreesWithAngleGradient)
{
    const ArrayConfig cfg;
    Rng rng(103);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t)
    {
        const Channel h = random_channel(cfg, rng);
        const AngleCoords a(rng.uniform(-1.4, 1.4), rng.uniform(0.2, pi - 0.2));
        const auto b = angles_to_beamspace(a);
        const auto ga = grad_z_wrt_angles(ProbeParams::angle_domain(std::span(&a, 1)), h, cfg)[0];
        const auto gb = grad_z_wrt_beamspace(ProbeParams::beam_domain(std::span(&b, 1)), h, cfg)[0];
        const double sp = std::sin(a.phi()), cp = std::cos(a.phi());
        const double st = std::sin(a.theta()), ct = std::cos(a.theta());
        worst = std::max(worst, rel_err(ga.first, gb.first * cp * st));
        worst = std::max(worst, rel_err(ga.second, gb.first * sp * ct - gb.second * st));
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(BeamspaceGradient, SingleEntryChannelHasPhaseOnlyDependence)
{
    const ArrayConfig cfg;
    CVec hv(128, cplx(0, 0));
    hv[37] = cplx(0.4, -1.1);
    const Channel h(hv);
    Rng rng(6);
    const auto p = random_beams(3, rng);
    const SensingConfig s = quiet(30.0);
    const auto out = sense_noise_free(build_codebook(p, cfg), h, s);
    const std::vector<double> up(3, 1.0);
    for (const double g : backprop_probe(up, out, p, h, cfg, s))
        EXPECT_LT(std::abs(g), 1e-10);
}

TEST(BeamspaceGradient, BroadsideAllOnesIsPurelyImaginary)
{
    const ArrayConfig cfg;
    const Channel h(CVec(128, cplx(1, 0)));
    const BeamCoords b(0.0, 0.0);
    const auto g = grad_z_wrt_beamspace(ProbeParams::beam_domain(std::span(&b, 1)), h, cfg)[0];
    EXPECT_NEAR(g.first.real(), 0.0, 1e-12);
    EXPECT_GT(std::abs(g.first.imag()), 1.0);
    EXPECT_NEAR(g.second.real(), 0.0, 1e-12);
}

TEST(PhaseGradient, MatchesFiniteDifferences)
{
    const ArrayConfig cfg;
    Rng rng(104);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t)
    {
        const Channel h = random_channel(cfg, rng);
        const auto p = random_phases(128, 2, rng);
        const auto g = grad_z_wrt_phases(p, h, cfg);
        const std::size_t l = t % 2;
        const std::size_t n = rng.uniform_index(128);
        worst = std::max(worst, rel_err(g[l * 128 + n], fd_output(p, l * 128 + n, l, h, cfg, 1e-6)));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(BackpropProbe, ZeroUpstreamGivesZero)
{
    const ArrayConfig cfg;
    Rng rng(7);
    const Channel h = random_channel(cfg, rng);
    const auto p = random_beams(4, rng);
    const auto out = sense_noise_free(build_codebook(p, cfg), h, quiet());
    for (const double g : backprop_probe(std::vector<double>(4, 0.0), out, p, h, cfg, quiet()))
        EXPECT_EQ(g, 0.0);
}

TEST(BackpropProbe, PowerLossMatchesFiniteDifferences)
{
    // J = |z|^2 with a single probe, for each parameterization.
    const ArrayConfig cfg;
    Rng rng(105);
    const SensingConfig s = quiet(3.0);
    const auto loss = [&](const ProbeParams &p, const Channel &h) {
        return sense_noise_free(build_codebook(p, cfg), h, s).power[0];
    };
    double worst = 0.0;
    for (int t = 0; t < 30; ++t)
    {
        const Channel h = random_channel(cfg, rng);
        for (auto p : {random_angles(1, rng), random_beams(1, rng), random_phases(128, 1, rng)})
        {
            const auto out = sense_noise_free(build_codebook(p, cfg), h, s);
            const std::vector<double> up{1.0};
            const auto g = backprop_probe(up, out, p, h, cfg, s);
            const std::size_t i = rng.uniform_index(p.values().size());
            const double x0 = p.values()[i];
            p.values()[i] = x0 + 1e-6;
            const double lp = loss(p, h);
            p.values()[i] = x0 - 1e-6;
            const double lm = loss(p, h);
            const double fd = (lp - lm) / 2e-6;
            worst = std::max(worst, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-3}));
        }
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(BackpropProbe, DegeneratePowerIsReported)
{
    const ArrayConfig cfg;
    const DftCodebook cb(cfg);
    const BeamCoords c(cb.grid_u(5), cb.grid_v(5));
    const auto p = ProbeParams::beam_domain(std::span(&c, 1));
    const Channel h(cb.beam(6).elements());
    const auto out = sense_noise_free(build_codebook(p, cfg), h, quiet());
    try
    {
        backprop_probe(std::vector<double>{1.0}, out, p, h, cfg, quiet());
        FAIL() << "expected DegeneratePower";
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), ErrorCode::DegeneratePower);
    }
}

TEST(QuantizePhases, GridExamples)
{
    EXPECT_EQ(quantize_phase(0.7, 2), 0.0);
    EXPECT_DOUBLE_EQ(quantize_phase(1.0, 2), pi / 2);
    EXPECT_DOUBLE_EQ(quantize_phase(3.0, 2), -pi); // wraps to the -pi grid point
    for (double x = -pi; x < pi; x += 0.01)
    {
        const double q = quantize_phase(x, 1);
        EXPECT_TRUE(q == 0.0 || q == -pi) << x;
    }
    EXPECT_THROW(quantize_phase(0.1, 0), Error);
    EXPECT_THROW(quantize_phase(0.1, 17), Error);
}

TEST(QuantizePhases, PreservesModulusAndIsIdempotent)
{
    const ArrayConfig cfg;
    Rng rng(12);
    const Codebook q = quantize_phases(build_codebook(random_beams(8, rng), cfg), 3);
    for (const auto &b : q)
    {
        EXPECT_NEAR(b.norm(), 1.0, 1e-12);
        for (const auto &x : b.elements())
        {
            const double k = (std::arg(x) + pi) / (2 * pi / 8);
            EXPECT_NEAR(k, std::round(k), 1e-9);
        }
    }
    const Codebook qq = quantize_phases(q, 3);
    for (std::size_t l = 0; l < q.size(); ++l)
        for (std::size_t n = 0; n < 128; ++n)
            EXPECT_LT(std::abs(qq[l][n] - q[l][n]), 1e-15);
}

TEST(PhaseNoise, BoundsMeanAndDeterminism)
{
    Rng a(77), b(77);
    const auto fine = phase_noise(1000, 16, a);
    for (const double x : fine)
        EXPECT_LT(std::abs(x), 1e-4);

    Rng r(5);
    const std::size_t count = 1000000;
    const auto coarse = phase_noise(count, 3, r);
    double mean = 0.0;
    for (const double x : coarse)
    {
        EXPECT_LE(std::abs(x), pi / 8);
        mean += x;
    }
    mean /= double(count);
    const double sigma = (pi / 8) / std::sqrt(3.0) / std::sqrt(double(count));
    EXPECT_LT(std::abs(mean), 3 * sigma);

    EXPECT_EQ(phase_noise(1000, 16, b), fine);
    EXPECT_DOUBLE_EQ(phase_noise_bound(3, PhaseNoiseUnit::LiteralDegrees), pi / 180.0 / 8.0);
    EXPECT_EQ(parse_phase_noise_unit("literal_degrees"), PhaseNoiseUnit::LiteralDegrees);
}
