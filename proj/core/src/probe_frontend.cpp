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

#include "beamcraft/probe_frontend.hpp"
#include "beamcraft/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace beamcraft
{

namespace
{

double wrap_phase(double x)
{
    const double two_pi = 2.0 * pi;
    double y = x - two_pi * std::floor((x + pi) / two_pi);
    if (y >= pi)
        y -= two_pi;
    if (y < -pi)
        y = -pi;
    return y;
}

void check_perturbation(std::span<const double> perturbation, std::size_t expected)
{
    if (!perturbation.empty() && perturbation.size() != expected)
        throw Error(ErrorCode::ShapeMismatch, "phase perturbation has " + std::to_string(perturbation.size()) +
                                                  " entries, expected " + std::to_string(expected));
}

void check_channel(const Channel &h, const ArrayConfig &cfg)
{
    if (h.size() != cfg.size())
        throw Error(ErrorCode::ShapeMismatch, "channel length does not match the array");
}

} // namespace

std::string_view to_string(ProbeVariant v) noexcept
{
    switch (v)
    {
    case ProbeVariant::AngleDomain: return "angle";
    case ProbeVariant::BeamDomain: return "beam";
    case ProbeVariant::FullMatrix: return "full_matrix";
    }
    return "unknown";
}

ProbeVariant parse_probe_variant(std::string_view name)
{
    if (name == "angle")
        return ProbeVariant::AngleDomain;
    if (name == "beam")
        return ProbeVariant::BeamDomain;
    if (name == "full_matrix")
        return ProbeVariant::FullMatrix;
    throw Error(ErrorCode::ConfigInvalid, "unknown probe variant '" + std::string(name) + "'");
}

ProbeParams ProbeParams::angle_domain(std::span<const AngleCoords> beams)
{
    std::vector<double> values;
    values.reserve(2 * beams.size());
    for (const auto &a : beams)
    {
        values.push_back(a.phi());
        values.push_back(a.theta());
    }
    return from_values(ProbeVariant::AngleDomain, beams.size(), 0, std::move(values));
}

ProbeParams ProbeParams::beam_domain(std::span<const BeamCoords> beams)
{
    std::vector<double> values;
    values.reserve(2 * beams.size());
    for (const auto &b : beams)
    {
        values.push_back(b.u());
        values.push_back(b.v());
    }
    return from_values(ProbeVariant::BeamDomain, beams.size(), 0, std::move(values));
}

ProbeParams ProbeParams::full_matrix(std::size_t antennas, std::size_t beams, std::vector<double> phases)
{
    return from_values(ProbeVariant::FullMatrix, beams, antennas, std::move(phases));
}

ProbeParams ProbeParams::from_values(ProbeVariant variant, std::size_t beams, std::size_t antennas,
                                     std::vector<double> values)
{
    ProbeParams p(variant, beams, variant == ProbeVariant::FullMatrix ? antennas : 0, std::move(values));
    p.check();
    return p;
}

void ProbeParams::check() const
{
    if (beams_ == 0)
        throw Error(ErrorCode::InvalidArgument, "probe codebook needs at least one beam");
    const std::size_t expected = variant_ == ProbeVariant::FullMatrix ? antennas_ * beams_ : 2 * beams_;
    if (values_.size() != expected || expected == 0)
        throw Error(ErrorCode::ShapeMismatch, "probe parameter vector has " + std::to_string(values_.size()) +
                                                  " values, expected " + std::to_string(expected));
    for (std::size_t i = 0; i < values_.size(); ++i)
    {
        const double x = values_[i];
        if (!std::isfinite(x))
            throw Error(ErrorCode::NonFiniteInput, "probe parameter is not finite");
        switch (variant_)
        {
        case ProbeVariant::AngleDomain:
            (void)(i % 2 == 0 ? AngleCoords(x, pi / 2) : AngleCoords(0.0, x));
            break;
        case ProbeVariant::BeamDomain:
            (void)BeamCoords(x, 0.0);
            break;
        case ProbeVariant::FullMatrix:
            if (x < -pi || x >= pi)
                throw Error(ErrorCode::InvalidArgument, "phase outside [-pi, pi)");
            break;
        }
    }
}

void ProbeParams::project()
{
    for (std::size_t i = 0; i < values_.size(); ++i)
    {
        double &x = values_[i];
        switch (variant_)
        {
        case ProbeVariant::AngleDomain:
            x = i % 2 == 0 ? std::clamp(x, -pi / 2, pi / 2) : std::clamp(x, 0.0, pi);
            break;
        case ProbeVariant::BeamDomain:
            x = std::clamp(x, -1.0, 1.0);
            break;
        case ProbeVariant::FullMatrix:
            x = wrap_phase(x);
            break;
        }
    }
}

std::vector<double> element_phases(const ProbeParams &p, const ArrayConfig &cfg)
{
    cfg.validate();
    const std::size_t n_total = cfg.size();
    const std::size_t beams = p.beam_count();
    const auto values = p.values();
    std::vector<double> phases(n_total * beams);

    if (p.variant() == ProbeVariant::FullMatrix)
    {
        if (p.antenna_count() != n_total)
            throw Error(ErrorCode::ShapeMismatch, "full-matrix probes were built for a different array size");
        std::copy(values.begin(), values.end(), phases.begin());
        return phases;
    }

    for (std::size_t l = 0; l < beams; ++l)
    {
        double u = values[2 * l];
        double v = values[2 * l + 1];
        if (p.variant() == ProbeVariant::AngleDomain)
        {
            const double phi = u;
            const double theta = v;
            u = std::sin(phi) * std::sin(theta);
            v = std::cos(theta);
        }
        for (std::size_t n = 0; n < n_total; ++n)
        {
            const double hp = static_cast<double>(horizontal_index(n, cfg));
            const double vq = static_cast<double>(vertical_index(n, cfg));
            phases[l * n_total + n] = pi * (hp * u + vq * v);
        }
    }
    return phases;
}

Codebook build_codebook(const ProbeParams &p, const ArrayConfig &cfg, std::span<const double> perturbation)
{
    const std::size_t n_total = cfg.size();
    const auto phases = element_phases(p, cfg);
    check_perturbation(perturbation, phases.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_total));

    Codebook w;
    w.reserve(p.beam_count());
    for (std::size_t l = 0; l < p.beam_count(); ++l)
    {
        CVec beam(n_total);
        for (std::size_t n = 0; n < n_total; ++n)
        {
            double ph = phases[l * n_total + n];
            if (!perturbation.empty())
                ph += perturbation[l * n_total + n];
            beam[n] = {scale * std::cos(ph), scale * std::sin(ph)};
        }
        w.emplace_back(std::move(beam));
    }
    return w;
}

CVec draw_sensing_noise(std::size_t probes, const SensingConfig &cfg, Rng &rng)
{
    CVec noise(probes);
    const double var = cfg.noise_power_mw();
    for (auto &x : noise)
        x = rng.complex_normal(var);
    return noise;
}

double rsrp_from_power(double power_mw) noexcept
{
    const double db = 10.0 * std::log10(std::max(power_mw, power_floor_mw));
    return std::clamp(db, rsrp_floor_dbm, rsrp_cap_dbm);
}

SensingOutput sense_with_noise(const Codebook &w, const Channel &h, const SensingConfig &cfg,
                               std::span<const cplx> noise)
{
    if (!noise.empty() && noise.size() != w.size())
        throw Error(ErrorCode::ShapeMismatch, "noise vector length does not match probe count");
    const double amp = std::sqrt(cfg.tx_power_mw());
    SensingOutput out;
    out.z.resize(w.size());
    out.power.resize(w.size());
    out.rsrp_dbm.resize(w.size());
    for (std::size_t l = 0; l < w.size(); ++l)
    {
        if (w[l].size() != h.size())
            throw Error(ErrorCode::ShapeMismatch, "probe beam length does not match channel");
        // z = sqrt(P) h^H w, the convention the probe gradients differentiate.
        cplx z = amp * inner(h.h(), w[l].elements());
        if (!noise.empty())
            z += noise[l];
        out.z[l] = z;
        out.power[l] = z.real() * z.real() + z.imag() * z.imag();
        out.rsrp_dbm[l] = rsrp_from_power(out.power[l]);
    }
    return out;
}

SensingOutput sense(const Codebook &w, const Channel &h, const SensingConfig &cfg, Rng &rng)
{
    if (!cfg.noise_enabled)
        return sense_with_noise(w, h, cfg, {});
    const CVec noise = draw_sensing_noise(w.size(), cfg, rng);
    return sense_with_noise(w, h, cfg, noise);
}

SensingOutput sense_noise_free(const Codebook &w, const Channel &h, const SensingConfig &cfg)
{
    return sense_with_noise(w, h, cfg, {});
}

std::vector<int> quantize_rsrp(std::span<const double> rsrp_dbm)
{
    std::vector<int> out(rsrp_dbm.size());
    for (std::size_t i = 0; i < rsrp_dbm.size(); ++i)
    {
        // std::nearbyint honours the default round-half-to-even mode.
        const double r = std::nearbyint(std::clamp(rsrp_dbm[i], rsrp_floor_dbm, rsrp_cap_dbm));
        out[i] = static_cast<int>(r);
    }
    return out;
}

std::vector<double> predictor_input(const SensingOutput &s, bool quantized)
{
    std::vector<double> x(s.rsrp_dbm.size());
    if (quantized)
    {
        const auto q = quantize_rsrp(s.rsrp_dbm);
        for (std::size_t l = 0; l < x.size(); ++l)
            x[l] = normalize_rsrp(static_cast<double>(q[l]));
    }
    else
    {
        for (std::size_t l = 0; l < x.size(); ++l)
            x[l] = normalize_rsrp(s.rsrp_dbm[l]);
    }
    return x;
}

std::vector<double> power_gradient(std::span<const double> grad_wrt_input, std::span<const double> power)
{
    if (grad_wrt_input.size() != power.size())
        throw Error(ErrorCode::ShapeMismatch, "gradient and power lengths differ");
    std::vector<double> out(power.size(), 0.0);
    for (std::size_t l = 0; l < power.size(); ++l)
    {
        if (power[l] < power_floor_mw)
            continue;
        const double db = 10.0 * std::log10(power[l]);
        if (db <= rsrp_floor_dbm || db >= rsrp_cap_dbm)
            continue;
        out[l] = grad_wrt_input[l] * (1.0 / 50.0) * 10.0 / (std::log(10.0) * power[l]);
    }
    return out;
}

std::vector<ParamPairGradient> grad_z_wrt_angles(const ProbeParams &p, const Channel &h, const ArrayConfig &cfg,
                                                 std::span<const double> perturbation)
{
    if (p.variant() != ProbeVariant::AngleDomain)
        throw Error(ErrorCode::InvalidArgument, "angle gradient requested for non-angle probes");
    check_channel(h, cfg);
    const std::size_t n_total = cfg.size();
    check_perturbation(perturbation, n_total * p.beam_count());
    const double n_theta = static_cast<double>(cfg.n_theta);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_total));
    const auto values = p.values();

    std::vector<ParamPairGradient> grads(p.beam_count());
    for (std::size_t j = 0; j < p.beam_count(); ++j)
    {
        const double phi = values[2 * j];
        const double theta = values[2 * j + 1];
        const double sphi = std::sin(phi), cphi = std::cos(phi);
        const double sth = std::sin(theta), cth = std::cos(theta);

        double dr_phi = 0.0, di_phi = 0.0, dr_theta = 0.0, di_theta = 0.0;
        for (std::size_t idx = 1; idx <= n_total; ++idx)
        {
            // 1-based element index; ceil(n / N_theta) - 1 is the horizontal
            // position and n - ceil(n / N_theta) N_theta + N_theta - 1 the vertical one.
            const double n = static_cast<double>(idx);
            const double c = std::ceil(n / n_theta);
            const double hp = c - 1.0;
            const double vq = n - c * n_theta + n_theta - 1.0;
            double phase = pi * (hp * sphi * sth + vq * cth);
            if (!perturbation.empty())
                phase += perturbation[j * n_total + idx - 1];
            const double sin_ph = std::sin(phase);
            const double cos_ph = std::cos(phase);

            const double k_phi = pi * hp * sth * cphi;
            const double k_theta = pi * (hp * sphi * cth - vq * sth);
            const double dwr_phi = scale * -sin_ph * k_phi;
            const double dwi_phi = scale * cos_ph * k_phi;
            const double dwr_theta = scale * -sin_ph * k_theta;
            const double dwi_theta = scale * cos_ph * k_theta;

            // y = sum conj(h_n) w_n
            const double hr = h.h()[idx - 1].real();
            const double hi = h.h()[idx - 1].imag();
            dr_phi += dwr_phi * hr + dwi_phi * hi;
            di_phi += dwi_phi * hr - dwr_phi * hi;
            dr_theta += dwr_theta * hr + dwi_theta * hi;
            di_theta += dwi_theta * hr - dwr_theta * hi;
        }
        grads[j] = {{dr_phi, di_phi}, {dr_theta, di_theta}};
    }
    return grads;
}

std::vector<ParamPairGradient> grad_z_wrt_beamspace(const ProbeParams &p, const Channel &h, const ArrayConfig &cfg,
                                                    std::span<const double> perturbation)
{
    if (p.variant() != ProbeVariant::BeamDomain)
        throw Error(ErrorCode::InvalidArgument, "beamspace gradient requested for non-beamspace probes");
    check_channel(h, cfg);
    const std::size_t n_total = cfg.size();
    const Codebook w = build_codebook(p, cfg, perturbation);
    const cplx j_pi{0.0, pi};

    std::vector<ParamPairGradient> grads(p.beam_count());
    for (std::size_t l = 0; l < p.beam_count(); ++l)
    {
        cplx du{}, dv{};
        for (std::size_t n = 0; n < n_total; ++n)
        {
            const cplx t = std::conj(h.h()[n]) * w[l][n] * j_pi;
            du += static_cast<double>(horizontal_index(n, cfg)) * t;
            dv += static_cast<double>(vertical_index(n, cfg)) * t;
        }
        grads[l] = {du, dv};
    }
    return grads;
}

CVec grad_z_wrt_phases(const ProbeParams &p, const Channel &h, const ArrayConfig &cfg,
                       std::span<const double> perturbation)
{
    if (p.variant() != ProbeVariant::FullMatrix)
        throw Error(ErrorCode::InvalidArgument, "phase gradient requested for non-full-matrix probes");
    check_channel(h, cfg);
    const std::size_t n_total = cfg.size();
    const Codebook w = build_codebook(p, cfg, perturbation);
    CVec grads(n_total * p.beam_count());
    for (std::size_t l = 0; l < p.beam_count(); ++l)
        for (std::size_t n = 0; n < n_total; ++n)
            grads[l * n_total + n] = std::conj(h.h()[n]) * w[l][n] * cplx{0.0, 1.0};
    return grads;
}

std::vector<double> backprop_probe(std::span<const double> grad_wrt_power, const SensingOutput &sensing,
                                   const ProbeParams &p, const Channel &h, const ArrayConfig &cfg,
                                   const SensingConfig &sensing_cfg, std::span<const double> perturbation)
{
    const std::size_t beams = p.beam_count();
    if (grad_wrt_power.size() != beams || sensing.z.size() != beams)
        throw Error(ErrorCode::ShapeMismatch, "gradient, sensing output and probe count disagree");

    std::vector<double> grads(p.values().size(), 0.0);
    bool any = false;
    for (std::size_t l = 0; l < beams; ++l)
    {
        if (grad_wrt_power[l] == 0.0)
            continue;
        if (sensing.power[l] < power_floor_mw)
            throw Error(ErrorCode::DegeneratePower, "probe " + std::to_string(l) + " power below 1e-30 mW");
        any = true;
    }
    if (!any)
        return grads;

    // dJ/dparam = dJ/d|z|^2 * 2 (z^r dz^r + z^i dz^i), with dz = sqrt(P) dy.
    const double amp = std::sqrt(sensing_cfg.tx_power_mw());
    auto chain = [&](std::size_t l, cplx dy) {
        const cplx z = sensing.z[l];
        return grad_wrt_power[l] * 2.0 * amp * (z.real() * dy.real() + z.imag() * dy.imag());
    };

    switch (p.variant())
    {
    case ProbeVariant::AngleDomain: {
        const auto g = grad_z_wrt_angles(p, h, cfg, perturbation);
        for (std::size_t l = 0; l < beams; ++l)
        {
            grads[2 * l] = chain(l, g[l].first);
            grads[2 * l + 1] = chain(l, g[l].second);
        }
        break;
    }
    case ProbeVariant::BeamDomain: {
        const auto g = grad_z_wrt_beamspace(p, h, cfg, perturbation);
        for (std::size_t l = 0; l < beams; ++l)
        {
            grads[2 * l] = chain(l, g[l].first);
            grads[2 * l + 1] = chain(l, g[l].second);
        }
        break;
    }
    case ProbeVariant::FullMatrix: {
        const auto g = grad_z_wrt_phases(p, h, cfg, perturbation);
        const std::size_t n_total = cfg.size();
        for (std::size_t l = 0; l < beams; ++l)
            for (std::size_t n = 0; n < n_total; ++n)
                grads[l * n_total + n] = chain(l, g[l * n_total + n]);
        break;
    }
    }
    return grads;
}

double quantize_phase(double phase, int bits)
{
    if (bits < 1 || bits > 16)
        throw Error(ErrorCode::InvalidArgument, "phase resolution must be 1..16 bits");
    const double levels = std::ldexp(1.0, bits);
    const double step = 2.0 * pi / levels;
    double k = std::nearbyint((wrap_phase(phase) + pi) / step);
    if (k >= levels)
        k -= levels;
    return -pi + k * step;
}

Codebook quantize_phases(const Codebook &w, int bits)
{
    Codebook out;
    out.reserve(w.size());
    for (const auto &beam : w)
    {
        CVec q(beam.size());
        for (std::size_t n = 0; n < beam.size(); ++n)
            q[n] = std::polar(std::abs(beam[n]), quantize_phase(std::arg(beam[n]), bits));
        out.emplace_back(std::move(q));
    }
    return out;
}

Codebook quantize_phases(const ProbeParams &p, const ArrayConfig &cfg, int bits)
{
    auto phases = element_phases(p, cfg);
    for (auto &ph : phases)
        ph = quantize_phase(ph, bits);
    const std::size_t n_total = cfg.size();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_total));
    Codebook out;
    out.reserve(p.beam_count());
    for (std::size_t l = 0; l < p.beam_count(); ++l)
    {
        CVec beam(n_total);
        for (std::size_t n = 0; n < n_total; ++n)
            beam[n] = {scale * std::cos(phases[l * n_total + n]), scale * std::sin(phases[l * n_total + n])};
        out.emplace_back(std::move(beam));
    }
    return out;
}

std::string_view to_string(PhaseNoiseUnit u) noexcept
{
    return u == PhaseNoiseUnit::HalfStep ? "half_step" : "literal_degrees";
}

PhaseNoiseUnit parse_phase_noise_unit(std::string_view name)
{
    if (name == "half_step")
        return PhaseNoiseUnit::HalfStep;
    if (name == "literal_degrees")
        return PhaseNoiseUnit::LiteralDegrees;
    throw Error(ErrorCode::ConfigInvalid, "unknown phase noise unit '" + std::string(name) + "'");
}

double phase_noise_bound(int bits, PhaseNoiseUnit unit)
{
    if (bits < 1 || bits > 16)
        throw Error(ErrorCode::InvalidArgument, "phase noise resolution must be 1..16 bits");
    const double inv = std::ldexp(1.0, -bits);
    return unit == PhaseNoiseUnit::HalfStep ? pi * inv : inv * pi / 180.0;
}

std::vector<double> phase_noise(std::size_t count, int bits, Rng &rng, PhaseNoiseUnit unit)
{
    const double bound = phase_noise_bound(bits, unit);
    std::vector<double> out(count);
    for (auto &x : out)
        x = rng.uniform(-bound, bound);
    return out;
}

} // namespace beamcraft
