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

#include "beamcraft/array_geometry.hpp"
#include "beamcraft/channel.hpp"
#include "beamcraft/random.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace beamcraft
{

enum class ProbeVariant : std::uint8_t
{
    AngleDomain = 0,
    BeamDomain = 1,
    FullMatrix = 2,
};

std::string_view to_string(ProbeVariant v) noexcept;
ProbeVariant parse_probe_variant(std::string_view name);

// Learnable description of the L-beam probe codebook, stored as one flat
// parameter vector so the optimizer and the file format treat every variant
// alike:
//   AngleDomain  [phi_0, theta_0, phi_1, theta_1, ...]
//   BeamDomain   [u_0, v_0, u_1, v_1, ...]
//   FullMatrix   [omega_{0,0}, ..., omega_{N-1,0}, omega_{0,1}, ...]  (beam-major)
class ProbeParams
{
public:
    static ProbeParams angle_domain(std::span<const AngleCoords> beams);
    static ProbeParams beam_domain(std::span<const BeamCoords> beams);
    static ProbeParams full_matrix(std::size_t antennas, std::size_t beams, std::vector<double> phases);

    // Rebuilds from a raw vector (deserialization). Validates the boxes.
    static ProbeParams from_values(ProbeVariant variant, std::size_t beams, std::size_t antennas,
                                   std::vector<double> values);

    ProbeVariant variant() const noexcept { return variant_; }
    std::size_t beam_count() const noexcept { return beams_; }
    // Only meaningful for FullMatrix; 0 otherwise.
    std::size_t antenna_count() const noexcept { return antennas_; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    // Projects onto the feasible set after an update: angles into
    // [-pi/2, pi/2] x [0, pi], beamspace coordinates into [-1, 1], phases
    // wrapped into [-pi, pi).
    void project();

    friend bool operator==(const ProbeParams &, const ProbeParams &) = default;

private:
    ProbeParams(ProbeVariant variant, std::size_t beams, std::size_t antennas, std::vector<double> values)
        : variant_(variant), beams_(beams), antennas_(antennas), values_(std::move(values))
    {
    }
    void check() const;

    ProbeVariant variant_ = ProbeVariant::BeamDomain;
    std::size_t beams_ = 0;
    std::size_t antennas_ = 0;
    std::vector<double> values_;
};

// Element phases, beam-major (index l * N + n). Every beam is
// exp(j * phase) / sqrt(N).
std::vector<double> element_phases(const ProbeParams &p, const ArrayConfig &cfg);

// Builds the L probe beams. A non-empty perturbation (length N * L,
// beam-major) is added to the element phases.
Codebook build_codebook(const ProbeParams &p, const ArrayConfig &cfg, std::span<const double> perturbation = {});

struct SensingConfig
{
    double tx_power_dbm = 30.0;
    double noise_power_dbm = noise_power_dbm_for(-174.0, 100e6);
    bool noise_enabled = true;

    static double noise_power_dbm_for(double psd_dbm_per_hz, double bandwidth_hz)
    {
        return psd_dbm_per_hz + 10.0 * std::log10(bandwidth_hz);
    }
    double tx_power_mw() const noexcept { return std::pow(10.0, tx_power_dbm / 10.0); }
    double noise_power_mw() const noexcept { return std::pow(10.0, noise_power_dbm / 10.0); }
};

inline constexpr double rsrp_floor_dbm = -140.0;
inline constexpr double rsrp_cap_dbm = -40.0;
inline constexpr double power_floor_mw = 1e-30;

struct SensingOutput
{
    CVec z;                     // sqrt(P) <w_l, h> + n_l
    std::vector<double> power;  // |z_l|^2 in mW
    std::vector<double> rsrp_dbm;
};

// Receiver noise for L probes, CN(0, noise power).
CVec draw_sensing_noise(std::size_t probes, const SensingConfig &cfg, Rng &rng);

SensingOutput sense_with_noise(const Codebook &w, const Channel &h, const SensingConfig &cfg,
                               std::span<const cplx> noise);
// Draws noise from rng when cfg.noise_enabled; otherwise noise-free and rng is untouched.
SensingOutput sense(const Codebook &w, const Channel &h, const SensingConfig &cfg, Rng &rng);
SensingOutput sense_noise_free(const Codebook &w, const Channel &h, const SensingConfig &cfg);

// g(x) = clamp(10 log10(max(x, 1e-30)), -140, -40).
double rsrp_from_power(double power_mw) noexcept;

// Nearest integer dBm, ties to even.
std::vector<int> quantize_rsrp(std::span<const double> rsrp_dbm);

// Predictor input scaling (rsrp + 90) / 50, mapping [-140, -40] onto [-1, 1].
inline double normalize_rsrp(double rsrp_dbm) noexcept { return (rsrp_dbm + 90.0) / 50.0; }
std::vector<double> predictor_input(const SensingOutput &s, bool quantized);

// Chains dJ/d(normalized input) back to dJ/d(power). Zero wherever the
// RSRP clamp is active.
std::vector<double> power_gradient(std::span<const double> grad_wrt_input, std::span<const double> power);

// Gradient of the noise-free inner product y_l = <w_l, h> with respect to
// a pair of per-beam parameters. Real and imaginary parts of each entry are
// (d y^r / d param, d y^i / d param).
struct ParamPairGradient
{
    cplx first;  // d/d phi  or d/d u
    cplx second; // d/d theta or d/d v
};

std::vector<ParamPairGradient> grad_z_wrt_angles(const ProbeParams &p, const Channel &h, const ArrayConfig &cfg,
                                                 std::span<const double> perturbation = {});
std::vector<ParamPairGradient> grad_z_wrt_beamspace(const ProbeParams &p, const Channel &h, const ArrayConfig &cfg,
                                                    std::span<const double> perturbation = {});
// d y_l / d omega_{n,l}, beam-major.
CVec grad_z_wrt_phases(const ProbeParams &p, const Channel &h, const ArrayConfig &cfg,
                       std::span<const double> perturbation = {});

// dJ/d(params) from dJ/d|z_l|^2, using d|z|^2/dz = [2 z^r, 2 z^i] and the
// sqrt(P) scale of the sensing model. Throws DegeneratePower when a
// non-zero upstream gradient meets a power below 1e-30 mW.
std::vector<double> backprop_probe(std::span<const double> grad_wrt_power, const SensingOutput &sensing,
                                   const ProbeParams &p, const Channel &h, const ArrayConfig &cfg,
                                   const SensingConfig &sensing_cfg, std::span<const double> perturbation = {});

// Snaps a phase to the grid {-pi + 2 pi k / 2^B}.
double quantize_phase(double phase, int bits);
Codebook quantize_phases(const Codebook &w, int bits);
Codebook quantize_phases(const ProbeParams &p, const ArrayConfig &cfg, int bits);

enum class PhaseNoiseUnit : std::uint8_t
{
    HalfStep,       // uniform in [-pi / 2^B, pi / 2^B] radians
    LiteralDegrees, // uniform in [-1 / 2^B, 1 / 2^B] degrees
};

std::string_view to_string(PhaseNoiseUnit u) noexcept;
PhaseNoiseUnit parse_phase_noise_unit(std::string_view name);

double phase_noise_bound(int bits, PhaseNoiseUnit unit);
std::vector<double> phase_noise(std::size_t count, int bits, Rng &rng, PhaseNoiseUnit unit = PhaseNoiseUnit::HalfStep);

} // namespace beamcraft
