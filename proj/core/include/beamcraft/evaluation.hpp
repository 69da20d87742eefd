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

#include "beamcraft/channel.hpp"
#include "beamcraft/predictor.hpp"
#include "beamcraft/probe_frontend.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace beamcraft
{

// Beam indices (1-based) sorted by descending probability; ties keep the
// smaller index first.
std::vector<std::size_t> rank_beams(std::span<const double> probabilities);

double topk_accuracy(std::span<const std::vector<std::size_t>> ranked, std::span<const std::uint32_t> labels,
                     std::size_t k);

struct OverheadModel
{
    double symbol_duration = 8.92e-6; // T_s, seconds
    double slot_duration = 20e-3;     // T_c, seconds
    double symbols_per_probe = 1.0;
    std::size_t users = 1;

    void validate() const;
};

// max(0, 1 - U * probes * symbols_per_probe * T_s / T_c)
double ear_factor(const OverheadModel &overhead, double probes_used);

// factor * log2(1 + P |<a, h>|^2 / sigma^2)
double effective_rate(const BeamVector &beam, const Channel &h, const SensingConfig &sensing,
                      const OverheadModel &overhead, double probes_used);

// Indices floor((i + 0.5) N / L) + 1, i = 0..L-1.
std::vector<std::size_t> uniform_probe_indices(const ArrayConfig &cfg, std::size_t probes);
Codebook uniform_probe_codebook(const ArrayConfig &cfg, std::size_t probes);

struct SearchResult
{
    std::size_t beam = 0; // 1-based DFT index
    std::size_t probes_used = 0;
};

// Two-level search: the DFT codebook is split into groups of contiguous
// flattened indices. Stage 1 probes one beam per group, steered at the group's
// beamspace centroid; stage 2 probes every member of the strongest group.
struct HierarchicalOptions
{
    std::size_t groups = 16;
};
SearchResult hierarchical_search(const Channel &h, const DftCodebook &codebook, const SensingConfig &sensing, Rng &rng,
                                 const HierarchicalOptions &options = {});

// Coordinate bisection: horizontal DFT index first (vertical pointing held at
// the centroid of the vertical grid), then vertical. Each round probes the
// beamspace midpoints of the two half intervals and keeps the stronger half.
struct BinarySearchOptions
{
    // Overrides the probe count used for overhead accounting as
    // 2 * accounted_rounds; the search itself is unchanged.
    std::optional<std::size_t> accounted_rounds;
};
SearchResult binary_search(const Channel &h, const DftCodebook &codebook, const SensingConfig &sensing, Rng &rng,
                           const BinarySearchOptions &options = {});

SearchResult exhaustive_search(const Channel &h, const DftCodebook &codebook, const SensingConfig &sensing, Rng &rng);

// Maps predictor input (L normalized RSRPs) and the sample's position in the
// evaluated dataset to a probability vector over the N DFT beams.
using BeamScorer = std::function<std::vector<double>(std::span<const double> input, std::size_t sample)>;

BeamScorer mlp_scorer(const MlpModel &model);

struct InferenceOptions
{
    std::size_t reprobe = 5;
    bool quantize_rsrp = true;
};

struct ReprobeResult
{
    std::size_t beam = 0;
    std::size_t probes_used = 0;
    std::vector<std::size_t> ranking;
};

// Online inference: probe with the (quantized) codebook, predict, re-probe
// the top-K DFT beams with fresh noise and keep the strongest.
ReprobeResult infer_with_reprobe(const BeamScorer &scorer, std::size_t sample, const Codebook &probes,
                                 const Channel &h, const DftCodebook &codebook, const SensingConfig &sensing, Rng &rng,
                                 const InferenceOptions &options = {});

// Deployment conditions for top-K evaluation.
struct EvalCondition
{
    bool quantize_rsrp = true;
    std::optional<int> phase_bits;
    bool sensing_noise = true;
    std::uint64_t noise_seed = 0;
};

struct EvalResult
{
    std::string scheme;
    double top1 = 0.0;
    double top3 = 0.0;
    double top5 = 0.0;
    double mean_ear = 0.0;
    double mean_probes = 0.0;
};

// Top-1/3/5 of the scorer's stage-1 ranking. Sample i uses noise stream
// derive_seed(noise_seed, i).
EvalResult evaluate_topk(const BeamScorer &scorer, const ProbeParams &probes, const ArrayConfig &cfg,
                         const Dataset &data, const SensingConfig &sensing, const EvalCondition &condition);
EvalResult evaluate_topk(const BeamScorer &scorer, const Codebook &probes, const Dataset &data,
                         const SensingConfig &sensing, const EvalCondition &condition);

// Per-sample outcome of one alignment scheme, independent of the user count.
struct SchemeOutcome
{
    std::string scheme;
    std::vector<double> beam_power; // |<a_chosen, h>|^2
    std::vector<double> probes_used;
    double top1 = 0.0;
    double top3 = 0.0;
    double top5 = 0.0;
};

enum class ProbeAccounting
{
    ProbesPlusReprobe, // L + K
    ProbesOnly,        // L
};

SchemeOutcome run_prediction_scheme(std::string name, const BeamScorer &scorer, const Codebook &probes,
                                    const Dataset &data, const DftCodebook &codebook, const SensingConfig &sensing,
                                    std::uint64_t noise_seed, const InferenceOptions &options = {},
                                    ProbeAccounting accounting = ProbeAccounting::ProbesPlusReprobe);

using SearchFn = std::function<SearchResult(const Channel &, const DftCodebook &, const SensingConfig &, Rng &)>;
SchemeOutcome run_search_scheme(std::string name, const SearchFn &search, const Dataset &data,
                                const DftCodebook &codebook, const SensingConfig &sensing, std::uint64_t noise_seed);

struct SweepRow
{
    std::string scheme;
    std::size_t users = 0;
    double mean_ear = 0.0;
    double top1 = 0.0;
    double top3 = 0.0;
    double top5 = 0.0;
    double mean_probes = 0.0;
};

// Mean EAR per (scheme, U), rows sorted by scheme name then U.
std::vector<SweepRow> user_sweep(std::span<const SchemeOutcome> schemes, std::span<const std::size_t> users,
                                 const SensingConfig &sensing, const OverheadModel &overhead);

// "scheme,users,mean_ear_bps_hz,top1,top3,top5,mean_probes" plus one line per row.
std::string results_csv(std::span<const SweepRow> rows);

} // namespace beamcraft
