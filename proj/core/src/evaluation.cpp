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

#include "beamcraft/evaluation.hpp"
#include "beamcraft/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace beamcraft
{

namespace
{

bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

// Index of the strongest measurement; ties go to the first entry.
std::size_t strongest(std::span<const double> power)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < power.size(); ++i)
        if (power[i] > power[best])
            best = i;
    return best;
}

// Probes an arbitrary set of beams with the configured noise.
std::vector<double> measure(const Codebook &beams, const Channel &h, const SensingConfig &sensing, Rng &rng)
{
    return sense(beams, h, sensing, rng).power;
}

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

} // namespace

std::vector<std::size_t> rank_beams(std::span<const double> probabilities)
{
    std::vector<std::size_t> order(probabilities.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probabilities[a] > probabilities[b]; });
    for (auto &i : order)
        ++i;
    return order;
}

double topk_accuracy(std::span<const std::vector<std::size_t>> ranked, std::span<const std::uint32_t> labels,
                     std::size_t k)
{
    if (k < 1)
        throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
    if (ranked.size() != labels.size())
        throw Error(ErrorCode::ShapeMismatch, "ranking and label counts differ");
    if (labels.empty())
        throw Error(ErrorCode::EmptyDataset, "no samples to score");
    std::size_t hits = 0;
    for (std::size_t s = 0; s < labels.size(); ++s)
    {
        const auto &r = ranked[s];
        const auto end = r.begin() + static_cast<std::ptrdiff_t>(std::min(k, r.size()));
        if (std::find(r.begin(), end, labels[s]) != end)
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

void OverheadModel::validate() const
{
    if (!(symbol_duration > 0.0) || !(slot_duration > 0.0) || !(symbols_per_probe > 0.0))
        throw Error(ErrorCode::InvalidArgument, "overhead durations must be positive");
}

double ear_factor(const OverheadModel &overhead, double probes_used)
{
    overhead.validate();
    const double used = static_cast<double>(overhead.users) * probes_used * overhead.symbols_per_probe *
                        overhead.symbol_duration / overhead.slot_duration;
    return std::max(0.0, 1.0 - used);
}

double effective_rate(const BeamVector &beam, const Channel &h, const SensingConfig &sensing,
                      const OverheadModel &overhead, double probes_used)
{
    const double gain = std::norm(inner(beam, h.h()));
    const double snr = sensing.tx_power_mw() * gain / sensing.noise_power_mw();
    return ear_factor(overhead, probes_used) * std::log2(1.0 + snr);
}

std::vector<std::size_t> uniform_probe_indices(const ArrayConfig &cfg, std::size_t probes)
{
    const std::size_t n_total = cfg.size();
    if (probes < 1 || probes > n_total)
        throw Error(ErrorCode::InvalidArgument, "uniform probe count must be in 1..N");
    std::vector<std::size_t> idx(probes);
    for (std::size_t i = 0; i < probes; ++i)
        idx[i] = static_cast<std::size_t>(std::floor((static_cast<double>(i) + 0.5) * static_cast<double>(n_total) /
                                                     static_cast<double>(probes))) +
                 1;
    return idx;
}

Codebook uniform_probe_codebook(const ArrayConfig &cfg, std::size_t probes)
{
    const DftCodebook dft(cfg);
    Codebook out;
    for (const auto i : uniform_probe_indices(cfg, probes))
        out.push_back(dft.beam(i));
    return out;
}

SearchResult hierarchical_search(const Channel &h, const DftCodebook &codebook, const SensingConfig &sensing, Rng &rng,
                                 const HierarchicalOptions &options)
{
    const std::size_t n_total = codebook.size();
    if (options.groups == 0 || n_total % options.groups != 0)
        throw Error(ErrorCode::IndivisibleCodebook, std::to_string(n_total) + " beams cannot be split into " +
                                                        std::to_string(options.groups) + " groups");
    const std::size_t group_size = n_total / options.groups;
    const auto &cfg = codebook.config();

    Codebook wide;
    wide.reserve(options.groups);
    for (std::size_t g = 0; g < options.groups; ++g)
    {
        double u = 0.0, v = 0.0;
        for (std::size_t i = g * group_size + 1; i <= (g + 1) * group_size; ++i)
        {
            u += codebook.grid_u(i);
            v += codebook.grid_v(i);
        }
        wide.push_back(upa_response_unchecked(u / static_cast<double>(group_size),
                                              v / static_cast<double>(group_size), cfg));
    }
    const std::size_t best_group = strongest(measure(wide, h, sensing, rng));

    Codebook narrow;
    narrow.reserve(group_size);
    for (std::size_t i = best_group * group_size + 1; i <= (best_group + 1) * group_size; ++i)
        narrow.push_back(codebook.beam(i));
    const std::size_t best = strongest(measure(narrow, h, sensing, rng));
    return {best_group * group_size + best + 1, options.groups + group_size};
}

SearchResult binary_search(const Channel &h, const DftCodebook &codebook, const SensingConfig &sensing, Rng &rng,
                           const BinarySearchOptions &options)
{
    const auto &cfg = codebook.config();
    if (!is_power_of_two(cfg.n_phi) || !is_power_of_two(cfg.n_theta))
        throw Error(ErrorCode::IndivisibleCodebook, "binary search needs power-of-two array dimensions");

    const double n_phi = static_cast<double>(cfg.n_phi);
    const double n_theta = static_cast<double>(cfg.n_theta);
    auto grid_u = [&](double k) { return -1.0 + 2.0 * k / n_phi; };
    auto grid_v = [&](double m) { return -1.0 + 2.0 * m / n_theta; };

    std::size_t probes = 0;
    // Bisects [0, size) on one axis; beam(c) builds the probe steered at
    // fractional grid position c.
    auto bisect = [&](std::size_t size, auto &&beam) {
        std::size_t lo = 0;
        while (size > 1)
        {
            const std::size_t half = size / 2;
            const double left = static_cast<double>(lo) + (static_cast<double>(half) - 1.0) / 2.0;
            const double right = left + static_cast<double>(half);
            const Codebook pair = {beam(left), beam(right)};
            const auto p = measure(pair, h, sensing, rng);
            probes += 2;
            if (p[1] > p[0])
                lo += half;
            size = half;
        }
        return lo;
    };

    const double v_center = grid_v((n_theta - 1.0) / 2.0);
    const std::size_t k =
        bisect(cfg.n_phi, [&](double c) { return upa_response_unchecked(grid_u(c), v_center, cfg); });
    const double u_k = grid_u(static_cast<double>(k));
    const std::size_t m = bisect(cfg.n_theta, [&](double c) { return upa_response_unchecked(u_k, grid_v(c), cfg); });

    SearchResult r{DftCodebook::index_of(k, m, cfg), probes};
    if (options.accounted_rounds)
        r.probes_used = 2 * *options.accounted_rounds;
    return r;
}

SearchResult exhaustive_search(const Channel &h, const DftCodebook &codebook, const SensingConfig &sensing, Rng &rng)
{
    const auto p = measure(codebook.beams(), h, sensing, rng);
    return {strongest(p) + 1, codebook.size()};
}

BeamScorer mlp_scorer(const MlpModel &model)
{
    return [&model](std::span<const double> input, std::size_t) { return forward(model, input).probabilities; };
}

ReprobeResult infer_with_reprobe(const BeamScorer &scorer, std::size_t sample, const Codebook &probes,
                                 const Channel &h, const DftCodebook &codebook, const SensingConfig &sensing, Rng &rng,
                                 const InferenceOptions &options)
{
    if (options.reprobe < 1)
        throw Error(ErrorCode::InvalidArgument, "re-probe count must be >= 1");
    const SensingOutput s = sense(probes, h, sensing, rng);
    const auto input = predictor_input(s, options.quantize_rsrp);
    const auto probs = scorer(input, sample);
    if (probs.size() != codebook.size())
        throw Error(ErrorCode::ShapeMismatch, "scorer output does not cover the DFT codebook");

    ReprobeResult r;
    r.ranking = rank_beams(probs);
    const std::size_t k = std::min(options.reprobe, r.ranking.size());
    std::vector<std::size_t> candidates(r.ranking.begin(), r.ranking.begin() + static_cast<std::ptrdiff_t>(k));
    Codebook beams;
    beams.reserve(k);
    for (const auto i : candidates)
        beams.push_back(codebook.beam(i));
    const auto p = measure(beams, h, sensing, rng);

    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c)
        if (p[c] > p[best] || (p[c] == p[best] && candidates[c] < candidates[best]))
            best = c;
    r.beam = candidates[best];
    r.probes_used = probes.size() + k;
    return r;
}

EvalResult evaluate_topk(const BeamScorer &scorer, const Codebook &probes, const Dataset &data,
                         const SensingConfig &sensing, const EvalCondition &condition)
{
    if (data.samples.empty())
        throw Error(ErrorCode::EmptyDataset, "evaluation dataset is empty");
    SensingConfig cfg = sensing;
    cfg.noise_enabled = condition.sensing_noise;

    std::vector<std::vector<std::size_t>> ranked(data.size());
    std::vector<std::uint32_t> labels(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        Rng rng(derive_seed(condition.noise_seed, i));
        const SensingOutput s = sense(probes, data.samples[i].channel, cfg, rng);
        const auto probs = scorer(predictor_input(s, condition.quantize_rsrp), i);
        ranked[i] = rank_beams(probs);
        labels[i] = data.samples[i].label;
    }
    EvalResult r;
    r.top1 = topk_accuracy(ranked, labels, 1);
    r.top3 = topk_accuracy(ranked, labels, 3);
    r.top5 = topk_accuracy(ranked, labels, 5);
    r.mean_probes = static_cast<double>(probes.size());
    return r;
}

EvalResult evaluate_topk(const BeamScorer &scorer, const ProbeParams &probes, const ArrayConfig &cfg,
                         const Dataset &data, const SensingConfig &sensing, const EvalCondition &condition)
{
    const Codebook w = condition.phase_bits ? quantize_phases(probes, cfg, *condition.phase_bits)
                                            : build_codebook(probes, cfg);
    return evaluate_topk(scorer, w, data, sensing, condition);
}

SchemeOutcome run_prediction_scheme(std::string name, const BeamScorer &scorer, const Codebook &probes,
                                    const Dataset &data, const DftCodebook &codebook, const SensingConfig &sensing,
                                    std::uint64_t noise_seed, const InferenceOptions &options,
                                    ProbeAccounting accounting)
{
    SchemeOutcome out;
    out.scheme = std::move(name);
    std::vector<std::vector<std::size_t>> ranked;
    std::vector<std::uint32_t> labels;
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        const auto &sample = data.samples[i];
        Rng rng(derive_seed(noise_seed, i));
        const auto r = infer_with_reprobe(scorer, i, probes, sample.channel, codebook, sensing, rng, options);
        out.beam_power.push_back(std::norm(inner(codebook.beam(r.beam), sample.channel.h())));
        out.probes_used.push_back(static_cast<double>(
            accounting == ProbeAccounting::ProbesPlusReprobe ? r.probes_used : probes.size()));
        ranked.push_back(r.ranking);
        labels.push_back(sample.label);
    }
    out.top1 = topk_accuracy(ranked, labels, 1);
    out.top3 = topk_accuracy(ranked, labels, 3);
    out.top5 = topk_accuracy(ranked, labels, 5);
    return out;
}

SchemeOutcome run_search_scheme(std::string name, const SearchFn &search, const Dataset &data,
                                const DftCodebook &codebook, const SensingConfig &sensing, std::uint64_t noise_seed)
{
    if (data.samples.empty())
        throw Error(ErrorCode::EmptyDataset, "evaluation dataset is empty");
    SchemeOutcome out;
    out.scheme = std::move(name);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        const auto &sample = data.samples[i];
        Rng rng(derive_seed(noise_seed, i));
        const SearchResult r = search(sample.channel, codebook, sensing, rng);
        out.beam_power.push_back(std::norm(inner(codebook.beam(r.beam), sample.channel.h())));
        out.probes_used.push_back(static_cast<double>(r.probes_used));
        hits += r.beam == sample.label ? 1 : 0;
    }
    // A search returns a single beam, so every K scores the same hit rate.
    out.top1 = out.top3 = out.top5 = static_cast<double>(hits) / static_cast<double>(data.size());
    return out;
}

std::vector<SweepRow> user_sweep(std::span<const SchemeOutcome> schemes, std::span<const std::size_t> users,
                                 const SensingConfig &sensing, const OverheadModel &overhead)
{
    std::vector<SweepRow> rows;
    const double snr_scale = sensing.tx_power_mw() / sensing.noise_power_mw();
    for (const auto &s : schemes)
    {
        if (s.beam_power.empty() || s.beam_power.size() != s.probes_used.size())
            throw Error(ErrorCode::ShapeMismatch, "scheme '" + s.scheme + "' has no or inconsistent samples");
        const double mean_probes = std::accumulate(s.probes_used.begin(), s.probes_used.end(), 0.0) /
                                   static_cast<double>(s.probes_used.size());
        for (const std::size_t u : users)
        {
            OverheadModel o = overhead;
            o.users = u;
            double total = 0.0;
            for (std::size_t i = 0; i < s.beam_power.size(); ++i)
                total += ear_factor(o, s.probes_used[i]) * std::log2(1.0 + snr_scale * s.beam_power[i]);
            rows.push_back({s.scheme, u, total / static_cast<double>(s.beam_power.size()), s.top1, s.top3, s.top5,
                            mean_probes});
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow &a, const SweepRow &b) {
        return a.scheme != b.scheme ? a.scheme < b.scheme : a.users < b.users;
    });
    return rows;
}

std::string results_csv(std::span<const SweepRow> rows)
{
    std::ostringstream os;
    os << "scheme,users,mean_ear_bps_hz,top1,top3,top5,mean_probes\n";
    for (const auto &r : rows)
        os << r.scheme << ',' << r.users << ',' << format_double(r.mean_ear) << ',' << format_double(r.top1) << ','
           << format_double(r.top3) << ',' << format_double(r.top5) << ',' << format_double(r.mean_probes) << '\n';
    return os.str();
}

} // namespace beamcraft
