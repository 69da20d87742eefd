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
#include "beamcraft/evaluation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace beamcraft;

namespace
{

const ArrayConfig cfg{};

const DftCodebook &dft()
{
    static const DftCodebook cb(cfg);
    return cb;
}

SensingConfig noise_free()
{
    SensingConfig s;
    s.noise_enabled = false;
    return s;
}

Dataset planted(std::size_t count, std::uint64_t seed)
{
    Dataset d{static_cast<std::uint32_t>(cfg.size()), seed, {}};
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i)
    {
        const std::size_t k = rng.uniform_index(cfg.size()) + 1;
        const double gain = 1e-5; // -100 dB path
        CVec h = dft().beam(k).elements();
        for (auto &x : h)
            x *= std::sqrt(cfg.size() * gain);
        d.samples.push_back({Channel(h), static_cast<std::uint32_t>(k), 0.0});
    }
    return d;
}

Dataset scenario_data(std::size_t count, std::uint64_t seed)
{
    ScenarioConfig s;
    s.seed = seed;
    return generate_dataset(s, cfg, count);
}

// Scores the true label highest; the sample index identifies the channel.
BeamScorer oracle(const Dataset &d)
{
    return [&d](std::span<const double>, std::size_t i) {
        std::vector<double> p(cfg.size(), 0.0);
        p[d.samples[i].label - 1] = 1.0;
        return p;
    };
}

} // namespace

TEST(RankAndTopk, Examples)
{
    const std::vector<double> p{0.1, 0.4, 0.1, 0.4};
    EXPECT_EQ(rank_beams(p), (std::vector<std::size_t>{2, 4, 1, 3}));

    // Labels land at ranks 1, 4 and 2.
    const std::vector<std::vector<std::size_t>> ranked{{5, 1, 2, 3}, {1, 2, 3, 5}, {2, 5, 1, 3}};
    const std::vector<std::uint32_t> labels{5, 5, 5};
    EXPECT_NEAR(topk_accuracy(ranked, labels, 3), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(topk_accuracy(ranked, labels, 1), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(topk_accuracy(ranked, labels, 4), 1.0);
}

TEST(Overhead, EarFactor)
{
    OverheadModel o;
    EXPECT_NEAR(ear_factor(o, 8), 0.996432, 1e-12);
    o.users = 160;
    EXPECT_GT(ear_factor(o, 14), 0.0);
    o.users = 161;
    EXPECT_EQ(ear_factor(o, 14), 0.0);
    o.users = 0;
    EXPECT_EQ(ear_factor(o, 14), 1.0);
    o.users = 1;
    o.slot_duration = 0.0;
    EXPECT_THROW(o.validate(), Error);
    // Fewer probes always leave a larger factor.
    const OverheadModel d;
    for (std::size_t u = 1; u < 100; ++u)
    {
        OverheadModel m = d;
        m.users = u;
        EXPECT_GT(ear_factor(m, 13), ear_factor(m, 24));
    }
}

TEST(Overhead, EffectiveRate)
{
    const SensingConfig s{};
    CVec h = dft().beam(40).elements();
    for (auto &x : h)
        x *= 1e-5;
    const OverheadModel o;
    const double snr = s.tx_power_mw() * 1e-10 / s.noise_power_mw();
    EXPECT_NEAR(effective_rate(dft().beam(40), Channel(h), s, o, 8), ear_factor(o, 8) * std::log2(1.0 + snr), 1e-9);
}

TEST(UniformProbes, Indices)
{
    EXPECT_EQ(uniform_probe_indices(cfg, 8), (std::vector<std::size_t>{9, 25, 41, 57, 73, 89, 105, 121}));
    const auto w = uniform_probe_codebook(cfg, 8);
    ASSERT_EQ(w.size(), 8u);
    EXPECT_EQ(w[2].elements(), dft().beam(41).elements());
}

TEST(Exhaustive, AgreesWithOracleLabel)
{
    const Dataset d = scenario_data(40, 3);
    Rng rng(1);
    for (const auto &s : d.samples)
    {
        const auto r = exhaustive_search(s.channel, dft(), noise_free(), rng);
        EXPECT_EQ(r.beam, s.label);
        EXPECT_EQ(r.probes_used, 128u);
    }
}

TEST(Hierarchical, FindsPlantedBeams)
{
    const Dataset d = planted(1000, 4);
    Rng rng(2);
    std::size_t hits = 0, noisy_hits = 0;
    for (const auto &s : d.samples)
    {
        const auto r = hierarchical_search(s.channel, dft(), noise_free(), rng);
        EXPECT_EQ(r.probes_used, 24u);
        hits += r.beam == s.label;
        noisy_hits += hierarchical_search(s.channel, dft(), SensingConfig{}, rng).beam == s.label;
    }
    EXPECT_GE(double(hits) / 1000.0, 0.95);
    EXPECT_GE(double(noisy_hits) / 1000.0, 0.95);

    Rng quiet(3);
    EXPECT_EQ(hierarchical_search(Channel(dft().beam(1).elements()), dft(), noise_free(), quiet).beam, 1u);
}

TEST(Hierarchical, RejectsIndivisibleGroupCount)
{
    Rng rng(1);
    try
    {
        hierarchical_search(Channel(dft().beam(1).elements()), dft(), noise_free(), rng, HierarchicalOptions{12});
        FAIL();
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), ErrorCode::IndivisibleCodebook);
    }
}

TEST(Binary, FindsPlantedBeamsWithFourteenProbes)
{
    Rng rng(5);
    for (std::size_t k = 1; k <= cfg.size(); ++k)
    {
        const auto r = binary_search(Channel(dft().beam(k).elements()), dft(), noise_free(), rng);
        EXPECT_EQ(r.beam, k);
        EXPECT_EQ(r.probes_used, 14u);
    }
    const auto r = binary_search(Channel(dft().beam(3).elements()), dft(), noise_free(), rng, BinarySearchOptions{5});
    EXPECT_EQ(r.probes_used, 10u);
}

TEST(Reprobe, NeverWorseThanTopPredictionNoiseFree)
{
    const Dataset d = scenario_data(60, 6);
    Rng init(9);
    const MlpModel m = MlpModel::beam_predictor(8, 128, 4);
    MlpModel live = m;
    for (Eigen::Index i = 0; i < live.layers().back().weight.size(); ++i)
        live.layers().back().weight(i) = init.uniform(-0.2, 0.2);
    const BeamScorer sc = mlp_scorer(live);
    const Codebook probes = uniform_probe_codebook(cfg, 8);
    Rng rng(7);
    for (const auto &s : d.samples)
    {
        const auto r = infer_with_reprobe(sc, 0, probes, s.channel, dft(), noise_free(), rng);
        EXPECT_EQ(r.probes_used, 13u);
        EXPECT_GE(std::norm(inner(dft().beam(r.beam), s.channel.h())),
                  std::norm(inner(dft().beam(r.ranking[0]), s.channel.h())));
        EXPECT_NE(std::find(r.ranking.begin(), r.ranking.begin() + 5, r.beam), r.ranking.begin() + 5);
    }
}

TEST(Binary, HeavyNoiseStillReturnsValidIndex)
{
    SensingConfig loud;
    loud.tx_power_dbm = -60.0;
    Rng rng(8);
    for (const auto &s : scenario_data(50, 12).samples)
    {
        const auto r = binary_search(s.channel, dft(), loud, rng);
        EXPECT_GE(r.beam, 1u);
        EXPECT_LE(r.beam, cfg.size());
    }
}

TEST(Reprobe, PlantedOptimumInsideTopFiveIsChosen)
{
    const Dataset d = scenario_data(30, 14);
    const Codebook probes = uniform_probe_codebook(cfg, 8);
    Rng rng(4);
    for (std::size_t i = 0; i < d.size(); ++i)
    {
        // The true beam sits at rank 4 behind three decoys.
        const auto &s = d.samples[i];
        const BeamScorer sc = [&](std::span<const double>, std::size_t) {
            std::vector<double> p(cfg.size(), 0.0);
            for (std::size_t k = 0; k < 3; ++k)
                p[(s.label + 10 * (k + 1)) % cfg.size()] = 0.3 - 0.01 * double(k);
            p[s.label - 1] = 0.1;
            return p;
        };
        const auto r = infer_with_reprobe(sc, i, probes, s.channel, dft(), noise_free(), rng);
        EXPECT_EQ(r.beam, s.label);
    }
    // Re-probing every beam is exhaustive search.
    const InferenceOptions all{cfg.size(), true};
    const BeamScorer flat = [](std::span<const double>, std::size_t) { return std::vector<double>(128, 1.0 / 128); };
    for (const auto &s : d.samples)
        EXPECT_EQ(infer_with_reprobe(flat, 0, probes, s.channel, dft(), noise_free(), rng, all).beam, s.label);
}

TEST(PredictionScheme, OracleScorerIsPerfect)
{
    const Dataset d = scenario_data(50, 8);
    const Codebook probes = uniform_probe_codebook(cfg, 8);
    const auto out = run_prediction_scheme("oracle", oracle(d), probes, d, dft(), SensingConfig{}, 3);
    EXPECT_EQ(out.top1, 1.0);
    for (const double p : out.probes_used)
        EXPECT_EQ(p, 13.0);
    const auto lean = run_prediction_scheme("oracle", oracle(d), probes, d, dft(), SensingConfig{}, 3, {},
                                            ProbeAccounting::ProbesOnly);
    for (const double p : lean.probes_used)
        EXPECT_EQ(p, 8.0);

    const auto e = evaluate_topk(oracle(d), probes, d, SensingConfig{}, EvalCondition{});
    EXPECT_EQ(e.top1, 1.0);
    EXPECT_EQ(e.top5, 1.0);
}

TEST(Sweep, MonotoneInUsersAndSorted)
{
    const Dataset d = scenario_data(40, 10);
    const Codebook probes = uniform_probe_codebook(cfg, 8);
    std::vector<SchemeOutcome> schemes;
    schemes.push_back(run_prediction_scheme("prediction", oracle(d), probes, d, dft(), SensingConfig{}, 1));
    schemes.push_back(run_search_scheme(
        "binary",
        [](const Channel &h, const DftCodebook &c, const SensingConfig &s, Rng &r) { return binary_search(h, c, s, r); },
        d, dft(), SensingConfig{}, 2));
    schemes.push_back(run_search_scheme(
        "exhaustive",
        [](const Channel &h, const DftCodebook &c, const SensingConfig &s, Rng &r) {
            return exhaustive_search(h, c, s, r);
        },
        d, dft(), SensingConfig{}, 2));
    const std::vector<std::size_t> users{1, 10, 100, 200};
    const auto rows = user_sweep(schemes, users, SensingConfig{}, OverheadModel{});
    ASSERT_EQ(rows.size(), 12u);
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        EXPECT_TRUE(rows[i - 1].scheme < rows[i].scheme ||
                    (rows[i - 1].scheme == rows[i].scheme && rows[i - 1].users < rows[i].users));
        if (rows[i - 1].scheme == rows[i].scheme)
        {
            EXPECT_GE(rows[i - 1].mean_ear, rows[i].mean_ear);
        }
    }
    for (const auto &r : rows)
    {
        if (r.scheme == "binary" && r.users == 200)
        {
            EXPECT_EQ(r.mean_ear, 0.0);
        }
        if (r.scheme == "exhaustive" && r.users >= 100)
        {
            EXPECT_EQ(r.mean_ear, 0.0);
        }
        if (r.scheme == "prediction" && r.users == 100)
        {
            EXPECT_GT(r.mean_ear, 0.0);
        }
    }
    const std::string csv = results_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "scheme,users,mean_ear_bps_hz,top1,top3,top5,mean_probes");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
}
