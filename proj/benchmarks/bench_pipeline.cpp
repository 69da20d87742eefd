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
#include "beamcraft/training.hpp"

#include <benchmark/benchmark.h>

#include <numeric>

using namespace beamcraft;

namespace
{

const ArrayConfig array_cfg{};

const Dataset &bench_data()
{
    static const Dataset d = [] {
        ScenarioConfig s;
        s.seed = 3;
        return generate_dataset(s, array_cfg, 256);
    }();
    return d;
}

void BM_UpaResponse(benchmark::State &state)
{
    const BeamCoords c(0.3, -0.2);
    for (auto _ : state)
        benchmark::DoNotOptimize(upa_response(c, array_cfg));
}
BENCHMARK(BM_UpaResponse);

void BM_OptimalBeam(benchmark::State &state)
{
    const DftCodebook cb(array_cfg);
    const Channel &h = bench_data().samples[0].channel;
    for (auto _ : state)
        benchmark::DoNotOptimize(optimal_beam(h, cb));
}
BENCHMARK(BM_OptimalBeam);

void BM_PredictorForwardBackward(benchmark::State &state)
{
    const auto batch = static_cast<Eigen::Index>(state.range(0));
    const MlpModel m = MlpModel::glorot(std::vector<std::size_t>{8, 200, 200, 200, 128}, 1);
    Rng rng(2);
    Eigen::MatrixXd x(8, batch);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x(i) = rng.uniform(-1.0, 1.0);
    std::vector<std::size_t> targets(static_cast<std::size_t>(batch));
    for (auto &t : targets)
        t = rng.uniform_index(128);
    for (auto _ : state)
    {
        const auto cache = forward_batch(m, x);
        benchmark::DoNotOptimize(backward_batch(m, cache, targets));
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_PredictorForwardBackward)->Arg(64)->Arg(256);

void BM_BatchGradients(benchmark::State &state)
{
    const auto variant = static_cast<ProbeVariant>(state.range(0));
    const ProbeParams p = initial_probe_params(variant, array_cfg, 8);
    const MlpModel m = MlpModel::glorot(std::vector<std::size_t>{8, 200, 200, 200, 128}, 1);
    std::vector<std::size_t> idx(64);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const SensingConfig s{};
    BatchNoise noise;
    Rng rng(4);
    for (std::size_t i = 0; i < idx.size(); ++i)
        noise.sensing.push_back(draw_sensing_noise(8, s, rng));
    for (auto _ : state)
        benchmark::DoNotOptimize(batch_gradients(p, m, array_cfg, s, bench_data(), idx, noise));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(idx.size()));
}
BENCHMARK(BM_BatchGradients)->Arg(0)->Arg(1)->Arg(2);

void BM_HierarchicalSearch(benchmark::State &state)
{
    const DftCodebook cb(array_cfg);
    const Channel &h = bench_data().samples[1].channel;
    const SensingConfig s{};
    Rng rng(5);
    for (auto _ : state)
        benchmark::DoNotOptimize(hierarchical_search(h, cb, s, rng));
}
BENCHMARK(BM_HierarchicalSearch);

} // namespace

BENCHMARK_MAIN();
