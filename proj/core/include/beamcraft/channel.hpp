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
#include "beamcraft/random.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace beamcraft
{

struct PathComponent
{
    cplx alpha;
    BeamCoords coords;
};

// Narrowband MISO channel h in C^N.
class Channel
{
public:
    Channel() = default;
    explicit Channel(CVec h);

    std::size_t size() const noexcept { return h_.size(); }
    const CVec &h() const noexcept { return h_; }

private:
    CVec h_;
};

// Cluster-in-beamspace scenario. Every sample draws n_clusters centers
// uniformly over the realizable disk u^2 + v^2 <= 1; path 0 sits on the
// first center at los_gain_db, the remaining paths scatter around the
// centers (path m belongs to cluster m mod n_clusters) with Gaussian
// beamspace offsets of standard deviation cluster_spread, at nlos_gain_db.
struct ScenarioConfig
{
    std::size_t n_paths = 5;
    std::size_t n_clusters = 2;
    double cluster_spread = 0.05;
    double los_gain_db = -100.0;
    double nlos_gain_db = -110.0;
    std::uint64_t seed = 1;

    void validate() const;
};

Channel synthesize(std::span<const PathComponent> paths, const ArrayConfig &cfg);

std::vector<PathComponent> sample_paths(const ScenarioConfig &scenario, Rng &rng);
Channel sample_channel(const ScenarioConfig &scenario, const ArrayConfig &cfg, Rng &rng);

struct BeamChoice
{
    std::size_t index; // 1-based
    double power;      // |<a_index, h>|^2, linear
};

// Exhaustive search over the DFT codebook; ties go to the smallest index.
BeamChoice optimal_beam(const Channel &h, const DftCodebook &codebook);

struct LabeledSample
{
    Channel channel;
    std::uint32_t label = 0; // 1-based optimal DFT beam
    double best_rsrp_dbm = 0.0;
};

struct Dataset
{
    std::uint32_t n = 0;
    std::uint64_t seed = 0;
    std::vector<LabeledSample> samples;

    std::size_t size() const noexcept { return samples.size(); }
};

struct GenerateOptions
{
    double tx_power_dbm = 30.0;
    // 0 means "use hardware concurrency"; output is independent of this value.
    unsigned threads = 1;
};

// Sample i is drawn from its own stream derive_seed(scenario.seed, i), so the
// dataset bytes do not depend on the thread count. Labels are noise-free.
Dataset generate_dataset(const ScenarioConfig &scenario, const ArrayConfig &cfg, std::size_t count,
                         const GenerateOptions &options = {});

// Dataset file (little-endian): "BMDS", u8 version = 1, u32 N, u32 count,
// u64 seed, then per sample u32 label, f64 best_rsrp_dbm, N x (f64 re, f64 im);
// trailing u64 FNV-1a over all preceding bytes.
std::vector<std::uint8_t> encode_dataset(const Dataset &d);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

void save_dataset(const Dataset &d, const std::filesystem::path &path);
Dataset load_dataset(const std::filesystem::path &path);

} // namespace beamcraft
