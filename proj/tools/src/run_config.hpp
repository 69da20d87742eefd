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
#include "beamcraft/evaluation.hpp"
#include "beamcraft/probe_frontend.hpp"
#include "beamcraft/training.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace beamcraft::cli
{

struct DataSection
{
    std::size_t train_count = 0; // required
    std::size_t val_count = 0;   // required
    // Stream seeds; absent values derive from scenario.seed.
    std::optional<std::uint64_t> train_seed;
    std::optional<std::uint64_t> val_seed;

    std::uint64_t resolved_train_seed(std::uint64_t master) const;
    std::uint64_t resolved_val_seed(std::uint64_t master) const;
};

struct EvalSection
{
    int phase_bits = 3;
    std::uint64_t noise_seed = 11;
};

struct SweepSection
{
    std::vector<std::size_t> users{1, 10, 100};
    std::size_t reprobe = 5;
    std::size_t hierarchical_groups = 16;
    std::optional<std::size_t> binary_rounds;
    std::uint64_t noise_seed = 13;
};

struct RunConfig
{
    ArrayConfig array;
    ScenarioConfig scenario;
    SensingConfig sensing;
    TrainConfig train;
    OverheadModel overhead;
    DataSection data;
    EvalSection eval;
    SweepSection sweep;
    std::string output_dir = "out";

    void validate() const;
};

// Strict parse: unknown keys and missing required keys raise ConfigInvalid.
RunConfig parse_run_config(const nlohmann::json &j);
RunConfig load_run_config(const std::filesystem::path &path);
nlohmann::json to_json(const RunConfig &c);

// Sorted-key JSON with a trailing newline.
std::string canonical_dump(const nlohmann::json &j);

} // namespace beamcraft::cli
