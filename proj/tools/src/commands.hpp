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

#include "run_config.hpp"

#include "beamcraft/errors.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace beamcraft::cli
{

struct CommandOptions
{
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::vector<std::filesystem::path> checkpoints;
    bool force = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> variant;
    std::optional<int> noise_bits;
    unsigned threads = 1;
};

// Loads the config and applies command-line overrides. --seed replaces both
// the scenario and training seeds.
RunConfig resolve_config(const CommandOptions &options);

// File names inside the output directory.
inline constexpr const char *train_file = "train.bmds";
inline constexpr const char *val_file = "val.bmds";
inline constexpr const char *manifest_file = "manifest.json";
inline constexpr const char *checkpoint_file = "checkpoint.bmck";
inline constexpr const char *epochs_file = "epochs.csv";
inline constexpr const char *resolved_file = "resolved_config.json";
inline constexpr const char *eval_file = "eval.csv";
inline constexpr const char *sweep_file = "sweep.csv";

void cmd_gen_data(const RunConfig &cfg, const CommandOptions &options, std::ostream &log);
void cmd_train(const RunConfig &cfg, const CommandOptions &options, std::ostream &log);
void cmd_eval(const RunConfig &cfg, const CommandOptions &options, std::ostream &log);
void cmd_sweep(const RunConfig &cfg, const CommandOptions &options, std::ostream &log);

// 0 success, 2 configuration error, 3 data error, 4 numeric failure.
int exit_code_for(ErrorCode code) noexcept;

// Runs one subcommand by name, reporting errors on log. Returns the exit code.
int run_command(const std::string &name, const CommandOptions &options, std::ostream &log);

// Parses BEAMCRAFT_THREADS; unset or invalid means 1.
unsigned threads_from_env();

} // namespace beamcraft::cli
