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

#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv)
{
    using beamcraft::cli::CommandOptions;

    CLI::App app{"beamcraft: learned probing beams and beam prediction for mmWave arrays"};
    app.require_subcommand(1);

    CommandOptions opts;
    std::string out;
    std::vector<std::string> checkpoints;
    std::uint64_t seed = 0;
    std::string variant;
    int noise_bits = 0;

    std::vector<CLI::Option *> out_opts, seed_opts;
    const auto common = [&](CLI::App *cmd) {
        cmd->add_option("--config", opts.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
        out_opts.push_back(cmd->add_option("--out", out, "Output directory (overrides output_dir)"));
        seed_opts.push_back(cmd->add_option("--seed", seed, "Master seed (overrides scenario and training seeds)"));
        cmd->add_flag("--force", opts.force, "Overwrite existing outputs");
    };

    CLI::App *gen = app.add_subcommand("gen-data", "Generate training and validation datasets");
    common(gen);
    CLI::App *trn = app.add_subcommand("train", "Train probes and predictor");
    common(trn);
    CLI::Option *variant_opt = trn->add_option("--variant", variant, "Probe parameterization")
                                   ->check(CLI::IsMember({"angle", "beam", "full_matrix"}));
    CLI::Option *noise_opt =
        trn->add_option("--noise-bits", noise_bits, "Phase-noise injection resolution B")->check(CLI::Range(1, 16));
    CLI::App *evl = app.add_subcommand("eval", "Top-K accuracy under deployment conditions");
    common(evl);
    evl->add_option("--checkpoint", checkpoints, "Checkpoint to evaluate (repeatable)")->required();
    CLI::App *swp = app.add_subcommand("sweep", "EAR versus user count for all schemes");
    common(swp);
    swp->add_option("--checkpoint", checkpoints, "Learned and uniform-probe checkpoints")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CLI::App *cmd = app.get_subcommands().front();
    for (const auto *o : out_opts)
        if (o->count() > 0)
            opts.out = out;
    for (const auto *o : seed_opts)
        if (o->count() > 0)
            opts.seed = seed;
    if (variant_opt->count() > 0)
        opts.variant = variant;
    if (noise_opt->count() > 0)
        opts.noise_bits = noise_bits;
    for (const auto &c : checkpoints)
        opts.checkpoints.emplace_back(c);
    opts.threads = beamcraft::cli::threads_from_env();

    return beamcraft::cli::run_command(cmd->get_name(), opts, std::cerr);
}
