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

#include "beamcraft/binary_io.hpp"
#include "beamcraft/errors.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

namespace beamcraft::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

fs::path output_dir(const RunConfig &cfg) { return fs::path(cfg.output_dir); }

// Refuses to replace existing artifacts unless --force was given.
void guard_outputs(const fs::path &dir, std::initializer_list<const char *> names, bool force)
{
    if (force)
        return;
    for (const char *name : names)
        if (fs::exists(dir / name))
            throw Error(ErrorCode::IoFailure, (dir / name).string() + " already exists (use --force to overwrite)");
}

void ensure_dir(const fs::path &dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path &path, const std::string &text)
{
    const auto *p = reinterpret_cast<const std::uint8_t *>(text.data());
    write_file_atomic(path, std::span<const std::uint8_t>(p, text.size()));
}

std::string fmt(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string file_digest(const fs::path &path) { return hex_digest(fnv1a64(read_file(path))); }

struct LoadedCheckpoint
{
    fs::path path;
    Checkpoint checkpoint;
};

std::vector<LoadedCheckpoint> load_checkpoints(const RunConfig &cfg, const CommandOptions &options)
{
    if (options.checkpoints.empty())
        throw Error(ErrorCode::ConfigInvalid, "at least one --checkpoint is required");
    std::vector<LoadedCheckpoint> out;
    for (const auto &p : options.checkpoints)
        out.push_back({p, restore_checkpoint(p, cfg.array)});
    return out;
}

} // namespace

unsigned threads_from_env()
{
    const char *env = std::getenv("BEAMCRAFT_THREADS");
    if (env == nullptr)
        return 1;
    unsigned v = 0;
    const auto end = env + std::char_traits<char>::length(env);
    const auto res = std::from_chars(env, end, v);
    if (res.ec != std::errc() || res.ptr != end || v == 0)
        return 1;
    return v;
}

RunConfig resolve_config(const CommandOptions &options)
{
    RunConfig cfg = load_run_config(options.config);
    if (options.seed)
    {
        cfg.scenario.seed = *options.seed;
        cfg.train.seed = *options.seed;
    }
    if (options.out)
        cfg.output_dir = options.out->string();
    if (options.variant)
        cfg.train.probe_variant = parse_probe_variant(*options.variant);
    if (options.noise_bits)
        cfg.train.noise_bits = *options.noise_bits;
    cfg.validate();
    return cfg;
}

void cmd_gen_data(const RunConfig &cfg, const CommandOptions &options, std::ostream &log)
{
    const fs::path dir = output_dir(cfg);
    guard_outputs(dir, {train_file, val_file, manifest_file}, options.force);
    ensure_dir(dir);

    GenerateOptions gen{cfg.sensing.tx_power_dbm, options.threads};
    ScenarioConfig train_scn = cfg.scenario;
    train_scn.seed = cfg.data.resolved_train_seed(cfg.scenario.seed);
    ScenarioConfig val_scn = cfg.scenario;
    val_scn.seed = cfg.data.resolved_val_seed(cfg.scenario.seed);

    log << "generating " << cfg.data.train_count << " training and " << cfg.data.val_count << " validation samples\n";
    save_dataset(generate_dataset(train_scn, cfg.array, cfg.data.train_count, gen), dir / train_file);
    save_dataset(generate_dataset(val_scn, cfg.array, cfg.data.val_count, gen), dir / val_file);

    const json manifest = {
        {"train", {{"file", train_file}, {"count", cfg.data.train_count}, {"seed", train_scn.seed},
                   {"fnv1a64", file_digest(dir / train_file)}}},
        {"val", {{"file", val_file}, {"count", cfg.data.val_count}, {"seed", val_scn.seed},
                 {"fnv1a64", file_digest(dir / val_file)}}},
        {"config", to_json(cfg)},
    };
    write_text(dir / manifest_file, canonical_dump(manifest));
    log << "wrote " << (dir / manifest_file).string() << "\n";
}

void cmd_train(const RunConfig &cfg, const CommandOptions &options, std::ostream &log)
{
    const fs::path dir = output_dir(cfg);
    guard_outputs(dir, {checkpoint_file, epochs_file, resolved_file}, options.force);
    const Dataset train_set = load_dataset(dir / train_file);
    const Dataset val_set = load_dataset(dir / val_file);

    write_text(dir / resolved_file, canonical_dump(to_json(cfg)));

    const fs::path csv_tmp = dir / (std::string(epochs_file) + ".tmp");
    std::ofstream csv(csv_tmp, std::ios::binary | std::ios::trunc);
    if (!csv)
        throw Error(ErrorCode::IoFailure, "cannot write " + csv_tmp.string());
    csv << epoch_csv_header() << '\n';

    log << "training " << to_string(cfg.train.probe_variant) << " probes for " << cfg.train.epochs << " epochs\n";
    const auto on_epoch = [&](const EpochReport &r, const TrainState &) {
        csv << epoch_csv_row(r) << '\n';
        csv.flush();
        log << "epoch " << r.epoch << "/" << cfg.train.epochs << " loss " << fmt(r.loss) << " top3 " << fmt(r.top3)
            << "\n";
    };
    TrainResult result = train(cfg.train, cfg.array, cfg.sensing, train_set, val_set, std::nullopt, on_epoch);
    csv.close();
    if (!csv)
        throw Error(ErrorCode::IoFailure, "failed writing " + csv_tmp.string());

    save_checkpoint(dir / checkpoint_file, Checkpoint{cfg.array, cfg.train, std::move(result.state)});
    std::error_code ec;
    fs::rename(csv_tmp, dir / epochs_file, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, "cannot rename " + csv_tmp.string() + ": " + ec.message());
    log << "wrote " << (dir / checkpoint_file).string() << "\n";
}

void cmd_eval(const RunConfig &cfg, const CommandOptions &options, std::ostream &log)
{
    const fs::path dir = output_dir(cfg);
    guard_outputs(dir, {eval_file}, options.force);
    const auto checkpoints = load_checkpoints(cfg, options);
    const Dataset val_set = load_dataset(dir / val_file);

    std::string out = "checkpoint,variant,trained_noise_bits,condition,phase_bits,top1,top3,top5\n";
    for (const auto &[path, ck] : checkpoints)
    {
        const BeamScorer scorer = mlp_scorer(ck.state.model);
        const bool noise_trained = ck.config.noise_bits.has_value();
        struct Row
        {
            std::string condition;
            std::optional<int> bits;
        };
        const Row rows[] = {
            {"unquantized", std::nullopt},
            {noise_trained ? "noise_trained_phase_quantized" : "phase_quantized", cfg.eval.phase_bits},
        };
        for (const auto &row : rows)
        {
            EvalCondition cond;
            cond.quantize_rsrp = true;
            cond.phase_bits = row.bits;
            cond.sensing_noise = cfg.sensing.noise_enabled;
            cond.noise_seed = cfg.eval.noise_seed;
            const EvalResult r = evaluate_topk(scorer, ck.state.probes, cfg.array, val_set, cfg.sensing, cond);
            out += path.filename().string() + ',' + std::string(to_string(ck.state.probes.variant())) + ',' +
                   (noise_trained ? std::to_string(*ck.config.noise_bits) : std::string()) + ',' + row.condition +
                   ',' + (row.bits ? std::to_string(*row.bits) : std::string()) + ',' + fmt(r.top1) + ',' +
                   fmt(r.top3) + ',' + fmt(r.top5) + '\n';
        }
    }
    write_text(dir / eval_file, out);
    log << out;
}

void cmd_sweep(const RunConfig &cfg, const CommandOptions &options, std::ostream &log)
{
    const fs::path dir = output_dir(cfg);
    guard_outputs(dir, {sweep_file}, options.force);
    const auto checkpoints = load_checkpoints(cfg, options);
    const Dataset val_set = load_dataset(dir / val_file);
    const DftCodebook dft(cfg.array);

    std::vector<SchemeOutcome> schemes;
    std::map<std::string, int> seen;
    const InferenceOptions inference{cfg.sweep.reprobe, true};
    for (const auto &[path, ck] : checkpoints)
    {
        // Checkpoints trained with frozen probes are the uniform-probe baseline.
        const std::string name = ck.config.freeze_probes ? "uniform_prediction" : "prediction";
        if (seen[name]++ > 0)
            throw Error(ErrorCode::ConfigInvalid, "more than one " + name + " checkpoint given");
        const BeamScorer scorer = mlp_scorer(ck.state.model);
        const Codebook probes = build_codebook(ck.state.probes, cfg.array);
        log << "running " << name << " (" << path.string() << ")\n";
        schemes.push_back(run_prediction_scheme(name, scorer, probes, val_set, dft, cfg.sensing, cfg.sweep.noise_seed,
                                                inference, ProbeAccounting::ProbesPlusReprobe));
        schemes.push_back(run_prediction_scheme(name + "_probes_only", scorer, probes, val_set, dft, cfg.sensing,
                                                cfg.sweep.noise_seed, inference, ProbeAccounting::ProbesOnly));
    }

    const BinarySearchOptions binary{cfg.sweep.binary_rounds};
    schemes.push_back(run_search_scheme(
        "binary",
        [&](const Channel &h, const DftCodebook &cb, const SensingConfig &s, Rng &rng) {
            return binary_search(h, cb, s, rng, binary);
        },
        val_set, dft, cfg.sensing, cfg.sweep.noise_seed));
    const HierarchicalOptions hier{cfg.sweep.hierarchical_groups};
    schemes.push_back(run_search_scheme(
        "hierarchical",
        [&](const Channel &h, const DftCodebook &cb, const SensingConfig &s, Rng &rng) {
            return hierarchical_search(h, cb, s, rng, hier);
        },
        val_set, dft, cfg.sensing, cfg.sweep.noise_seed));

    const auto rows = user_sweep(schemes, cfg.sweep.users, cfg.sensing, cfg.overhead);
    const std::string csv = results_csv(rows);
    write_text(dir / sweep_file, csv);
    log << csv;
}

int exit_code_for(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidArgument:
    case ErrorCode::IndivisibleCodebook:
        return 2;
    case ErrorCode::EmptyDataset:
    case ErrorCode::IoFailure:
    case ErrorCode::FormatVersionMismatch:
    case ErrorCode::ChecksumMismatch:
    case ErrorCode::DatasetMismatch:
    case ErrorCode::ShapeMismatch:
        return 3;
    case ErrorCode::UnrealizablePair:
    case ErrorCode::DegenerateElevation:
    case ErrorCode::DegeneratePower:
    case ErrorCode::NonFiniteInput:
    case ErrorCode::NonFiniteLoss:
        return 4;
    }
    return 4;
}

int run_command(const std::string &name, const CommandOptions &options, std::ostream &log)
{
    try
    {
        const RunConfig cfg = resolve_config(options);
        if (name == "gen-data")
            cmd_gen_data(cfg, options, log);
        else if (name == "train")
            cmd_train(cfg, options, log);
        else if (name == "eval")
            cmd_eval(cfg, options, log);
        else if (name == "sweep")
            cmd_sweep(cfg, options, log);
        else
            throw Error(ErrorCode::ConfigInvalid, "unknown command " + name);
        return 0;
    }
    catch (const Error &e)
    {
        log << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    }
}

} // namespace beamcraft::cli
