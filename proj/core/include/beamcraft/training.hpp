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

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace beamcraft
{

struct TrainConfig
{
    std::size_t epochs = 200;
    std::size_t batch_size = 256;
    ProbeVariant probe_variant = ProbeVariant::BeamDomain;
    std::size_t probe_count = 8;
    std::optional<int> noise_bits;
    PhaseNoiseUnit noise_unit = PhaseNoiseUnit::HalfStep;
    bool sensing_noise = true;
    AdamConfig adam;
    AdamConfig probe_adam{.lr = 1e-2};
    std::uint64_t seed = 1;
    bool freeze_probes = false;
    // Validation runs under deployment conditions: 1 dB RSRP quantization,
    // and phase quantization at noise_bits when noise injection is on.
    bool eval_quantize_rsrp = true;

    void validate() const;
    std::optional<int> eval_phase_bits() const noexcept { return noise_bits; }
};

struct EpochReport
{
    std::size_t epoch = 0; // 1-based
    double loss = 0.0;
    double top1 = 0.0;
    double top3 = 0.0;
    double top5 = 0.0;

    friend bool operator==(const EpochReport &, const EpochReport &) = default;
};

// "epoch,loss,top1,top3,top5" header plus rows, values printed round-trip exact.
std::string epoch_csv_header();
std::string epoch_csv_row(const EpochReport &r);

struct TrainState
{
    ProbeParams probes;
    MlpModel model;
    AdamState model_optimizer;
    AdamState probe_optimizer;
    std::size_t epochs_completed = 0;
};

// Probes start from the uniform DFT probe codebook in the requested
// parameterization; the predictor is Glorot-initialized from cfg.seed.
ProbeParams initial_probe_params(ProbeVariant variant, const ArrayConfig &cfg, std::size_t probes);
TrainState initial_state(const TrainConfig &cfg, const ArrayConfig &array);
TrainState initial_state(const TrainConfig &cfg, const ArrayConfig &array, ProbeParams probes);

// Fixed noise realizations for one batch, so the loss is a deterministic
// function of the parameters.
struct BatchNoise
{
    std::vector<double> phase;          // N * L, empty for none
    std::vector<CVec> sensing;          // one L-vector per sample, empty for noise-free
};

struct BatchGradients
{
    double loss = 0.0; // mean cross-entropy
    MlpGradients model;
    std::vector<double> probes;
};

// Forward and backward pass of the full pipeline (codebook, sensing, RSRP
// map, predictor, cross-entropy) over the listed samples. Gradients are
// accumulated in the order of indices.
BatchGradients batch_gradients(const ProbeParams &probes, const MlpModel &model, const ArrayConfig &array,
                               const SensingConfig &sensing, const Dataset &data, std::span<const std::size_t> indices,
                               const BatchNoise &noise, bool probe_gradients = true);

double batch_loss(const ProbeParams &probes, const MlpModel &model, const ArrayConfig &array,
                  const SensingConfig &sensing, const Dataset &data, std::span<const std::size_t> indices,
                  const BatchNoise &noise);

using EpochCallback = std::function<void(const EpochReport &, const TrainState &)>;

struct TrainResult
{
    TrainState state;
    std::vector<EpochReport> reports;
};

// Joint end-to-end training. Starting from resume (when given) continues at
// epoch resume->epochs_completed + 1 and reproduces the uninterrupted run.
// Throws DatasetMismatch when the datasets do not match the array and
// NonFiniteLoss if training diverges.
TrainResult train(const TrainConfig &cfg, const ArrayConfig &array, const SensingConfig &sensing,
                  const Dataset &train_set, const Dataset &val_set, std::optional<TrainState> resume = std::nullopt,
                  const EpochCallback &on_epoch = {});

// Same loop with the probe codebook held fixed.
TrainResult freeze_probes_train(TrainConfig cfg, const ProbeParams &fixed, const ArrayConfig &array,
                                const SensingConfig &sensing, const Dataset &train_set, const Dataset &val_set);

// Validation accuracy under the configured deployment conditions.
EpochReport validate_epoch(const TrainConfig &cfg, const TrainState &state, const ArrayConfig &array,
                           const SensingConfig &sensing, const Dataset &val_set);

struct Checkpoint
{
    ArrayConfig array;
    TrainConfig config;
    TrainState state;
};

// Checkpoint file: "BMCK", u8 version = 1, u64 length + model file bytes,
// probe block (u8 variant, u32 beams, u32 antennas, u32 count, f64 values),
// u32 epochs completed, optimizer block (both Adam states), u32 length +
// canonical JSON echo of the array and train configs, trailing u64 FNV-1a.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint &c);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &c);
// Throws DatasetMismatch when expected_array is given and differs.
Checkpoint restore_checkpoint(const std::filesystem::path &path,
                              const std::optional<ArrayConfig> &expected_array = std::nullopt);

} // namespace beamcraft
