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

#include "beamcraft/training.hpp"
#include "beamcraft/binary_io.hpp"
#include "beamcraft/config_io.hpp"
#include "beamcraft/errors.hpp"
#include "beamcraft/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace beamcraft
{

namespace
{

// Stream tags for derive_seed.
enum : std::uint64_t
{
    tag_model_init = 1,
    tag_shuffle = 2,
    tag_phase_noise = 3,
    tag_sensing_noise = 4,
    tag_validation = 5,
};

constexpr std::uint8_t checkpoint_version = 1;
constexpr char checkpoint_magic[4] = {'B', 'M', 'C', 'K'};

// Interior radius used when mapping beamspace points outside the
// realizable disk to angles.
constexpr double realizable_radius = 1.0 - 1e-6;

std::string fmt(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void check_dataset(const Dataset &d, const ArrayConfig &array, const char *what)
{
    if (d.samples.empty())
        throw Error(ErrorCode::EmptyDataset, std::string(what) + " set is empty");
    if (d.n != array.size())
        throw Error(ErrorCode::DatasetMismatch, std::string(what) + " set has N = " + std::to_string(d.n) +
                                                    ", array has " + std::to_string(array.size()));
    for (const auto &s : d.samples)
        if (s.label < 1 || s.label > d.n || s.channel.size() != d.n)
            throw Error(ErrorCode::DatasetMismatch, std::string(what) + " set has an invalid sample");
}

void put_adam(ByteWriter &w, const AdamState &s)
{
    w.put_f64(s.config.lr);
    w.put_f64(s.config.beta1);
    w.put_f64(s.config.beta2);
    w.put_f64(s.config.epsilon);
    w.put_u64(s.step);
    w.put_u32(static_cast<std::uint32_t>(s.first.size()));
    for (std::size_t t = 0; t < s.first.size(); ++t)
    {
        w.put_u32(static_cast<std::uint32_t>(s.first[t].size()));
        for (const double x : s.first[t])
            w.put_f64(x);
        for (const double x : s.second[t])
            w.put_f64(x);
    }
}

AdamState get_adam(ByteReader &r)
{
    AdamState s;
    s.config.lr = r.get_f64();
    s.config.beta1 = r.get_f64();
    s.config.beta2 = r.get_f64();
    s.config.epsilon = r.get_f64();
    s.step = r.get_u64();
    const std::uint32_t tensors = r.get_u32();
    for (std::uint32_t t = 0; t < tensors; ++t)
    {
        const std::uint32_t n = r.get_u32();
        if (8ull * 2 * n > r.remaining())
            throw Error(ErrorCode::ChecksumMismatch, "optimizer block truncated");
        std::vector<double> first(n), second(n);
        for (auto &x : first)
            x = r.get_f64();
        for (auto &x : second)
            x = r.get_f64();
        s.first.push_back(std::move(first));
        s.second.push_back(std::move(second));
    }
    return s;
}

} // namespace

void TrainConfig::validate() const
{
    if (epochs < 1)
        throw Error(ErrorCode::ConfigInvalid, "epochs must be >= 1");
    if (batch_size < 1)
        throw Error(ErrorCode::ConfigInvalid, "batch_size must be >= 1");
    if (probe_count < 1)
        throw Error(ErrorCode::ConfigInvalid, "probe_count must be >= 1");
    if (noise_bits && (*noise_bits < 1 || *noise_bits > 16))
        throw Error(ErrorCode::ConfigInvalid, "noise_bits must be in 1..16");
}

std::string epoch_csv_header() { return "epoch,loss,top1,top3,top5"; }

std::string epoch_csv_row(const EpochReport &r)
{
    return std::to_string(r.epoch) + ',' + fmt(r.loss) + ',' + fmt(r.top1) + ',' + fmt(r.top3) + ',' + fmt(r.top5);
}

ProbeParams initial_probe_params(ProbeVariant variant, const ArrayConfig &cfg, std::size_t probes)
{
    const DftCodebook dft(cfg);
    const auto indices = uniform_probe_indices(cfg, probes);
    std::vector<BeamCoords> coords;
    for (const auto i : indices)
        coords.emplace_back(dft.grid_u(i), dft.grid_v(i));
    const ProbeParams beam = ProbeParams::beam_domain(coords);

    switch (variant)
    {
    case ProbeVariant::BeamDomain: return beam;
    case ProbeVariant::AngleDomain: {
        // Grid points outside the realizable disk move radially onto it.
        std::vector<AngleCoords> angles;
        for (const auto &c : coords)
        {
            const double r = std::hypot(c.u(), c.v());
            const double s = r > realizable_radius ? realizable_radius / r : 1.0;
            angles.push_back(beamspace_to_angles(BeamCoords(c.u() * s, c.v() * s)));
        }
        return ProbeParams::angle_domain(angles);
    }
    case ProbeVariant::FullMatrix: {
        ProbeParams p = ProbeParams::from_values(ProbeVariant::FullMatrix, probes, cfg.size(),
                                                 std::vector<double>(cfg.size() * probes, 0.0));
        const auto phases = element_phases(beam, cfg);
        std::copy(phases.begin(), phases.end(), p.values().begin());
        p.project();
        return p;
    }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown probe variant");
}

TrainState initial_state(const TrainConfig &cfg, const ArrayConfig &array, ProbeParams probes)
{
    cfg.validate();
    TrainState s{std::move(probes), MlpModel::beam_predictor(cfg.probe_count, array.size(),
                                                             derive_seed(cfg.seed, tag_model_init)),
                 {}, {}, 0};
    if (s.probes.beam_count() != cfg.probe_count)
        throw Error(ErrorCode::ConfigInvalid, "probe codebook size differs from probe_count");
    s.model_optimizer = AdamState::for_parameters(cfg.adam, s.model.parameters());
    const std::size_t probe_sizes[] = {s.probes.values().size()};
    s.probe_optimizer = AdamState::for_shapes(cfg.probe_adam, probe_sizes);
    return s;
}

TrainState initial_state(const TrainConfig &cfg, const ArrayConfig &array)
{
    return initial_state(cfg, array, initial_probe_params(cfg.probe_variant, array, cfg.probe_count));
}

BatchGradients batch_gradients(const ProbeParams &probes, const MlpModel &model, const ArrayConfig &array,
                               const SensingConfig &sensing, const Dataset &data, std::span<const std::size_t> indices,
                               const BatchNoise &noise, bool probe_gradients)
{
    const std::size_t batch = indices.size();
    if (batch == 0)
        throw Error(ErrorCode::EmptyDataset, "empty batch");
    if (!noise.sensing.empty() && noise.sensing.size() != batch)
        throw Error(ErrorCode::ShapeMismatch, "one sensing noise vector per sample is required");

    const Codebook w = build_codebook(probes, array, noise.phase);
    const std::size_t beams = probes.beam_count();

    std::vector<SensingOutput> sensed(batch);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(beams), static_cast<Eigen::Index>(batch));
    std::vector<std::size_t> targets(batch);
    for (std::size_t b = 0; b < batch; ++b)
    {
        const auto &sample = data.samples.at(indices[b]);
        std::span<const cplx> n;
        if (!noise.sensing.empty())
            n = noise.sensing[b];
        sensed[b] = sense_with_noise(w, sample.channel, sensing, n);
        const auto in = predictor_input(sensed[b], false);
        for (std::size_t l = 0; l < beams; ++l)
            x(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(b)) = in[l];
        targets[b] = sample.label - 1;
    }

    const ForwardCache cache = forward_batch(model, x);
    BatchGradients out;
    double loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b)
    {
        const auto col = cache.probabilities.col(static_cast<Eigen::Index>(b));
        loss += -std::log(std::max(col(static_cast<Eigen::Index>(targets[b])), 1e-12));
    }
    out.loss = loss / static_cast<double>(batch);
    out.model = backward_batch(model, cache, targets);

    out.probes.assign(probes.values().size(), 0.0);
    if (!probe_gradients)
        return out;
    std::vector<double> grad_in(beams);
    for (std::size_t b = 0; b < batch; ++b)
    {
        for (std::size_t l = 0; l < beams; ++l)
            grad_in[l] = out.model.input(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(b));
        const auto grad_power = power_gradient(grad_in, sensed[b].power);
        const auto g = backprop_probe(grad_power, sensed[b], probes, data.samples[indices[b]].channel, array,
                                      sensing, noise.phase);
        for (std::size_t i = 0; i < g.size(); ++i)
            out.probes[i] += g[i];
    }
    return out;
}

double batch_loss(const ProbeParams &probes, const MlpModel &model, const ArrayConfig &array,
                  const SensingConfig &sensing, const Dataset &data, std::span<const std::size_t> indices,
                  const BatchNoise &noise)
{
    const Codebook w = build_codebook(probes, array, noise.phase);
    double loss = 0.0;
    for (std::size_t b = 0; b < indices.size(); ++b)
    {
        const auto &sample = data.samples.at(indices[b]);
        std::span<const cplx> n;
        if (!noise.sensing.empty())
            n = noise.sensing[b];
        const auto s = sense_with_noise(w, sample.channel, sensing, n);
        const auto p = forward(model, predictor_input(s, false)).probabilities;
        loss += cross_entropy(p, TargetLabel::from_beam(sample.label, p.size()));
    }
    return loss / static_cast<double>(indices.size());
}

EpochReport validate_epoch(const TrainConfig &cfg, const TrainState &state, const ArrayConfig &array,
                           const SensingConfig &sensing, const Dataset &val_set)
{
    const auto bits = cfg.eval_phase_bits();
    const Codebook w = bits ? quantize_phases(state.probes, array, *bits) : build_codebook(state.probes, array);
    SensingConfig s_cfg = sensing;
    s_cfg.noise_enabled = sensing.noise_enabled && cfg.sensing_noise;

    const std::size_t beams = w.size();
    const std::size_t count = val_set.size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(beams), static_cast<Eigen::Index>(count));
    std::vector<std::uint32_t> labels(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        Rng rng(derive_seed(cfg.seed, tag_validation, i));
        const auto s = sense(w, val_set.samples[i].channel, s_cfg, rng);
        const auto in = predictor_input(s, cfg.eval_quantize_rsrp);
        for (std::size_t l = 0; l < beams; ++l)
            x(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) = in[l];
        labels[i] = val_set.samples[i].label;
    }
    const ForwardCache cache = forward_batch(state.model, x);
    std::vector<std::vector<std::size_t>> ranked(count);
    std::vector<double> col(static_cast<std::size_t>(cache.probabilities.rows()));
    for (std::size_t i = 0; i < count; ++i)
    {
        for (std::size_t r = 0; r < col.size(); ++r)
            col[r] = cache.probabilities(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i));
        ranked[i] = rank_beams(col);
    }
    EpochReport rep;
    rep.epoch = state.epochs_completed;
    rep.top1 = topk_accuracy(ranked, labels, 1);
    rep.top3 = topk_accuracy(ranked, labels, 3);
    rep.top5 = topk_accuracy(ranked, labels, 5);
    return rep;
}

TrainResult train(const TrainConfig &cfg, const ArrayConfig &array, const SensingConfig &sensing,
                  const Dataset &train_set, const Dataset &val_set, std::optional<TrainState> resume,
                  const EpochCallback &on_epoch)
{
    cfg.validate();
    array.validate();
    check_dataset(train_set, array, "training");
    check_dataset(val_set, array, "validation");

    TrainResult result{resume ? std::move(*resume) : initial_state(cfg, array), {}};
    TrainState &state = result.state;
    if (state.model.input_size() != cfg.probe_count || state.model.output_size() != array.size() ||
        state.probes.beam_count() != cfg.probe_count)
        throw Error(ErrorCode::DatasetMismatch, "training state does not match the configuration");

    SensingConfig s_cfg = sensing;
    s_cfg.noise_enabled = sensing.noise_enabled && cfg.sensing_noise;
    const std::size_t n_train = train_set.size();
    const std::size_t phase_count = array.size() * cfg.probe_count;

    std::vector<std::size_t> order(n_train);
    for (std::size_t epoch = state.epochs_completed + 1; epoch <= cfg.epochs; ++epoch)
    {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle(derive_seed(cfg.seed, tag_shuffle, epoch));
        for (std::size_t i = n_train; i > 1; --i)
            std::swap(order[i - 1], order[shuffle.uniform_index(i)]);

        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size, ++batch_index)
        {
            const std::size_t end = std::min(n_train, start + cfg.batch_size);
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
            // Fixed accumulation order inside a batch.
            std::sort(batch.begin(), batch.end());

            BatchNoise noise;
            if (cfg.noise_bits)
            {
                Rng rng(derive_seed(cfg.seed, tag_phase_noise, epoch, batch_index));
                noise.phase = phase_noise(phase_count, *cfg.noise_bits, rng, cfg.noise_unit);
            }
            if (s_cfg.noise_enabled)
            {
                noise.sensing.reserve(batch.size());
                for (const auto idx : batch)
                {
                    Rng rng(derive_seed(cfg.seed, tag_sensing_noise, epoch, idx));
                    noise.sensing.push_back(draw_sensing_noise(cfg.probe_count, s_cfg, rng));
                }
            }

            const BatchGradients g = batch_gradients(state.probes, state.model, array, s_cfg, train_set, batch, noise,
                                                     !cfg.freeze_probes);
            if (!std::isfinite(g.loss))
                throw Error(ErrorCode::NonFiniteLoss, "loss became non-finite at epoch " + std::to_string(epoch) +
                                                          ", batch " + std::to_string(batch_index));
            loss_sum += g.loss * static_cast<double>(batch.size());

            const auto params = state.model.parameters();
            const auto grads = g.model.parameters();
            adam_step(state.model_optimizer, params, grads);
            if (!cfg.freeze_probes)
            {
                const std::span<double> p[] = {state.probes.values()};
                const std::span<const double> gp[] = {g.probes};
                adam_step(state.probe_optimizer, p, gp);
                state.probes.project();
            }
        }

        state.epochs_completed = epoch;
        EpochReport rep = validate_epoch(cfg, state, array, sensing, val_set);
        rep.loss = loss_sum / static_cast<double>(n_train);
        result.reports.push_back(rep);
        if (on_epoch)
            on_epoch(rep, state);
    }
    return result;
}

TrainResult freeze_probes_train(TrainConfig cfg, const ProbeParams &fixed, const ArrayConfig &array,
                                const SensingConfig &sensing, const Dataset &train_set, const Dataset &val_set)
{
    cfg.freeze_probes = true;
    cfg.probe_variant = fixed.variant();
    cfg.probe_count = fixed.beam_count();
    return train(cfg, array, sensing, train_set, val_set, initial_state(cfg, array, fixed));
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint &c)
{
    ByteWriter w;
    for (char ch : checkpoint_magic)
        w.put_u8(static_cast<std::uint8_t>(ch));
    w.put_u8(checkpoint_version);

    const auto model = encode_model(c.state.model);
    w.put_u64(model.size());
    w.put_bytes(model);

    const auto &p = c.state.probes;
    w.put_u8(static_cast<std::uint8_t>(p.variant()));
    w.put_u32(static_cast<std::uint32_t>(p.beam_count()));
    w.put_u32(static_cast<std::uint32_t>(p.antenna_count()));
    w.put_u32(static_cast<std::uint32_t>(p.values().size()));
    for (const double x : p.values())
        w.put_f64(x);

    w.put_u32(static_cast<std::uint32_t>(c.state.epochs_completed));
    put_adam(w, c.state.model_optimizer);
    put_adam(w, c.state.probe_optimizer);

    const nlohmann::json echo = {{"array", c.array}, {"train", c.config}};
    const std::string text = echo.dump();
    w.put_u32(static_cast<std::uint32_t>(text.size()));
    w.put_text(text);
    w.put_checksum();
    return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() >= 5)
    {
        ByteReader head(bytes.first(5));
        for (char ch : checkpoint_magic)
            if (head.get_u8() != static_cast<std::uint8_t>(ch))
                throw Error(ErrorCode::FormatVersionMismatch, "not a checkpoint file (bad magic)");
        const std::uint8_t version = head.get_u8();
        if (version != checkpoint_version)
            throw Error(ErrorCode::FormatVersionMismatch, "unsupported checkpoint version " + std::to_string(version));
    }
    const auto payload = verify_trailing_checksum(bytes);
    ByteReader r(payload);
    r.get_bytes(5);

    const std::uint64_t model_len = r.get_u64();
    if (model_len > r.remaining())
        throw Error(ErrorCode::ChecksumMismatch, "model block truncated");
    MlpModel model = decode_model(r.get_bytes(static_cast<std::size_t>(model_len)));

    const std::uint8_t variant = r.get_u8();
    if (variant > static_cast<std::uint8_t>(ProbeVariant::FullMatrix))
        throw Error(ErrorCode::FormatVersionMismatch, "unknown probe variant tag " + std::to_string(variant));
    const std::uint32_t beams = r.get_u32();
    const std::uint32_t antennas = r.get_u32();
    const std::uint32_t count = r.get_u32();
    if (8ull * count > r.remaining())
        throw Error(ErrorCode::ChecksumMismatch, "probe block truncated");
    std::vector<double> values(count);
    for (auto &x : values)
        x = r.get_f64();
    ProbeParams probes = ProbeParams::from_values(static_cast<ProbeVariant>(variant), beams, antennas,
                                                  std::move(values));

    const std::uint32_t epochs = r.get_u32();
    AdamState model_opt = get_adam(r);
    AdamState probe_opt = get_adam(r);

    const std::uint32_t text_len = r.get_u32();
    const auto text = r.get_bytes(text_len);
    if (r.remaining() != 0)
        throw Error(ErrorCode::FormatVersionMismatch, "trailing bytes in checkpoint");
    nlohmann::json echo;
    try
    {
        echo = nlohmann::json::parse(text.begin(), text.end());
    }
    catch (const nlohmann::json::exception &e)
    {
        throw Error(ErrorCode::FormatVersionMismatch, std::string("config echo is not valid JSON: ") + e.what());
    }

    Checkpoint c{echo.at("array").get<ArrayConfig>(), echo.at("train").get<TrainConfig>(),
                 TrainState{std::move(probes), std::move(model), std::move(model_opt), std::move(probe_opt), epochs}};
    return c;
}

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &c)
{
    write_file_atomic(path, encode_checkpoint(c));
}

Checkpoint restore_checkpoint(const std::filesystem::path &path, const std::optional<ArrayConfig> &expected_array)
{
    Checkpoint c = decode_checkpoint(read_file(path));
    if (expected_array && !(*expected_array == c.array))
        throw Error(ErrorCode::DatasetMismatch, "checkpoint was trained for a " + std::to_string(c.array.n_phi) + "x" +
                                                    std::to_string(c.array.n_theta) + " array");
    return c;
}

} // namespace beamcraft
