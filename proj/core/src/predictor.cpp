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

#include "beamcraft/predictor.hpp"
#include "beamcraft/binary_io.hpp"
#include "beamcraft/errors.hpp"
#include "beamcraft/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace beamcraft
{

namespace
{
constexpr std::uint8_t model_version = 1;
constexpr char model_magic[4] = {'B', 'M', 'L', 'P'};
constexpr double probability_floor = 1e-12;

double activation_slope(Activation a, double leak, double x)
{
    if (a == Activation::Identity)
        return 1.0;
    if (x > 0.0)
        return 1.0;
    return a == Activation::LeakyReLU ? leak : 0.0;
}

Eigen::MatrixXd activate(const Eigen::MatrixXd &pre, Activation a, double leak)
{
    switch (a)
    {
    case Activation::Identity: return pre;
    case Activation::ReLU: return pre.cwiseMax(0.0);
    case Activation::LeakyReLU: return pre.unaryExpr([leak](double x) { return x > 0.0 ? x : leak * x; });
    }
    return pre;
}

void softmax_columns(Eigen::MatrixXd &logits)
{
    for (Eigen::Index c = 0; c < logits.cols(); ++c)
    {
        auto col = logits.col(c);
        const double m = col.maxCoeff();
        col = (col.array() - m).exp();
        col /= col.sum();
    }
}
} // namespace

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers))
{
    if (layers_.empty())
        throw Error(ErrorCode::ShapeMismatch, "model needs at least one layer");
    for (std::size_t k = 0; k < layers_.size(); ++k)
    {
        const auto &l = layers_[k];
        if (l.weight.rows() == 0 || l.weight.cols() == 0 || l.bias.size() != l.weight.rows())
            throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(k) + " has inconsistent shapes");
        if (k > 0 && l.weight.cols() != layers_[k - 1].weight.rows())
            throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(k) + " does not chain to its input");
    }
}

std::vector<Activation> canonical_activations(std::size_t layer_count)
{
    std::vector<Activation> acts(layer_count, Activation::LeakyReLU);
    if (layer_count >= 2)
        acts[layer_count - 2] = Activation::ReLU;
    if (layer_count >= 1)
        acts[layer_count - 1] = Activation::Identity;
    return acts;
}

MlpModel MlpModel::glorot(std::span<const std::size_t> widths, std::uint64_t seed)
{
    if (widths.size() < 2)
        throw Error(ErrorCode::ShapeMismatch, "need at least input and output widths");
    Rng rng(seed);
    const auto acts = canonical_activations(widths.size() - 1);
    std::vector<DenseLayer> layers;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k)
    {
        const auto fan_in = static_cast<Eigen::Index>(widths[k]);
        const auto fan_out = static_cast<Eigen::Index>(widths[k + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        DenseLayer layer;
        layer.weight.resize(fan_out, fan_in);
        for (Eigen::Index r = 0; r < fan_out; ++r)
            for (Eigen::Index c = 0; c < fan_in; ++c)
                layer.weight(r, c) = rng.uniform(-limit, limit);
        layer.bias = Eigen::VectorXd::Zero(fan_out);
        layer.activation = acts[k];
        layers.push_back(std::move(layer));
    }
    return MlpModel(std::move(layers));
}

MlpModel MlpModel::beam_predictor(std::size_t inputs, std::size_t outputs, std::uint64_t seed)
{
    const std::size_t widths[] = {inputs, 200, 200, 200, outputs};
    MlpModel m = glorot(widths, seed);
    // Zero output layer: the untrained predictor is uniform over beams.
    m.layers_.back().weight.setZero();
    m.layers_.back().bias.setZero();
    return m;
}

std::size_t MlpModel::input_size() const noexcept
{
    return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weight.cols());
}

std::size_t MlpModel::output_size() const noexcept
{
    return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weight.rows());
}

std::vector<std::span<double>> MlpModel::parameters()
{
    std::vector<std::span<double>> out;
    for (auto &l : layers_)
    {
        out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
        out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    }
    return out;
}

std::vector<std::span<const double>> MlpModel::parameters() const
{
    std::vector<std::span<const double>> out;
    for (const auto &l : layers_)
    {
        out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
        out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    }
    return out;
}

TargetLabel::TargetLabel(std::size_t class_index, std::size_t classes) : index_(class_index), classes_(classes)
{
    if (class_index >= classes)
        throw Error(ErrorCode::InvalidArgument, "target class out of range");
}

std::vector<double> TargetLabel::one_hot() const
{
    std::vector<double> y(classes_, 0.0);
    y[index_] = 1.0;
    return y;
}

ForwardCache forward_batch(const MlpModel &m, const Eigen::MatrixXd &x)
{
    if (static_cast<std::size_t>(x.rows()) != m.input_size())
        throw Error(ErrorCode::ShapeMismatch, "input width does not match the model");
    if (!x.allFinite())
        throw Error(ErrorCode::NonFiniteInput, "predictor input contains NaN or Inf");
    ForwardCache cache;
    cache.inputs.reserve(m.layer_count());
    cache.pre.reserve(m.layer_count());
    Eigen::MatrixXd a = x;
    for (const auto &layer : m.layers())
    {
        Eigen::MatrixXd pre = layer.weight * a;
        pre.colwise() += layer.bias;
        Eigen::MatrixXd next = activate(pre, layer.activation, layer.leak);
        cache.inputs.push_back(std::move(a));
        cache.pre.push_back(std::move(pre));
        a = std::move(next);
    }
    softmax_columns(a);
    cache.probabilities = std::move(a);
    return cache;
}

ForwardResult forward(const MlpModel &m, std::span<const double> x)
{
    for (const double v : x)
        if (!std::isfinite(v))
            throw Error(ErrorCode::NonFiniteInput, "predictor input contains NaN or Inf");
    Eigen::MatrixXd in(static_cast<Eigen::Index>(x.size()), 1);
    for (std::size_t i = 0; i < x.size(); ++i)
        in(static_cast<Eigen::Index>(i), 0) = x[i];
    ForwardResult r;
    r.cache = forward_batch(m, in);
    r.probabilities.assign(r.cache.probabilities.data(), r.cache.probabilities.data() + r.cache.probabilities.size());
    return r;
}

std::vector<double> softmax(std::span<const double> logits)
{
    Eigen::MatrixXd col(static_cast<Eigen::Index>(logits.size()), 1);
    for (std::size_t i = 0; i < logits.size(); ++i)
        col(static_cast<Eigen::Index>(i), 0) = logits[i];
    softmax_columns(col);
    return {col.data(), col.data() + col.size()};
}

double cross_entropy(std::span<const double> probabilities, const TargetLabel &target)
{
    if (probabilities.size() != target.classes())
        throw Error(ErrorCode::ShapeMismatch, "distribution and target sizes differ");
    return -std::log(std::max(probabilities[target.class_index()], probability_floor));
}

std::vector<std::span<const double>> MlpGradients::parameters() const
{
    std::vector<std::span<const double>> out;
    for (std::size_t k = 0; k < weight.size(); ++k)
    {
        out.emplace_back(weight[k].data(), static_cast<std::size_t>(weight[k].size()));
        out.emplace_back(bias[k].data(), static_cast<std::size_t>(bias[k].size()));
    }
    return out;
}

MlpGradients backward_batch(const MlpModel &m, const ForwardCache &cache, std::span<const std::size_t> targets)
{
    const Eigen::Index batch = cache.probabilities.cols();
    if (static_cast<std::size_t>(batch) != targets.size() || cache.pre.size() != m.layer_count())
        throw Error(ErrorCode::ShapeMismatch, "cache does not match targets or model");

    // softmax + cross-entropy: dJ/dlogits = (p - y) / batch
    Eigen::MatrixXd delta = cache.probabilities;
    for (Eigen::Index c = 0; c < batch; ++c)
    {
        const auto t = static_cast<Eigen::Index>(targets[static_cast<std::size_t>(c)]);
        if (t >= delta.rows())
            throw Error(ErrorCode::InvalidArgument, "target class out of range");
        delta(t, c) -= 1.0;
    }
    delta /= static_cast<double>(batch);

    const std::size_t layers = m.layer_count();
    MlpGradients g;
    g.weight.resize(layers);
    g.bias.resize(layers);
    for (std::size_t k = layers; k-- > 0;)
    {
        const auto &layer = m.layers()[k];
        g.weight[k] = delta * cache.inputs[k].transpose();
        g.bias[k] = delta.rowwise().sum();
        Eigen::MatrixXd upstream = layer.weight.transpose() * delta;
        if (k == 0)
        {
            g.input = std::move(upstream);
            break;
        }
        const auto &prev = m.layers()[k - 1];
        const Eigen::MatrixXd &pre = cache.pre[k - 1];
        delta = upstream.binaryExpr(pre, [&prev](double up, double x) {
            return up * activation_slope(prev.activation, prev.leak, x);
        });
    }
    return g;
}

MlpGradients backward(const MlpModel &m, const ForwardCache &cache, const TargetLabel &target)
{
    const std::size_t t[] = {target.class_index()};
    return backward_batch(m, cache, t);
}

AdamState AdamState::for_shapes(const AdamConfig &cfg, std::span<const std::size_t> sizes)
{
    AdamState s;
    s.config = cfg;
    for (const std::size_t n : sizes)
    {
        s.first.emplace_back(n, 0.0);
        s.second.emplace_back(n, 0.0);
    }
    return s;
}

void adam_step(AdamState &state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads)
{
    if (params.size() != grads.size() || params.size() != state.first.size())
        throw Error(ErrorCode::ShapeMismatch, "parameter, gradient and state tensor counts differ");
    for (std::size_t t = 0; t < params.size(); ++t)
        if (params[t].size() != grads[t].size() || params[t].size() != state.first[t].size())
            throw Error(ErrorCode::ShapeMismatch, "tensor " + std::to_string(t) + " shape mismatch");

    const auto &c = state.config;
    ++state.step;
    const double steps = static_cast<double>(state.step);
    const double bias1 = 1.0 - std::pow(c.beta1, steps);
    const double bias2 = 1.0 - std::pow(c.beta2, steps);
    for (std::size_t t = 0; t < params.size(); ++t)
    {
        auto &m1 = state.first[t];
        auto &m2 = state.second[t];
        for (std::size_t i = 0; i < params[t].size(); ++i)
        {
            const double g = grads[t][i];
            m1[i] = c.beta1 * m1[i] + (1.0 - c.beta1) * g;
            m2[i] = c.beta2 * m2[i] + (1.0 - c.beta2) * g * g;
            const double mhat = m1[i] / bias1;
            const double vhat = m2[i] / bias2;
            params[t][i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
        }
    }
}

std::vector<std::uint8_t> encode_model(const MlpModel &m)
{
    const auto acts = canonical_activations(m.layer_count());
    for (std::size_t k = 0; k < m.layer_count(); ++k)
    {
        const auto &l = m.layers()[k];
        if (l.activation != acts[k] || (l.activation == Activation::LeakyReLU && l.leak != default_leak))
            throw Error(ErrorCode::InvalidArgument, "model file stores only the canonical activation schedule");
    }

    ByteWriter w;
    for (char c : model_magic)
        w.put_u8(static_cast<std::uint8_t>(c));
    w.put_u8(model_version);
    w.put_u32(static_cast<std::uint32_t>(m.layer_count()));
    for (const auto &l : m.layers())
    {
        w.put_u32(static_cast<std::uint32_t>(l.weight.rows()));
        w.put_u32(static_cast<std::uint32_t>(l.weight.cols()));
    }
    for (const auto &l : m.layers())
    {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
                w.put_f64(l.weight(r, c));
        for (Eigen::Index r = 0; r < l.bias.size(); ++r)
            w.put_f64(l.bias(r));
    }
    w.put_checksum();
    return w.take();
}

MlpModel decode_model(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() >= 5)
    {
        ByteReader head(bytes.first(5));
        for (char c : model_magic)
            if (head.get_u8() != static_cast<std::uint8_t>(c))
                throw Error(ErrorCode::FormatVersionMismatch, "not a model file (bad magic)");
        const std::uint8_t version = head.get_u8();
        if (version != model_version)
            throw Error(ErrorCode::FormatVersionMismatch, "unsupported model version " + std::to_string(version));
    }
    const auto payload = verify_trailing_checksum(bytes);
    ByteReader r(payload);
    r.get_bytes(5);
    const std::uint32_t count = r.get_u32();
    if (count == 0 || count > 64)
        throw Error(ErrorCode::FormatVersionMismatch, "implausible layer count " + std::to_string(count));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(count);
    std::size_t total = 0;
    for (std::uint32_t k = 0; k < count; ++k)
    {
        shapes[k].first = r.get_u32();
        shapes[k].second = r.get_u32();
        if (shapes[k].first == 0 || shapes[k].second == 0)
            throw Error(ErrorCode::FormatVersionMismatch, "layer " + std::to_string(k) + " has a zero dimension");
        if (k > 0 && shapes[k].second != shapes[k - 1].first)
            throw Error(ErrorCode::FormatVersionMismatch, "layer " + std::to_string(k) + " shape does not chain");
        total += static_cast<std::size_t>(shapes[k].first) * (shapes[k].second + 1);
    }
    if (r.remaining() != 8 * total)
        throw Error(ErrorCode::FormatVersionMismatch, "layer shapes do not match payload size");

    const auto acts = canonical_activations(count);
    std::vector<DenseLayer> layers(count);
    for (std::uint32_t k = 0; k < count; ++k)
    {
        auto &l = layers[k];
        l.weight.resize(shapes[k].first, shapes[k].second);
        for (Eigen::Index row = 0; row < l.weight.rows(); ++row)
            for (Eigen::Index col = 0; col < l.weight.cols(); ++col)
                l.weight(row, col) = r.get_f64();
        l.bias.resize(shapes[k].first);
        for (Eigen::Index row = 0; row < l.bias.size(); ++row)
            l.bias(row) = r.get_f64();
        l.activation = acts[k];
    }
    return MlpModel(std::move(layers));
}

void save_model(const MlpModel &m, const std::filesystem::path &path) { write_file_atomic(path, encode_model(m)); }

MlpModel load_model(const std::filesystem::path &path) { return decode_model(read_file(path)); }

} // namespace beamcraft
