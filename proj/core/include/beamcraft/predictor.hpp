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

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace beamcraft
{

enum class Activation : std::uint8_t
{
    Identity,
    ReLU,
    LeakyReLU,
};

inline constexpr double default_leak = 0.04;

struct DenseLayer
{
    Eigen::MatrixXd weight; // rows = outputs, cols = inputs
    Eigen::VectorXd bias;
    Activation activation = Activation::Identity;
    double leak = default_leak;
};

// Feed-forward classifier; the final layer is linear and followed by softmax.
class MlpModel
{
public:
    MlpModel() = default;
    explicit MlpModel(std::vector<DenseLayer> layers);

    // inputs -> 200 -> 200 -> 200 -> outputs with LeakyReLU(0.04),
    // LeakyReLU(0.04), ReLU. Glorot-uniform hidden weights, zero biases
    // and a zero output layer, so the initial loss is ln(outputs).
    static MlpModel beam_predictor(std::size_t inputs, std::size_t outputs, std::uint64_t seed);

    // Glorot-uniform init for an arbitrary stack of widths using the
    // standard activation schedule (see canonical_activations).
    static MlpModel glorot(std::span<const std::size_t> widths, std::uint64_t seed);

    std::size_t input_size() const noexcept;
    std::size_t output_size() const noexcept;
    std::size_t layer_count() const noexcept { return layers_.size(); }

    const std::vector<DenseLayer> &layers() const noexcept { return layers_; }
    std::vector<DenseLayer> &layers() noexcept { return layers_; }

    // Views over all trainable values in a fixed order: W0, b0, W1, b1, ...
    std::vector<std::span<double>> parameters();
    std::vector<std::span<const double>> parameters() const;

private:
    std::vector<DenseLayer> layers_;
};

// Hidden layers are LeakyReLU(0.04) except the last hidden layer, which is
// ReLU; the output layer is Identity. For four layers this is the reference
// 200-200-200 stack.
std::vector<Activation> canonical_activations(std::size_t layer_count);

// One-hot target over the predictor's output classes.
class TargetLabel
{
public:
    TargetLabel(std::size_t class_index, std::size_t classes);
    // From a 1-based DFT beam index.
    static TargetLabel from_beam(std::size_t beam_index, std::size_t classes) { return {beam_index - 1, classes}; }

    std::size_t class_index() const noexcept { return index_; }
    std::size_t classes() const noexcept { return classes_; }
    std::vector<double> one_hot() const;

private:
    std::size_t index_;
    std::size_t classes_;
};

// Column-per-sample activations retained for the backward pass.
struct ForwardCache
{
    std::vector<Eigen::MatrixXd> inputs; // input to layer k
    std::vector<Eigen::MatrixXd> pre;    // pre-activation of layer k
    Eigen::MatrixXd probabilities;       // classes x batch
};

ForwardCache forward_batch(const MlpModel &m, const Eigen::MatrixXd &x);

struct ForwardResult
{
    std::vector<double> probabilities;
    ForwardCache cache;
};

// Throws NonFiniteInput on NaN/Inf in x.
ForwardResult forward(const MlpModel &m, std::span<const double> x);

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

// -ln(max(p_target, 1e-12)).
double cross_entropy(std::span<const double> probabilities, const TargetLabel &target);

struct MlpGradients
{
    std::vector<Eigen::MatrixXd> weight;
    std::vector<Eigen::VectorXd> bias;
    Eigen::MatrixXd input; // dJ/dx, inputs x batch

    std::vector<std::span<const double>> parameters() const;
};

// Gradients of the batch-mean cross-entropy. Class indices are 0-based.
MlpGradients backward_batch(const MlpModel &m, const ForwardCache &cache, std::span<const std::size_t> targets);
MlpGradients backward(const MlpModel &m, const ForwardCache &cache, const TargetLabel &target);

struct AdamConfig
{
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    friend bool operator==(const AdamConfig &, const AdamConfig &) = default;
};

struct AdamState
{
    AdamConfig config;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first;
    std::vector<std::vector<double>> second;

    static AdamState for_shapes(const AdamConfig &cfg, std::span<const std::size_t> sizes);
    template <typename Span> static AdamState for_parameters(const AdamConfig &cfg, const std::vector<Span> &params)
    {
        std::vector<std::size_t> sizes;
        sizes.reserve(params.size());
        for (const auto &p : params)
            sizes.push_back(p.size());
        return for_shapes(cfg, sizes);
    }

    friend bool operator==(const AdamState &, const AdamState &) = default;
};

// Bias-corrected Adam update. Throws ShapeMismatch when the parameter and
// gradient tensors disagree with each other or with the state.
void adam_step(AdamState &state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads);

// Model file: "BMLP", u8 version = 1, u32 layer count, per layer u32 rows and
// u32 cols, then per layer f64 row-major weights followed by biases; trailing
// u64 FNV-1a over all preceding bytes. Activations follow
// canonical_activations.
std::vector<std::uint8_t> encode_model(const MlpModel &m);
MlpModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const MlpModel &m, const std::filesystem::path &path);
MlpModel load_model(const std::filesystem::path &path);

} // namespace beamcraft
