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

#include "beamcraft/channel.hpp"
#include "beamcraft/binary_io.hpp"
#include "beamcraft/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace beamcraft
{

namespace
{
constexpr std::uint8_t dataset_version = 1;
constexpr char dataset_magic[4] = {'B', 'M', 'D', 'S'};

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
} // namespace

Channel::Channel(CVec h) : h_(std::move(h))
{
    bool any_nonzero = false;
    for (const auto &x : h_)
    {
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
            throw Error(ErrorCode::NonFiniteInput, "channel has non-finite entries");
        any_nonzero = any_nonzero || x != cplx{};
    }
    if (!any_nonzero)
        throw Error(ErrorCode::InvalidArgument, "channel is identically zero");
}

void ScenarioConfig::validate() const
{
    if (n_paths < 1 || n_clusters < 1)
        throw Error(ErrorCode::InvalidArgument, "scenario needs at least one path and one cluster");
    if (n_paths < n_clusters)
        throw Error(ErrorCode::InvalidArgument, "n_paths must be >= n_clusters");
    if (!(cluster_spread >= 0.0) || !std::isfinite(cluster_spread))
        throw Error(ErrorCode::InvalidArgument, "cluster_spread must be finite and >= 0");
    if (!std::isfinite(los_gain_db) || !std::isfinite(nlos_gain_db))
        throw Error(ErrorCode::InvalidArgument, "path gains must be finite");
}

Channel synthesize(std::span<const PathComponent> paths, const ArrayConfig &cfg)
{
    CVec h(cfg.size(), cplx{});
    for (const auto &path : paths)
    {
        if (!(std::abs(path.alpha) > 0.0) || !std::isfinite(std::abs(path.alpha)))
            throw Error(ErrorCode::InvalidArgument, "path gain must be finite and non-zero");
        const BeamVector psi = upa_response(path.coords, cfg);
        for (std::size_t n = 0; n < h.size(); ++n)
            h[n] += path.alpha * psi[n];
    }
    return Channel(std::move(h));
}

std::vector<PathComponent> sample_paths(const ScenarioConfig &scenario, Rng &rng)
{
    scenario.validate();
    std::vector<std::pair<double, double>> centers;
    centers.reserve(scenario.n_clusters);
    while (centers.size() < scenario.n_clusters)
    {
        const double u = rng.uniform(-1.0, 1.0);
        const double v = rng.uniform(-1.0, 1.0);
        if (u * u + v * v <= 1.0)
            centers.emplace_back(u, v);
    }

    const double los_var = db_to_linear(scenario.los_gain_db);
    const double nlos_var = db_to_linear(scenario.nlos_gain_db);

    std::vector<PathComponent> paths;
    paths.reserve(scenario.n_paths);
    paths.push_back({rng.complex_normal(los_var), BeamCoords(centers[0].first, centers[0].second)});
    for (std::size_t m = 1; m < scenario.n_paths; ++m)
    {
        const auto &c = centers[m % scenario.n_clusters];
        const double u = std::clamp(c.first + scenario.cluster_spread * rng.normal(), -1.0, 1.0);
        const double v = std::clamp(c.second + scenario.cluster_spread * rng.normal(), -1.0, 1.0);
        paths.push_back({rng.complex_normal(nlos_var), BeamCoords(u, v)});
    }
    return paths;
}

Channel sample_channel(const ScenarioConfig &scenario, const ArrayConfig &cfg, Rng &rng)
{
    const auto paths = sample_paths(scenario, rng);
    return synthesize(paths, cfg);
}

BeamChoice optimal_beam(const Channel &h, const DftCodebook &codebook)
{
    if (h.size() != codebook.config().size())
        throw Error(ErrorCode::ShapeMismatch, "channel length does not match codebook");
    BeamChoice best{1, -1.0};
    for (std::size_t i = 1; i <= codebook.size(); ++i)
    {
        const double p = std::norm(inner(codebook.beam(i), h.h()));
        if (p > best.power)
            best = {i, p};
    }
    return best;
}

Dataset generate_dataset(const ScenarioConfig &scenario, const ArrayConfig &cfg, std::size_t count,
                         const GenerateOptions &options)
{
    if (count == 0)
        throw Error(ErrorCode::EmptyDataset, "dataset count must be >= 1");
    scenario.validate();
    cfg.validate();

    const DftCodebook codebook(cfg);
    const double tx_mw = std::pow(10.0, options.tx_power_dbm / 10.0);

    Dataset d;
    d.n = static_cast<std::uint32_t>(cfg.size());
    d.seed = scenario.seed;
    d.samples.resize(count);

    auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
        {
            Rng rng(derive_seed(scenario.seed, i));
            LabeledSample s;
            s.channel = sample_channel(scenario, cfg, rng);
            const BeamChoice best = optimal_beam(s.channel, codebook);
            s.label = static_cast<std::uint32_t>(best.index);
            const double rsrp = 10.0 * std::log10(std::max(tx_mw * best.power, 1e-30));
            s.best_rsrp_dbm = std::clamp(rsrp, -140.0, -40.0);
            d.samples[i] = std::move(s);
        }
    };

    unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1)
    {
        fill(0, count);
        return d;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t)
    {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin < end)
            pool.emplace_back(fill, begin, end);
    }
    for (auto &th : pool)
        th.join();
    return d;
}

std::vector<std::uint8_t> encode_dataset(const Dataset &d)
{
    ByteWriter w;
    for (char c : dataset_magic)
        w.put_u8(static_cast<std::uint8_t>(c));
    w.put_u8(dataset_version);
    w.put_u32(d.n);
    w.put_u32(static_cast<std::uint32_t>(d.samples.size()));
    w.put_u64(d.seed);
    for (const auto &s : d.samples)
    {
        if (s.channel.size() != d.n)
            throw Error(ErrorCode::ShapeMismatch, "sample channel length differs from dataset N");
        w.put_u32(s.label);
        w.put_f64(s.best_rsrp_dbm);
        for (const auto &x : s.channel.h())
        {
            w.put_f64(x.real());
            w.put_f64(x.imag());
        }
    }
    w.put_checksum();
    return w.take();
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() >= 5)
    {
        ByteReader head(bytes.first(5));
        for (char c : dataset_magic)
            if (head.get_u8() != static_cast<std::uint8_t>(c))
                throw Error(ErrorCode::FormatVersionMismatch, "not a dataset file (bad magic)");
        const std::uint8_t version = head.get_u8();
        if (version != dataset_version)
            throw Error(ErrorCode::FormatVersionMismatch, "unsupported dataset version " + std::to_string(version));
    }
    const auto payload = verify_trailing_checksum(bytes);
    ByteReader r(payload);
    r.get_bytes(5);
    Dataset d;
    d.n = r.get_u32();
    const std::uint32_t count = r.get_u32();
    d.seed = r.get_u64();
    const std::size_t per_sample = 4 + 8 + 16 * static_cast<std::size_t>(d.n);
    if (d.n == 0 || r.remaining() != per_sample * count)
        throw Error(ErrorCode::ChecksumMismatch, "dataset payload length does not match header");
    d.samples.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i)
    {
        LabeledSample s;
        s.label = r.get_u32();
        s.best_rsrp_dbm = r.get_f64();
        CVec h(d.n);
        for (auto &x : h)
        {
            const double re = r.get_f64();
            const double im = r.get_f64();
            x = {re, im};
        }
        s.channel = Channel(std::move(h));
        d.samples.push_back(std::move(s));
    }
    return d;
}

void save_dataset(const Dataset &d, const std::filesystem::path &path)
{
    const auto bytes = encode_dataset(d);
    write_file_atomic(path, bytes);
}

Dataset load_dataset(const std::filesystem::path &path) { return decode_dataset(read_file(path)); }

} // namespace beamcraft
