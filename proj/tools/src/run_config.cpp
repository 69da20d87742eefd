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

#include "run_config.hpp"

#include "beamcraft/config_io.hpp"
#include "beamcraft/errors.hpp"
#include "beamcraft/random.hpp"

#include <fstream>
#include <sstream>

namespace beamcraft::cli
{

using nlohmann::json;

namespace
{

enum : std::uint64_t
{
    tag_train_data = 0x747261696e,
    tag_val_data = 0x76616c,
};

template <typename F> void guarded(const std::string &context, F &&f)
{
    try
    {
        f();
    }
    catch (const json::exception &e)
    {
        throw Error(ErrorCode::ConfigInvalid, context + ": " + e.what());
    }
}

// Absent and null both mean "not set".
template <typename T> std::optional<T> get_optional(StrictObject &o, const std::string &key)
{
    if (!o.has(key))
        return std::nullopt;
    const json &v = o.at(key);
    return v.is_null() ? std::nullopt : std::optional<T>(v.get<T>());
}

template <typename T> json optional_json(const std::optional<T> &v) { return v ? json(*v) : json(nullptr); }

} // namespace

std::uint64_t DataSection::resolved_train_seed(std::uint64_t master) const
{
    return train_seed ? *train_seed : derive_seed(master, tag_train_data);
}

std::uint64_t DataSection::resolved_val_seed(std::uint64_t master) const
{
    return val_seed ? *val_seed : derive_seed(master, tag_val_data);
}

void RunConfig::validate() const
{
    array.validate();
    scenario.validate();
    train.validate();
    overhead.validate();
    if (data.train_count == 0 || data.val_count == 0)
        throw Error(ErrorCode::ConfigInvalid, "data: train_count and val_count must be >= 1");
    if (eval.phase_bits < 1 || eval.phase_bits > 16)
        throw Error(ErrorCode::ConfigInvalid, "eval: phase_bits must be in 1..16");
    if (sweep.users.empty())
        throw Error(ErrorCode::ConfigInvalid, "sweep: users must not be empty");
    if (output_dir.empty())
        throw Error(ErrorCode::ConfigInvalid, "output_dir must not be empty");
}

RunConfig parse_run_config(const json &j)
{
    RunConfig c;
    StrictObject root(j, "config");
    guarded("config", [&] {
        if (root.has("array"))
            from_json(root.at("array"), c.array);
        if (root.has("scenario"))
            from_json(root.at("scenario"), c.scenario);
        if (root.has("sensing"))
            from_json(root.at("sensing"), c.sensing);
        if (root.has("train"))
            from_json(root.at("train"), c.train);
        if (root.has("overhead"))
            from_json(root.at("overhead"), c.overhead);

        StrictObject data(root.at("data"), "data");
        c.data.train_count = data.require<std::size_t>("train_count");
        c.data.val_count = data.require<std::size_t>("val_count");
        c.data.train_seed = get_optional<std::uint64_t>(data, "train_seed");
        c.data.val_seed = get_optional<std::uint64_t>(data, "val_seed");
        data.finish();

        if (root.has("eval"))
        {
            StrictObject e(root.at("eval"), "eval");
            e.get("phase_bits", c.eval.phase_bits);
            e.get("noise_seed", c.eval.noise_seed);
            e.finish();
        }
        if (root.has("sweep"))
        {
            StrictObject s(root.at("sweep"), "sweep");
            s.get("users", c.sweep.users);
            s.get("reprobe", c.sweep.reprobe);
            s.get("hierarchical_groups", c.sweep.hierarchical_groups);
            c.sweep.binary_rounds = get_optional<std::size_t>(s, "binary_rounds");
            s.get("noise_seed", c.sweep.noise_seed);
            s.finish();
        }
        root.get("output_dir", c.output_dir);
    });
    root.finish();
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::ConfigInvalid, "cannot read config " + path.string());
    json j;
    try
    {
        j = json::parse(in);
    }
    catch (const json::exception &e)
    {
        throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
    }
    return parse_run_config(j);
}

json to_json(const RunConfig &c)
{
    return json{
        {"array", c.array},
        {"scenario", c.scenario},
        {"sensing", c.sensing},
        {"train", c.train},
        {"overhead", c.overhead},
        {"data",
         {{"train_count", c.data.train_count},
          {"val_count", c.data.val_count},
          {"train_seed", optional_json(c.data.train_seed)},
          {"val_seed", optional_json(c.data.val_seed)}}},
        {"eval", {{"phase_bits", c.eval.phase_bits}, {"noise_seed", c.eval.noise_seed}}},
        {"sweep",
         {{"users", c.sweep.users},
          {"reprobe", c.sweep.reprobe},
          {"hierarchical_groups", c.sweep.hierarchical_groups},
          {"binary_rounds", optional_json(c.sweep.binary_rounds)},
          {"noise_seed", c.sweep.noise_seed}}},
        {"output_dir", c.output_dir},
    };
}

std::string canonical_dump(const json &j) { return j.dump(2) + "\n"; }

} // namespace beamcraft::cli
