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

#include "beamcraft/config_io.hpp"
#include "beamcraft/errors.hpp"

#include <algorithm>

namespace beamcraft
{

using nlohmann::json;

StrictObject::StrictObject(const json &j, std::string context) : json_(j), context_(std::move(context))
{
    if (!json_.is_object())
        throw Error(ErrorCode::ConfigInvalid, context_ + ": expected a JSON object");
}

bool StrictObject::has(const std::string &key) const { return json_.contains(key); }

const json &StrictObject::value(const std::string &key)
{
    if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
        seen_.push_back(key);
    return json_.at(key);
}

const json &StrictObject::at(const std::string &key)
{
    if (!has(key))
        throw Error(ErrorCode::ConfigInvalid, context_ + ": missing required key '" + key + "'");
    return value(key);
}

void StrictObject::finish()
{
    for (const auto &[key, _] : json_.items())
        if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
            throw Error(ErrorCode::ConfigInvalid, context_ + ": unknown key '" + key + "'");
}

namespace
{

// Rewrites nlohmann type errors as configuration errors naming the section.
template <typename F> void guarded(const std::string &context, F &&f)
{
    try
    {
        f();
    }
    catch (const nlohmann::json::exception &e)
    {
        throw Error(ErrorCode::ConfigInvalid, context + ": " + e.what());
    }
}

} // namespace

void to_json(json &j, const ArrayConfig &c) { j = json{{"n_phi", c.n_phi}, {"n_theta", c.n_theta}}; }

void from_json(const json &j, ArrayConfig &c)
{
    StrictObject o(j, "array");
    guarded(o.context(), [&] {
        o.get("n_phi", c.n_phi);
        o.get("n_theta", c.n_theta);
    });
    o.finish();
}

void to_json(json &j, const ScenarioConfig &c)
{
    j = json{{"n_paths", c.n_paths},           {"n_clusters", c.n_clusters},     {"cluster_spread", c.cluster_spread},
             {"los_gain_db", c.los_gain_db}, {"nlos_gain_db", c.nlos_gain_db}, {"seed", c.seed}};
}

void from_json(const json &j, ScenarioConfig &c)
{
    StrictObject o(j, "scenario");
    guarded(o.context(), [&] {
        o.get("n_paths", c.n_paths);
        o.get("n_clusters", c.n_clusters);
        o.get("cluster_spread", c.cluster_spread);
        o.get("los_gain_db", c.los_gain_db);
        o.get("nlos_gain_db", c.nlos_gain_db);
        o.get("seed", c.seed);
    });
    o.finish();
}

void to_json(json &j, const SensingConfig &c)
{
    j = json{{"tx_power_dbm", c.tx_power_dbm}, {"noise_power_dbm", c.noise_power_dbm},
             {"noise_enabled", c.noise_enabled}};
}

void from_json(const json &j, SensingConfig &c)
{
    StrictObject o(j, "sensing");
    guarded(o.context(), [&] {
        o.get("tx_power_dbm", c.tx_power_dbm);
        o.get("noise_power_dbm", c.noise_power_dbm);
        o.get("noise_enabled", c.noise_enabled);
    });
    o.finish();
}

void to_json(json &j, const AdamConfig &c)
{
    j = json{{"lr", c.lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon}};
}

void from_json(const json &j, AdamConfig &c)
{
    StrictObject o(j, "adam");
    guarded(o.context(), [&] {
        o.get("lr", c.lr);
        o.get("beta1", c.beta1);
        o.get("beta2", c.beta2);
        o.get("epsilon", c.epsilon);
    });
    o.finish();
}

void to_json(json &j, const TrainConfig &c)
{
    j = json{{"epochs", c.epochs},
             {"batch_size", c.batch_size},
             {"probe_variant", std::string(to_string(c.probe_variant))},
             {"probe_count", c.probe_count},
             {"noise_bits", c.noise_bits ? json(*c.noise_bits) : json(nullptr)},
             {"noise_unit", std::string(to_string(c.noise_unit))},
             {"sensing_noise", c.sensing_noise},
             {"adam", c.adam},
             {"probe_adam", c.probe_adam},
             {"seed", c.seed},
             {"freeze_probes", c.freeze_probes},
             {"eval_quantize_rsrp", c.eval_quantize_rsrp}};
}

void from_json(const json &j, TrainConfig &c)
{
    StrictObject o(j, "train");
    guarded(o.context(), [&] {
        o.get("epochs", c.epochs);
        o.get("batch_size", c.batch_size);
        if (o.has("probe_variant"))
            c.probe_variant = parse_probe_variant(o.require<std::string>("probe_variant"));
        o.get("probe_count", c.probe_count);
        if (o.has("noise_bits"))
        {
            const json &v = o.at("noise_bits");
            c.noise_bits = v.is_null() ? std::nullopt : std::optional<int>(v.get<int>());
        }
        if (o.has("noise_unit"))
            c.noise_unit = parse_phase_noise_unit(o.require<std::string>("noise_unit"));
        o.get("sensing_noise", c.sensing_noise);
        // Nested blocks update in place so partial overrides keep the
        // train-level defaults (the probe learning rate differs).
        if (o.has("adam"))
            from_json(o.at("adam"), c.adam);
        if (o.has("probe_adam"))
            from_json(o.at("probe_adam"), c.probe_adam);
        o.get("seed", c.seed);
        o.get("freeze_probes", c.freeze_probes);
        o.get("eval_quantize_rsrp", c.eval_quantize_rsrp);
    });
    o.finish();
}

void to_json(json &j, const OverheadModel &c)
{
    j = json{{"symbol_duration", c.symbol_duration},
             {"slot_duration", c.slot_duration},
             {"symbols_per_probe", c.symbols_per_probe},
             {"users", c.users}};
}

void from_json(const json &j, OverheadModel &c)
{
    StrictObject o(j, "overhead");
    guarded(o.context(), [&] {
        o.get("symbol_duration", c.symbol_duration);
        o.get("slot_duration", c.slot_duration);
        o.get("symbols_per_probe", c.symbols_per_probe);
        o.get("users", c.users);
    });
    o.finish();
}

} // namespace beamcraft
