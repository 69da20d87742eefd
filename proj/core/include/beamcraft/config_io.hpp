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
#include "beamcraft/evaluation.hpp"
#include "beamcraft/probe_frontend.hpp"
#include "beamcraft/training.hpp"

#include <nlohmann/json.hpp>

// Strict JSON mapping of the configuration structs. Missing keys take their
// defaults, unknown keys raise ConfigInvalid, and serialization always writes
// every field so echoed configs are self-describing.

namespace beamcraft
{

void to_json(nlohmann::json &j, const ArrayConfig &c);
void from_json(const nlohmann::json &j, ArrayConfig &c);

void to_json(nlohmann::json &j, const ScenarioConfig &c);
void from_json(const nlohmann::json &j, ScenarioConfig &c);

void to_json(nlohmann::json &j, const SensingConfig &c);
void from_json(const nlohmann::json &j, SensingConfig &c);

void to_json(nlohmann::json &j, const AdamConfig &c);
void from_json(const nlohmann::json &j, AdamConfig &c);

void to_json(nlohmann::json &j, const TrainConfig &c);
void from_json(const nlohmann::json &j, TrainConfig &c);

void to_json(nlohmann::json &j, const OverheadModel &c);
void from_json(const nlohmann::json &j, OverheadModel &c);

// Walks an object, handing out values by key and rejecting leftovers.
class StrictObject
{
public:
    StrictObject(const nlohmann::json &j, std::string context);

    bool has(const std::string &key) const;
    const nlohmann::json &at(const std::string &key); // required
    template <typename T> void get(const std::string &key, T &out)
    {
        if (has(key))
            out = value(key).template get<T>();
    }
    template <typename T> T require(const std::string &key) { return at(key).template get<T>(); }

    const std::string &context() const noexcept { return context_; }
    void finish();

private:
    const nlohmann::json &value(const std::string &key);

    const nlohmann::json &json_;
    std::string context_;
    std::vector<std::string> seen_;
};

} // namespace beamcraft
