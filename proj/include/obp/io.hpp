// Copyright 2026 The OBP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "obp/circuit.hpp"
#include "obp/pauli.hpp"

namespace obp {

struct MeasurementGroup;

using json = nlohmann::json;

/// [{"pauli": "ZIIX", "coeff": 0.5}, ...] in ascending address order.
json observable_to_json(const PauliSum& s);
PauliSum observable_from_json(const json& j);

/**
 * {"n": int, "slices": [[{"kind": str, "qubits": [...], "angle": real?,
 * "generator": str?}, ...], ...]}
 */
json circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const json& j);

/// {"n": int, "edges": [[i,j],...], "colors": [int,...]}; colors are computed when absent.
json lattice_to_json(const Lattice& lat);
Lattice lattice_from_json(const json& j);

/// [{"basis": str, "paulis": [str,...]}, ...]
json groups_to_json(const std::vector<MeasurementGroup>& groups);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Lattice load_lattice(const std::filesystem::path& path);

}  // namespace obp
