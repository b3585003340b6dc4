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

#include <span>
#include <string>
#include <vector>

#include "obp/pauli.hpp"

namespace obp {

struct MeasurementGroup {
  std::vector<PauliKey> keys;
  /// Per-qubit join of the members.
  PauliKey basis;

  std::string basis_string() const { return basis.str(); }
};

/**
 * Greedy first-fit in the given order: each key joins the first group whose
 * basis it is qubit-wise compatible with, otherwise opens a new group.
 * Repeated keys are placed once.
 */
std::vector<MeasurementGroup> group_qwc(std::span<const PauliKey> keys);

/// Orders the terms by descending |c|, then ascending address, and groups them.
std::vector<MeasurementGroup> group_qwc(const PauliSum& s);

/// Groups the union of the keys of several sums, ordered by the largest |c| seen for each key.
std::vector<MeasurementGroup> group_qwc_union(std::span<const PauliSum> sums);

/// True when `key` can be measured in `basis` (every non-identity factor matches).
bool measurable_in(const PauliKey& key, const PauliKey& basis);

using KeyValues = PauliKeyMap<double>;

/// Sum over grouped keys of c_P * v_P. Throws std::invalid_argument when a key lacks a value or coefficient.
double reconstruct_expectation(std::span<const MeasurementGroup> groups, const KeyValues& values,
                               const KeyValues& coeffs);

}  // namespace obp
