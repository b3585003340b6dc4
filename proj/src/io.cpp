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

#include "obp/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "obp/grouping.hpp"

namespace obp {

json observable_to_json(const PauliSum& s) {
  json out = json::array();
  for (const auto& t : s.sorted_terms()) {
    out.push_back({{"pauli", t.key.str()}, {"coeff", t.coeff}});
  }
  return out;
}

PauliSum observable_from_json(const json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("observable JSON must be a non-empty list of {pauli, coeff}");
  }
  std::vector<PauliTerm> terms;
  for (const auto& item : j) {
    terms.push_back({PauliKey::from_string(item.at("pauli").get<std::string>()),
                     item.at("coeff").get<double>()});
  }
  const std::size_t n = terms.front().key.num_qubits();
  return PauliSum::from_terms(n, terms);
}

json circuit_to_json(const Circuit& c) {
  json slices = json::array();
  for (const auto& s : c.slices()) {
    json gates = json::array();
    for (const auto& g : s.gates) {
      json jg = {{"kind", std::string(gate_kind_name(g.kind))}, {"qubits", g.qubits}};
      if (g.kind == GateKind::PauliRotation) {
        jg["angle"] = g.angle;
        jg["generator"] = g.generator->str();
      }
      gates.push_back(std::move(jg));
    }
    slices.push_back(std::move(gates));
  }
  return {{"n", c.num_qubits()}, {"slices", std::move(slices)}};
}

Circuit circuit_from_json(const json& j) {
  const auto n = j.at("n").get<std::size_t>();
  std::vector<Slice> slices;
  for (const auto& js : j.at("slices")) {
    Slice s;
    for (const auto& jg : js) {
      const GateKind kind = parse_gate_kind(jg.at("kind").get<std::string>());
      if (kind == GateKind::PauliRotation) {
        Gate g = Gate::rotation(PauliKey::from_string(jg.at("generator").get<std::string>()),
                                jg.at("angle").get<double>());
        if (jg.contains("qubits") && jg["qubits"].get<std::vector<std::size_t>>() != g.qubits) {
          throw std::invalid_argument("rotation qubits disagree with its generator");
        }
        s.gates.push_back(std::move(g));
      } else {
        s.gates.push_back(Gate::clifford(kind, jg.at("qubits").get<std::vector<std::size_t>>()));
      }
    }
    slices.push_back(std::move(s));
  }
  return Circuit(n, std::move(slices));
}

json lattice_to_json(const Lattice& lat) {
  json edges = json::array();
  for (auto [a, b] : lat.edges) edges.push_back({a, b});
  return {{"n", lat.n},
          {"kind", std::string(lattice_kind_name(lat.kind))},
          {"edges", std::move(edges)},
          {"colors", lat.colors}};
}

Lattice lattice_from_json(const json& j) {
  Lattice lat;
  lat.n = j.at("n").get<std::size_t>();
  for (const auto& e : j.at("edges")) {
    if (e.size() != 2) throw std::invalid_argument("lattice edge must have two endpoints");
    lat.edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
  }
  const std::string kind = j.value("kind", "custom");
  if (kind == "chain") lat.kind = LatticeKind::ChainOpen;
  else if (kind == "chain_closed") lat.kind = LatticeKind::ChainClosed;
  else if (kind == "heavy_hex") lat.kind = LatticeKind::HeavyHex;
  else lat.kind = LatticeKind::Custom;
  if (j.contains("colors")) {
    lat.colors = j["colors"].get<std::vector<int>>();
  } else {
    lat.colors = edge_coloring(lat.n, lat.edges);
  }
  lat.validate();
  return lat;
}

json groups_to_json(const std::vector<MeasurementGroup>& groups) {
  json out = json::array();
  for (const auto& g : groups) {
    json paulis = json::array();
    for (const auto& k : g.keys) paulis.push_back(k.str());
    out.push_back({{"basis", g.basis.str()}, {"paulis", std::move(paulis)}});
  }
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

Lattice load_lattice(const std::filesystem::path& path) { return lattice_from_json(read_json_file(path)); }

}  // namespace obp
