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

#include "obp/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "obp/io.hpp"

namespace obp {

std::string_view gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::Sdg: return "Sdg";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::CX: return "CX";
    case GateKind::PauliRotation: return "PauliRotation";
  }
  return "?";
}

GateKind parse_gate_kind(std::string_view name) {
  for (GateKind k : {GateKind::H, GateKind::S, GateKind::Sdg, GateKind::X, GateKind::Y, GateKind::Z,
                     GateKind::CX, GateKind::PauliRotation}) {
    if (gate_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown gate kind '" + std::string(name) + "'");
}

Gate Gate::clifford(GateKind kind, std::vector<std::size_t> qubits) {
  if (kind == GateKind::PauliRotation) {
    throw std::invalid_argument("PauliRotation needs a generator; use Gate::rotation");
  }
  Gate g;
  g.kind = kind;
  g.qubits = std::move(qubits);
  return g;
}

Gate Gate::rotation(const PauliKey& generator, double angle) {
  Gate g;
  g.kind = GateKind::PauliRotation;
  g.qubits = generator.support();
  g.angle = angle;
  g.generator = generator;
  return g;
}

void Gate::validate(std::size_t n) const {
  const std::size_t arity = kind == GateKind::CX ? 2 : 1;
  if (kind == GateKind::PauliRotation) {
    if (!generator) throw std::invalid_argument("PauliRotation without generator");
    if (generator->num_qubits() != n) {
      throw std::invalid_argument("rotation generator has the wrong qubit count");
    }
    if (generator->is_identity()) throw std::invalid_argument("rotation generator is the identity");
    if (!std::isfinite(angle)) throw std::invalid_argument("rotation angle is not finite");
    if (qubits != generator->support()) {
      throw std::invalid_argument("rotation qubits do not match the generator support");
    }
    return;
  }
  if (generator || angle != 0.0) {
    throw std::invalid_argument(std::string(gate_kind_name(kind)) + " takes no angle or generator");
  }
  if (qubits.size() != arity) {
    throw std::invalid_argument(std::string(gate_kind_name(kind)) + " expects " +
                                std::to_string(arity) + " qubit(s)");
  }
  for (std::size_t q : qubits) {
    if (q >= n) throw std::out_of_range("gate qubit " + std::to_string(q) + " out of range");
  }
  if (arity == 2 && qubits[0] == qubits[1]) {
    throw std::invalid_argument("CX control and target coincide");
  }
}

// ---------------------------------------------------------------------------
// Circuit

Circuit::Circuit(std::size_t n, std::vector<Slice> slices) : n_(n) {
  if (n == 0) throw std::invalid_argument("circuit needs at least one qubit");
  for (auto& s : slices) append(std::move(s));
}

std::size_t Circuit::num_gates() const {
  std::size_t count = 0;
  for (const auto& s : slices_) count += s.gates.size();
  return count;
}

void Circuit::append(Slice slice) {
  for (const auto& g : slice.gates) g.validate(n_);
  slices_.push_back(std::move(slice));
}

void Circuit::append(const Circuit& other) {
  if (other.n_ != n_) throw std::invalid_argument("cannot append circuits of different width");
  for (const auto& s : other.slices_) slices_.push_back(s);
}

Circuit Circuit::one_gate_per_slice() const {
  Circuit out(n_);
  for (const auto& s : slices_) {
    for (const auto& g : s.gates) out.slices_.push_back(Slice{{g}});
  }
  return out;
}

std::pair<Circuit, Circuit> Circuit::split_at(std::size_t count) const {
  if (count > slices_.size()) throw std::out_of_range("split position past the last slice");
  Circuit head(n_), tail(n_);
  head.slices_.assign(slices_.begin(), slices_.begin() + static_cast<std::ptrdiff_t>(count));
  tail.slices_.assign(slices_.begin() + static_cast<std::ptrdiff_t>(count), slices_.end());
  return {std::move(head), std::move(tail)};
}

// ---------------------------------------------------------------------------
// Lattice

std::string_view lattice_kind_name(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::ChainOpen: return "chain";
    case LatticeKind::ChainClosed: return "chain_closed";
    case LatticeKind::HeavyHex: return "heavy_hex";
    case LatticeKind::Custom: return "custom";
  }
  return "custom";
}

int Lattice::num_colors() const {
  return colors.empty() ? 0 : *std::max_element(colors.begin(), colors.end()) + 1;
}

std::vector<std::vector<std::size_t>> Lattice::edges_by_color() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_colors()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out[static_cast<std::size_t>(colors[e])].push_back(e);
  }
  return out;
}

void Lattice::validate() const {
  if (colors.size() != edges.size()) {
    throw std::invalid_argument("lattice needs exactly one color per edge");
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::set<int>> colors_at(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [a, b] = edges[e];
    if (a >= n || b >= n) throw std::out_of_range("lattice edge endpoint out of range");
    if (a == b) throw std::invalid_argument("lattice self-loop");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) {
      throw std::invalid_argument("duplicate lattice edge");
    }
    if (colors[e] < 0) throw std::invalid_argument("negative edge color");
    if (!colors_at[a].insert(colors[e]).second || !colors_at[b].insert(colors[e]).second) {
      throw std::invalid_argument("improper edge coloring at edge (" + std::to_string(a) + "," +
                                  std::to_string(b) + ")");
    }
  }
}

Lattice chain_lattice(std::size_t n, bool closed) {
  if (n < 2) throw std::invalid_argument("a chain needs at least two sites");
  Lattice lat;
  lat.n = n;
  lat.kind = closed ? LatticeKind::ChainClosed : LatticeKind::ChainOpen;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    lat.edges.emplace_back(i, i + 1);
    lat.colors.push_back(static_cast<int>(i % 2));
  }
  if (closed && n > 2) {
    lat.edges.emplace_back(n - 1, 0);
    // An odd ring needs a third color for the wrap-around edge.
    lat.colors.push_back(n % 2 == 0 ? 1 : 2);
  }
  lat.validate();
  return lat;
}

namespace {

// Evens out color class sizes by swapping two-colored components that hold
// more edges of the larger color. Each swap keeps the coloring proper.
void balance_colors(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                    std::vector<int>& color) {
  if (edges.empty()) return;
  const int palette = *std::max_element(color.begin(), color.end()) + 1;
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    incident[edges[e].first].push_back(e);
    incident[edges[e].second].push_back(e);
  }
  for (;;) {
    std::vector<std::size_t> size(static_cast<std::size_t>(palette), 0);
    for (int c : color) ++size[static_cast<std::size_t>(c)];
    const auto big = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
    const auto small = static_cast<int>(std::min_element(size.begin(), size.end()) - size.begin());
    if (size[static_cast<std::size_t>(big)] <= size[static_cast<std::size_t>(small)] + 1) return;

    std::vector<char> seen(edges.size(), 0);
    bool swapped = false;
    for (std::size_t start = 0; start < edges.size() && !swapped; ++start) {
      if (seen[start] || color[start] != big) continue;
      std::vector<std::size_t> comp{start}, stack{start};
      seen[start] = 1;
      while (!stack.empty()) {
        const std::size_t e = stack.back();
        stack.pop_back();
        for (std::size_t v : {edges[e].first, edges[e].second}) {
          for (std::size_t f : incident[v]) {
            if (!seen[f] && (color[f] == big || color[f] == small)) {
              seen[f] = 1;
              comp.push_back(f);
              stack.push_back(f);
            }
          }
        }
      }
      long diff = 0;
      for (std::size_t e : comp) diff += color[e] == big ? 1 : -1;
      if (diff <= 0) continue;
      for (std::size_t e : comp) color[e] = color[e] == big ? small : big;
      swapped = true;
    }
    if (!swapped) return;
  }
}

}  // namespace

std::vector<int> edge_coloring(std::size_t n,
                               const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::size_t> degree(n, 0);
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw std::out_of_range("edge endpoint out of range");
    ++degree[a];
    ++degree[b];
  }
  const std::size_t max_degree = degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
  std::size_t palette = std::max<std::size_t>(max_degree, 1);

  // at[v][c] is the edge of color c at v, or -1.
  std::vector<std::vector<long>> at(n, std::vector<long>(palette, -1));
  std::vector<int> color(edges.size(), -1);
  auto other_end = [&](std::size_t e, std::size_t v) {
    return edges[e].first == v ? edges[e].second : edges[e].first;
  };
  auto free_color = [&](std::size_t v) {
    for (std::size_t c = 0; c < palette; ++c) {
      if (at[v][c] < 0) return static_cast<long>(c);
    }
    return -1L;
  };
  auto grow = [&]() {
    ++palette;
    for (auto& row : at) row.push_back(-1);
  };

  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [u, v] = edges[e];
    long common = -1;
    for (std::size_t c = 0; c < palette && common < 0; ++c) {
      if (at[u][c] < 0 && at[v][c] < 0) common = static_cast<long>(c);
    }
    if (common < 0) {
      const long a = free_color(u);
      const long b = free_color(v);
      // Kempe chain: the a/b alternating path from v. Swapping it frees a at v.
      std::vector<std::size_t> path;
      std::size_t cur = v;
      long want = a;
      bool hits_u = false;
      while (a >= 0 && b >= 0 && at[cur][static_cast<std::size_t>(want)] >= 0) {
        const auto pe = static_cast<std::size_t>(at[cur][static_cast<std::size_t>(want)]);
        path.push_back(pe);
        cur = other_end(pe, cur);
        if (cur == u) hits_u = true;
        want = want == a ? b : a;
      }
      if (a < 0 || b < 0 || hits_u) {
        grow();
        common = static_cast<long>(palette - 1);
      } else {
        for (std::size_t pe : path) {
          at[edges[pe].first][static_cast<std::size_t>(color[pe])] = -1;
          at[edges[pe].second][static_cast<std::size_t>(color[pe])] = -1;
        }
        for (std::size_t pe : path) {
          color[pe] = color[pe] == a ? static_cast<int>(b) : static_cast<int>(a);
          at[edges[pe].first][static_cast<std::size_t>(color[pe])] = static_cast<long>(pe);
          at[edges[pe].second][static_cast<std::size_t>(color[pe])] = static_cast<long>(pe);
        }
        common = a;
      }
    }
    color[e] = static_cast<int>(common);
    at[u][static_cast<std::size_t>(common)] = static_cast<long>(e);
    at[v][static_cast<std::size_t>(common)] = static_cast<long>(e);
  }
  balance_colors(n, edges, color);
  return color;
}

Lattice heavy_hex_lattice() {
  std::string dir = OBP_DATA_DIR;
  if (const char* env = std::getenv("OBP_DATA_DIR")) dir = env;
  return load_lattice(dir + "/heavy_hex_127.json");
}

// ---------------------------------------------------------------------------
// Synthesis

namespace {

PauliKey two_site(std::size_t n, std::size_t a, std::size_t b, char p) {
  PauliKey k(n);
  k.set(a, p);
  k.set(b, p);
  return k;
}

PauliKey one_site(std::size_t n, std::size_t a, char p) {
  PauliKey k(n);
  k.set(a, p);
  return k;
}

Slice edge_layer(const Lattice& lat, const std::vector<std::size_t>& edge_ids, double angle) {
  Slice s;
  for (std::size_t e : edge_ids) {
    auto [a, b] = lat.edges[e];
    s.gates.push_back(Gate::rotation(two_site(lat.n, a, b, 'X'), angle));
    s.gates.push_back(Gate::rotation(two_site(lat.n, a, b, 'Y'), angle));
  }
  return s;
}

Slice field_layer(std::size_t n, double angle) {
  Slice s;
  for (std::size_t q = 0; q < n; ++q) s.gates.push_back(Gate::rotation(one_site(n, q, 'Z'), angle));
  return s;
}

}  // namespace

std::string_view trotter_ordering_name(TrotterOrdering o) {
  switch (o) {
    case TrotterOrdering::Symmetric: return "symmetric";
    case TrotterOrdering::XXThenYY: return "xx_then_yy";
    case TrotterOrdering::Repeated: return "repeated";
  }
  return "symmetric";
}

TrotterOrdering parse_trotter_ordering(std::string_view name) {
  if (name == "symmetric") return TrotterOrdering::Symmetric;
  if (name == "xx_then_yy" || name == "xx-then-yy") return TrotterOrdering::XXThenYY;
  if (name == "repeated") return TrotterOrdering::Repeated;
  throw std::invalid_argument("unknown Trotter ordering '" + std::string(name) + "'");
}

Circuit synth_xy_trotter(const Lattice& lattice, const XYTrotterParams& p) {
  if (p.steps <= 0) throw std::invalid_argument("Trotter step count must be positive");
  if (!std::isfinite(p.J) || !std::isfinite(p.h) || !std::isfinite(p.tau)) {
    throw std::invalid_argument("non-finite Trotter parameter");
  }
  lattice.validate();
  const std::size_t n = lattice.n;
  const double edge_angle = 2.0 * p.J * p.tau;
  const double field_angle = 2.0 * p.h * p.tau;
  const bool with_field = p.h != 0.0;
  Circuit circuit(n);

  if (p.ordering == TrotterOrdering::XXThenYY) {
    Slice xx, yy;
    for (auto [a, b] : lattice.edges) {
      xx.gates.push_back(Gate::rotation(two_site(n, a, b, 'X'), edge_angle));
      yy.gates.push_back(Gate::rotation(two_site(n, a, b, 'Y'), edge_angle));
    }
    for (int step = 0; step < p.steps; ++step) {
      if (!xx.gates.empty()) circuit.append(xx);
      if (!yy.gates.empty()) circuit.append(yy);
      if (with_field) circuit.append(field_layer(n, field_angle));
    }
    return circuit;
  }

  const auto by_color = lattice.edges_by_color();
  const int m = static_cast<int>(by_color.size());
  const bool symmetric = p.ordering == TrotterOrdering::Symmetric;
  struct Layer {
    int color;
    int multiplicity;
    int fields_after;
  };
  std::vector<Layer> layers;
  for (int step = 0; step < p.steps; ++step) {
    std::vector<int> order(static_cast<std::size_t>(m));
    const bool flip = symmetric && step % 2 == 1;
    for (int c = 0; c < m; ++c) order[static_cast<std::size_t>(c)] = flip ? m - 1 - c : c;
    std::size_t first = 0;
    if (symmetric && p.merge_adjacent && step > 0 && m > 0) {
      ++layers.back().multiplicity;
      first = 1;
    }
    for (std::size_t i = first; i < order.size(); ++i) layers.push_back({order[i], 1, 0});
    if (with_field) {
      if (layers.empty()) layers.push_back({-1, 0, 0});
      ++layers.back().fields_after;
    }
  }
  for (const auto& layer : layers) {
    if (layer.color >= 0) {
      circuit.append(edge_layer(lattice, by_color[static_cast<std::size_t>(layer.color)],
                                edge_angle * layer.multiplicity));
    }
    for (int f = 0; f < layer.fields_after; ++f) circuit.append(field_layer(n, field_angle));
  }
  return circuit;
}

// ---------------------------------------------------------------------------
// Analysis

Circuit lightcone_prune(const Circuit& circuit, const std::set<std::size_t>& support) {
  if (support.empty()) throw std::invalid_argument("lightcone support is empty");
  const std::size_t n = circuit.num_qubits();
  std::vector<char> live(n, 0);
  for (std::size_t q : support) {
    if (q >= n) throw std::out_of_range("lightcone support qubit out of range");
    live[q] = 1;
  }
  std::vector<Slice> kept(circuit.num_slices());
  for (std::size_t s = circuit.num_slices(); s-- > 0;) {
    const auto& gates = circuit.slices()[s].gates;
    std::vector<Gate> rev;
    for (std::size_t g = gates.size(); g-- > 0;) {
      const auto& gate = gates[g];
      const bool touches = std::any_of(gate.qubits.begin(), gate.qubits.end(),
                                       [&](std::size_t q) { return live[q] != 0; });
      if (!touches) continue;
      for (std::size_t q : gate.qubits) live[q] = 1;
      rev.push_back(gate);
    }
    kept[s].gates.assign(rev.rbegin(), rev.rend());
  }
  return Circuit(n, std::move(kept));
}

std::size_t two_qubit_depth(const Circuit& circuit) {
  std::vector<std::size_t> depth(circuit.num_qubits(), 0);
  std::size_t best = 0;
  for (const auto& s : circuit.slices()) {
    for (const auto& g : s.gates) {
      if (g.qubits.size() < 2) continue;
      std::size_t d = 0;
      for (std::size_t q : g.qubits) d = std::max(d, depth[q]);
      ++d;
      for (std::size_t q : g.qubits) depth[q] = d;
      best = std::max(best, d);
    }
  }
  return best;
}

std::size_t two_qubit_gate_count(const Circuit& circuit) {
  std::size_t count = 0;
  for (const auto& s : circuit.slices()) {
    for (const auto& g : s.gates) count += g.qubits.size() >= 2 ? 1 : 0;
  }
  return count;
}

}  // namespace obp
