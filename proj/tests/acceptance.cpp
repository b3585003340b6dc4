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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "obp/backprop.hpp"
#include "obp/circuit.hpp"
#include "obp/distributed.hpp"
#include "obp/experiments.hpp"
#include "obp/grouping.hpp"
#include "obp/oracle.hpp"
#include "support.hpp"

namespace obp {
namespace {

using Clock = std::chrono::steady_clock;
using test::Rng;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

PauliSum z_on(std::size_t n, std::size_t q) {
  PauliKey k(n);
  k.set(q, 'Z');
  return PauliSum::single(k, 1.0);
}

Circuit xy_chain(std::size_t n, bool closed, double tau, int steps, TrotterOrdering o,
                 double h = 0.0) {
  XYTrotterParams p;
  p.tau = tau;
  p.steps = steps;
  p.ordering = o;
  p.h = h;
  return synth_xy_trotter(chain_lattice(n, closed), p);
}

Circuit sub_circuit(const Circuit& c, std::size_t first, std::size_t last) {
  return Circuit(c.num_qubits(),
                 std::vector<Slice>(c.slices().begin() + first, c.slices().begin() + last));
}

// 12-qubit closed chain, dt = 0.1, five steps.
Circuit closed12_steps5() { return xy_chain(12, true, 0.1, 5, TrotterOrdering::Repeated); }

void ac1(Outcome& o) {
  const auto t0 = Clock::now();
  const Circuit c = closed12_steps5();
  const auto r = backpropagate(z_on(12, 0), c, BudgetSchedule::zero(c.num_slices()));
  const double secs = since(t0);
  const Circuit sc = xy_chain(12, true, 0.1, 5, TrotterOrdering::Symmetric);
  const auto sym = backpropagate(z_on(12, 0), sc, BudgetSchedule::zero(sc.num_slices()));
  o.pass = r.op.size() == 271 && secs < 5.0;
  o.detail << "terms=" << r.op.size() << " target=271 runtime_s=" << secs
           << " (symmetric ordering gives " << sym.op.size() << ")";
}

void ac2(Outcome& o) {
  const Circuit c = closed12_steps5();
  const auto r = backpropagate(z_on(12, 0), c, BudgetSchedule::zero(c.num_slices()));
  DenseState psi(12);
  apply_circuit(psi, c);
  const auto rows = bound_sweep(r.op, psi, false);
  std::size_t l1_ok = 0, l2_ok = 0;
  for (const auto& row : rows) {
    if (row.exact_error <= row.l1_bound + 1e-12) ++l1_ok;
    if (row.exact_error <= row.l2_estimate + 1e-12) ++l2_ok;
  }
  Rng rng(2024);
  std::size_t rand_levels = 0, rand_l1_ok = 0, rand_l2_ok = 0;
  for (int i = 0; i < 100; ++i) {
    const Circuit rc = test::random_circuit(rng, 10, 1 + rng() % 6, 4);
    const PauliSum obs = test::random_sum(rng, 10, 1 + rng() % 4);
    const auto rb = backpropagate(obs, rc, BudgetSchedule::zero(rc.num_slices()));
    const DenseState st = test::random_state(rng, 10);
    for (const auto& row : bound_sweep(rb.op, st, false)) {
      ++rand_levels;
      if (row.exact_error <= row.l1_bound + 1e-12) ++rand_l1_ok;
      if (row.exact_error <= row.l2_estimate + 1e-12) ++rand_l2_ok;
    }
  }
  const double l2_frac = static_cast<double>(l2_ok) / static_cast<double>(rows.size());
  o.pass = rows.size() >= 50 && l1_ok == rows.size() && rand_l1_ok == rand_levels &&
           l2_frac >= 0.95;
  o.detail << "chain12_levels=" << rows.size() << " l1_held=" << l1_ok << " l2_held=" << l2_ok
           << " (" << l2_frac << ") random_levels=" << rand_levels << " l1_held=" << rand_l1_ok
           << " l2_held=" << rand_l2_ok;
}

void ac3(Outcome& o) {
  const auto t0 = Clock::now();
  const Lattice chain = chain_lattice(75, false);
  const Lattice hex = heavy_hex_lattice();
  std::size_t bad = 0;
  std::size_t chain_gates = 0, chain_depth = 0, hex_gates = 0, hex_depth = 0;
  for (int k = 1; k <= 25; ++k) {
    XYTrotterParams p;
    p.steps = k;
    const Circuit a = synth_xy_trotter(chain, p);
    const Circuit b = synth_xy_trotter(hex, p);
    if (two_qubit_depth(a) != static_cast<std::size_t>(2 * k + 2)) ++bad;
    if (two_qubit_depth(b) != static_cast<std::size_t>(4 * k + 2)) ++bad;
    if (k == 25) {
      chain_gates = two_qubit_gate_count(a);
      chain_depth = two_qubit_depth(a);
      hex_gates = two_qubit_gate_count(b);
      hex_depth = two_qubit_depth(b);
    }
  }
  const double secs = since(t0);
  o.pass = bad == 0 && chain_gates == 1924 && chain_depth == 52 && hex_gates == 4896 &&
           hex_depth == 102 && secs < 1.0;
  o.detail << "formula_mismatches=" << bad << " chain75_k25=" << chain_gates << "/" << chain_depth
           << " heavyhex_k25=" << hex_gates << "/" << hex_depth << " runtime_s=" << secs;
}

void ac4(Outcome& o) {
  const auto t0 = Clock::now();
  const Circuit c = xy_chain(75, false, 0.05, 5, TrotterOrdering::Symmetric);
  std::vector<PauliSum> obs;
  for (std::size_t q = 0; q < 75; ++q) obs.push_back(z_on(75, q));
  const SiteSummary s = per_site_backprop(c, obs, 0.001, 0.009, Norm::L2, 5);
  const double secs = since(t0);
  const double lo = 370 * 0.85, hi = 370 * 1.15;
  const double u = static_cast<double>(s.unique_final);
  o.pass = u >= lo && u <= hi && s.groups <= 10 && secs < 60.0;
  o.detail << "unique_final=" << s.unique_final << " target=370+-15% unique_initial="
           << s.unique_initial << " qwc_groups=" << s.groups << " (max 10) mean_final="
           << s.mean_final << " runtime_s=" << secs;
}

void ac5(Outcome& o) {
  Rng rng(5);
  double worst = 0.0, worst_cut = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng() % 8;
    const std::size_t depth = 1 + rng() % 20;
    const Circuit c = test::random_circuit(rng, n, depth, 1 + rng() % 4);
    const PauliSum obs = test::random_sum(rng, n, 1 + rng() % std::min<std::size_t>(4, 3 * n));
    const DenseState psi = test::random_state(rng, n);
    const auto r = backpropagate(obs, c, BudgetSchedule::zero(c.num_slices()));
    DenseState full = psi;
    apply_circuit(full, c);
    const double ref = expectation(full, obs);
    worst = std::max(worst, std::abs(expectation(psi, r.op) - ref));
    const std::size_t cut = rng() % (c.num_slices() + 1);
    const Circuit head = sub_circuit(c, 0, cut);
    const Circuit tail = sub_circuit(c, cut, c.num_slices());
    const auto rt = backpropagate(obs, tail, BudgetSchedule::zero(tail.num_slices()));
    DenseState front = psi;
    apply_circuit(front, head);
    worst_cut = std::max(worst_cut, std::abs(expectation(front, rt.op) - ref));
  }
  o.pass = worst <= 1e-10 && worst_cut <= 1e-10;
  o.detail << "circuits=200 max_error=" << worst << " max_cut_error=" << worst_cut;
}

void ac6(Outcome& o) {
  Rng rng(6);
  std::size_t applications = 0;
  double worst = 0.0;
  while (applications < 10000) {
    const std::size_t n = 1 + rng() % 8;
    PauliSum s = test::random_sum(rng, n, 1 + rng() % std::min<std::size_t>(30, 3 * n));
    const Circuit c = test::random_circuit(rng, n, 5, 2);
    for (const auto& slice : c.slices()) {
      for (const auto& g : slice.gates) {
        const double before = l2_norm(s);
        s = conjugate_gate(s, g);
        worst = std::max(worst, std::abs(l2_norm(s) - before));
        ++applications;
      }
    }
  }
  o.pass = worst <= 1e-12;
  o.detail << "gate_applications=" << applications << " max_l2_drift=" << worst;
}

void ac7(Outcome& o) {
  Rng rng(7);
  double worst = 0.0;
  std::size_t runs = 0;
  for (std::size_t n = 2; n <= 10; ++n) {
    const PauliSum m = polarization(n);
    const DenseState psi = test::random_state(rng, n);
    const double m0 = expectation(psi, m);
    for (int k = 1; k <= 25; ++k) {
      for (bool closed : {false, true}) {
        if (closed && n < 3) continue;
        const Circuit c = xy_chain(n, closed, 0.1, k, TrotterOrdering::Symmetric, 0.7);
        DenseState st = psi;
        apply_circuit(st, c);
        worst = std::max(worst, std::abs(expectation(st, m) - m0));
        ++runs;
      }
    }
  }
  o.pass = worst <= 1e-10;
  o.detail << "circuits=" << runs << " max_drift=" << worst;
}

void ac8(Outcome& o) {
  const auto t0 = Clock::now();
  const std::vector<double> taus{0.01, 0.015, 0.02, 0.03, 0.05, 0.07, 0.1};
  const std::vector<double> mus{4.0, 6.0, 8.0};
  LocalizationParams base;
  base.n = 12;
  const LocalizationSweep s = localization_sweep(taus, mus, base);
  const double secs = since(t0);
  double slope4 = 0.0;
  for (const auto& [mu, slope] : s.slopes) {
    if (mu == 4.0) slope4 = slope;
  }
  o.pass = std::abs(slope4 - 2.0) <= 0.2 && s.collapse_spread_2j < 3.0 && secs < 600.0;
  for (const auto& [mu, slope] : s.slopes) o.detail << "slope_mu" << mu << "=" << slope << " ";
  o.detail << "spread(mu-2J)=" << s.collapse_spread_2j << " spread(mu-J)=" << s.collapse_spread_1j
           << " runtime_s=" << secs;
}

void ac9(Outcome& o) {
  Rng rng(9);
  const std::size_t n = 14;
  const PauliSum obs = test::random_sum(rng, n, 10000);
  const Circuit c = test::random_circuit(rng, n, 4, 5);
  const auto sched = BudgetSchedule::even(0.05, c.num_slices(), Norm::L2);
  const auto ref = backpropagate(obs, c, sched);
  const Truncation ref_cut = truncate(obs, 0.05, Norm::L2);
  double worst = 0.0;
  bool sizes = true, dedup = true, rebal = true, loads = true, cut = true;
  for (std::size_t R : {2u, 4u, 8u}) {
    const auto d = distributed_backpropagate(obs, c, sched, {R});
    sizes = sizes && d.result.op.size() == ref.op.size();
    worst = std::max(worst, test::max_coeff_diff(d.result.op, ref.op));
    for (const auto& st : d.per_slice) {
      dedup = dedup && st.dedup_messages <= R * (R - 1);
      rebal = rebal && st.rebalance_messages <= 6 * R;
      loads = loads && st.max_load - st.min_load <= 2;
    }
    // Worst-case skew: every term starts on node 0.
    PauliSum skew(n);
    for (std::uint64_t a = 0; a < 10000; ++a) skew.add(decode_address(PauliAddress(a), n), 1.0);
    ClusterRun cl(skew, {R});
    const auto rs = rebalance(cl);
    rebal = rebal && rs.protocol_messages <= 6 * R;
    const double avg = 10000.0 / static_cast<double>(R);
    for (const auto& node : cl.nodes()) {
      loads = loads && std::abs(static_cast<double>(node.local.size()) - avg) <= 1.0;
    }
    ClusterRun ct(obs, {R});
    rebalance(ct);
    const auto dt = distributed_truncate(ct, 0.05, Norm::L2);
    cut = cut && dt.removed.size() == ref_cut.removed.size();
    for (std::size_t i = 0; cut && i < dt.removed.size(); ++i) {
      cut = dt.removed[i].key == ref_cut.removed[i].key;
    }
  }
  o.pass = sizes && worst <= 1e-12 && dedup && rebal && loads && cut;
  o.detail << "input_terms=" << obs.size() << " output_terms=" << ref.op.size()
           << " max_coeff_diff=" << worst << " dedup_ok=" << dedup << " rebalance_ok=" << rebal
           << " loads_ok=" << loads << " truncation_set_identical=" << cut
           << " removed=" << ref_cut.removed.size();
}

void ac10(Outcome& o) {
  const auto rows = split_demo(SplitDemoParams{}, 5, 25);
  std::size_t ok = 0;
  double worst_ratio = 0.0;
  for (const auto& r : rows) {
    if (r.within_bound) ++ok;
    if (r.max_site_bound > 0) worst_ratio = std::max(worst_ratio, r.max_site_error / r.max_site_bound);
  }
  o.pass = ok == rows.size() && rows.size() == 21;
  o.detail << "k=5..25 within_bound=" << ok << "/" << rows.size()
           << " worst_error_to_bound=" << worst_ratio << " last_estimate=" << rows.back().estimate
           << " last_reference=" << rows.back().reference;
}

}  // namespace
}  // namespace obp

int main() {
  const std::vector<std::pair<const char*, std::function<void(obp::Outcome&)>>> criteria{
      {"AC1", obp::ac1}, {"AC2", obp::ac2}, {"AC3", obp::ac3}, {"AC4", obp::ac4},
      {"AC5", obp::ac5}, {"AC6", obp::ac6}, {"AC7", obp::ac7}, {"AC8", obp::ac8},
      {"AC9", obp::ac9}, {"AC10", obp::ac10}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    obp::Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s %s %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
