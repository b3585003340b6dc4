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

#include "obp/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

namespace obp {

std::string_view engine_version() { return "obp 0.3.0"; }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

std::vector<double> parse_list(std::string_view s) {
  std::vector<double> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const std::string_view item = s.substr(0, comma);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("not a number: '" + std::string(item) + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

constexpr int kExitLimit = 3;

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// RunConfig

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = {{"observable", observable},
                      {"budget", budget},
                      {"budget_policy", budget_policy},
                      {"norm", std::string(norm_name(norm))},
                      {"seed", seed}};
  if (circuit_path) {
    j["circuit"] = *circuit_path;
  } else {
    j["lattice"] = lattice;
    j["qubits"] = qubits;
    j["steps"] = steps;
    j["tau"] = tau;
    j["J"] = J;
    j["h"] = h;
    j["ordering"] = ordering;
  }
  j["max_terms"] = max_terms ? nlohmann::json(*max_terms) : nlohmann::json(nullptr);
  j["max_seconds"] = max_seconds ? nlohmann::json(*max_seconds) : nlohmann::json(nullptr);
  return j;
}

void RunConfig::validate() const {
  if (!circuit_path) {
    if (lattice != "chain" && lattice != "chain-closed" && lattice != "heavyhex") {
      throw ConfigError("unknown lattice '" + lattice + "'");
    }
    if (lattice != "heavyhex" && qubits < 2) throw ConfigError("a chain needs at least 2 qubits");
    if (steps < 0) throw ConfigError("steps must be non-negative");
    if (!std::isfinite(tau) || !std::isfinite(J) || !std::isfinite(h)) {
      throw ConfigError("tau, J and h must be finite");
    }
    try {
      parse_trotter_ordering(ordering);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (!(budget >= 0.0) || !std::isfinite(budget)) throw ConfigError("budget must be >= 0");
  if (max_terms && *max_terms == 0) throw ConfigError("max_terms must be positive");
  if (max_seconds && !(*max_seconds > 0.0)) throw ConfigError("max_seconds must be positive");
  if (budget_policy != "even" && !starts_with(budget_policy, "final-heavy=") &&
      !starts_with(budget_policy, "explicit=")) {
    throw ConfigError("unknown budget policy '" + budget_policy + "'");
  }
  if (observable.empty()) throw ConfigError("empty observable");
}

Lattice build_lattice(const RunConfig& cfg) {
  if (cfg.lattice == "heavyhex") return heavy_hex_lattice();
  return chain_lattice(cfg.qubits, cfg.lattice == "chain-closed");
}

Circuit build_circuit(const RunConfig& cfg) {
  try {
    if (cfg.circuit_path) {
      nlohmann::json j = read_json_file(*cfg.circuit_path);
      if (j.is_object() && j.contains("circuit")) j = j["circuit"];
      return circuit_from_json(j);
    }
    if (cfg.steps == 0) return Circuit(build_lattice(cfg).n);
    XYTrotterParams p;
    p.J = cfg.J;
    p.h = cfg.h;
    p.tau = cfg.tau;
    p.steps = cfg.steps;
    p.ordering = parse_trotter_ordering(cfg.ordering);
    return synth_xy_trotter(build_lattice(cfg), p);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("circuit: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("circuit: ") + e.what());
  }
}

BudgetSchedule build_budget(const RunConfig& cfg, std::size_t num_slices) {
  const std::string& p = cfg.budget_policy;
  try {
    if (p == "even") return BudgetSchedule::even(cfg.budget, num_slices, cfg.norm);
    if (starts_with(p, "final-heavy=")) {
      const auto f = parse_list(std::string_view(p).substr(12));
      if (f.size() != 1) throw ConfigError("final-heavy takes one fraction");
      return BudgetSchedule::final_heavy(cfg.budget, f[0], num_slices, cfg.norm);
    }
    if (starts_with(p, "explicit=")) {
      const auto v = parse_list(std::string_view(p).substr(9));
      if (v.size() != num_slices + 1) {
        throw ConfigError("explicit budget needs " + std::to_string(num_slices + 1) +
                          " values (one per slice, then the final pass)");
      }
      BudgetSchedule s{cfg.norm, std::vector<double>(v.begin(), v.end() - 1), v.back(), true};
      s.validate(num_slices);
      return s;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown budget policy '" + p + "'");
}

bool per_site_observable(const RunConfig& cfg) { return starts_with(cfg.observable, "each:"); }

std::vector<PauliSum> build_observables(const RunConfig& cfg, std::size_t n) {
  const std::string& spec = cfg.observable;
  auto site_char = [&](std::string_view rest) {
    if (rest.size() != 1 || std::string_view("XYZ").find(rest[0]) == std::string_view::npos) {
      throw ConfigError("observable family must be one of X, Y, Z: '" + spec + "'");
    }
    return rest[0];
  };
  try {
    if (starts_with(spec, "sum:") || starts_with(spec, "mean:") || starts_with(spec, "each:")) {
      const auto colon = spec.find(':');
      const char c = site_char(std::string_view(spec).substr(colon + 1));
      const double w = starts_with(spec, "mean:") ? 1.0 / static_cast<double>(n) : 1.0;
      std::vector<PauliSum> out;
      PauliSum total(n);
      for (std::size_t q = 0; q < n; ++q) {
        PauliKey k(n);
        k.set(q, c);
        if (starts_with(spec, "each:")) {
          out.push_back(PauliSum::single(k, 1.0));
        } else {
          total.add(k, w);
        }
      }
      if (out.empty()) out.push_back(std::move(total));
      return out;
    }
    if (std::filesystem::exists(spec)) {
      nlohmann::json j = read_json_file(spec);
      if (j.is_object() && j.contains("observable")) j = j["observable"];
      PauliSum s = observable_from_json(j);
      if (s.num_qubits() != n) throw ConfigError("observable width differs from the circuit");
      return {s};
    }
    // Sparse single term, e.g. "Z0 X3".
    PauliKey k(n);
    std::istringstream in(spec);
    std::string tok;
    while (in >> tok) {
      if (tok.size() < 2) throw ConfigError("bad observable factor '" + tok + "'");
      const char c = site_char(tok.substr(0, 1));
      std::size_t q = 0;
      const auto [ptr, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), q);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || q >= n) {
        throw ConfigError("bad observable factor '" + tok + "'");
      }
      if (k.at(q) != 'I') throw ConfigError("qubit repeated in observable '" + spec + "'");
      k.set(q, c);
    }
    return {PauliSum::single(k, 1.0)};
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("observable: ") + e.what());
  }
}

nlohmann::json envelope(const RunConfig& cfg, nlohmann::json payload) {
  payload["config"] = cfg.to_json();
  payload["engine_version"] = std::string(engine_version());
  return payload;
}

namespace {

std::string csv_preamble(const nlohmann::json& header) { return "# " + header.dump() + "\n"; }

nlohmann::json csv_header(const RunConfig& cfg) {
  return {{"config", cfg.to_json()}, {"engine_version", std::string(engine_version())}};
}

}  // namespace

BackpropReport run_backprop(const RunConfig& cfg, const Circuit& circuit,
                            const PauliSum& observable) {
  EngineLimits limits{cfg.max_terms, cfg.max_seconds};
  BackpropReport rep;
  rep.result = backpropagate(observable, circuit, build_budget(cfg, circuit.num_slices()), limits);
  if (!rep.result.op.empty()) rep.groups = group_qwc(rep.result.op);
  return rep;
}

std::string pass_stats_csv(const BackpropResult& r, std::size_t num_slices,
                           const nlohmann::json& header) {
  std::string out = csv_preamble(header);
  out += "pass,slice,terms_before,terms_after,budget,truncated_weight,truncated_l1,truncated_l2,"
         "accrued_bound\n";
  const std::size_t S = r.per_slice.size();
  auto row = [&](const std::string& pass, const std::string& slice, const PassStats& p) {
    out += pass + "," + slice + "," + std::to_string(p.terms_before) + "," +
           std::to_string(p.terms_after) + "," + format_double(p.budget) + "," +
           format_double(p.truncated_weight) + "," + format_double(p.truncated_l1) + "," +
           format_double(p.truncated_l2) + "," + format_double(p.accrued_after) + "\n";
  };
  for (std::size_t i = 0; i < S; ++i) {
    row(std::to_string(i), std::to_string(num_slices - 1 - i), r.per_slice[i]);
  }
  if (r.final_pass) row("final", "", *r.final_pass);
  return out;
}

// ---------------------------------------------------------------------------
// Per-site observables

SiteSummary per_site_backprop(const Circuit& circuit, std::span<const PauliSum> observables,
                              double initial, double final_budget, Norm norm,
                              std::size_t backprop_steps) {
  SiteSummary s;
  s.backprop_steps = backprop_steps;
  s.initial_budget = initial;
  s.final_budget = final_budget;
  const BudgetSchedule sched = BudgetSchedule::two_phase(initial, 0.0, circuit.num_slices(), norm);
  PauliKeyMap<char> uniq_initial, uniq_final;
  std::vector<double> n_initial, n_final;

  std::vector<PauliSum> initials;
  std::vector<double> accrued;
  const auto t0 = Clock::now();
  for (const auto& obs : observables) {
    BackpropResult r = backpropagate(obs, circuit, sched);
    accrued.push_back(r.accrued_l2);
    initials.push_back(std::move(r.op));
  }
  s.initial_seconds = seconds_since(t0);

  const auto t1 = Clock::now();
  for (std::size_t i = 0; i < initials.size(); ++i) {
    Truncation tr = truncate(initials[i], final_budget, norm);
    s.accrued_l2.push_back(accrued[i] + error_bound(tr.removed, Norm::L2));
    s.finals.push_back(std::move(tr.kept));
  }
  s.final_seconds = seconds_since(t1);

  for (std::size_t i = 0; i < initials.size(); ++i) {
    n_initial.push_back(static_cast<double>(initials[i].size()));
    n_final.push_back(static_cast<double>(s.finals[i].size()));
    for (const auto& [k, c] : initials[i]) uniq_initial.emplace(k, 0);
    for (const auto& [k, c] : s.finals[i]) uniq_final.emplace(k, 0);
  }
  auto mean = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
  };
  auto median = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  s.unique_initial = uniq_initial.size();
  s.unique_final = uniq_final.size();
  s.mean_initial = mean(n_initial);
  s.mean_final = mean(n_final);
  s.median_initial = median(n_initial);
  s.median_final = median(n_final);
  bool any = false;
  for (const auto& f : s.finals) any = any || !f.empty();
  s.groups = any ? group_qwc_union(s.finals).size() : 0;
  return s;
}

nlohmann::json site_summary_json(const SiteSummary& s) {
  return {{"backprop_steps", s.backprop_steps},
          {"initial_budget", s.initial_budget},
          {"final_budget", s.final_budget},
          {"total_budget", s.initial_budget + s.final_budget},
          {"unique_paulis_initial", s.unique_initial},
          {"unique_paulis_final", s.unique_final},
          {"mean_paulis_initial", s.mean_initial},
          {"mean_paulis_final", s.mean_final},
          {"median_paulis_initial", s.median_initial},
          {"median_paulis_final", s.median_final},
          {"qwc_groups", s.groups}};
}

// ---------------------------------------------------------------------------
// Error bounds

std::vector<BoundRow> bound_sweep(const PauliSum& op, const DenseState& state, bool spectral) {
  std::vector<PauliTerm> order = op.sorted_terms();
  std::sort(order.begin(), order.end(), truncation_before);
  std::vector<BoundRow> rows;
  PauliSum delta(op.num_qubits());
  double l1 = 0.0, l2sq = 0.0, signed_exp = 0.0;
  for (std::size_t level = 0; level <= order.size(); ++level) {
    if (level > 0) {
      const PauliTerm& t = order[level - 1];
      delta.insert_new(t.key, t.coeff);
      l1 += std::abs(t.coeff);
      l2sq += t.coeff * t.coeff;
      signed_exp += t.coeff * pauli_expectation(state, t.key).real();
    }
    BoundRow r;
    r.level = level;
    r.kept = order.size() - level;
    r.exact_error = std::abs(signed_exp);
    r.spectral_norm = spectral && level > 0 ? spectral_norm(delta) : 0.0;
    r.l1_bound = l1;
    r.l2_estimate = std::sqrt(l2sq);
    rows.push_back(r);
  }
  return rows;
}

std::string bound_rows_csv(const std::vector<BoundRow>& rows, const nlohmann::json& header) {
  std::string out = csv_preamble(header);
  out += "level,kept,exact_error,spectral_norm,l1_bound,l2_estimate\n";
  for (const auto& r : rows) {
    out += std::to_string(r.level) + "," + std::to_string(r.kept) + "," +
           format_double(r.exact_error) + "," + format_double(r.spectral_norm) + "," +
           format_double(r.l1_bound) + "," + format_double(r.l2_estimate) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Localization

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(x.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

LocalizationSweep localization_sweep(const std::vector<double>& taus,
                                     const std::vector<double>& mus,
                                     const LocalizationParams& base) {
  LocalizationSweep out;
  double lo2 = INFINITY, hi2 = 0, lo1 = INFINITY, hi1 = 0;
  for (double mu : mus) {
    std::vector<double> xs, ys;
    for (double tau : taus) {
      LocalizationParams p = base;
      p.mu = mu;
      p.tau = tau;
      const double d = localization_deviation(p);
      out.rows.push_back({tau, mu, d});
      if (tau > 0 && mu * tau < 1.0 && d > 0) {
        xs.push_back(tau);
        ys.push_back(d);
        const double c2 = d * (mu - 2 * base.J) * (mu - 2 * base.J) / (tau * tau);
        const double c1 = d * (mu - base.J) * (mu - base.J) / (tau * tau);
        lo2 = std::min(lo2, c2);
        hi2 = std::max(hi2, c2);
        lo1 = std::min(lo1, c1);
        hi1 = std::max(hi1, c1);
      }
    }
    if (xs.size() >= 2) out.slopes.push_back({mu, loglog_slope(xs, ys)});
  }
  out.collapse_spread_2j = hi2 > 0 ? hi2 / lo2 : 0.0;
  out.collapse_spread_1j = hi1 > 0 ? hi1 / lo1 : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Split demo

std::vector<std::size_t> excitation_sites(std::size_t n, std::size_t count) {
  if (count > n) throw std::invalid_argument("more excitations than sites");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double pos = (static_cast<double>(i) + 0.5) * static_cast<double>(n) /
                           static_cast<double>(count) - 0.5;
    out.push_back(static_cast<std::size_t>(std::lround(std::max(0.0, pos))));
  }
  return out;
}

std::vector<SplitRow> split_demo(const SplitDemoParams& p, int first_k, int last_k) {
  if (first_k < p.backprop_steps || last_k < first_k) {
    throw std::invalid_argument("split demo needs backprop_steps <= first_k <= last_k");
  }
  const Lattice lat = chain_lattice(p.n, true);
  XYTrotterParams tp;
  tp.tau = p.tau;
  tp.ordering = TrotterOrdering::Repeated;
  auto steps_circuit = [&](int k) {
    if (k == 0) return Circuit(p.n);
    tp.steps = k;
    return synth_xy_trotter(lat, tp);
  };
  Circuit prep(p.n);
  {
    Slice s;
    for (std::size_t q : excitation_sites(p.n, p.excitations)) s.gates.push_back(Gate::x(q));
    prep.append(s);
  }
  std::vector<PauliSum> sites;
  for (std::size_t q = 0; q < p.n; ++q) {
    PauliKey z(p.n);
    z.set(q, 'Z');
    sites.push_back(PauliSum::single(z, 1.0));
  }
  const Circuit tail = steps_circuit(p.backprop_steps);
  const BudgetSchedule sched =
      BudgetSchedule::two_phase(p.initial_budget, p.final_budget, tail.num_slices(), Norm::L2);

  // The backpropagated operators do not depend on k.
  std::vector<BackpropResult> back;
  PauliKeyMap<char> uniq;
  for (const auto& o : sites) {
    back.push_back(backpropagate(o, tail, sched));
    for (const auto& [k, c] : back.back().op) uniq.emplace(k, 0);
  }
  std::vector<PauliSum> ops;
  for (const auto& b : back) ops.push_back(b.op);
  const auto groups = group_qwc_union(ops);

  std::vector<SplitRow> rows;
  for (int k = first_k; k <= last_k; ++k) {
    DenseState front(p.n);
    apply_circuit(front, prep);
    DenseState full = front;
    apply_circuit(front, steps_circuit(k - p.backprop_steps));
    apply_circuit(full, steps_circuit(k));

    KeyValues values;
    for (const auto& g : groups) {
      for (const auto& key : g.keys) values[key] = pauli_expectation(front, key).real();
    }
    SplitRow row;
    row.steps = k;
    row.backprop_steps = p.backprop_steps;
    row.unique_paulis = uniq.size();
    row.groups = groups.size();
    for (std::size_t q = 0; q < p.n; ++q) {
      KeyValues coeffs;
      for (const auto& [key, unused] : uniq) coeffs[key] = 0.0;
      for (const auto& [key, c] : back[q].op) coeffs[key] = c;
      const double est = reconstruct_expectation(groups, values, coeffs);
      const double ref = expectation(full, sites[q]);
      const double err = std::abs(est - ref);
      row.estimate += est / static_cast<double>(p.n);
      row.reference += ref / static_cast<double>(p.n);
      if (err > row.max_site_error) {
        row.max_site_error = err;
        row.max_site_bound = back[q].accrued_l1;
      }
      if (err > back[q].accrued_l1 + 1e-12) row.within_bound = false;
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Subcommands

namespace {

Circuit checked_circuit(const RunConfig& cfg) {
  cfg.validate();
  return build_circuit(cfg);
}

int write_backprop(const RunConfig& cfg, const Circuit& circuit, const std::filesystem::path& out,
                   const BackpropResult& r, const std::vector<MeasurementGroup>& groups) {
  const nlohmann::json header = csv_header(cfg);
  nlohmann::json obs = {{"observable", observable_to_json(r.op)},
                        {"terms", r.op.size()},
                        {"accrued_error", r.accrued_error},
                        {"accrued_l1", r.accrued_l1},
                        {"accrued_l2", r.accrued_l2},
                        {"slices_completed", r.slices_completed},
                        {"num_slices", circuit.num_slices()},
                        {"termination", std::string(termination_name(r.termination))}};
  write_text_file(out / "observable.json", envelope(cfg, obs).dump(1) + "\n");
  write_text_file(out / "stats.csv", pass_stats_csv(r, circuit.num_slices(), header));
  write_text_file(out / "groups.json",
                  envelope(cfg, {{"groups", groups_to_json(groups)}}).dump(1) + "\n");
  return r.termination == Termination::Completed ? 0 : kExitLimit;
}

void print_result(const BackpropResult& r, double secs) {
  std::cout << "terms " << r.op.size() << "  accrued " << format_double(r.accrued_error)
            << "  termination " << termination_name(r.termination) << "  runtime_s "
            << format_double(secs) << "\n";
}

}  // namespace

int cmd_backprop(const RunConfig& cfg, const std::filesystem::path& out) {
  const Circuit circuit = checked_circuit(cfg);
  const auto obs = build_observables(cfg, circuit.num_qubits());
  const auto t0 = Clock::now();
  if (per_site_observable(cfg)) {
    if (cfg.max_terms || cfg.max_seconds) throw ConfigError("limits are not supported with each:");
    const BudgetSchedule b = build_budget(cfg, circuit.num_slices());
    double initial = 0.0;
    for (double x : b.per_slice) initial += x;
    const SiteSummary s =
        per_site_backprop(circuit, obs, initial, b.final_pass, cfg.norm,
                          cfg.circuit_path ? 0 : static_cast<std::size_t>(cfg.steps));
    nlohmann::json finals = nlohmann::json::array();
    std::string csv = csv_preamble(csv_header(cfg)) + "site,terms_final,accrued_l2\n";
    for (std::size_t i = 0; i < s.finals.size(); ++i) {
      finals.push_back(observable_to_json(s.finals[i]));
      csv += std::to_string(i) + "," + std::to_string(s.finals[i].size()) + "," +
             format_double(s.accrued_l2[i]) + "\n";
    }
    write_text_file(out / "summary.json", envelope(cfg, site_summary_json(s)).dump(1) + "\n");
    write_text_file(out / "observables.json",
                    envelope(cfg, {{"observables", finals}}).dump(1) + "\n");
    write_text_file(out / "sites.csv", csv);
    write_text_file(out / "groups.json",
                    envelope(cfg, {{"groups", groups_to_json(group_qwc_union(s.finals))}}).dump(1) +
                        "\n");
    std::cout << "unique_paulis " << s.unique_final << "  mean_per_site "
              << format_double(s.mean_final) << "  qwc_groups " << s.groups << "  runtime_s "
              << format_double(s.initial_seconds) << "/" << format_double(s.final_seconds)
              << "\n";
    return 0;
  }
  const BackpropReport rep = run_backprop(cfg, circuit, obs.front());
  print_result(rep.result, seconds_since(t0));
  return write_backprop(cfg, circuit, out, rep.result, rep.groups);
}

int cmd_distributed(const RunConfig& cfg, const DistributedConfig& dist,
                    const std::filesystem::path& out) {
  const Circuit circuit = checked_circuit(cfg);
  if (dist.nodes == 0) throw ConfigError("nodes must be positive");
  if (per_site_observable(cfg)) throw ConfigError("each: observables run through backprop");
  const auto obs = build_observables(cfg, circuit.num_qubits());
  ClusterOptions opts{dist.nodes, dist.transport, dist.threads};
  const auto t0 = Clock::now();
  DistributedResult dr = distributed_backpropagate(
      obs.front(), circuit, build_budget(cfg, circuit.num_slices()), opts,
      EngineLimits{cfg.max_terms, cfg.max_seconds});
  print_result(dr.result, seconds_since(t0));
  const auto groups = dr.result.op.empty() ? std::vector<MeasurementGroup>{}
                                           : group_qwc(dr.result.op);
  const int code = write_backprop(cfg, circuit, out, dr.result, groups);

  nlohmann::json slices = nlohmann::json::array();
  for (const auto& s : dr.per_slice) {
    slices.push_back({{"dedup_messages", s.dedup_messages},
                      {"rebalance_messages", s.rebalance_messages},
                      {"migration_messages", s.migration_messages},
                      {"truncation_rounds", s.truncation_rounds},
                      {"truncation_messages", s.truncation_messages},
                      {"max_load", s.max_load},
                      {"min_load", s.min_load}});
  }
  nlohmann::json info = {{"nodes", dist.nodes},
                         {"transport", std::string(transport_name(dist.transport))},
                         {"messages", dr.message_log.size()},
                         {"per_slice", slices}};
  write_text_file(out / "distributed.json", envelope(cfg, info).dump(1) + "\n");
  write_text_file(out / "message_log.jsonl", dr.message_log_jsonl);
  return code;
}

int cmd_synth(const RunConfig& cfg, const std::filesystem::path& out) {
  const Circuit circuit = checked_circuit(cfg);
  const std::size_t depth = two_qubit_depth(circuit);
  const std::size_t gates = two_qubit_gate_count(circuit);
  nlohmann::json report = {{"two_qubit_depth", depth},
                           {"two_qubit_gates", gates},
                           {"num_slices", circuit.num_slices()},
                           {"num_gates", circuit.num_gates()}};
  write_text_file(out / "circuit.json",
                  envelope(cfg, {{"circuit", circuit_to_json(circuit)}}).dump() + "\n");
  write_text_file(out / "report.json", envelope(cfg, report).dump(1) + "\n");
  std::cout << "two_qubit_depth " << depth << "  two_qubit_gates " << gates << "\n";
  return 0;
}

int cmd_bench_bounds(const RunConfig& cfg, const std::filesystem::path& out) {
  const Circuit circuit = checked_circuit(cfg);
  const std::size_t n = circuit.num_qubits();
  if (n > kMaxStateQubits) throw ConfigError("bench-bounds needs a dense-simulable width");
  const auto obs = build_observables(cfg, n);
  if (obs.size() != 1) throw ConfigError("bench-bounds takes a single observable");
  const BackpropResult r =
      backpropagate(obs.front(), circuit, BudgetSchedule::zero(circuit.num_slices(), cfg.norm));
  // The same circuit prepares the state: U_Q = U_C.
  DenseState psi(n);
  apply_circuit(psi, circuit);
  const auto rows = bound_sweep(r.op, psi, n <= kMaxOperatorQubits);
  write_text_file(out / "bounds.csv", bound_rows_csv(rows, csv_header(cfg)));
  std::cout << "terms " << r.op.size() << "  levels " << rows.size() << "\n";
  return 0;
}

int cmd_localization(const RunConfig& cfg, const std::vector<double>& taus,
                     const std::vector<double>& mus, const std::filesystem::path& out) {
  if (taus.empty() || mus.empty()) throw ConfigError("localization needs tau and mu grids");
  if (cfg.qubits > kMaxStateQubits) throw ConfigError("localization needs a dense-simulable width");
  LocalizationParams base;
  base.n = cfg.qubits;
  base.J = cfg.J;
  const auto sweep = localization_sweep(taus, mus, base);
  nlohmann::json header = csv_header(cfg);
  header["taus"] = taus;
  header["mus"] = mus;
  std::string csv = csv_preamble(header) + "tau,mu,delta\n";
  for (const auto& r : sweep.rows) {
    csv += format_double(r.tau) + "," + format_double(r.mu) + "," + format_double(r.delta) + "\n";
  }
  write_text_file(out / "localization.csv", csv);
  nlohmann::json fit = {{"collapse_spread_mu_minus_2J", sweep.collapse_spread_2j},
                        {"collapse_spread_mu_minus_J", sweep.collapse_spread_1j},
                        {"taus", taus},
                        {"mus", mus}};
  nlohmann::json slopes = nlohmann::json::array();
  for (auto [mu, s] : sweep.slopes) slopes.push_back({{"mu", mu}, {"slope", s}});
  fit["slopes"] = slopes;
  write_text_file(out / "fit.json", envelope(cfg, fit).dump(1) + "\n");
  for (auto [mu, s] : sweep.slopes) std::cout << "mu " << mu << "  slope " << s << "\n";
  return 0;
}

int cmd_group(const RunConfig& cfg, const std::filesystem::path& out) {
  if (!std::filesystem::exists(cfg.observable)) {
    throw ConfigError("group needs an observable JSON file");
  }
  nlohmann::json j;
  try {
    j = read_json_file(cfg.observable);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  std::vector<PauliSum> sums;
  try {
    if (j.is_object() && j.contains("observables")) {
      for (const auto& o : j["observables"]) {
        if (!o.empty()) sums.push_back(observable_from_json(o));
      }
    } else {
      if (j.is_object() && j.contains("observable")) j = j["observable"];
      sums.push_back(observable_from_json(j));
    }
  } catch (const std::exception& e) {
    throw ConfigError(std::string("observable: ") + e.what());
  }
  if (sums.empty()) throw ConfigError("nothing to group");
  const auto groups = group_qwc_union(sums);
  write_text_file(out / "groups.json",
                  envelope(cfg, {{"groups", groups_to_json(groups)}}).dump(1) + "\n");
  std::cout << "qwc_groups " << groups.size() << "\n";
  return 0;
}

}  // namespace obp
