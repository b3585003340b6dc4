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

#include "obp/distributed.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <system_error>
#include <thread>

#include <json.hpp>

namespace obp {

// ---------------------------------------------------------------------------
// PartitionMap

PartitionMap::PartitionMap(std::size_t n, std::vector<PauliAddress> boundaries)
    : n_(n), bounds_(std::move(boundaries)) {
  if (bounds_.size() < 2) throw std::invalid_argument("partition needs at least one node");
  if (!bounds_.front().is_zero()) throw std::invalid_argument("partition must start at 0");
  if (bounds_.back() != PauliAddress::space_end(n)) {
    throw std::invalid_argument("partition must end at 4^n");
  }
  for (std::size_t i = 0; i + 1 < bounds_.size(); ++i) {
    if (!(bounds_[i] < bounds_[i + 1])) {
      throw std::invalid_argument("partition boundaries must be strictly increasing");
    }
  }
}

PartitionMap PartitionMap::even(std::size_t n, std::size_t num_nodes) {
  if (num_nodes == 0) throw std::invalid_argument("cluster needs at least one node");
  if (PauliAddress(num_nodes) > PauliAddress::space_end(n)) {
    throw std::invalid_argument("more nodes than addresses");
  }
  std::vector<PauliAddress> b;
  b.reserve(num_nodes + 1);
  for (std::size_t r = 0; r <= num_nodes; ++r) {
    b.push_back(PauliAddress::fraction_of_space(n, r, num_nodes));
  }
  return PartitionMap(n, std::move(b));
}

std::size_t PartitionMap::route(const PauliAddress& address) const {
  if (!(address < bounds_.back())) throw std::out_of_range("address outside the Pauli space");
  auto it = std::upper_bound(bounds_.begin(), bounds_.end(), address);
  return static_cast<std::size_t>(it - bounds_.begin()) - 1;
}

bool PartitionMap::owns(std::size_t r, const PauliAddress& address) const {
  return !(address < bounds_.at(r)) && address < bounds_.at(r + 1);
}

std::size_t route(const PauliAddress& address, const PartitionMap& p) { return p.route(address); }

// ---------------------------------------------------------------------------
// Wire format

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw std::invalid_argument("truncated message payload");
  }
  std::uint64_t get(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 8) | b_[pos_++];
    return v;
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

void put_key(Writer& w, const PauliKey& k) {
  w.bytes(encode_address(k).to_bytes(address_bytes(k.num_qubits())));
}

PauliKey get_key(Reader& r, std::size_t n) {
  return decode_address(PauliAddress::from_bytes(r.bytes(address_bytes(n))), n);
}

// Boundaries may equal 4^n, which needs one byte more than a key address.
void put_boundary(Writer& w, const PauliAddress& a, std::size_t n) {
  w.bytes(a.to_bytes(address_bytes(n) + 1));
}

PauliAddress get_boundary(Reader& r, std::size_t n) {
  return PauliAddress::from_bytes(r.bytes(address_bytes(n) + 1));
}

}  // namespace

std::vector<std::uint8_t> encode_terms(std::span<const PauliTerm> terms, std::size_t n) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(terms.size()));
  const std::size_t ab = address_bytes(n);
  for (const auto& t : terms) {
    if (t.key.num_qubits() != n) throw std::invalid_argument("term width mismatch on the wire");
    w.u16(static_cast<std::uint16_t>(ab + 8));
    put_key(w, t.key);
    w.f64(t.coeff);
  }
  return w.take();
}

std::vector<PauliTerm> decode_terms(std::span<const std::uint8_t> bytes, std::size_t n) {
  Reader r(bytes);
  const std::uint32_t count = r.u32();
  const std::size_t ab = address_bytes(n);
  std::vector<PauliTerm> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (r.u16() != ab + 8) throw std::invalid_argument("unexpected record length");
    PauliKey k = get_key(r, n);
    out.push_back({std::move(k), r.f64()});
  }
  if (!r.done()) throw std::invalid_argument("trailing bytes in term payload");
  return out;
}

// ---------------------------------------------------------------------------
// MessageBus

std::string_view transport_name(Transport t) {
  return t == Transport::Socket ? "socket" : "inproc";
}

Transport parse_transport(std::string_view name) {
  if (name == "inproc") return Transport::InProcess;
  if (name == "socket") return Transport::Socket;
  throw std::invalid_argument("unknown transport '" + std::string(name) + "'");
}

MessageBus::MessageBus(std::size_t num_nodes, Transport transport)
    : transport_(transport), pending_(num_nodes), inbox_(num_nodes) {
  if (num_nodes == 0) throw std::invalid_argument("bus needs at least one node");
  if (transport_ == Transport::Socket && ::socketpair(AF_UNIX, SOCK_STREAM, 0, fds_) != 0) {
    throw std::system_error(errno, std::generic_category(), "socketpair");
  }
}

MessageBus::~MessageBus() {
  for (int fd : fds_) {
    if (fd >= 0) ::close(fd);
  }
}

namespace {

void write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::write(fd, p, n);
    if (k < 0) {
      if (errno == EINTR) continue;
      throw std::system_error(errno, std::generic_category(), "write");
    }
    p += k;
    n -= static_cast<std::size_t>(k);
  }
}

void read_all(int fd, std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::read(fd, p, n);
    if (k < 0) {
      if (errno == EINTR) continue;
      throw std::system_error(errno, std::generic_category(), "read");
    }
    if (k == 0) throw std::runtime_error("socket closed mid-frame");
    p += k;
    n -= static_cast<std::size_t>(k);
  }
}

}  // namespace

// Pushes a length-prefixed frame through the socket pair and reads it back.
std::vector<std::uint8_t> MessageBus::carry(const std::vector<std::uint8_t>& frame) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(frame.size()));
  w.bytes(frame);
  const std::vector<std::uint8_t> wire = w.take();
  std::exception_ptr failure;
  std::thread writer([&] {
    try {
      write_all(fds_[0], wire.data(), wire.size());
    } catch (...) {
      failure = std::current_exception();
    }
  });
  std::uint8_t header[4];
  std::vector<std::uint8_t> out;
  try {
    read_all(fds_[1], header, 4);
    const std::uint32_t len = Reader(header).u32();
    out.resize(len);
    read_all(fds_[1], out.data(), len);
  } catch (...) {
    writer.join();
    throw;
  }
  writer.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

void MessageBus::send(std::size_t from, std::size_t to, std::string kind,
                      std::vector<std::uint8_t> payload) {
  if (from >= inbox_.size() || to >= inbox_.size()) throw std::out_of_range("no such node");
  if (from == to) throw std::invalid_argument("a node cannot message itself");
  log_.push_back({round_, from, to, kind, payload.size()});
  if (transport_ == Transport::Socket) payload = carry(payload);
  pending_[to].push_back({from, std::move(kind), std::move(payload)});
}

void MessageBus::barrier() {
  for (std::size_t r = 0; r < pending_.size(); ++r) {
    auto& p = pending_[r];
    std::stable_sort(p.begin(), p.end(),
                     [](const Envelope& a, const Envelope& b) { return a.from < b.from; });
    for (auto& e : p) inbox_[r].push_back(std::move(e));
    p.clear();
  }
  ++round_;
}

std::vector<Envelope> MessageBus::receive(std::size_t to) {
  std::vector<Envelope> out;
  out.swap(inbox_.at(to));
  return out;
}

std::string MessageBus::log_jsonl() const {
  std::string out;
  for (const auto& m : log_) {
    nlohmann::json j = {{"round", m.round},
                        {"from", m.from},
                        {"to", m.to},
                        {"kind", m.kind},
                        {"payload_size", m.payload_size}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// ClusterRun

namespace {

template <typename F>
void for_each_node(std::size_t num_nodes, std::size_t threads, F&& fn) {
  const std::size_t workers = std::min(num_nodes, threads == 0 ? num_nodes : threads);
  if (workers <= 1) {
    for (std::size_t r = 0; r < num_nodes; ++r) fn(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t r = next++; r < num_nodes; r = next++) fn(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ClusterRun::ClusterRun(const PauliSum& op, const ClusterOptions& opts)
    : partition_(PartitionMap::even(op.num_qubits(), opts.num_nodes)),
      bus_(opts.num_nodes, opts.transport),
      threads_(opts.threads) {
  nodes_.resize(opts.num_nodes);
  for (std::size_t r = 0; r < nodes_.size(); ++r) {
    nodes_[r].node_id = r;
    nodes_[r].local = PauliSum(op.num_qubits());
  }
  for (const auto& [k, c] : op) {
    nodes_[partition_.route(encode_address(k))].local.insert_new(k, c);
  }
}

std::size_t ClusterRun::total_terms() const {
  std::size_t total = 0;
  for (const auto& n : nodes_) total += n.local.size();
  return total;
}

PauliSum ClusterRun::merged() const {
  PauliSum out(num_qubits());
  out.reserve(total_terms());
  for (const auto& n : nodes_) {
    for (const auto& [k, c] : n.local) out.insert_new(k, c);
  }
  return out;
}

void ClusterRun::check_ownership() const {
  for (const auto& n : nodes_) {
    for (const auto& [k, c] : n.local) {
      if (!partition_.owns(n.node_id, encode_address(k))) {
        throw std::logic_error("node " + std::to_string(n.node_id) + " holds foreign key " +
                               k.str());
      }
    }
  }
}

void ClusterRun::send(std::size_t from, std::size_t to, std::string kind,
                      std::vector<std::uint8_t> payload) {
  ++nodes_.at(from).sent_messages;
  bus_.send(from, to, std::move(kind), std::move(payload));
}

std::vector<Envelope> ClusterRun::receive(std::size_t to) {
  auto msgs = bus_.receive(to);
  nodes_.at(to).received_messages += msgs.size();
  return msgs;
}

// ---------------------------------------------------------------------------
// Conjugation with routed deduplication

namespace {

std::vector<PauliTerm> sorted_by_address(std::vector<PauliTerm> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const PauliTerm& a, const PauliTerm& b) { return a.key < b.key; });
  return terms;
}

}  // namespace

ConjugateStats parallel_conjugate_slice(ClusterRun& cluster, const Slice& slice) {
  const std::size_t R = cluster.num_nodes();
  const std::size_t n = cluster.num_qubits();
  const std::size_t before = cluster.bus().log().size();
  std::vector<std::vector<std::vector<PauliTerm>>> out(R, std::vector<std::vector<PauliTerm>>(R));

  auto& nodes = cluster.nodes();
  const PartitionMap& part = cluster.partition();
  for_each_node(R, cluster.threads(), [&](std::size_t r) {
    PauliSum s = conjugate_slice(nodes[r].local, slice);
    if (R == 1) {
      nodes[r].local = std::move(s);
      return;
    }
    for (const auto& [k, c] : s) out[r][part.route(encode_address(k))].push_back({k, c});
    for (auto& bucket : out[r]) bucket = sorted_by_address(std::move(bucket));
  });
  if (R == 1) return {};

  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t d = 0; d < R; ++d) {
      if (d == r || out[r][d].empty()) continue;
      cluster.send(r, d, "terms", encode_terms(out[r][d], n));
    }
  }
  cluster.bus().barrier();

  std::vector<std::vector<Envelope>> inbox(R);
  for (std::size_t r = 0; r < R; ++r) inbox[r] = cluster.receive(r);
  for_each_node(R, cluster.threads(), [&](std::size_t r) {
    PauliSum merged(n);
    std::size_t next = 0;
    for (std::size_t src = 0; src < R; ++src) {
      if (src == r) {
        for (const auto& t : out[r][r]) merged.add(t.key, t.coeff);
        continue;
      }
      if (next < inbox[r].size() && inbox[r][next].from == src) {
        for (const auto& t : decode_terms(inbox[r][next].payload, n)) merged.add(t.key, t.coeff);
        ++next;
      }
    }
    nodes[r].local = std::move(merged);
  });
  cluster.check_ownership();
  return {cluster.bus().log().size() - before};
}

// ---------------------------------------------------------------------------
// Partition resizing

RebalanceStats rebalance(ClusterRun& cluster) {
  const std::size_t R = cluster.num_nodes();
  const std::size_t n = cluster.num_qubits();
  if (cluster.total_terms() == 0) throw std::invalid_argument("cannot rebalance an empty cluster");
  if (R == 1) return {};
  auto& nodes = cluster.nodes();
  auto& bus = cluster.bus();
  const std::size_t log_start = bus.log().size();

  // Counts: all-to-one, then one-to-all.
  std::vector<std::uint64_t> counts(R, 0);
  counts[0] = nodes[0].local.size();
  for (std::size_t r = 1; r < R; ++r) {
    Writer w;
    w.u64(nodes[r].local.size());
    cluster.send(r, 0, "count", w.take());
  }
  bus.barrier();
  for (const auto& e : cluster.receive(0)) counts[e.from] = Reader(e.payload).u64();
  {
    Writer w;
    for (auto c : counts) w.u64(c);
    const auto payload = w.take();
    for (std::size_t r = 1; r < R; ++r) cluster.send(0, r, "counts", payload);
  }
  bus.barrier();
  for (std::size_t r = 1; r < R; ++r) {
    for (const auto& e : cluster.receive(r)) {
      Reader rd(e.payload);
      for (std::size_t i = 0; i < R; ++i) counts[i] = rd.u64();
    }
  }

  std::vector<std::uint64_t> prefix(R + 1, 0);
  for (std::size_t r = 0; r < R; ++r) prefix[r + 1] = prefix[r] + counts[r];
  const std::uint64_t L = prefix[R];

  std::vector<std::vector<PauliTerm>> sorted(R);
  for_each_node(R, cluster.threads(), [&](std::size_t r) {
    sorted[r] = nodes[r].local.sorted_terms();
  });

  // Left to right: boundary r+1 is the address of the element of global rank
  // floor((r+1)L/R), computed by the node holding that element.
  std::vector<PauliAddress> bounds = cluster.partition().boundaries();
  std::vector<std::vector<std::pair<std::size_t, PauliAddress>>> learned(R);
  for (std::size_t r = 0; r + 1 < R; ++r) {
    const std::uint64_t target = ((r + 1) * L) / R;
    if (prefix[r + 1] == target) continue;
    std::size_t h = 0;
    while (!(prefix[h] <= target && target < prefix[h + 1])) ++h;
    const std::uint64_t local_rank = target - prefix[h];
    if (h == r) {
      const PauliAddress a = encode_address(sorted[h][local_rank].key);
      Writer w;
      w.u64(r + 1);
      put_boundary(w, a, n);
      cluster.send(r, r + 1, "boundary", w.take());
      bus.barrier();
      for (const auto& e : cluster.receive(r + 1)) {
        Reader rd(e.payload);
        const auto idx = rd.u64();
        learned[r + 1].push_back({idx, get_boundary(rd, n)});
      }
    } else {
      Writer w;
      w.u64(local_rank);
      cluster.send(r, h, "boundary_request", w.take());
      bus.barrier();
      for (const auto& e : cluster.receive(h)) {
        const std::uint64_t rank = Reader(e.payload).u64();
        Writer reply;
        reply.u64(r + 1);
        put_boundary(reply, encode_address(sorted[h][rank].key), n);
        cluster.send(h, r, "boundary", reply.take());
      }
      bus.barrier();
      for (const auto& e : cluster.receive(r)) {
        Reader rd(e.payload);
        const auto idx = rd.u64();
        learned[r].push_back({idx, get_boundary(rd, n)});
      }
    }
  }

  // Gather what each node learned, fix strict monotonicity, broadcast.
  for (auto& [idx, a] : learned[0]) bounds[idx] = a;
  for (std::size_t r = 1; r < R; ++r) {
    Writer w;
    w.u32(static_cast<std::uint32_t>(learned[r].size()));
    for (const auto& [idx, a] : learned[r]) {
      w.u64(idx);
      put_boundary(w, a, n);
    }
    cluster.send(r, 0, "boundaries", w.take());
  }
  bus.barrier();
  for (const auto& e : cluster.receive(0)) {
    Reader rd(e.payload);
    const std::uint32_t k = rd.u32();
    for (std::uint32_t i = 0; i < k; ++i) {
      const auto idx = rd.u64();
      bounds[idx] = get_boundary(rd, n);
    }
  }
  for (std::size_t i = 1; i < R; ++i) {
    if (!(bounds[i - 1] < bounds[i])) bounds[i] = bounds[i - 1].plus_one();
  }
  for (std::size_t i = R - 1; i >= 1; --i) {
    if (!(bounds[i] < bounds[i + 1])) bounds[i] = bounds[i + 1].minus_one();
  }
  {
    Writer w;
    for (const auto& b : bounds) put_boundary(w, b, n);
    const auto payload = w.take();
    for (std::size_t r = 1; r < R; ++r) cluster.send(0, r, "partition", payload);
  }
  bus.barrier();
  for (std::size_t r = 1; r < R; ++r) {
    for (const auto& e : cluster.receive(r)) {
      Reader rd(e.payload);
      for (std::size_t i = 0; i <= R; ++i) {
        if (get_boundary(rd, n) != bounds[i]) throw std::logic_error("partition broadcast garbled");
      }
    }
  }
  cluster.set_partition(PartitionMap(n, bounds));
  const std::size_t protocol = bus.log().size() - log_start;

  // Migration to the new owners.
  const PartitionMap& part = cluster.partition();
  std::vector<std::vector<std::vector<PauliTerm>>> moving(R, std::vector<std::vector<PauliTerm>>(R));
  for (std::size_t r = 0; r < R; ++r) {
    PauliSum keep(n);
    for (auto& t : sorted[r]) {
      const std::size_t d = part.route(encode_address(t.key));
      if (d == r) {
        keep.insert_new(std::move(t.key), t.coeff);
      } else {
        moving[r][d].push_back(std::move(t));
      }
    }
    nodes[r].local = std::move(keep);
  }
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t d = 0; d < R; ++d) {
      if (!moving[r][d].empty()) cluster.send(r, d, "migrate", encode_terms(moving[r][d], n));
    }
  }
  bus.barrier();
  for (std::size_t r = 0; r < R; ++r) {
    for (const auto& e : cluster.receive(r)) {
      for (auto& t : decode_terms(e.payload, n)) nodes[r].local.insert_new(std::move(t.key), t.coeff);
    }
  }
  cluster.check_ownership();
  return {protocol, bus.log().size() - log_start - protocol};
}

// ---------------------------------------------------------------------------
// Distributed truncation

namespace {

constexpr std::size_t kSamples = 64;

struct Entry {
  double mag;
  double coeff;
  PauliKey key;
};

struct Pivot {
  double mag = 0.0;
  PauliKey key;
};

bool entry_before(const Entry& a, const Entry& b) {
  if (a.mag != b.mag) return a.mag < b.mag;
  return a.key < b.key;
}

bool below(const Entry& e, const Pivot& p) {
  if (e.mag != p.mag) return e.mag < p.mag;
  return e.key < p.key;
}

bool at_or_below(const Entry& e, const Pivot& p) {
  if (e.mag != p.mag) return e.mag < p.mag;
  return !(p.key < e.key);
}

struct Sample {
  double mag = 0.0;
  double weight = 0.0;
  PauliKey key;
};

bool sample_before(const Sample& a, const Sample& b) {
  if (a.mag != b.mag) return a.mag < b.mag;
  return a.key < b.key;
}

struct WindowReport {
  std::uint64_t size = 0;
  double weight = 0.0;  ///< accumulator units
  bool complete = false;
  std::vector<Sample> samples;
};

// Window [lo, hi) as either every element or evenly spaced order statistics.
WindowReport report(const std::vector<Entry>& v, std::size_t lo, std::size_t hi, Norm norm) {
  WindowReport rep;
  rep.size = hi - lo;
  for (std::size_t i = lo; i < hi; ++i) rep.weight += weight_contribution(v[i].coeff, norm);
  rep.complete = rep.size <= kSamples;
  const std::size_t m = rep.complete ? rep.size : kSamples;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t i = rep.complete ? lo + j : lo + (j * rep.size + rep.size / 2) / m;
    rep.samples.push_back({v[i].mag, weight_contribution(v[i].coeff, norm), v[i].key});
  }
  return rep;
}

void put_report(Writer& w, const WindowReport& rep) {
  w.u64(rep.size);
  w.f64(rep.weight);
  w.u8(rep.complete ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(rep.samples.size()));
  for (const auto& s : rep.samples) {
    w.f64(s.mag);
    w.f64(s.weight);
    put_key(w, s.key);
  }
}

WindowReport get_report(Reader& r, std::size_t n) {
  WindowReport rep;
  rep.size = r.u64();
  rep.weight = r.f64();
  rep.complete = r.u8() != 0;
  const std::uint32_t k = r.u32();
  for (std::uint32_t i = 0; i < k; ++i) {
    Sample s;
    s.mag = r.f64();
    s.weight = r.f64();
    s.key = get_key(r, n);
    rep.samples.push_back(std::move(s));
  }
  return rep;
}

enum Decision : std::uint8_t { kNone = 0, kRemoveThrough = 1, kKeepFrom = 2 };

// Count-weighted median of the merged samples.
Pivot median_pivot(const std::vector<WindowReport>& reports) {
  struct Weighted {
    const Sample* s;
    double represents;
  };
  std::vector<Weighted> merged;
  double total = 0.0;
  for (const auto& rep : reports) {
    total += static_cast<double>(rep.size);
    if (rep.samples.empty()) continue;
    const double each = static_cast<double>(rep.size) / static_cast<double>(rep.samples.size());
    for (const auto& s : rep.samples) merged.push_back({&s, each});
  }
  std::sort(merged.begin(), merged.end(),
            [](const Weighted& a, const Weighted& b) { return sample_before(*a.s, *b.s); });
  double cum = 0.0;
  for (const auto& w : merged) {
    cum += w.represents;
    if (cum >= total / 2.0) return {w.s->mag, w.s->key};
  }
  return {merged.back().s->mag, merged.back().s->key};
}

}  // namespace

DistributedTruncation distributed_truncate(ClusterRun& cluster, double budget, Norm norm) {
  if (!(budget >= 0.0)) throw std::invalid_argument("truncation budget must be non-negative");
  const std::size_t R = cluster.num_nodes();
  const std::size_t n = cluster.num_qubits();
  auto& nodes = cluster.nodes();
  auto& bus = cluster.bus();
  DistributedTruncation out;
  out.terms_before = cluster.total_terms();

  if (R == 1) {
    Truncation tr = truncate(nodes[0].local, budget, norm);
    nodes[0].local = std::move(tr.kept);
    out.removed = std::move(tr.removed);
    out.removed_weight = tr.removed_weight;
    out.terms_after = nodes[0].local.size();
    return out;
  }
  const std::size_t log_start = bus.log().size();

  std::vector<std::vector<Entry>> sorted(R);
  for_each_node(R, cluster.threads(), [&](std::size_t r) {
    auto& v = sorted[r];
    v.reserve(nodes[r].local.size());
    for (const auto& [k, c] : nodes[r].local) v.push_back({truncation_magnitude(c), c, k});
    std::sort(v.begin(), v.end(), entry_before);
  });
  // Each node's undecided window [lo, hi) of its sorted entries.
  std::vector<std::size_t> lo(R, 0), hi(R);
  for (std::size_t r = 0; r < R; ++r) hi[r] = sorted[r].size();

  auto gather = [&](std::vector<WindowReport>& reports, auto&& local) {
    local(std::size_t{0});
    for (std::size_t r = 1; r < R; ++r) {
      Writer w;
      for (const auto& rep : local(r)) put_report(w, rep);
      cluster.send(r, 0, "trunc_stats", w.take());
    }
    bus.barrier();
    for (const auto& e : cluster.receive(0)) {
      Reader rd(e.payload);
      for (std::size_t i = 0; i < reports.size() / R; ++i) {
        reports[i * R + e.from] = get_report(rd, n);
      }
    }
  };
  auto broadcast = [&](const std::vector<std::uint8_t>& payload, const char* kind) {
    for (std::size_t r = 1; r < R; ++r) cluster.send(0, r, kind, payload);
    bus.barrier();
    ++out.rounds;
  };

  // Round 1: every node reports its whole window.
  std::vector<WindowReport> reports(R);
  gather(reports, [&](std::size_t r) {
    WindowReport rep = report(sorted[r], lo[r], hi[r], norm);
    if (r == 0) reports[0] = rep;
    return std::vector<WindowReport>{rep};
  });
  ++out.rounds;

  double removed_acc = 0.0;  // accumulator for everything below every window
  std::optional<Pivot> threshold;

  if (budget > 0.0) {
    Decision pending = kNone;
    Pivot last;
    for (;;) {
      bool complete = true;
      for (const auto& rep : reports) complete = complete && rep.complete;
      if (complete) {
        std::vector<Sample> all;
        for (const auto& rep : reports) all.insert(all.end(), rep.samples.begin(), rep.samples.end());
        std::sort(all.begin(), all.end(), sample_before);
        for (const auto& s : all) {
          const double next = removed_acc + s.weight;
          if (accumulated_norm(next, norm) > budget) break;
          removed_acc = next;
          threshold = Pivot{s.mag, s.key};
        }
        break;
      }
      const Pivot pivot = median_pivot(reports);
      Writer w;
      w.u8(pending);
      w.f64(last.mag);
      put_key(w, pending == kNone ? PauliKey(n) : last.key);
      w.f64(pivot.mag);
      put_key(w, pivot.key);
      broadcast(w.take(), "trunc_pivot");

      // Nodes settle the previous decision, then split the window at the pivot:
      // strictly below, the pivot itself if held, strictly above.
      std::vector<WindowReport> split(3 * R);
      gather(split, [&](std::size_t r) {
        if (r > 0) cluster.receive(r);
        const auto& v = sorted[r];
        if (pending == kRemoveThrough) {
          while (lo[r] < hi[r] && at_or_below(v[lo[r]], last)) ++lo[r];
        } else if (pending == kKeepFrom) {
          std::size_t k = lo[r];
          while (k < hi[r] && below(v[k], last)) ++k;
          hi[r] = k;
        }
        std::size_t a = lo[r];
        while (a < hi[r] && below(v[a], pivot)) ++a;
        std::size_t b = a;
        while (b < hi[r] && at_or_below(v[b], pivot)) ++b;
        std::vector<WindowReport> reps{report(v, lo[r], a, norm), report(v, a, b, norm),
                                       report(v, b, hi[r], norm)};
        if (r == 0) {
          for (std::size_t i = 0; i < 3; ++i) split[i * R] = reps[i];
        }
        return reps;
      });

      double through = 0.0;
      for (std::size_t r = 0; r < R; ++r) through += split[r].weight + split[R + r].weight;
      if (accumulated_norm(removed_acc + through, norm) <= budget) {
        removed_acc += through;
        threshold = pivot;
        pending = kRemoveThrough;
        reports.assign(split.begin() + 2 * static_cast<std::ptrdiff_t>(R), split.end());
      } else {
        pending = kKeepFrom;
        reports.assign(split.begin(), split.begin() + static_cast<std::ptrdiff_t>(R));
      }
      last = pivot;
    }
  }

  {
    Writer w;
    w.u8(threshold ? 1 : 0);
    if (threshold) {
      w.f64(threshold->mag);
      put_key(w, threshold->key);
    }
    broadcast(w.take(), "trunc_threshold");
  }
  for (std::size_t r = 1; r < R; ++r) cluster.receive(r);

  for (std::size_t r = 0; r < R; ++r) {
    PauliSum keep(n);
    keep.reserve(sorted[r].size());
    for (auto& e : sorted[r]) {
      if (threshold && at_or_below(e, *threshold)) {
        out.removed.push_back({std::move(e.key), e.coeff});
      } else {
        keep.insert_new(std::move(e.key), e.coeff);
      }
    }
    nodes[r].local = std::move(keep);
  }
  std::sort(out.removed.begin(), out.removed.end(), truncation_before);
  out.removed_weight = error_bound(out.removed, norm);
  out.messages = bus.log().size() - log_start;
  out.terms_after = cluster.total_terms();
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

DistributedResult distributed_backpropagate(const PauliSum& observable, const Circuit& circuit,
                                            const BudgetSchedule& budget,
                                            const ClusterOptions& opts,
                                            const EngineLimits& limits) {
  if (observable.num_qubits() != circuit.num_qubits()) {
    throw std::invalid_argument("observable and circuit widths differ");
  }
  budget.validate(circuit.num_slices());
  limits.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  ClusterRun cluster(observable, opts);
  DistributedResult dr;
  BackpropResult& res = dr.result;
  BudgetTracker tracker(budget);

  auto run_pass = [&](double available, DistributedSliceStats& ds) {
    PassStats st;
    st.budget = available;
    DistributedTruncation tr = distributed_truncate(cluster, available, budget.norm);
    st.terms_before = tr.terms_before;
    st.terms_after = tr.terms_after;
    st.truncated_weight = tr.removed_weight;
    st.truncated_l1 = error_bound(tr.removed, Norm::L1);
    st.truncated_l2 = error_bound(tr.removed, Norm::L2);
    res.accrued_error += st.truncated_weight;
    res.accrued_l1 += st.truncated_l1;
    res.accrued_l2 += st.truncated_l2;
    st.accrued_after = res.accrued_error;
    tracker.record(available, st.truncated_weight);
    ds.truncation_rounds = tr.rounds;
    ds.truncation_messages = tr.messages;
    return st;
  };
  auto loads = [&](DistributedSliceStats& ds) {
    ds.max_load = 0;
    ds.min_load = cluster.nodes().front().local.size();
    for (const auto& nd : cluster.nodes()) {
      ds.max_load = std::max(ds.max_load, nd.local.size());
      ds.min_load = std::min(ds.min_load, nd.local.size());
    }
  };

  auto finish = [&] {
    res.op = cluster.merged();
    dr.message_log = cluster.message_log();
    dr.message_log_jsonl = cluster.bus().log_jsonl();
    return std::move(dr);
  };

  const auto& slices = circuit.slices();
  for (std::size_t i = 0; i < slices.size(); ++i) {
    if (limits.max_seconds && elapsed() > *limits.max_seconds) {
      res.termination = Termination::TimeLimit;
      return finish();
    }
    const std::size_t s = slices.size() - 1 - i;
    DistributedSliceStats ds;
    ds.dedup_messages = parallel_conjugate_slice(cluster, slices[s]).messages;
    res.per_slice.push_back(run_pass(tracker.slice_budget(s), ds));
    if (cluster.num_nodes() > 1 && cluster.total_terms() > 0) {
      const RebalanceStats rb = rebalance(cluster);
      ds.rebalance_messages = rb.protocol_messages;
      ds.migration_messages = rb.migration_messages;
    }
    loads(ds);
    dr.per_slice.push_back(ds);
    ++res.slices_completed;
    if (limits.max_terms && cluster.total_terms() > *limits.max_terms) {
      res.termination = Termination::TermLimit;
      return finish();
    }
  }
  DistributedSliceStats fs;
  res.final_pass = run_pass(tracker.final_budget(), fs);
  return finish();
}

}  // namespace obp
