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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "obp/backprop.hpp"
#include "obp/circuit.hpp"
#include "obp/pauli.hpp"

namespace obp {

/// Node r owns addresses [B_r, B_{r+1}); B_0 = 0 and B_R = 4^n.
class PartitionMap {
 public:
  PartitionMap(std::size_t n, std::vector<PauliAddress> boundaries);

  /// B_r = floor(r 4^n / R). Requires 1 <= R <= 4^n.
  static PartitionMap even(std::size_t n, std::size_t num_nodes);

  std::size_t num_qubits() const { return n_; }
  std::size_t num_nodes() const { return bounds_.size() - 1; }
  const std::vector<PauliAddress>& boundaries() const { return bounds_; }
  const PauliAddress& lower(std::size_t r) const { return bounds_.at(r); }
  const PauliAddress& upper(std::size_t r) const { return bounds_.at(r + 1); }

  /// Binary search over the boundaries.
  std::size_t route(const PauliAddress& address) const;
  bool owns(std::size_t r, const PauliAddress& address) const;

 private:
  std::size_t n_;
  std::vector<PauliAddress> bounds_;
};

std::size_t route(const PauliAddress& address, const PartitionMap& p);

// ---------------------------------------------------------------------------
// Wire format

/// u32 record count, then per record: u16 length, big-endian address bytes, big-endian IEEE-754 coefficient.
std::vector<std::uint8_t> encode_terms(std::span<const PauliTerm> terms, std::size_t n);
std::vector<PauliTerm> decode_terms(std::span<const std::uint8_t> bytes, std::size_t n);

// ---------------------------------------------------------------------------
// Message bus

enum class Transport { InProcess, Socket };

std::string_view transport_name(Transport t);
Transport parse_transport(std::string_view name);

struct MessageRecord {
  std::size_t round = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  std::string kind;
  std::size_t payload_size = 0;
};

struct Envelope {
  std::size_t from = 0;
  std::string kind;
  std::vector<std::uint8_t> payload;
};

/**
 * Round-based point-to-point bus. Messages sent in a round are delivered at
 * the next barrier; inboxes drain in ascending sender order.
 */
class MessageBus {
 public:
  MessageBus(std::size_t num_nodes, Transport transport = Transport::InProcess);
  ~MessageBus();
  MessageBus(const MessageBus&) = delete;
  MessageBus& operator=(const MessageBus&) = delete;

  void send(std::size_t from, std::size_t to, std::string kind, std::vector<std::uint8_t> payload);
  /// Ends the round: delivers everything sent during it.
  void barrier();
  std::vector<Envelope> receive(std::size_t to);

  std::size_t round() const { return round_; }
  std::size_t num_nodes() const { return inbox_.size(); }
  Transport transport() const { return transport_; }
  const std::vector<MessageRecord>& log() const { return log_; }

  /// One JSON object per line.
  std::string log_jsonl() const;

 private:
  std::vector<std::uint8_t> carry(const std::vector<std::uint8_t>& frame);

  Transport transport_;
  std::size_t round_ = 0;
  std::vector<std::vector<Envelope>> pending_;
  std::vector<std::vector<Envelope>> inbox_;
  std::vector<MessageRecord> log_;
  int fds_[2] = {-1, -1};
};

// ---------------------------------------------------------------------------
// Cluster

struct NodeState {
  std::size_t node_id = 0;
  PauliSum local;
  std::size_t sent_messages = 0;
  std::size_t received_messages = 0;
};

struct ClusterOptions {
  std::size_t num_nodes = 1;
  Transport transport = Transport::InProcess;
  /// Worker threads for node-local steps; 0 means one per node.
  std::size_t threads = 0;
};

class ClusterRun {
 public:
  /// Scatters `op` onto an even partition.
  ClusterRun(const PauliSum& op, const ClusterOptions& opts);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_qubits() const { return partition_.num_qubits(); }
  const PartitionMap& partition() const { return partition_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }
  const MessageBus& bus() const { return bus_; }
  const std::vector<MessageRecord>& message_log() const { return bus_.log(); }
  std::size_t total_terms() const;

  /// Sum of all node-local operators.
  PauliSum merged() const;

  /// Throws std::logic_error if a key sits outside its owner's interval.
  void check_ownership() const;

  // Internals used by the distributed operations.
  MessageBus& bus() { return bus_; }
  std::vector<NodeState>& nodes() { return nodes_; }
  void set_partition(PartitionMap p) { partition_ = std::move(p); }
  std::size_t threads() const { return threads_; }
  void send(std::size_t from, std::size_t to, std::string kind, std::vector<std::uint8_t> payload);
  std::vector<Envelope> receive(std::size_t to);

 private:
  PartitionMap partition_;
  std::vector<NodeState> nodes_;
  MessageBus bus_;
  std::size_t threads_;
};

struct ConjugateStats {
  std::size_t messages = 0;
};

/// Local conjugation on every node, then one batched message per (source, destination) pair.
ConjugateStats parallel_conjugate_slice(ClusterRun& cluster, const Slice& slice);

struct RebalanceStats {
  std::size_t protocol_messages = 0;   ///< count exchange, boundary search and boundary broadcast
  std::size_t migration_messages = 0;  ///< term transfers to the new owners
};

/// Partition resizing so every node holds floor(L/R) or ceil(L/R) terms.
RebalanceStats rebalance(ClusterRun& cluster);

struct DistributedTruncation {
  double removed_weight = 0.0;
  std::vector<PauliTerm> removed;  ///< in truncation order
  std::size_t rounds = 0;          ///< master broadcast/gather rounds
  std::size_t messages = 0;
  std::size_t terms_before = 0;
  std::size_t terms_after = 0;
};

/// Finds the same cut as truncate() by bisection over (|c|, address) keys.
DistributedTruncation distributed_truncate(ClusterRun& cluster, double budget, Norm norm);

struct DistributedSliceStats {
  std::size_t dedup_messages = 0;
  std::size_t rebalance_messages = 0;
  std::size_t migration_messages = 0;
  std::size_t truncation_rounds = 0;
  std::size_t truncation_messages = 0;
  std::size_t max_load = 0;
  std::size_t min_load = 0;
};

struct DistributedResult {
  BackpropResult result;
  std::vector<DistributedSliceStats> per_slice;
  std::vector<MessageRecord> message_log;
  std::string message_log_jsonl;
};

/// The backprop engine on a simulated cluster: conjugate, truncate, rebalance per slice.
DistributedResult distributed_backpropagate(const PauliSum& observable, const Circuit& circuit,
                                            const BudgetSchedule& budget,
                                            const ClusterOptions& opts,
                                            const EngineLimits& limits = {});

}  // namespace obp
