#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmdgen/gates.hpp"

namespace qmdgen {

/// A swimlane of the activity diagram; one partition is one qubit timeline.
struct QubitPartition {
    int index = 0;
    std::string name;
};

struct GateApplication {
    GateKind kind = GateKind::H;
    std::vector<int> targets;
    std::vector<int> controls;
    std::optional<double> parameter;  // radians, rotations only
    int seq = 0;
};

/// Canonical in-memory circuit: the "expected" side of every evaluation.
struct QuantumCircuitModel {
    std::string name;
    std::vector<QubitPartition> partitions;
    std::vector<GateApplication> gates;
    std::vector<std::string> classical_elements;
};

/// Throws MalformedInput / DanglingReference when an invariant is violated:
/// unique partition names, in-range disjoint operands, per-kind arity,
/// parameter present iff rotation, seq equal to position.
void validate(const QuantumCircuitModel& model);

/// Deterministic line-oriented rendering used verbatim in prompts and as the
/// retrieval query. One line per gate: `seq KIND controls->targets [param]`,
/// parameters at fixed 6 decimals. Byte-identical across runs and platforms.
std::string canonical_text(const QuantumCircuitModel& model);

/// Rotation parameters are compared at 4-decimal rounding; the scaled-integer
/// form keeps multiset keys exact.
long long round_param_e4(double parameter);

/// Multiset key for one gate: kind, sorted operand indices (controls and
/// targets merged), parameter rounded to 4 decimals.
struct GateKey {
    GateKind kind = GateKind::H;
    std::vector<int> operands;
    std::optional<long long> param_e4;

    auto operator<=>(const GateKey&) const = default;
};

std::string to_string(const GateKey& key);

/// Categorized element multiset extracted from either a model or generated
/// code. Invariant under reordering of its source.
struct ElementInventory {
    std::map<GateKey, int> gates;
    int partition_count = 0;
    std::map<std::string, int> classical;

    bool operator==(const ElementInventory&) const = default;
};

ElementInventory expected_inventory(const QuantumCircuitModel& model);

}  // namespace qmdgen
