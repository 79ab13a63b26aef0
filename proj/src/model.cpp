#include "qmdgen/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "qmdgen/errors.hpp"

namespace qmdgen {

namespace {

std::string join_ints(const std::vector<int>& values) {
    std::ostringstream out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out << ',';
        out << values[i];
    }
    return out.str();
}

std::string format_param6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

}  // namespace

void validate(const QuantumCircuitModel& model) {
    std::set<std::string> names;
    for (size_t i = 0; i < model.partitions.size(); ++i) {
        const auto& part = model.partitions[i];
        if (part.index != static_cast<int>(i)) {
            throw MalformedInput("partition '" + part.name + "' has index " +
                                 std::to_string(part.index) + ", expected " + std::to_string(i));
        }
        if (!names.insert(part.name).second) {
            throw MalformedInput("duplicate partition name '" + part.name + "'");
        }
    }
    const int count = static_cast<int>(model.partitions.size());
    for (size_t i = 0; i < model.gates.size(); ++i) {
        const auto& gate = model.gates[i];
        const std::string where = "gate " + std::to_string(i) + " (" +
                                  std::string(to_string(gate.kind)) + ")";
        if (gate.seq != static_cast<int>(i)) {
            throw MalformedInput(where + ": seq " + std::to_string(gate.seq) +
                                 " does not match position");
        }
        for (int idx : gate.targets) {
            if (idx < 0 || idx >= count) {
                throw DanglingReference(where + ": target partition " + std::to_string(idx) +
                                        " is not declared");
            }
        }
        for (int idx : gate.controls) {
            if (idx < 0 || idx >= count) {
                throw DanglingReference(where + ": control partition " + std::to_string(idx) +
                                        " is not declared");
            }
        }
        for (int idx : gate.controls) {
            if (std::find(gate.targets.begin(), gate.targets.end(), idx) != gate.targets.end()) {
                throw MalformedInput(where + ": partition " + std::to_string(idx) +
                                     " is both control and target");
            }
        }
        {
            std::set<int> seen;
            for (int idx : gate.targets) {
                if (!seen.insert(idx).second) {
                    throw MalformedInput(where + ": duplicate target " + std::to_string(idx));
                }
            }
            seen.clear();
            for (int idx : gate.controls) {
                if (!seen.insert(idx).second) {
                    throw MalformedInput(where + ": duplicate control " + std::to_string(idx));
                }
            }
        }
        const GateArity arity = arity_of(gate.kind);
        if (static_cast<int>(gate.controls.size()) != arity.controls) {
            throw MalformedInput(where + ": expected " + std::to_string(arity.controls) +
                                 " controls, got " + std::to_string(gate.controls.size()));
        }
        if (arity.targets >= 0) {
            if (static_cast<int>(gate.targets.size()) != arity.targets) {
                throw MalformedInput(where + ": expected " + std::to_string(arity.targets) +
                                     " targets, got " + std::to_string(gate.targets.size()));
            }
        } else if (gate.targets.empty()) {
            throw MalformedInput(where + ": needs at least one target");
        }
        if (is_rotation(gate.kind) != gate.parameter.has_value()) {
            throw MalformedInput(where + (gate.parameter ? ": parameter not allowed"
                                                         : ": rotation parameter missing"));
        }
    }
}

std::string canonical_text(const QuantumCircuitModel& model) {
    std::ostringstream out;
    out << "circuit " << model.name << '\n';
    out << "partitions " << model.partitions.size() << ':';
    for (const auto& part : model.partitions) out << ' ' << part.name;
    out << '\n';
    out << "gates " << model.gates.size() << '\n';
    for (const auto& gate : model.gates) {
        out << gate.seq << ' ' << to_string(gate.kind) << ' ' << join_ints(gate.controls) << "->"
            << join_ints(gate.targets);
        if (gate.parameter) out << ' ' << format_param6(*gate.parameter);
        out << '\n';
    }
    return out.str();
}

long long round_param_e4(double parameter) {
    return std::llround(parameter * 10000.0);
}

std::string to_string(const GateKey& key) {
    std::ostringstream out;
    out << to_string(key.kind) << '[' << join_ints(key.operands) << ']';
    if (key.param_e4) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", static_cast<double>(*key.param_e4) / 10000.0);
        out << '(' << buf << ')';
    }
    return out.str();
}

ElementInventory expected_inventory(const QuantumCircuitModel& model) {
    ElementInventory inventory;
    inventory.partition_count = static_cast<int>(model.partitions.size());
    for (const auto& gate : model.gates) {
        GateKey key;
        key.kind = gate.kind;
        key.operands = gate.controls;
        key.operands.insert(key.operands.end(), gate.targets.begin(), gate.targets.end());
        std::sort(key.operands.begin(), key.operands.end());
        if (gate.parameter) key.param_e4 = round_param_e4(*gate.parameter);
        ++inventory.gates[key];
    }
    for (const auto& name : model.classical_elements) ++inventory.classical[name];
    return inventory;
}

}  // namespace qmdgen
