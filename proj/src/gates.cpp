#include "qmdgen/gates.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <nlohmann/json.hpp>

#include "qmdgen/errors.hpp"

namespace qmdgen {

namespace {

constexpr std::array<std::string_view, kGateKindCount> kNames = {
    "H", "X", "Y", "Z", "S", "T", "SWAP", "CX", "CCX",
    "RX", "RY", "RZ", "MEASURE", "RESET", "BARRIER",
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string_view to_string(GateKind kind) {
    return kNames[static_cast<int>(kind)];
}

std::optional<GateKind> gate_kind_from_name(std::string_view name) {
    const std::string needle = lower(name);
    for (int i = 0; i < kGateKindCount; ++i) {
        if (lower(kNames[i]) == needle) return static_cast<GateKind>(i);
    }
    return std::nullopt;
}

std::vector<GateKind> all_gate_kinds() {
    std::vector<GateKind> kinds;
    kinds.reserve(kGateKindCount);
    for (int i = 0; i < kGateKindCount; ++i) kinds.push_back(static_cast<GateKind>(i));
    return kinds;
}

bool is_rotation(GateKind kind) {
    return kind == GateKind::Rx || kind == GateKind::Ry || kind == GateKind::Rz;
}

GateArity arity_of(GateKind kind) {
    switch (kind) {
        case GateKind::Swap:
            return {0, 2};
        case GateKind::Cx:
            return {1, 1};
        case GateKind::Ccx:
            return {2, 1};
        case GateKind::Barrier:
            return {0, -1};
        default:
            return {0, 1};
    }
}

const std::vector<GateAlias>& default_gate_aliases() {
    static const std::vector<GateAlias> table = parse_gate_aliases_json(default_gate_aliases_json());
    return table;
}

std::string default_gate_aliases_json() {
    // Data, not code: new spellings of a gate call need no rebuild when the
    // table is loaded from its asset file instead.
    return R"({
  "aliases": [
    {"method": "h", "kind": "H"},
    {"method": "x", "kind": "X"},
    {"method": "y", "kind": "Y"},
    {"method": "z", "kind": "Z"},
    {"method": "s", "kind": "S"},
    {"method": "t", "kind": "T"},
    {"method": "swap", "kind": "SWAP"},
    {"method": "cx", "kind": "CX"},
    {"method": "cnot", "kind": "CX"},
    {"method": "ccx", "kind": "CCX"},
    {"method": "toffoli", "kind": "CCX"},
    {"method": "rx", "kind": "RX", "param": true},
    {"method": "ry", "kind": "RY", "param": true},
    {"method": "rz", "kind": "RZ", "param": true},
    {"method": "measure", "kind": "MEASURE"},
    {"method": "measure_all", "kind": "MEASURE", "expands_to_all_qubits": true},
    {"method": "reset", "kind": "RESET"},
    {"method": "barrier", "kind": "BARRIER"}
  ]
}
)";
}

std::vector<GateAlias> parse_gate_aliases_json(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInput(std::string("gate alias table: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("aliases") || !doc["aliases"].is_array()) {
        throw MalformedInput("gate alias table: expected {\"aliases\": [...]}");
    }
    std::vector<GateAlias> table;
    for (const auto& entry : doc["aliases"]) {
        GateAlias alias;
        alias.method = entry.at("method").get<std::string>();
        const auto kind = gate_kind_from_name(entry.at("kind").get<std::string>());
        if (!kind) {
            throw UnsupportedElement("gate alias table: unknown gate kind '" +
                                     entry.at("kind").get<std::string>() + "'");
        }
        alias.kind = *kind;
        alias.takes_param = entry.value("param", false);
        alias.expands_to_all_qubits = entry.value("expands_to_all_qubits", false);
        table.push_back(std::move(alias));
    }
    return table;
}

std::string_view render_method(GateKind kind) {
    switch (kind) {
        case GateKind::H: return "h";
        case GateKind::X: return "x";
        case GateKind::Y: return "y";
        case GateKind::Z: return "z";
        case GateKind::S: return "s";
        case GateKind::T: return "t";
        case GateKind::Swap: return "swap";
        case GateKind::Cx: return "cx";
        case GateKind::Ccx: return "ccx";
        case GateKind::Rx: return "rx";
        case GateKind::Ry: return "ry";
        case GateKind::Rz: return "rz";
        case GateKind::Measure: return "measure";
        case GateKind::Reset: return "reset";
        case GateKind::Barrier: return "barrier";
    }
    return "h";
}

const GateAlias* find_alias(const std::vector<GateAlias>& table, std::string_view method) {
    for (const auto& alias : table) {
        if (alias.method == method) return &alias;
    }
    return nullptr;
}

}  // namespace qmdgen
