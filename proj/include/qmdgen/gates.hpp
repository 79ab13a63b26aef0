#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qmdgen {

/// The fixed gate vocabulary. Unknown kinds are hard errors everywhere,
/// never silent skips (a skip would corrupt Recall).
enum class GateKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    Swap,
    Cx,
    Ccx,
    Rx,
    Ry,
    Rz,
    Measure,
    Reset,
    Barrier,
};

inline constexpr int kGateKindCount = 15;

std::string_view to_string(GateKind kind);

/// Case-insensitive lookup of the canonical kind names (H, CX, MEASURE, ...).
std::optional<GateKind> gate_kind_from_name(std::string_view name);

std::vector<GateKind> all_gate_kinds();

bool is_rotation(GateKind kind);

/// Structural arity of a gate application on the model side.
/// targets == -1 means variadic (BARRIER accepts one or more targets).
struct GateArity {
    int controls;
    int targets;
};

GateArity arity_of(GateKind kind);

/// One row of the gate alias table: a method name as it appears in generated
/// code, the kind it maps to, whether the first argument is a rotation angle,
/// and whether the call expands to one gate per qubit of the receiving
/// circuit (measure_all).
struct GateAlias {
    std::string method;
    GateKind kind;
    bool takes_param = false;
    bool expands_to_all_qubits = false;
};

/// Built-in alias table: h, x, y, z, s, t, swap, cx/cnot, ccx/toffoli,
/// rx, ry, rz, measure/measure_all, reset, barrier.
const std::vector<GateAlias>& default_gate_aliases();

/// The same table as its JSON asset text (shipped under assets/, loadable at
/// runtime so new gate spellings need no rebuild).
std::string default_gate_aliases_json();

std::vector<GateAlias> parse_gate_aliases_json(const std::string& json_text);

/// Canonical method name used when rendering reference programs.
std::string_view render_method(GateKind kind);

const GateAlias* find_alias(const std::vector<GateAlias>& table, std::string_view method);

}  // namespace qmdgen
