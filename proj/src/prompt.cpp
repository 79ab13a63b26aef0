#include "qmdgen/prompt.hpp"

#include <fstream>
#include <sstream>

#include "qmdgen/errors.hpp"

namespace qmdgen {

namespace {

constexpr const char* kUserSeparator = "=== user ===";

constexpr const char* kGenericSystem =
    "Generate quantum code for the circuit described by the following model.\n";

// The specific template repeats the generic instruction and adds the full
// gate mapping table, syntax constraints, and the output-format directive.
constexpr const char* kSpecificSystem =
    "Generate quantum code for the circuit described by the following model.\n"
    "Map each gate kind of the model to the corresponding Qiskit call on the circuit object:\n"
    "  H -> qc.h(target)\n"
    "  X -> qc.x(target)\n"
    "  Y -> qc.y(target)\n"
    "  Z -> qc.z(target)\n"
    "  S -> qc.s(target)\n"
    "  T -> qc.t(target)\n"
    "  SWAP -> qc.swap(first, second)\n"
    "  CX -> qc.cx(control, target)\n"
    "  CCX -> qc.ccx(control1, control2, target)\n"
    "  RX -> qc.rx(theta, target)\n"
    "  RY -> qc.ry(theta, target)\n"
    "  RZ -> qc.rz(theta, target)\n"
    "  MEASURE -> qc.measure(qubit, clbit)\n"
    "  RESET -> qc.reset(target)\n"
    "  BARRIER -> qc.barrier(*targets)\n"
    "Write one complete Python file: import what you use from qiskit, construct a single\n"
    "QuantumCircuit sized to the partition count (with one classical bit per qubit when the\n"
    "model measures), and apply the gates in model order using zero-based qubit indices.\n"
    "Measure each qubit into the classical bit of the same index.\n"
    "Do not write any prose, explanation, or comments outside the code.\n"
    "Answer with exactly one fenced code block containing the program.\n";

constexpr const char* kUserTemplate = "{{CONTEXT}}{{MODEL}}";

std::string replace_slot(std::string text, const std::string& slot, const std::string& value) {
    const auto pos = text.find(slot);
    if (pos == std::string::npos) {
        throw ConfigInvalid("prompt template is missing the " + slot + " slot");
    }
    text.replace(pos, slot.size(), value);
    return text;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigInvalid("cannot read prompt template '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

std::string_view to_string(PromptKind kind) {
    return kind == PromptKind::Generic ? "generic" : "specific";
}

PromptKind prompt_kind_from_name(const std::string& name) {
    if (name == "generic") return PromptKind::Generic;
    if (name == "specific") return PromptKind::Specific;
    throw ConfigInvalid("unknown prompt kind '" + name + "' (expected generic or specific)");
}

const PromptTemplates& default_templates() {
    static const PromptTemplates templates = {
        {kGenericSystem, kUserTemplate},
        {kSpecificSystem, kUserTemplate},
    };
    return templates;
}

std::string template_file_text(const PromptTemplate& tpl) {
    return tpl.system_text + kUserSeparator + "\n" + tpl.user_template + "\n";
}

PromptTemplate parse_template_file(const std::string& body) {
    std::istringstream in(body);
    std::string line;
    std::string system_text;
    std::string user_template;
    bool in_user = false;
    bool saw_separator = false;
    while (std::getline(in, line)) {
        if (!in_user && line == kUserSeparator) {
            in_user = true;
            saw_separator = true;
            continue;
        }
        (in_user ? user_template : system_text) += line;
        (in_user ? user_template : system_text) += '\n';
    }
    if (!saw_separator) {
        throw ConfigInvalid(std::string("prompt template is missing the '") + kUserSeparator +
                            "' separator");
    }
    // The file format is line-oriented; drop the newline the writer appended
    // after the user part so slots splice cleanly.
    if (!user_template.empty() && user_template.back() == '\n') user_template.pop_back();
    return {system_text, user_template};
}

PromptTemplates load_templates(const std::filesystem::path& dir) {
    PromptTemplates templates;
    templates.generic = parse_template_file(read_file(dir / "generic.txt"));
    templates.specific = parse_template_file(read_file(dir / "specific.txt"));
    return templates;
}

Prompt build_prompt(const std::string& model_text, PromptKind kind,
                    const std::vector<ContextChunk>& context, const PromptTemplates& templates) {
    if (model_text.empty()) throw EmptyModelText("model text is empty");

    const PromptTemplate& tpl =
        kind == PromptKind::Generic ? templates.generic : templates.specific;

    std::string context_section;
    Prompt prompt;
    prompt.kind = kind;
    if (!context.empty()) {
        std::ostringstream out;
        out << "Context:\n";
        for (const auto& chunk : context) {
            out << "[" << chunk.chunk_id << "]\n" << chunk.text;
            if (chunk.text.empty() || chunk.text.back() != '\n') out << '\n';
            prompt.context_ids.push_back(chunk.chunk_id);
        }
        out << "End of context.\n\n";
        context_section = out.str();
    }

    prompt.system_text = tpl.system_text;
    prompt.user_text = replace_slot(replace_slot(tpl.user_template, "{{CONTEXT}}", context_section),
                                    "{{MODEL}}", model_text);
    return prompt;
}

}  // namespace qmdgen
