#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "qmdgen/gates.hpp"
#include "qmdgen/model.hpp"

namespace qmdgen {

// ------------------------------------------------------------------ lexer --

enum class Tok { Name, Keyword, Number, String, Op, Newline, Indent, Dedent, End, Bad };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 0;
    int col = 0;
};

std::vector<Token> lex_source(const std::string& source);

/// Token texts for the BLEU components: names, keywords, numbers, strings
/// and punctuation in order; comments and layout dropped.
std::vector<std::string> code_tokens(const std::string& source);

// ------------------------------------------------------------------- tree --

/// Rooted ordered tree over the supported subset. Every source token lands
/// as a leaf in order, so the in-order leaf concatenation reproduces the
/// token stream. Leaf kinds: "name", "number", "string", "op", "kw".
struct SyntaxNode {
    std::string kind;
    std::string text;  // leaves only
    std::vector<SyntaxNode> children;
    int line = 0;
    int col = 0;

    bool is_leaf() const { return children.empty() && !text.empty(); }
};

struct SyntaxTree {
    SyntaxNode root;       // kind "module"
    bool degraded = false; // true iff any error node exists
    std::vector<std::string> errors;
};

/// Error-recovering parse of the supported subset. Never throws; unparseable
/// regions become "error" nodes holding their raw tokens and set the
/// degraded flag.
SyntaxTree parse_source(const std::string& source);

/// In-order leaf texts (the reproduced token stream).
std::vector<std::string> leaf_texts(const SyntaxNode& node);

// -------------------------------------------------------------- inventory --

struct Diagnostic {
    std::string message;
    int line = 0;
};

struct InventoryExtraction {
    ElementInventory inventory;
    std::vector<Diagnostic> diagnostics;  // UnresolvedOperand records etc.
};

/// Walks generated code for gate method calls on circuit-valued receivers,
/// declared register sizes and def/class names. for-range loops with literal
/// bounds are unrolled (at most 64 iterations); an operand that cannot be
/// resolved to an integer excludes its gate and records a diagnostic.
InventoryExtraction extract_generated_inventory(
    const SyntaxTree& tree, const std::vector<GateAlias>& aliases = default_gate_aliases());

// --------------------------------------------------------------- dataflow --

/// One def-use edge over position-normalized variable identities:
/// variable id in first-definition order, which definition of that variable
/// (0-based), which bound use of it (0-based).
struct DataFlowEdge {
    int variable = 0;
    int def_index = 0;
    int use_index = 0;

    auto operator<=>(const DataFlowEdge&) const = default;
};

struct DataFlowGraph {
    std::set<DataFlowEdge> edges;
    int variable_count = 0;
};

/// Def-use edges in straight-line order; loop and function bodies are
/// processed once; error nodes contribute nothing.
DataFlowGraph extract_dataflow(const SyntaxTree& tree);

}  // namespace qmdgen
