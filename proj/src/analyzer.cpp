#include "qmdgen/analyzer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>

namespace qmdgen {

// ------------------------------------------------------------------ lexer --

namespace {

const std::set<std::string>& python_keywords() {
    static const std::set<std::string> kws = {
        "False", "None",   "True",  "and",    "as",     "assert", "async", "await",
        "break", "class",  "continue", "def", "del",    "elif",   "else",  "except",
        "finally", "for",  "from",  "global", "if",     "import", "in",    "is",
        "lambda", "nonlocal", "not", "or",    "pass",   "raise",  "return", "try",
        "while", "with",   "yield",
    };
    return kws;
}

bool name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool string_prefix(const std::string& text) {
    if (text.empty() || text.size() > 3) return false;
    for (char c : text) {
        const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (l != 'r' && l != 'b' && l != 'u' && l != 'f') return false;
    }
    return true;
}

struct Lexer {
    const std::string& src;
    size_t pos = 0;
    int line = 1;
    int col = 0;
    int parens = 0;
    bool at_line_start = true;
    std::vector<int> indents{0};
    std::vector<Token> toks;
    bool line_had_tokens = false;

    explicit Lexer(const std::string& text) : src(text) {}

    char peek(size_t off = 0) const { return pos + off < src.size() ? src[pos + off] : '\0'; }

    void advance() {
        if (peek() == '\n') {
            ++line;
            col = 0;
        } else {
            ++col;
        }
        ++pos;
    }

    void push(Tok kind, std::string text, int tline, int tcol) {
        toks.push_back({kind, std::move(text), tline, tcol});
        if (kind != Tok::Newline && kind != Tok::Indent && kind != Tok::Dedent) {
            line_had_tokens = true;
        }
    }

    void handle_indentation() {
        int width = 0;
        while (peek() == ' ' || peek() == '\t') {
            width = peek() == '\t' ? (width / 8 + 1) * 8 : width + 1;
            advance();
        }
        if (peek() == '\0') return;
        if (peek() == '\n') {  // blank line
            advance();
            return;
        }
        if (peek() == '#') {
            while (peek() != '\n' && peek() != '\0') advance();
            if (peek() == '\n') advance();
            return;
        }
        at_line_start = false;
        if (width > indents.back()) {
            indents.push_back(width);
            push(Tok::Indent, "", line, 0);
        } else {
            while (width < indents.back()) {
                indents.pop_back();
                push(Tok::Dedent, "", line, 0);
            }
            if (width != indents.back()) {
                // misaligned dedent: surface as a bad token, adopt the level
                indents.push_back(width);
                push(Tok::Bad, "<indent>", line, 0);
            }
        }
    }

    void lex_string(std::string prefix, int tline, int tcol) {
        std::string text = std::move(prefix);
        const char quote = peek();
        const bool triple = peek(1) == quote && peek(2) == quote;
        const int quotes = triple ? 3 : 1;
        for (int i = 0; i < quotes; ++i) {
            text.push_back(peek());
            advance();
        }
        while (true) {
            if (peek() == '\0') {
                push(Tok::Bad, text, tline, tcol);  // unterminated
                return;
            }
            if (!triple && peek() == '\n') {
                push(Tok::Bad, text, tline, tcol);
                return;
            }
            if (peek() == '\\') {
                text.push_back(peek());
                advance();
                if (peek() != '\0') {
                    text.push_back(peek());
                    advance();
                }
                continue;
            }
            if (peek() == quote && (!triple || (peek(1) == quote && peek(2) == quote))) {
                for (int i = 0; i < quotes; ++i) {
                    text.push_back(peek());
                    advance();
                }
                push(Tok::String, text, tline, tcol);
                return;
            }
            text.push_back(peek());
            advance();
        }
    }

    void lex_number(int tline, int tcol) {
        std::string text;
        bool prev_exp = false;
        while (true) {
            const char c = peek();
            if (name_char(c) || c == '.' || ((c == '+' || c == '-') && prev_exp)) {
                prev_exp = (c == 'e' || c == 'E') && text.size() > 0 &&
                           text.find('x') == std::string::npos &&
                           text.find('X') == std::string::npos;
                text.push_back(c);
                advance();
            } else {
                break;
            }
        }
        push(Tok::Number, text, tline, tcol);
    }

    void lex_operator(int tline, int tcol) {
        static const char* multi[] = {"**=", "//=", "<<=", ">>=", "...", "->", "**", "//",
                                      "<<", ">>", "<=", ">=", "==", "!=", "+=", "-=",
                                      "*=", "/=", "%=", "@=", "&=", "|=", "^=", ":="};
        for (const char* op : multi) {
            const size_t len = std::strlen(op);
            if (src.compare(pos, len, op) == 0) {
                for (size_t i = 0; i < len; ++i) advance();
                push(Tok::Op, op, tline, tcol);
                return;
            }
        }
        const char c = peek();
        static const std::string singles = "+-*/%@&|^~<>=()[]{},:.;";
        if (singles.find(c) != std::string::npos) {
            if (c == '(' || c == '[' || c == '{') ++parens;
            if (c == ')' || c == ']' || c == '}') parens = std::max(0, parens - 1);
            advance();
            push(Tok::Op, std::string(1, c), tline, tcol);
            return;
        }
        advance();
        push(Tok::Bad, std::string(1, c), tline, tcol);
    }

    std::vector<Token> run() {
        while (pos < src.size() || at_line_start) {
            if (at_line_start && parens == 0) {
                if (pos >= src.size()) break;
                line_had_tokens = false;
                handle_indentation();
                continue;
            }
            if (pos >= src.size()) break;
            const char c = peek();
            const int tline = line;
            const int tcol = col;
            if (c == '\n') {
                advance();
                if (parens == 0) {
                    if (line_had_tokens) push(Tok::Newline, "", tline, tcol);
                    at_line_start = true;
                }
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
                continue;
            }
            if (c == '\\' && peek(1) == '\n') {
                advance();
                advance();
                continue;
            }
            if (c == '#') {
                while (peek() != '\n' && peek() != '\0') advance();
                continue;
            }
            if (name_start(c)) {
                std::string text;
                while (name_char(peek())) {
                    text.push_back(peek());
                    advance();
                }
                if ((peek() == '"' || peek() == '\'') && string_prefix(text)) {
                    lex_string(std::move(text), tline, tcol);
                } else if (python_keywords().count(text)) {
                    push(Tok::Keyword, text, tline, tcol);
                } else {
                    push(Tok::Name, text, tline, tcol);
                }
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
                lex_number(tline, tcol);
                continue;
            }
            if (c == '"' || c == '\'') {
                lex_string("", tline, tcol);
                continue;
            }
            lex_operator(tline, tcol);
        }
        if (line_had_tokens) push(Tok::Newline, "", line, col);
        while (indents.size() > 1) {
            indents.pop_back();
            push(Tok::Dedent, "", line, 0);
        }
        push(Tok::End, "", line, col);
        return std::move(toks);
    }
};

}  // namespace

std::vector<Token> lex_source(const std::string& source) {
    return Lexer(source).run();
}

std::vector<std::string> code_tokens(const std::string& source) {
    std::vector<std::string> out;
    for (const auto& token : lex_source(source)) {
        if (token.kind == Tok::Newline || token.kind == Tok::Indent ||
            token.kind == Tok::Dedent || token.kind == Tok::End) {
            continue;
        }
        out.push_back(token.text);
    }
    return out;
}

// ----------------------------------------------------------------- parser --

namespace {

struct ParseFail {};

bool is_op_leaf(const SyntaxNode& node) {
    return node.children.empty() && (node.kind == "op" || node.kind == "kw");
}

struct Parser {
    const std::vector<Token>& toks;
    size_t pos = 0;
    SyntaxTree tree;

    explicit Parser(const std::vector<Token>& tokens) : toks(tokens) {}

    const Token& peek(size_t off = 0) const {
        const size_t i = pos + off;
        return i < toks.size() ? toks[i] : toks.back();
    }

    Token take() {
        const Token& t = peek();
        if (pos < toks.size() - 1) ++pos;
        return t;
    }

    bool at(Tok kind) const { return peek().kind == kind; }
    bool at_op(const char* text) const { return at(Tok::Op) && peek().text == text; }
    bool at_kw(const char* text) const { return at(Tok::Keyword) && peek().text == text; }

    static SyntaxNode leaf_of(const Token& t) {
        SyntaxNode leaf;
        switch (t.kind) {
            case Tok::Name: leaf.kind = "name"; break;
            case Tok::Keyword: leaf.kind = "kw"; break;
            case Tok::Number: leaf.kind = "number"; break;
            case Tok::String: leaf.kind = "string"; break;
            case Tok::Op: leaf.kind = "op"; break;
            default: leaf.kind = "bad"; break;
        }
        leaf.text = t.text;
        leaf.line = t.line;
        leaf.col = t.col;
        return leaf;
    }

    SyntaxNode take_leaf() { return leaf_of(take()); }

    SyntaxNode expect_op(const char* text) {
        if (!at_op(text)) throw ParseFail{};
        return take_leaf();
    }

    SyntaxNode expect_kw(const char* text) {
        if (!at_kw(text)) throw ParseFail{};
        return take_leaf();
    }

    SyntaxNode expect_name() {
        if (!at(Tok::Name)) throw ParseFail{};
        return take_leaf();
    }

    // --- error recovery ------------------------------------------------

    SyntaxNode error_node_from(size_t start) {
        pos = start;
        SyntaxNode err;
        err.kind = "error";
        err.line = peek().line;
        while (!at(Tok::Newline) && !at(Tok::End)) {
            if (at(Tok::Indent) || at(Tok::Dedent)) {
                take();
                continue;
            }
            err.children.push_back(take_leaf());
        }
        if (at(Tok::Newline)) take();
        if (at(Tok::Indent)) {  // swallow the block a broken header opened
            take();
            int depth = 1;
            while (depth > 0 && !at(Tok::End)) {
                if (at(Tok::Indent)) {
                    take();
                    ++depth;
                } else if (at(Tok::Dedent)) {
                    take();
                    --depth;
                } else if (at(Tok::Newline)) {
                    take();
                } else {
                    err.children.push_back(take_leaf());
                }
            }
        }
        if (pos == start) take();  // always make progress
        tree.degraded = true;
        tree.errors.push_back("syntax error at line " + std::to_string(err.line));
        return err;
    }

    // --- expressions ----------------------------------------------------

    bool starts_expression() const {
        if (at(Tok::Name) || at(Tok::Number) || at(Tok::String)) return true;
        if (at(Tok::Op)) {
            const std::string& t = peek().text;
            return t == "(" || t == "[" || t == "{" || t == "+" || t == "-" || t == "~" ||
                   t == "*" || t == "**";
        }
        if (at(Tok::Keyword)) {
            const std::string& t = peek().text;
            return t == "True" || t == "False" || t == "None" || t == "not";
        }
        return false;
    }

    SyntaxNode test() { return or_test(); }

    SyntaxNode or_test() {
        SyntaxNode node = and_test();
        while (at_kw("or")) {
            SyntaxNode chain;
            chain.kind = "boolop";
            chain.line = node.line;
            chain.children.push_back(std::move(node));
            chain.children.push_back(take_leaf());
            chain.children.push_back(and_test());
            node = std::move(chain);
        }
        return node;
    }

    SyntaxNode and_test() {
        SyntaxNode node = not_test();
        while (at_kw("and")) {
            SyntaxNode chain;
            chain.kind = "boolop";
            chain.line = node.line;
            chain.children.push_back(std::move(node));
            chain.children.push_back(take_leaf());
            chain.children.push_back(not_test());
            node = std::move(chain);
        }
        return node;
    }

    SyntaxNode not_test() {
        if (at_kw("not")) {
            SyntaxNode node;
            node.kind = "unaryop";
            node.line = peek().line;
            node.children.push_back(take_leaf());
            node.children.push_back(not_test());
            return node;
        }
        return comparison();
    }

    bool at_compare_op() const {
        if (at(Tok::Op)) {
            const std::string& t = peek().text;
            return t == "==" || t == "!=" || t == "<" || t == ">" || t == "<=" || t == ">=";
        }
        return at_kw("in") || at_kw("is") ||
               (at_kw("not") && peek(1).kind == Tok::Keyword && peek(1).text == "in");
    }

    SyntaxNode comparison() {
        SyntaxNode node = arith();
        if (!at_compare_op()) return node;
        SyntaxNode cmp;
        cmp.kind = "compare";
        cmp.line = node.line;
        cmp.children.push_back(std::move(node));
        while (at_compare_op()) {
            cmp.children.push_back(take_leaf());
            if (at_kw("in") || at_kw("not")) cmp.children.push_back(take_leaf());
            cmp.children.push_back(arith());
        }
        return cmp;
    }

    SyntaxNode arith() {
        SyntaxNode node = term();
        while (at_op("+") || at_op("-")) {
            SyntaxNode bin;
            bin.kind = "binop";
            bin.line = node.line;
            bin.children.push_back(std::move(node));
            bin.children.push_back(take_leaf());
            bin.children.push_back(term());
            node = std::move(bin);
        }
        return node;
    }

    SyntaxNode term() {
        SyntaxNode node = factor();
        while (at_op("*") || at_op("/") || at_op("//") || at_op("%") || at_op("@")) {
            SyntaxNode bin;
            bin.kind = "binop";
            bin.line = node.line;
            bin.children.push_back(std::move(node));
            bin.children.push_back(take_leaf());
            bin.children.push_back(factor());
            node = std::move(bin);
        }
        return node;
    }

    SyntaxNode factor() {
        if (at_op("+") || at_op("-") || at_op("~")) {
            SyntaxNode node;
            node.kind = "unaryop";
            node.line = peek().line;
            node.children.push_back(take_leaf());
            node.children.push_back(factor());
            return node;
        }
        return power();
    }

    SyntaxNode power() {
        SyntaxNode node = atom_trailers();
        if (at_op("**")) {
            SyntaxNode bin;
            bin.kind = "binop";
            bin.line = node.line;
            bin.children.push_back(std::move(node));
            bin.children.push_back(take_leaf());
            bin.children.push_back(factor());
            return bin;
        }
        return node;
    }

    SyntaxNode atom_trailers() {
        SyntaxNode node = atom();
        while (true) {
            if (at_op("(")) {
                SyntaxNode call;
                call.kind = "call";
                call.line = node.line;
                call.children.push_back(std::move(node));
                call.children.push_back(take_leaf());
                arglist(call);
                call.children.push_back(expect_op(")"));
                node = std::move(call);
            } else if (at_op(".")) {
                SyntaxNode attr;
                attr.kind = "attribute";
                attr.line = node.line;
                attr.children.push_back(std::move(node));
                attr.children.push_back(take_leaf());
                attr.children.push_back(expect_name());
                node = std::move(attr);
            } else if (at_op("[")) {
                SyntaxNode sub;
                sub.kind = "subscript";
                sub.line = node.line;
                sub.children.push_back(std::move(node));
                sub.children.push_back(take_leaf());
                while (!at_op("]")) {
                    if (at_op(":") || at_op(",")) {
                        sub.children.push_back(take_leaf());
                        continue;
                    }
                    if (!starts_expression()) throw ParseFail{};
                    sub.children.push_back(test());
                }
                sub.children.push_back(take_leaf());  // "]"
                node = std::move(sub);
            } else {
                return node;
            }
        }
    }

    void arglist(SyntaxNode& call) {
        while (!at_op(")")) {
            if (at_op(",")) {
                call.children.push_back(take_leaf());
                continue;
            }
            if (at_op("*") || at_op("**")) {
                SyntaxNode star;
                star.kind = "unaryop";
                star.line = peek().line;
                star.children.push_back(take_leaf());
                star.children.push_back(test());
                call.children.push_back(std::move(star));
                continue;
            }
            if (at(Tok::Name) && peek(1).kind == Tok::Op && peek(1).text == "=") {
                SyntaxNode kwarg;
                kwarg.kind = "kwarg";
                kwarg.line = peek().line;
                kwarg.children.push_back(take_leaf());
                kwarg.children.push_back(take_leaf());
                kwarg.children.push_back(test());
                call.children.push_back(std::move(kwarg));
                continue;
            }
            if (!starts_expression()) throw ParseFail{};
            call.children.push_back(test());
        }
    }

    // Comprehension tail shared by list/paren atoms: `for target in iter [if cond]`.
    void comprehension_tail(SyntaxNode& node) {
        node.children.push_back(take_leaf());  // "for"
        node.children.push_back(expect_name());
        while (at_op(",")) {
            node.children.push_back(take_leaf());
            node.children.push_back(expect_name());
        }
        node.children.push_back(expect_kw("in"));
        node.children.push_back(or_test());
        if (at_kw("if")) {
            node.children.push_back(take_leaf());
            node.children.push_back(or_test());
        }
    }

    SyntaxNode atom() {
        if (at(Tok::Name)) return take_leaf();
        if (at(Tok::Number)) return take_leaf();
        if (at(Tok::String)) {
            SyntaxNode first = take_leaf();
            if (!at(Tok::String)) return first;
            SyntaxNode cat;
            cat.kind = "strconcat";
            cat.line = first.line;
            cat.children.push_back(std::move(first));
            while (at(Tok::String)) cat.children.push_back(take_leaf());
            return cat;
        }
        if (at_kw("True") || at_kw("False") || at_kw("None")) return take_leaf();
        if (at_op("(")) {
            SyntaxNode node;
            node.line = peek().line;
            node.children.push_back(take_leaf());
            if (at_op(")")) {
                node.kind = "tuple";
                node.children.push_back(take_leaf());
                return node;
            }
            node.children.push_back(test());
            if (at_kw("for")) {
                node.kind = "comprehension";
                comprehension_tail(node);
            } else if (at_op(",")) {
                node.kind = "tuple";
                while (at_op(",")) {
                    node.children.push_back(take_leaf());
                    if (starts_expression()) node.children.push_back(test());
                }
            } else {
                node.kind = "paren";
            }
            node.children.push_back(expect_op(")"));
            return node;
        }
        if (at_op("[")) {
            SyntaxNode node;
            node.kind = "list";
            node.line = peek().line;
            node.children.push_back(take_leaf());
            if (!at_op("]") && starts_expression()) {
                node.children.push_back(test());
                if (at_kw("for")) {
                    node.kind = "comprehension";
                    comprehension_tail(node);
                } else {
                    while (at_op(",")) {
                        node.children.push_back(take_leaf());
                        if (starts_expression()) node.children.push_back(test());
                    }
                }
            }
            node.children.push_back(expect_op("]"));
            return node;
        }
        if (at_op("{")) {
            SyntaxNode node;
            node.kind = "dict";
            node.line = peek().line;
            node.children.push_back(take_leaf());
            while (!at_op("}")) {
                if (at_op(",") || at_op(":")) {
                    node.children.push_back(take_leaf());
                    continue;
                }
                if (!starts_expression()) throw ParseFail{};
                node.children.push_back(test());
            }
            node.children.push_back(take_leaf());
            return node;
        }
        throw ParseFail{};
    }

    SyntaxNode testlist() {
        SyntaxNode first = test();
        if (!at_op(",")) return first;
        SyntaxNode tup;
        tup.kind = "tuple";
        tup.line = first.line;
        tup.children.push_back(std::move(first));
        while (at_op(",")) {
            tup.children.push_back(take_leaf());
            if (starts_expression()) tup.children.push_back(test());
        }
        return tup;
    }

    // --- statements -----------------------------------------------------

    bool at_augop() const {
        if (!at(Tok::Op)) return false;
        const std::string& t = peek().text;
        return t == "+=" || t == "-=" || t == "*=" || t == "/=" || t == "//=" || t == "%=" ||
               t == "**=" || t == "&=" || t == "|=" || t == "^=" || t == "<<=" || t == ">>=" ||
               t == "@=";
    }

    SyntaxNode simple_statement() {
        if (at(Tok::Keyword)) {
            const std::string& kw = peek().text;
            if (kw == "import") return import_stmt();
            if (kw == "from") return from_import_stmt();
            if (kw == "return" || kw == "raise" || kw == "del" || kw == "assert" ||
                kw == "global" || kw == "nonlocal") {
                SyntaxNode node;
                node.kind = kw;
                node.line = peek().line;
                node.children.push_back(take_leaf());
                if (starts_expression()) node.children.push_back(testlist());
                if (node.kind == "assert" && at_op(",")) {
                    node.children.push_back(take_leaf());
                    node.children.push_back(test());
                }
                return node;
            }
            if (kw == "pass" || kw == "break" || kw == "continue") {
                SyntaxNode node;
                node.kind = kw;
                node.line = peek().line;
                node.children.push_back(take_leaf());
                return node;
            }
            if (kw != "True" && kw != "False" && kw != "None" && kw != "not") throw ParseFail{};
        }
        SyntaxNode first = testlist();
        if (at_op("=")) {
            SyntaxNode assign;
            assign.kind = "assign";
            assign.line = first.line;
            assign.children.push_back(std::move(first));
            while (at_op("=")) {
                assign.children.push_back(take_leaf());
                assign.children.push_back(testlist());
            }
            return assign;
        }
        if (at_augop()) {
            SyntaxNode aug;
            aug.kind = "augassign";
            aug.line = first.line;
            aug.children.push_back(std::move(first));
            aug.children.push_back(take_leaf());
            aug.children.push_back(testlist());
            return aug;
        }
        return first;  // bare expression statement
    }

    SyntaxNode import_stmt() {
        SyntaxNode node;
        node.kind = "import";
        node.line = peek().line;
        node.children.push_back(take_leaf());  // import
        while (true) {
            node.children.push_back(dotted_name());
            if (at_kw("as")) {
                node.children.push_back(take_leaf());
                node.children.push_back(expect_name());
            }
            if (!at_op(",")) break;
            node.children.push_back(take_leaf());
        }
        return node;
    }

    SyntaxNode from_import_stmt() {
        SyntaxNode node;
        node.kind = "import_from";
        node.line = peek().line;
        node.children.push_back(take_leaf());  // from
        while (at_op(".")) node.children.push_back(take_leaf());
        if (at(Tok::Name)) node.children.push_back(dotted_name());
        node.children.push_back(expect_kw("import"));
        if (at_op("*")) {
            node.children.push_back(take_leaf());
            return node;
        }
        const bool parenthesized = at_op("(");
        if (parenthesized) node.children.push_back(take_leaf());
        while (true) {
            node.children.push_back(expect_name());
            if (at_kw("as")) {
                node.children.push_back(take_leaf());
                node.children.push_back(expect_name());
            }
            if (!at_op(",")) break;
            node.children.push_back(take_leaf());
            if (parenthesized && at_op(")")) break;
        }
        if (parenthesized) node.children.push_back(expect_op(")"));
        return node;
    }

    SyntaxNode dotted_name() {
        SyntaxNode first = expect_name();
        if (!at_op(".")) return first;
        SyntaxNode node;
        node.kind = "dotted";
        node.line = first.line;
        node.children.push_back(std::move(first));
        while (at_op(".")) {
            node.children.push_back(take_leaf());
            node.children.push_back(expect_name());
        }
        return node;
    }

    SyntaxNode suite_after_colon() {
        SyntaxNode node;
        node.kind = "suite";
        node.line = peek().line;
        if (at(Tok::Newline)) {
            take();
            if (!at(Tok::Indent)) throw ParseFail{};
            take();
            while (!at(Tok::Dedent) && !at(Tok::End)) {
                if (at(Tok::Newline)) {
                    take();
                    continue;
                }
                parse_logical_line(node.children);
            }
            if (at(Tok::Dedent)) take();
        } else {
            // inline body: ';'-separated simple statements on the same line
            while (true) {
                const size_t start = pos;
                try {
                    node.children.push_back(simple_statement());
                } catch (ParseFail&) {
                    node.children.push_back(error_node_from(start));
                    return node;
                }
                if (at_op(";")) {
                    take();
                    if (at(Tok::Newline)) {
                        take();
                        break;
                    }
                    continue;
                }
                if (at(Tok::Newline) || at(Tok::End)) {
                    if (at(Tok::Newline)) take();
                    break;
                }
                node.children.push_back(error_node_from(pos));
                break;
            }
        }
        return node;
    }

    SyntaxNode for_stmt() {
        SyntaxNode node;
        node.kind = "for";
        node.line = peek().line;
        node.children.push_back(take_leaf());  // for
        node.children.push_back(expect_name());
        while (at_op(",")) {
            node.children.push_back(take_leaf());
            node.children.push_back(expect_name());
        }
        node.children.push_back(expect_kw("in"));
        node.children.push_back(testlist());
        node.children.push_back(expect_op(":"));
        node.children.push_back(suite_after_colon());
        return node;
    }

    SyntaxNode def_stmt() {
        SyntaxNode node;
        node.kind = "def";
        node.line = peek().line;
        node.children.push_back(take_leaf());  // def
        node.children.push_back(expect_name());
        node.children.push_back(expect_op("("));
        SyntaxNode params;
        params.kind = "params";
        params.line = peek().line;
        while (!at_op(")")) {
            if (at_op(",") || at_op("*") || at_op("**")) {
                params.children.push_back(take_leaf());
                continue;
            }
            if (at(Tok::Name)) {
                params.children.push_back(take_leaf());
                if (at_op(":")) {  // annotation
                    params.children.push_back(take_leaf());
                    params.children.push_back(test());
                }
                if (at_op("=")) {
                    params.children.push_back(take_leaf());
                    params.children.push_back(test());
                }
                continue;
            }
            throw ParseFail{};
        }
        node.children.push_back(std::move(params));
        node.children.push_back(expect_op(")"));
        if (at_op("->")) {
            node.children.push_back(take_leaf());
            node.children.push_back(test());
        }
        node.children.push_back(expect_op(":"));
        node.children.push_back(suite_after_colon());
        return node;
    }

    SyntaxNode class_stmt() {
        SyntaxNode node;
        node.kind = "class";
        node.line = peek().line;
        node.children.push_back(take_leaf());  // class
        node.children.push_back(expect_name());
        if (at_op("(")) {
            SyntaxNode bases;
            bases.kind = "bases";
            bases.line = peek().line;
            bases.children.push_back(take_leaf());
            while (!at_op(")")) {
                if (at_op(",")) {
                    bases.children.push_back(take_leaf());
                    continue;
                }
                if (!starts_expression()) throw ParseFail{};
                bases.children.push_back(test());
            }
            bases.children.push_back(take_leaf());
            node.children.push_back(std::move(bases));
        }
        node.children.push_back(expect_op(":"));
        node.children.push_back(suite_after_colon());
        return node;
    }

    SyntaxNode if_stmt() {
        SyntaxNode node;
        node.kind = "if";
        node.line = peek().line;
        node.children.push_back(take_leaf());  // if
        node.children.push_back(test());
        node.children.push_back(expect_op(":"));
        node.children.push_back(suite_after_colon());
        while (at_kw("elif")) {
            node.children.push_back(take_leaf());
            node.children.push_back(test());
            node.children.push_back(expect_op(":"));
            node.children.push_back(suite_after_colon());
        }
        if (at_kw("else")) {
            node.children.push_back(take_leaf());
            node.children.push_back(expect_op(":"));
            node.children.push_back(suite_after_colon());
        }
        return node;
    }

    SyntaxNode while_stmt() {
        SyntaxNode node;
        node.kind = "while";
        node.line = peek().line;
        node.children.push_back(take_leaf());
        node.children.push_back(test());
        node.children.push_back(expect_op(":"));
        node.children.push_back(suite_after_colon());
        return node;
    }

    SyntaxNode with_stmt() {
        SyntaxNode node;
        node.kind = "with";
        node.line = peek().line;
        node.children.push_back(take_leaf());
        while (true) {
            node.children.push_back(test());
            if (at_kw("as")) {
                node.children.push_back(take_leaf());
                node.children.push_back(expect_name());
            }
            if (!at_op(",")) break;
            node.children.push_back(take_leaf());
        }
        node.children.push_back(expect_op(":"));
        node.children.push_back(suite_after_colon());
        return node;
    }

    SyntaxNode try_stmt() {
        SyntaxNode node;
        node.kind = "try";
        node.line = peek().line;
        node.children.push_back(take_leaf());
        node.children.push_back(expect_op(":"));
        node.children.push_back(suite_after_colon());
        while (at_kw("except")) {
            node.children.push_back(take_leaf());
            if (starts_expression()) {
                node.children.push_back(test());
                if (at_kw("as")) {
                    node.children.push_back(take_leaf());
                    node.children.push_back(expect_name());
                }
            }
            node.children.push_back(expect_op(":"));
            node.children.push_back(suite_after_colon());
        }
        if (at_kw("else")) {
            node.children.push_back(take_leaf());
            node.children.push_back(expect_op(":"));
            node.children.push_back(suite_after_colon());
        }
        if (at_kw("finally")) {
            node.children.push_back(take_leaf());
            node.children.push_back(expect_op(":"));
            node.children.push_back(suite_after_colon());
        }
        return node;
    }

    void parse_logical_line(std::vector<SyntaxNode>& out) {
        const size_t start = pos;
        const size_t out_start = out.size();
        try {
            if (at(Tok::Keyword)) {
                const std::string& kw = peek().text;
                if (kw == "for") {
                    out.push_back(for_stmt());
                    return;
                }
                if (kw == "def") {
                    out.push_back(def_stmt());
                    return;
                }
                if (kw == "class") {
                    out.push_back(class_stmt());
                    return;
                }
                if (kw == "if") {
                    out.push_back(if_stmt());
                    return;
                }
                if (kw == "while") {
                    out.push_back(while_stmt());
                    return;
                }
                if (kw == "with") {
                    out.push_back(with_stmt());
                    return;
                }
                if (kw == "try") {
                    out.push_back(try_stmt());
                    return;
                }
            }
            while (true) {
                out.push_back(simple_statement());
                if (at_op(";")) {
                    take();
                    if (at(Tok::Newline)) {
                        take();
                        return;
                    }
                    continue;
                }
                if (at(Tok::Newline)) {
                    take();
                    return;
                }
                if (at(Tok::End)) return;
                throw ParseFail{};  // trailing garbage on the line
            }
        } catch (ParseFail&) {
            // drop any partial nodes from this line and re-consume it raw
            while (out.size() > 0 && !out.empty() && pos > start) break;
            out.push_back(error_node_from(start));
        }
    }

    SyntaxTree run() {
        tree.root.kind = "module";
        tree.root.line = 1;
        while (!at(Tok::End)) {
            if (at(Tok::Newline)) {
                take();
                continue;
            }
            if (at(Tok::Indent) || at(Tok::Dedent) || at(Tok::Bad)) {
                tree.root.children.push_back(error_node_from(pos));
                continue;
            }
            parse_logical_line(tree.root.children);
        }
        return std::move(tree);
    }
};

}  // namespace

SyntaxTree parse_source(const std::string& source) {
    const auto tokens = lex_source(source);
    return Parser(tokens).run();
}

std::vector<std::string> leaf_texts(const SyntaxNode& node) {
    std::vector<std::string> out;
    const std::function<void(const SyntaxNode&)> walk = [&](const SyntaxNode& n) {
        if (n.children.empty()) {
            if (!n.text.empty() || n.kind == "string") out.push_back(n.text);
            return;
        }
        for (const auto& child : n.children) walk(child);
    };
    walk(node);
    return out;
}

}  // namespace qmdgen
