#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qmdgen {

enum class PromptKind { Generic, Specific };

std::string_view to_string(PromptKind kind);
PromptKind prompt_kind_from_name(const std::string& name);  // throws ConfigInvalid

/// A retrieved chunk as injected into the prompt.
struct ContextChunk {
    std::string chunk_id;
    std::string text;
};

struct Prompt {
    std::string system_text;
    std::string user_text;  // optional context section, then the model text verbatim
    PromptKind kind = PromptKind::Generic;
    std::vector<std::string> context_ids;
};

/// Template texts with {{CONTEXT}} and {{MODEL}} slots in the user part.
/// The defaults are duplicated as editable assets under assets/prompts/.
struct PromptTemplate {
    std::string system_text;
    std::string user_template;
};

struct PromptTemplates {
    PromptTemplate generic;
    PromptTemplate specific;
};

const PromptTemplates& default_templates();

/// Asset file bodies (system part, a `=== user ===` separator line, user
/// part). Used to write and to load template directories.
std::string template_file_text(const PromptTemplate& tpl);
PromptTemplate parse_template_file(const std::string& body);

/// Loads generic.txt and specific.txt from `dir`; throws ConfigInvalid when
/// either is missing or malformed.
PromptTemplates load_templates(const std::filesystem::path& dir);

/// Assembles the final prompt. Context chunks appear under a delimited
/// "Context" header in rank order, each prefixed by its chunk_id; the model
/// text is included verbatim. Throws EmptyModelText.
Prompt build_prompt(const std::string& model_text, PromptKind kind,
                    const std::vector<ContextChunk>& context,
                    const PromptTemplates& templates = default_templates());

}  // namespace qmdgen
