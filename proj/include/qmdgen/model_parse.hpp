#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "qmdgen/model.hpp"

namespace qmdgen {

enum class ModelFormat { Json, Xmi };

/// Stereotype name (lowercased) -> gate kind. Config key
/// model.stereotype_aliases merges extra entries on top of the defaults.
using StereotypeAliases = std::map<std::string, GateKind>;

const StereotypeAliases& default_stereotype_aliases();

/// Parse a model instance from bytes. JSON is the self-contained fixture
/// format; XMI is the Eclipse-UML2-style subset (activity + partitions +
/// stereotyped actions, everything else collected as classical elements).
/// Throws MalformedInput, UnsupportedElement, DanglingReference.
QuantumCircuitModel parse_model(const std::string& source, ModelFormat format,
                                const StereotypeAliases& aliases = default_stereotype_aliases());

/// Format chosen by extension: .xmi/.uml/.xml -> Xmi, anything else -> Json.
QuantumCircuitModel parse_model_file(const std::filesystem::path& path,
                                     const StereotypeAliases& aliases = default_stereotype_aliases());

}  // namespace qmdgen
