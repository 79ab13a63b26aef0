#include "qmdgen/model_parse.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "qmdgen/errors.hpp"

namespace qmdgen {

namespace {

using nlohmann::json;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// ---------------------------------------------------------------- JSON ----

std::vector<int> int_list(const json& value, const char* field) {
    if (!value.is_array()) throw MalformedInput(std::string(field) + " must be an array");
    std::vector<int> out;
    for (const auto& item : value) {
        if (!item.is_number_integer()) {
            throw MalformedInput(std::string(field) + " must contain integers");
        }
        out.push_back(item.get<int>());
    }
    return out;
}

QuantumCircuitModel parse_json_model(const std::string& source) {
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::exception& e) {
        throw MalformedInput(std::string("model JSON: ") + e.what());
    }
    if (!doc.is_object()) throw MalformedInput("model JSON: top level must be an object");

    QuantumCircuitModel model;
    model.name = doc.value("name", std::string("model"));
    if (!doc.contains("partitions") || !doc["partitions"].is_array()) {
        throw MalformedInput("model JSON: missing \"partitions\" array");
    }
    int index = 0;
    for (const auto& part : doc["partitions"]) {
        if (!part.is_string()) throw MalformedInput("model JSON: partition names must be strings");
        model.partitions.push_back({index++, part.get<std::string>()});
    }

    struct Pending {
        GateApplication gate;
        int declared_seq;
        int doc_order;
    };
    std::vector<Pending> pending;
    if (doc.contains("gates")) {
        if (!doc["gates"].is_array()) throw MalformedInput("model JSON: \"gates\" must be an array");
        int order = 0;
        for (const auto& entry : doc["gates"]) {
            if (!entry.is_object()) throw MalformedInput("model JSON: gate entries must be objects");
            const std::string kind_name = entry.value("kind", std::string());
            const auto kind = gate_kind_from_name(kind_name);
            if (!kind) {
                throw UnsupportedElement("gate kind '" + kind_name +
                                         "' is outside the supported vocabulary");
            }
            Pending item;
            item.gate.kind = *kind;
            item.gate.targets = entry.contains("targets") ? int_list(entry["targets"], "targets")
                                                          : std::vector<int>{};
            item.gate.controls = entry.contains("controls") ? int_list(entry["controls"], "controls")
                                                            : std::vector<int>{};
            if (entry.contains("param") && !entry["param"].is_null()) {
                if (!entry["param"].is_number()) {
                    throw MalformedInput("model JSON: \"param\" must be a number");
                }
                item.gate.parameter = entry["param"].get<double>();
            }
            if (!entry.contains("seq") || !entry["seq"].is_number_integer()) {
                throw MalformedInput("model JSON: gate entries need an integer \"seq\"");
            }
            item.declared_seq = entry["seq"].get<int>();
            item.doc_order = order++;
            pending.push_back(std::move(item));
        }
    }
    std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
        if (a.declared_seq != b.declared_seq) return a.declared_seq < b.declared_seq;
        return a.doc_order < b.doc_order;
    });
    int seq = 0;
    for (auto& item : pending) {
        item.gate.seq = seq++;
        model.gates.push_back(std::move(item.gate));
    }

    if (doc.contains("classical")) {
        if (!doc["classical"].is_array()) {
            throw MalformedInput("model JSON: \"classical\" must be an array");
        }
        for (const auto& name : doc["classical"]) {
            if (!name.is_string()) throw MalformedInput("model JSON: classical names must be strings");
            model.classical_elements.push_back(name.get<std::string>());
        }
    }

    validate(model);
    return model;
}

// ----------------------------------------------------------------- XMI ----

using boost::property_tree::ptree;

bool type_ends_with(const std::string& xmi_type, std::string_view suffix) {
    return xmi_type.size() >= suffix.size() &&
           xmi_type.compare(xmi_type.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string local_tag(const std::string& tag) {
    const auto pos = tag.rfind(':');
    return pos == std::string::npos ? tag : tag.substr(pos + 1);
}

std::string tag_prefix(const std::string& tag) {
    const auto pos = tag.rfind(':');
    return pos == std::string::npos ? std::string() : tag.substr(0, pos);
}

std::vector<std::string> split_refs(const std::string& value) {
    std::vector<std::string> out;
    std::string current;
    for (char c : value) {
        if (c == ' ' || c == ',' || c == '\t' || c == '\n') {
            if (!current.empty()) out.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

struct XmiNode {
    std::string id;
    std::string name;
    std::vector<std::string> partition_refs;  // ids or names, in document order
    int doc_order = 0;
};

struct XmiEdge {
    std::string source;
    std::string target;
};

struct XmiStereotype {
    std::string name;       // local tag of the application element
    std::string base_ref;   // referenced action id
    std::optional<double> parameter;
    std::vector<std::string> control_refs;
    std::vector<std::string> target_refs;
    int doc_order = 0;
};

struct XmiDocument {
    std::string model_name;
    std::string activity_name;
    std::vector<std::pair<std::string, std::string>> partitions;  // id, name
    std::map<std::string, std::vector<std::string>> partition_nodes;  // partition id -> node ids
    std::vector<XmiNode> nodes;
    std::vector<XmiEdge> edges;
    std::vector<XmiStereotype> stereotypes;
    std::vector<std::string> classical;
    int counter = 0;
};

std::map<std::string, std::string> attributes_of(const ptree& element) {
    std::map<std::string, std::string> attrs;
    if (auto xmlattr = element.get_child_optional("<xmlattr>")) {
        for (const auto& [key, value] : *xmlattr) attrs[key] = value.data();
    }
    return attrs;
}

std::string attr_or(const std::map<std::string, std::string>& attrs, const std::string& key,
                    const std::string& fallback = "") {
    auto it = attrs.find(key);
    return it == attrs.end() ? fallback : it->second;
}

bool is_action_type(const std::string& xmi_type) {
    return type_ends_with(xmi_type, "Action") || type_ends_with(xmi_type, "SendSignalAction") ||
           type_ends_with(xmi_type, "AcceptEventAction");
}

bool is_classical_type(const std::string& xmi_type) {
    return type_ends_with(xmi_type, ":Class") || type_ends_with(xmi_type, ":Operation") ||
           type_ends_with(xmi_type, ":Property") || type_ends_with(xmi_type, ":Interface") ||
           type_ends_with(xmi_type, ":Enumeration");
}

void collect(const ptree& element, const std::string& tag, XmiDocument& doc) {
    const auto attrs = attributes_of(element);
    const std::string xmi_type = attr_or(attrs, "xmi:type", attr_or(attrs, "xsi:type"));
    const std::string local = local_tag(tag);
    const std::string prefix = tag_prefix(tag);
    const int order = doc.counter++;

    const bool is_profile_prefix =
        !prefix.empty() && prefix != "uml" && prefix != "xmi" && prefix != "xml" && prefix != "xsi";

    if (type_ends_with(xmi_type, ":Model") || local == "Model") {
        if (doc.model_name.empty()) doc.model_name = attr_or(attrs, "name");
    }
    if (type_ends_with(xmi_type, ":Activity") || local == "Activity") {
        if (doc.activity_name.empty()) doc.activity_name = attr_or(attrs, "name");
    } else if (type_ends_with(xmi_type, ":ActivityPartition") || local == "partition") {
        const std::string id = attr_or(attrs, "xmi:id");
        const std::string name = attr_or(attrs, "name");
        if (name.empty()) throw MalformedInput("XMI: activity partition without a name");
        doc.partitions.emplace_back(id, name);
        for (const auto& node_ref : split_refs(attr_or(attrs, "node"))) {
            doc.partition_nodes[id.empty() ? name : id].push_back(node_ref);
        }
    } else if (is_action_type(xmi_type)) {
        XmiNode node;
        node.id = attr_or(attrs, "xmi:id");
        node.name = attr_or(attrs, "name");
        node.partition_refs = split_refs(attr_or(attrs, "inPartition"));
        for (const auto& [child_tag, child] : element) {
            if (local_tag(child_tag) == "inPartition") {
                const auto child_attrs = attributes_of(child);
                const std::string ref =
                    attr_or(child_attrs, "xmi:idref", attr_or(child_attrs, "href"));
                if (!ref.empty()) node.partition_refs.push_back(ref);
            }
        }
        node.doc_order = order;
        doc.nodes.push_back(std::move(node));
    } else if (type_ends_with(xmi_type, ":ControlFlow") || type_ends_with(xmi_type, ":ObjectFlow") ||
               local == "edge") {
        XmiEdge edge;
        edge.source = attr_or(attrs, "source");
        edge.target = attr_or(attrs, "target");
        if (!edge.source.empty() && !edge.target.empty()) doc.edges.push_back(std::move(edge));
    } else if (is_classical_type(xmi_type) || local == "ownedOperation" ||
               local == "ownedAttribute") {
        const std::string name = attr_or(attrs, "name");
        if (!name.empty()) doc.classical.push_back(name);
    } else if (is_profile_prefix) {
        // A profile-namespaced element applying a stereotype to an action.
        std::string base;
        for (const auto& [key, value] : attrs) {
            if (key.rfind("base_", 0) == 0) {
                base = value;
                break;
            }
        }
        if (!base.empty()) {
            XmiStereotype st;
            st.name = local;
            st.base_ref = base;
            for (const char* key : {"parameter", "angle", "theta", "value"}) {
                auto it = attrs.find(key);
                if (it != attrs.end() && !it->second.empty()) {
                    try {
                        st.parameter = std::stod(it->second);
                    } catch (const std::exception&) {
                        throw MalformedInput("XMI: stereotype '" + st.name +
                                             "' has a non-numeric parameter '" + it->second + "'");
                    }
                    break;
                }
            }
            st.control_refs = split_refs(attr_or(attrs, "controls", attr_or(attrs, "control")));
            st.target_refs = split_refs(attr_or(attrs, "targets", attr_or(attrs, "target")));
            st.doc_order = order;
            doc.stereotypes.push_back(std::move(st));
        }
    }

    for (const auto& [child_tag, child] : element) {
        if (child_tag == "<xmlattr>" || child_tag == "<xmltext>" || child_tag == "<xmlcomment>") {
            continue;
        }
        collect(child, child_tag, doc);
    }
}

QuantumCircuitModel parse_xmi_model(const std::string& source, const StereotypeAliases& aliases) {
    ptree root;
    try {
        std::istringstream stream(source);
        boost::property_tree::read_xml(stream, root);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw MalformedInput(std::string("XMI: ") + e.what());
    }

    XmiDocument doc;
    for (const auto& [tag, element] : root) {
        if (tag == "<xmlcomment>") continue;
        collect(element, tag, doc);
    }

    QuantumCircuitModel model;
    model.name = !doc.activity_name.empty() ? doc.activity_name
                 : !doc.model_name.empty()  ? doc.model_name
                                            : "model";

    std::map<std::string, int> partition_index;  // by id and by name
    int index = 0;
    for (const auto& [id, name] : doc.partitions) {
        model.partitions.push_back({index, name});
        if (!id.empty()) partition_index[id] = index;
        partition_index[name] = index;
        ++index;
    }

    std::map<std::string, size_t> node_by_id;
    for (size_t i = 0; i < doc.nodes.size(); ++i) {
        if (!doc.nodes[i].id.empty()) node_by_id[doc.nodes[i].id] = i;
    }
    // Partition-side membership lists complement the nodes' inPartition refs.
    for (const auto& [part_id, node_refs] : doc.partition_nodes) {
        for (const auto& node_ref : node_refs) {
            auto it = node_by_id.find(node_ref);
            if (it == node_by_id.end()) {
                throw DanglingReference("XMI: partition '" + part_id +
                                        "' lists unknown node '" + node_ref + "'");
            }
            auto& refs = doc.nodes[it->second].partition_refs;
            if (std::find(refs.begin(), refs.end(), part_id) == refs.end()) {
                refs.push_back(part_id);
            }
        }
    }

    // Topological order over activity edges, document order breaking ties.
    std::map<size_t, std::vector<size_t>> successors;
    std::vector<int> in_degree(doc.nodes.size(), 0);
    for (const auto& edge : doc.edges) {
        auto src = node_by_id.find(edge.source);
        auto dst = node_by_id.find(edge.target);
        // Edges may touch pseudo-nodes (initial/final) we did not keep; only
        // edges between collected action nodes constrain the order.
        if (src == node_by_id.end() || dst == node_by_id.end()) continue;
        successors[src->second].push_back(dst->second);
        ++in_degree[dst->second];
    }
    std::set<size_t> ready;  // ordered by index == document order
    for (size_t i = 0; i < doc.nodes.size(); ++i) {
        if (in_degree[i] == 0) ready.insert(i);
    }
    std::vector<size_t> topo;
    while (!ready.empty()) {
        const size_t next = *ready.begin();
        ready.erase(ready.begin());
        topo.push_back(next);
        for (size_t succ : successors[next]) {
            if (--in_degree[succ] == 0) ready.insert(succ);
        }
    }
    if (topo.size() != doc.nodes.size()) {
        throw MalformedInput("XMI: activity edges form a cycle");
    }
    std::vector<int> topo_rank(doc.nodes.size(), 0);
    for (size_t rank = 0; rank < topo.size(); ++rank) topo_rank[topo[rank]] = static_cast<int>(rank);

    auto resolve_partition = [&](const std::string& ref, const std::string& where) {
        auto it = partition_index.find(ref);
        if (it == partition_index.end()) {
            throw DanglingReference("XMI: " + where + " references unknown partition '" + ref +
                                    "'");
        }
        return it->second;
    };

    struct PendingGate {
        GateApplication gate;
        int rank;
        int doc_order;
    };
    std::vector<PendingGate> pending;
    std::set<std::string> stereotyped_nodes;
    for (const auto& st : doc.stereotypes) {
        auto node_it = node_by_id.find(st.base_ref);
        if (node_it == node_by_id.end()) {
            throw DanglingReference("XMI: stereotype '" + st.name +
                                    "' references unknown element '" + st.base_ref + "'");
        }
        const XmiNode& node = doc.nodes[node_it->second];
        if (!stereotyped_nodes.insert(st.base_ref).second) continue;  // first application wins

        const auto kind_it = aliases.find(lower(st.name));
        if (kind_it == aliases.end()) {
            throw UnsupportedElement("XMI: stereotype '" + st.name + "' on element '" +
                                     (node.name.empty() ? node.id : node.name) +
                                     "' is outside the supported vocabulary");
        }
        GateApplication gate;
        gate.kind = kind_it->second;
        const std::string where = "action '" + (node.name.empty() ? node.id : node.name) + "'";

        std::vector<int> operands;
        if (!st.target_refs.empty() || !st.control_refs.empty()) {
            for (const auto& ref : st.control_refs) {
                gate.controls.push_back(resolve_partition(ref, where));
            }
            for (const auto& ref : st.target_refs) {
                gate.targets.push_back(resolve_partition(ref, where));
            }
        } else {
            for (const auto& ref : node.partition_refs) {
                operands.push_back(resolve_partition(ref, where));
            }
            if (operands.empty()) {
                throw DanglingReference("XMI: " + where + " is not in any partition");
            }
            const GateArity arity = arity_of(gate.kind);
            if (arity.controls > 0 && static_cast<int>(operands.size()) > arity.controls) {
                gate.controls.assign(operands.begin(), operands.begin() + arity.controls);
                gate.targets.assign(operands.begin() + arity.controls, operands.end());
            } else {
                gate.targets = operands;
            }
        }
        gate.parameter = st.parameter;
        pending.push_back({std::move(gate), topo_rank[node_it->second], st.doc_order});
    }

    std::sort(pending.begin(), pending.end(), [](const PendingGate& a, const PendingGate& b) {
        if (a.rank != b.rank) return a.rank < b.rank;
        return a.doc_order < b.doc_order;
    });
    int seq = 0;
    for (auto& item : pending) {
        item.gate.seq = seq++;
        model.gates.push_back(std::move(item.gate));
    }
    model.classical_elements = doc.classical;

    validate(model);
    return model;
}

}  // namespace

const StereotypeAliases& default_stereotype_aliases() {
    static const StereotypeAliases table = [] {
        StereotypeAliases map;
        for (GateKind kind : all_gate_kinds()) {
            map[lower(std::string(to_string(kind)))] = kind;
        }
        map["hadamard"] = GateKind::H;
        map["pauli_x"] = GateKind::X;
        map["pauli_y"] = GateKind::Y;
        map["pauli_z"] = GateKind::Z;
        map["cnot"] = GateKind::Cx;
        map["controlled_not"] = GateKind::Cx;
        map["toffoli"] = GateKind::Ccx;
        map["measurement"] = GateKind::Measure;
        map["quantummeasure"] = GateKind::Measure;
        return map;
    }();
    return table;
}

QuantumCircuitModel parse_model(const std::string& source, ModelFormat format,
                                const StereotypeAliases& aliases) {
    switch (format) {
        case ModelFormat::Json:
            return parse_json_model(source);
        case ModelFormat::Xmi:
            return parse_xmi_model(source, aliases);
    }
    throw MalformedInput("unknown model format");
}

QuantumCircuitModel parse_model_file(const std::filesystem::path& path,
                                     const StereotypeAliases& aliases) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open model file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string ext = lower(path.extension().string());
    const ModelFormat format =
        (ext == ".xmi" || ext == ".uml" || ext == ".xml") ? ModelFormat::Xmi : ModelFormat::Json;
    return parse_model(buffer.str(), format, aliases);
}

}  // namespace qmdgen
