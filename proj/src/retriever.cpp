#include "qmdgen/retriever.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qmdgen/errors.hpp"

namespace qmdgen {

namespace {

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool upper(char c) { return std::isupper(static_cast<unsigned char>(c)); }
bool lower_c(char c) { return std::islower(static_cast<unsigned char>(c)); }

// Split one [A-Za-z0-9_]+ run on '_' and camel boundaries, lowercasing.
void split_run(std::string_view run, std::vector<std::string>& out) {
    std::string piece;
    auto flush = [&] {
        if (!piece.empty()) {
            std::transform(piece.begin(), piece.end(), piece.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            out.push_back(piece);
            piece.clear();
        }
    };
    for (size_t i = 0; i < run.size(); ++i) {
        const char c = run[i];
        if (c == '_') {
            flush();
            continue;
        }
        if (!piece.empty() && upper(c)) {
            // lower->Upper starts a word; so does the last capital of an
            // acronym run (HTTPServer -> http server).
            const bool after_lower = lower_c(piece.back()) ||
                                     std::isdigit(static_cast<unsigned char>(piece.back()));
            const bool acronym_end = upper(piece.back()) && i + 1 < run.size() && lower_c(run[i + 1]);
            if (after_lower || acronym_end) flush();
        }
        piece.push_back(c);
    }
    flush();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot read '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> terms;
    size_t i = 0;
    while (i < text.size()) {
        if (!word_char(text[i])) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < text.size() && word_char(text[j])) ++j;
        split_run(text.substr(i, j - i), terms);
        i = j;
    }
    return terms;
}

CorpusIndex CorpusIndex::build(std::vector<CorpusChunk> chunks, Bm25Params params) {
    CorpusIndex index;
    index.params_ = params;
    index.chunks_ = std::move(chunks);
    long long total_tokens = 0;
    for (size_t ordinal = 0; ordinal < index.chunks_.size(); ++ordinal) {
        auto& chunk = index.chunks_[ordinal];
        const auto terms = tokenize(chunk.text);
        chunk.token_count = static_cast<int>(terms.size());
        total_tokens += chunk.token_count;
        std::map<std::string, int> tf;
        for (const auto& term : terms) ++tf[term];
        for (const auto& [term, count] : tf) {
            index.postings_[term].emplace_back(static_cast<int>(ordinal), count);
        }
    }
    index.avg_chunk_len_ =
        index.chunks_.empty() ? 0.0 : static_cast<double>(total_tokens) / index.chunks_.size();
    return index;
}

std::vector<ScoredChunk> CorpusIndex::retrieve(const std::string& query, int k) const {
    const auto terms = tokenize(query);
    if (terms.empty()) throw EmptyQuery("query tokenizes to nothing");
    if (k < 1) return {};

    std::map<std::string, int> query_tf;
    for (const auto& term : terms) ++query_tf[term];

    const double n_docs = static_cast<double>(chunks_.size());
    std::vector<double> scores(chunks_.size(), 0.0);
    for (const auto& [term, qtf] : query_tf) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        // Non-negative IDF variant; the classic form goes negative once a
        // term appears in more than half the chunks.
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const auto& [ordinal, tf] : it->second) {
            const double len_norm =
                avg_chunk_len_ > 0.0 ? chunks_[ordinal].token_count / avg_chunk_len_ : 1.0;
            const double denom = tf + params_.k1 * (1.0 - params_.b + params_.b * len_norm);
            scores[ordinal] += qtf * idf * (tf * (params_.k1 + 1.0)) / denom;
        }
    }

    std::vector<int> order;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > 0.0) order.push_back(static_cast<int>(i));
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return chunks_[a].chunk_id < chunks_[b].chunk_id;
    });
    if (static_cast<int>(order.size()) > k) order.resize(k);

    std::vector<ScoredChunk> result;
    result.reserve(order.size());
    int rank = 1;
    for (int ordinal : order) {
        result.push_back({chunks_[ordinal].chunk_id, scores[ordinal], rank++});
    }
    return result;
}

double CorpusIndex::score_of(const std::string& query, const std::string& chunk_id) const {
    const auto ranked = retrieve(query, static_cast<int>(chunks_.size()));
    for (const auto& scored : ranked) {
        if (scored.chunk_id == chunk_id) return scored.score;
    }
    return 0.0;
}

const CorpusChunk* CorpusIndex::find(const std::string& chunk_id) const {
    for (const auto& chunk : chunks_) {
        if (chunk.chunk_id == chunk_id) return &chunk;
    }
    return nullptr;
}

std::string CorpusIndex::serialize() const {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["bm25"] = {{"k1", params_.k1}, {"b", params_.b}};
    nlohmann::json chunk_array = nlohmann::json::array();
    for (const auto& chunk : chunks_) {
        chunk_array.push_back({{"id", chunk.chunk_id},
                               {"text", chunk.text},
                               {"token_count", chunk.token_count}});
    }
    doc["chunks"] = std::move(chunk_array);
    return doc.dump(2) + "\n";
}

CorpusIndex CorpusIndex::deserialize(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInput(std::string("corpus index: ") + e.what());
    }
    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
        throw MalformedInput("corpus index: missing format_version");
    }
    if (doc["format_version"].get<int>() != 1) {
        throw MalformedInput("corpus index: unsupported format_version " +
                             doc["format_version"].dump());
    }
    Bm25Params params;
    params.k1 = doc.at("bm25").at("k1").get<double>();
    params.b = doc.at("bm25").at("b").get<double>();
    std::vector<CorpusChunk> chunks;
    for (const auto& entry : doc.at("chunks")) {
        chunks.push_back({entry.at("id").get<std::string>(), entry.at("text").get<std::string>(), 0});
    }
    return build(std::move(chunks), params);
}

void CorpusIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot write index '" + path.string() + "'");
    out << serialize();
}

CorpusIndex CorpusIndex::load(const std::filesystem::path& path) {
    return deserialize(read_file(path));
}

std::vector<std::string> split_line_windows(const std::string& body, ChunkingConfig chunking) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : body) {
        if (c == '\n') {
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) lines.push_back(std::move(current));

    std::vector<std::string> windows;
    if (lines.empty()) return windows;
    const int max_lines = std::max(1, chunking.max_lines);
    const int overlap = std::clamp(chunking.overlap_lines, 0, max_lines - 1);
    const int stride = max_lines - overlap;
    const int total = static_cast<int>(lines.size());
    for (int start = 0;; start += stride) {
        const int end = std::min(start + max_lines, total);
        std::string window;
        for (int i = start; i < end; ++i) {
            window += lines[i];
            window += '\n';
        }
        windows.push_back(std::move(window));
        if (end >= total) break;
    }
    return windows;
}

IngestResult ingest_corpus(const std::filesystem::path& root, ChunkingConfig chunking,
                           Bm25Params params, const std::vector<std::string>& extensions) {
    if (chunking.max_lines < 1) throw ConfigInvalid("rag.chunk.max_lines must be >= 1");
    if (chunking.overlap_lines < 0 || chunking.overlap_lines >= chunking.max_lines) {
        throw ConfigInvalid("rag.chunk.overlap_lines must be in [0, max_lines)");
    }

    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (std::filesystem::recursive_directory_iterator it(root, ec), end; it != end;
         it.increment(ec)) {
        if (ec) break;
        if (!it->is_regular_file()) continue;
        const std::string ext = it->path().extension().string();
        if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end()) {
            files.push_back(it->path());
        }
    }
    std::sort(files.begin(), files.end());

    IngestResult result;
    std::vector<CorpusChunk> chunks;
    for (const auto& file : files) {
        std::string body;
        try {
            body = read_file(file);
        } catch (const IoFailure& e) {
            result.io_errors.push_back(e.what());
            continue;
        }
        const auto rel = std::filesystem::relative(file, root, ec);
        const std::string base = ec ? file.string() : rel.generic_string();
        int ordinal = 0;
        for (auto& window : split_line_windows(body, chunking)) {
            chunks.push_back({base + ":" + std::to_string(ordinal++), std::move(window), 0});
        }
    }
    if (chunks.empty()) {
        throw EmptyCorpus("no files matching the configured extensions under '" + root.string() +
                          "'");
    }
    result.index = CorpusIndex::build(std::move(chunks), params);
    return result;
}

}  // namespace qmdgen
