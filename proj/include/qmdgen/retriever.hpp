#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace qmdgen {

/// Retrieval tokenizer: lowercased alphanumeric-and-underscore runs, split
/// also on snake_case and camelCase boundaries. Digits stay attached to the
/// letters they follow ("q0" is one term).
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct ChunkingConfig {
    int max_lines = 60;
    int overlap_lines = 10;
};

struct CorpusChunk {
    std::string chunk_id;  // source path + chunk ordinal, unique per index
    std::string text;
    int token_count = 0;
};

struct ScoredChunk {
    std::string chunk_id;
    double score = 0.0;
    int rank = 0;  // 1-based
};

/// Immutable BM25 inverted index. Construction is single-writer; a built
/// index is safely shared by concurrent retrieval calls.
class CorpusIndex {
public:
    /// Tokenizes every chunk and builds the postings. Chunk ids must be
    /// unique; token_count fields are recomputed here.
    static CorpusIndex build(std::vector<CorpusChunk> chunks, Bm25Params params);

    const std::vector<CorpusChunk>& chunks() const { return chunks_; }
    const Bm25Params& params() const { return params_; }
    double avg_chunk_len() const { return avg_chunk_len_; }

    /// Top-k chunks by BM25 over tokenize(query). Only chunks with score > 0
    /// are returned; ties broken by lexicographic chunk_id. Throws EmptyQuery
    /// when the query tokenizes to nothing.
    std::vector<ScoredChunk> retrieve(const std::string& query, int k) const;

    double score_of(const std::string& query, const std::string& chunk_id) const;

    const CorpusChunk* find(const std::string& chunk_id) const;

    /// Versioned JSON serialization; deterministic bytes for a given corpus.
    std::string serialize() const;
    static CorpusIndex deserialize(const std::string& text);

    void save(const std::filesystem::path& path) const;
    static CorpusIndex load(const std::filesystem::path& path);

private:
    std::vector<CorpusChunk> chunks_;
    std::map<std::string, std::vector<std::pair<int, int>>> postings_;  // term -> (ordinal, tf)
    double avg_chunk_len_ = 0.0;
    Bm25Params params_;
};

struct IngestResult {
    CorpusIndex index;
    std::vector<std::string> io_errors;  // per-file failures; ingestion continues
};

inline const std::vector<std::string>& default_corpus_extensions() {
    static const std::vector<std::string> exts = {".py", ".txt"};
    return exts;
}

/// Walks `root` in sorted-path order, splits every matching file into
/// line windows of at most max_lines with overlap_lines overlap, and builds
/// the index. Throws EmptyCorpus when nothing matched.
IngestResult ingest_corpus(const std::filesystem::path& root, ChunkingConfig chunking,
                           Bm25Params params,
                           const std::vector<std::string>& extensions = default_corpus_extensions());

/// The line windows for one file body; exposed for tests.
std::vector<std::string> split_line_windows(const std::string& body, ChunkingConfig chunking);

}  // namespace qmdgen
