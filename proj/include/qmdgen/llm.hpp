#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qmdgen/prompt.hpp"

namespace qmdgen {

struct CompletionParams {
    std::string model_name = "gpt-4o";
    double temperature = 0.2;
    int max_tokens = 2048;
    std::optional<int> seed;
    int timeout_s = 60;
    int retries = 3;
};

struct Completion {
    std::string raw_text;  // exactly what the provider returned
    std::string provider;
    bool cached = false;
    long latency_ms = 0;  // 0 for offline providers so reports stay deterministic
};

/// Uniform completion interface. Offline providers (echo, fixed, scripted)
/// never touch the network.
class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string name() const = 0;
    virtual std::string complete(const Prompt& prompt, const CompletionParams& params) = 0;
    virtual bool offline() const { return true; }
};

/// Returns a per-model-instance reference payload: with a fixed file the
/// file's bytes; with a directory, <dir>/<circuit>.py where <circuit> is read
/// from the prompt's "circuit <name>" model header line.
class EchoProvider : public Provider {
public:
    static EchoProvider from_file(std::filesystem::path file);
    static EchoProvider from_directory(std::filesystem::path dir);

    std::string name() const override { return "echo"; }
    std::string complete(const Prompt& prompt, const CompletionParams& params) override;

private:
    std::optional<std::filesystem::path> file_;
    std::filesystem::path dir_;
};

class FixedProvider : public Provider {
public:
    explicit FixedProvider(std::string text) : text_(std::move(text)) {}

    std::string name() const override { return "fixed"; }
    std::string complete(const Prompt&, const CompletionParams&) override { return text_; }

private:
    std::string text_;
};

/// Plays back a response script in order; a call past the end is a
/// ProviderError("script exhausted"). Safe for concurrent calls.
class ScriptedProvider : public Provider {
public:
    explicit ScriptedProvider(std::vector<std::string> script) : script_(std::move(script)) {}

    std::string name() const override { return "scripted"; }
    std::string complete(const Prompt&, const CompletionParams&) override;

private:
    std::vector<std::string> script_;
    size_t next_ = 0;
    std::mutex mutex_;
};

struct HttpResponse {
    bool transport_ok = false;
    std::string transport_error;
    int status = 0;
    std::string body;
};

/// POST transport behind the live provider; tests substitute a fake.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& url, const std::string& body,
                              const std::vector<std::pair<std::string, std::string>>& headers,
                              int timeout_s) = 0;
};

std::shared_ptr<HttpTransport> make_httplib_transport();

struct HttpProviderConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string api_key_env = "QMDGEN_API_KEY";
    int backoff_base_ms = 250;  // doubled per retry
};

/// JSON chat-completion provider: system message + one user message.
/// Transient transport failures, 429 and 5xx are retried with exponential
/// backoff up to params.retries; other statuses raise ProviderError at once.
class HttpChatProvider : public Provider {
public:
    explicit HttpChatProvider(HttpProviderConfig config,
                              std::shared_ptr<HttpTransport> transport = nullptr);

    std::string name() const override { return "http"; }
    bool offline() const override { return false; }
    std::string complete(const Prompt& prompt, const CompletionParams& params) override;

    static std::string request_body(const Prompt& prompt, const CompletionParams& params);

private:
    HttpProviderConfig config_;
    std::shared_ptr<HttpTransport> transport_;
};

std::string sha256_hex(std::string_view data);

/// Disk cache of completions keyed by hash(prompt bytes, params, provider).
/// Reads are lock-free; writes are serialized and atomic (tmp + rename).
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    static std::string key_for(const Prompt& prompt, const CompletionParams& params,
                               const std::string& provider);

    std::optional<std::string> lookup(const std::string& key) const;
    void store(const std::string& key, const std::string& provider,
               const CompletionParams& params, const std::string& raw_text);

private:
    std::filesystem::path dir_;
    mutable std::mutex write_mutex_;
};

/// complete() orchestration: cache lookup, provider call, cache store.
class LlmGateway {
public:
    LlmGateway(std::shared_ptr<Provider> provider, std::shared_ptr<ResponseCache> cache = nullptr);

    Completion complete(const Prompt& prompt, const CompletionParams& params);
    const std::string& provider_name() const { return provider_name_; }

private:
    std::shared_ptr<Provider> provider_;
    std::shared_ptr<ResponseCache> cache_;
    std::string provider_name_;
};

/// Contents of the first fenced code block; the whole text when no fence
/// exists. Prose outside fences is discarded. Total and idempotent on
/// fence-free text.
std::string extract_code(const std::string& raw_text);

inline std::string extract_code(const Completion& completion) {
    return extract_code(completion.raw_text);
}

}  // namespace qmdgen
