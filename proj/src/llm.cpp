#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "qmdgen/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "qmdgen/errors.hpp"

namespace qmdgen {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ProviderError("cannot read reference payload '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json params_json(const CompletionParams& params) {
    json doc;
    doc["model"] = params.model_name;
    doc["temperature"] = params.temperature;
    doc["max_tokens"] = params.max_tokens;
    doc["seed"] = params.seed ? json(*params.seed) : json(nullptr);
    doc["timeout_s"] = params.timeout_s;
    doc["retries"] = params.retries;
    return doc;
}

}  // namespace

// ------------------------------------------------------------- providers --

EchoProvider EchoProvider::from_file(std::filesystem::path file) {
    EchoProvider provider;
    provider.file_ = std::move(file);
    return provider;
}

EchoProvider EchoProvider::from_directory(std::filesystem::path dir) {
    EchoProvider provider;
    provider.dir_ = std::move(dir);
    return provider;
}

std::string EchoProvider::complete(const Prompt& prompt, const CompletionParams&) {
    if (file_) return read_file(*file_);

    // The canonical model text opens with "circuit <name>"; that name keys
    // the per-instance reference payload.
    std::istringstream lines(prompt.user_text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("circuit ", 0) == 0) {
            const std::string name = line.substr(8);
            return read_file(dir_ / (name + ".py"));
        }
    }
    throw ProviderError("echo provider: prompt has no 'circuit <name>' header line");
}

std::string ScriptedProvider::complete(const Prompt&, const CompletionParams&) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (next_ >= script_.size()) throw ProviderError("script exhausted");
    return script_[next_++];
}

// ------------------------------------------------------------- transport --

namespace {

class HttplibTransport : public HttpTransport {
public:
    HttpResponse post(const std::string& url, const std::string& body,
                      const std::vector<std::pair<std::string, std::string>>& headers,
                      int timeout_s) override {
        const auto split = split_url(url);
        httplib::Client client(split.first);
        client.set_connection_timeout(timeout_s, 0);
        client.set_read_timeout(timeout_s, 0);
        client.set_write_timeout(timeout_s, 0);
        httplib::Headers hdrs;
        for (const auto& [key, value] : headers) hdrs.emplace(key, value);
        auto result = client.Post(split.second, hdrs, body, "application/json");
        HttpResponse response;
        if (!result) {
            response.transport_error = httplib::to_string(result.error());
            return response;
        }
        response.transport_ok = true;
        response.status = result->status;
        response.body = result->body;
        return response;
    }

private:
    static std::pair<std::string, std::string> split_url(const std::string& url) {
        const auto scheme_end = url.find("://");
        const size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        const auto path_start = url.find('/', host_start);
        if (path_start == std::string::npos) return {url, "/"};
        return {url.substr(0, path_start), url.substr(path_start)};
    }
};

}  // namespace

std::shared_ptr<HttpTransport> make_httplib_transport() {
    return std::make_shared<HttplibTransport>();
}

HttpChatProvider::HttpChatProvider(HttpProviderConfig config,
                                   std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : make_httplib_transport()) {}

std::string HttpChatProvider::request_body(const Prompt& prompt, const CompletionParams& params) {
    json doc;
    doc["model"] = params.model_name;
    doc["temperature"] = params.temperature;
    doc["max_tokens"] = params.max_tokens;
    if (params.seed) doc["seed"] = *params.seed;
    doc["messages"] = json::array({
        json{{"role", "system"}, {"content", prompt.system_text}},
        json{{"role", "user"}, {"content", prompt.user_text}},
    });
    return doc.dump();
}

std::string HttpChatProvider::complete(const Prompt& prompt, const CompletionParams& params) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw MissingCredentials("environment variable " + config_.api_key_env + " is not set");
    }
    const std::vector<std::pair<std::string, std::string>> headers = {
        {"Authorization", std::string("Bearer ") + key},
    };
    const std::string body = request_body(prompt, params);

    HttpResponse response;
    for (int attempt = 0; attempt <= params.retries; ++attempt) {
        if (attempt > 0) {
            const auto backoff = std::chrono::milliseconds(
                static_cast<long long>(config_.backoff_base_ms) << (attempt - 1));
            std::this_thread::sleep_for(backoff);
        }
        response = transport_->post(config_.endpoint, body, headers, params.timeout_s);
        if (!response.transport_ok) continue;  // transient transport failure
        if (response.status == 429 || response.status >= 500) continue;
        if (response.status != 200) {
            throw ProviderError("provider returned HTTP " + std::to_string(response.status),
                                response.status, response.body.substr(0, 512));
        }
        try {
            const json doc = json::parse(response.body);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw ProviderError(std::string("malformed provider response: ") + e.what(),
                                response.status, response.body.substr(0, 512));
        }
    }
    if (!response.transport_ok) {
        throw TimeoutError("provider unreachable after " + std::to_string(params.retries + 1) +
                           " attempts: " + response.transport_error);
    }
    throw ProviderError("provider kept returning HTTP " + std::to_string(response.status) +
                            " after " + std::to_string(params.retries + 1) + " attempts",
                        response.status, response.body.substr(0, 512));
}

// ----------------------------------------------------------------- cache --

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string ResponseCache::key_for(const Prompt& prompt, const CompletionParams& params,
                                   const std::string& provider) {
    json doc;
    doc["prompt"] = {{"system", prompt.system_text},
                     {"user", prompt.user_text},
                     {"kind", std::string(to_string(prompt.kind))}};
    doc["params"] = params_json(params);
    doc["provider"] = provider;
    return sha256_hex(doc.dump());
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
    const auto path = dir_ / (key + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        const json doc = json::parse(buffer.str());
        return doc.at("raw_text").get<std::string>();
    } catch (const json::exception&) {
        return std::nullopt;  // unreadable entry is a miss
    }
}

void ResponseCache::store(const std::string& key, const std::string& provider,
                          const CompletionParams& params, const std::string& raw_text) {
    json doc;
    doc["version"] = 1;
    doc["provider"] = provider;
    doc["params"] = params_json(params);
    doc["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    doc["raw_text"] = raw_text;

    std::lock_guard<std::mutex> lock(write_mutex_);
    const auto path = dir_ / (key + ".json");
    const auto tmp = dir_ / (key + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoFailure("cannot write cache entry '" + tmp.string() + "'");
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

// --------------------------------------------------------------- gateway --

LlmGateway::LlmGateway(std::shared_ptr<Provider> provider, std::shared_ptr<ResponseCache> cache)
    : provider_(std::move(provider)), cache_(std::move(cache)), provider_name_(provider_->name()) {}

Completion LlmGateway::complete(const Prompt& prompt, const CompletionParams& params) {
    std::string key;
    if (cache_) {
        key = ResponseCache::key_for(prompt, params, provider_name_);
        if (auto hit = cache_->lookup(key)) {
            return {std::move(*hit), provider_name_, true, 0};
        }
    }
    const auto start = std::chrono::steady_clock::now();
    std::string raw = provider_->complete(prompt, params);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    if (cache_) cache_->store(key, provider_name_, params, raw);
    Completion completion;
    completion.raw_text = std::move(raw);
    completion.provider = provider_name_;
    completion.cached = false;
    completion.latency_ms = provider_->offline() ? 0 : elapsed;
    return completion;
}

// ---------------------------------------------------------- code extract --

std::string extract_code(const std::string& raw_text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : raw_text) {
        if (c == '\n') {
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    lines.push_back(std::move(current));

    auto is_fence = [](const std::string& line) {
        size_t i = 0;
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        return line.compare(i, 3, "```") == 0;
    };

    size_t open = lines.size();
    for (size_t i = 0; i < lines.size(); ++i) {
        if (is_fence(lines[i])) {
            open = i;
            break;
        }
    }
    if (open == lines.size()) return raw_text;  // no fence: raw text unchanged

    std::string code;
    for (size_t i = open + 1; i < lines.size(); ++i) {
        if (is_fence(lines[i])) break;  // first block only
        if (!code.empty()) code += '\n';
        code += lines[i];
    }
    return code;
}

}  // namespace qmdgen
