#include "anvaya/client.hpp"

#include "anvaya/hash.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

namespace anvaya {

namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;    // without trailing slash
};

Url split_url(const std::string& url) {
    auto scheme = url.find("://");
    if (scheme == std::string::npos)
        throw ModelError(ModelError::Kind::config, "base URL needs a scheme: " + url);
    auto slash = url.find('/', scheme + 3);
    Url out{url.substr(0, slash), slash == std::string::npos ? "" : url.substr(slash)};
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    return out;
}

std::string utc_now() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool retryable(const ModelError& e) {
    if (e.kind() == ModelError::Kind::network || e.kind() == ModelError::Kind::timeout) return true;
    return e.kind() == ModelError::Kind::status && (e.status() == 429 || e.status() >= 500);
}

}  // namespace

std::string_view to_string(ModelError::Kind kind) {
    switch (kind) {
        case ModelError::Kind::network: return "network";
        case ModelError::Kind::status: return "status";
        case ModelError::Kind::timeout: return "timeout";
        case ModelError::Kind::protocol: return "protocol";
        case ModelError::Kind::config: return "config";
        case ModelError::Kind::cassette_miss: return "cassette-miss";
    }
    return "unknown";
}

EndpointConfig EndpointConfig::from_json(const nlohmann::json& j) {
    EndpointConfig c;
    c.base_url = j.at("base_url").get<std::string>();
    c.model = j.at("model").get<std::string>();
    c.api_key_env = j.value("api_key_env", "");
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.temperature = j.value("temperature", c.temperature);
    if (j.contains("log_path")) c.log_path = j.at("log_path").get<std::string>();
    if (j.contains("cassette")) c.cassette = j.at("cassette").get<std::string>();
    c.record = j.value("record", false);
    if (c.max_retries < 0 || c.timeout_seconds <= 0)
        throw ModelError(ModelError::Kind::config, "timeout must be positive and max_retries non-negative");
    return c;
}

nlohmann::json ExchangeRecord::to_json() const {
    return {{"timestamp", timestamp}, {"prompt_hash", prompt_hash}, {"model", model}, {"raw_response", raw_response}};
}

std::string prompt_hash(const std::string& prompt) { return sha256_hex(prompt); }

std::map<std::string, std::string> load_cassette(const std::filesystem::path& path) {
    std::map<std::string, std::string> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("prompt_hash") || !j.contains("raw_response"))
            throw ModelError(ModelError::Kind::config, "malformed cassette line in " + path.string());
        out[j["prompt_hash"].get<std::string>()] = j["raw_response"].get<std::string>();
    }
    return out;
}

ModelClient::ModelClient(EndpointConfig config) : config_(std::move(config)) {
    if (config_.cassette) cassette_ = load_cassette(*config_.cassette);
}

void ModelClient::append(const std::filesystem::path& path, const ExchangeRecord& record) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw ModelError(ModelError::Kind::config, "cannot write " + path.string());
    out << record.to_json().dump() << '\n';
}

std::string ModelClient::fetch(const std::string& prompt) {
    auto url = split_url(config_.base_url);
    httplib::Client cli(url.origin);
    auto secs = std::chrono::duration<double>(config_.timeout_seconds);
    auto us = std::chrono::duration_cast<std::chrono::microseconds>(secs);
    cli.set_connection_timeout(us);
    cli.set_read_timeout(us);
    cli.set_write_timeout(us);
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key) throw ModelError(ModelError::Kind::config, "environment variable " + config_.api_key_env + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    nlohmann::json body{{"model", config_.model},
                        {"temperature", config_.temperature},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};

    auto res = cli.Post(url.path + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
        auto err = res.error();
        auto kind = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                        ? ModelError::Kind::timeout
                        : ModelError::Kind::network;
        throw ModelError(kind, "request to " + config_.base_url + " failed: " + httplib::to_string(err));
    }
    if (res->status < 200 || res->status >= 300)
        throw ModelError(ModelError::Kind::status, "endpoint returned HTTP " + std::to_string(res->status), false,
                         res->status);
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw ModelError(ModelError::Kind::protocol, "response is not json");
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw ModelError(ModelError::Kind::protocol, "response lacks choices[0].message.content");
    }
}

std::string ModelClient::query(const std::string& prompt) {
    const auto hash = prompt_hash(prompt);
    if (config_.cassette) {
        std::lock_guard lock(mutex_);
        if (auto it = cassette_.find(hash); it != cassette_.end()) return it->second;
        if (!config_.record)
            throw ModelError(ModelError::Kind::cassette_miss, "no cassette entry for prompt " + hash);
    }
    std::string response;
    for (int attempt = 0;; ++attempt) {
        try {
            response = fetch(prompt);
            break;
        } catch (const ModelError& e) {
            if (!retryable(e)) throw;
            if (attempt >= config_.max_retries)
                throw ModelError(e.kind(), std::string(e.what()) + " (after " + std::to_string(attempt + 1) +
                                               " attempts)",
                                 true, e.status());
            std::this_thread::sleep_for(std::chrono::milliseconds(100 << std::min(attempt, 5)));
        }
    }
    ExchangeRecord record{utc_now(), hash, config_.model, response};
    std::lock_guard lock(mutex_);
    if (config_.log_path) append(*config_.log_path, record);
    if (config_.cassette) {
        append(*config_.cassette, record);
        cassette_[hash] = response;
    }
    return response;
}

std::map<std::string, std::string> ModelClient::query_all(const std::vector<std::string>& prompts,
                                                          std::size_t max_concurrency,
                                                          std::map<std::string, std::string>* failures) {
    std::map<std::string, std::string> results;
    std::mutex results_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < prompts.size();) {
            auto hash = prompt_hash(prompts[i]);
            try {
                auto r = query(prompts[i]);
                std::lock_guard lock(results_mutex);
                results[hash] = std::move(r);
            } catch (const Error& e) {
                std::lock_guard lock(results_mutex);
                if (failures) (*failures)[hash] = e.what();
            }
        }
    };
    std::vector<std::thread> threads;
    auto n = std::clamp<std::size_t>(max_concurrency, 1, std::max<std::size_t>(prompts.size(), 1));
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return results;
}

std::string query_model(const std::string& prompt, const EndpointConfig& endpoint) {
    ModelClient client(endpoint);
    return client.query(prompt);
}

}  // namespace anvaya
