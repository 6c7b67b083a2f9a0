#pragma once

#include "anvaya/error.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace anvaya {

struct EndpointConfig {
    std::string base_url;          // e.g. http://localhost:8000/v1
    std::string model;
    std::string api_key_env;       // name of the variable holding the key; empty = no auth
    double timeout_seconds = 60;
    int max_retries = 2;           // attempts = 1 + max_retries
    double temperature = 0;
    std::optional<std::filesystem::path> log_path;  // jsonl request/response log
    std::optional<std::filesystem::path> cassette;  // replay from a log instead of the network
    bool record = false;           // with a cassette: fetch misses live and append them

    static EndpointConfig from_json(const nlohmann::json& j);
};

class ModelError : public Error {
public:
    enum class Kind { network, status, timeout, protocol, config, cassette_miss };

    ModelError(Kind kind, const std::string& what, bool retries_exhausted = false, int status = 0)
        : Error(what), kind_(kind), retries_exhausted_(retries_exhausted), status_(status) {}

    Kind kind() const { return kind_; }
    bool retries_exhausted() const { return retries_exhausted_; }
    int status() const { return status_; }  // HTTP status for Kind::status

private:
    Kind kind_;
    bool retries_exhausted_;
    int status_;
};

std::string_view to_string(ModelError::Kind kind);

struct ExchangeRecord {
    std::string timestamp;  // UTC, ISO 8601
    std::string prompt_hash;
    std::string model;
    std::string raw_response;

    nlohmann::json to_json() const;
};

std::string prompt_hash(const std::string& prompt);

// Chat-completion client. Sends the prompt as a single user message.
// Thread-safe; log appends are serialized.
class ModelClient {
public:
    explicit ModelClient(EndpointConfig config);

    std::string query(const std::string& prompt);

    /// Queries up to `max_concurrency` prompts at once. Results are keyed
    /// by prompt hash; a failed prompt maps to its error message in
    /// `failures` instead.
    std::map<std::string, std::string> query_all(const std::vector<std::string>& prompts,
                                                 std::size_t max_concurrency,
                                                 std::map<std::string, std::string>* failures = nullptr);

    const EndpointConfig& config() const { return config_; }

private:
    std::string fetch(const std::string& prompt);
    void append(const std::filesystem::path& path, const ExchangeRecord& record);

    EndpointConfig config_;
    std::map<std::string, std::string> cassette_;
    std::mutex mutex_;
};

/// Reads a jsonl exchange log into prompt_hash -> raw_response (later
/// entries win).
std::map<std::string, std::string> load_cassette(const std::filesystem::path& path);

std::string query_model(const std::string& prompt, const EndpointConfig& endpoint);

}  // namespace anvaya
