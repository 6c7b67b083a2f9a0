#include "anvaya/client.hpp"

#include <httplib.h>

#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

using namespace anvaya;
namespace fs = std::filesystem;

namespace {

// Chat-completion stub: echoes the user message back as the completion.
// Paths under /fail answer 503, /slow sleeps past client timeouts.
class Stub {
public:
    Stub() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            auto body = nlohmann::json::parse(req.body);
            last_request = body;
            last_auth = req.get_header_value("Authorization");
            nlohmann::json out{{"choices", {{{"message", {{"role", "assistant"},
                                                          {"content", body["messages"][0]["content"]}}}}}}};
            res.set_content(out.dump(), "application/json");
        });
        server_.Post("/fail/chat/completions", [this](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.status = 503;
        });
        server_.Post("/bad/chat/completions", [this](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.status = 400;
        });
        server_.Post("/slow/chat/completions", [](const httplib::Request&, httplib::Response& res) {
            std::this_thread::sleep_for(std::chrono::milliseconds(1500));
            res.set_content("{}", "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~Stub() {
        server_.stop();
        thread_.join();
    }
    std::string url(const std::string& prefix = "/v1") const {
        return "http://127.0.0.1:" + std::to_string(port_) + prefix;
    }

    std::atomic<int> hits{0};
    nlohmann::json last_request;
    std::string last_auth;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

EndpointConfig config(const std::string& url) {
    EndpointConfig c;
    c.base_url = url;
    c.model = "stub-model";
    c.timeout_seconds = 5;
    c.max_retries = 2;
    return c;
}

fs::path temp_file(const std::string& name) {
    auto p = fs::temp_directory_path() / ("anvaya_client_" + std::to_string(::getpid()) + "_" + name);
    fs::remove(p);
    return p;
}

}  // namespace

TEST_CASE("echo stub round trip with log") {
    Stub stub;
    auto c = config(stub.url());
    c.log_path = temp_file("log.jsonl");
    c.api_key_env = "ANVAYA_TEST_KEY";
    ::setenv("ANVAYA_TEST_KEY", "secret", 1);
    CHECK(query_model("<prose>x</prose>", c) == "<prose>x</prose>");
    CHECK(stub.last_request["model"] == "stub-model");
    CHECK(stub.last_request["temperature"] == 0);
    CHECK(stub.last_request["messages"].size() == 1);
    CHECK(stub.last_request["messages"][0]["role"] == "user");
    CHECK(stub.last_auth == "Bearer secret");

    std::ifstream log(*c.log_path);
    std::string line;
    REQUIRE(std::getline(log, line));
    auto j = nlohmann::json::parse(line);
    CHECK(j["prompt_hash"] == prompt_hash("<prose>x</prose>"));
    CHECK(j["raw_response"] == "<prose>x</prose>");
    CHECK(j["model"] == "stub-model");
    CHECK(j["timestamp"].get<std::string>().size() == 20);

    ::unsetenv("ANVAYA_TEST_KEY");
    try {
        query_model("p", c);
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        CHECK(e.kind() == ModelError::Kind::config);
    }
}

TEST_CASE("failures are typed and exhaust the retry budget") {
    Stub stub;
    SUBCASE("server error retried") {
        auto c = config(stub.url("/fail"));
        c.max_retries = 2;
        try {
            query_model("p", c);
            FAIL("expected ModelError");
        } catch (const ModelError& e) {
            CHECK(e.kind() == ModelError::Kind::status);
            CHECK(e.status() == 503);
            CHECK(e.retries_exhausted());
        }
        CHECK(stub.hits == 3);
    }
    SUBCASE("client error not retried") {
        try {
            query_model("p", config(stub.url("/bad")));
            FAIL("expected ModelError");
        } catch (const ModelError& e) {
            CHECK(e.kind() == ModelError::Kind::status);
            CHECK_FALSE(e.retries_exhausted());
        }
        CHECK(stub.hits == 1);
    }
    SUBCASE("timeout") {
        auto c = config(stub.url("/slow"));
        c.timeout_seconds = 0.3;
        c.max_retries = 0;
        try {
            query_model("p", c);
            FAIL("expected ModelError");
        } catch (const ModelError& e) {
            CHECK(e.kind() == ModelError::Kind::timeout);
            CHECK(e.retries_exhausted());
        }
    }
}

TEST_CASE("unreachable host is a network error after retries") {
    auto c = config("http://127.0.0.1:1/v1");  // nothing listens on port 1
    c.max_retries = 1;
    try {
        query_model("p", c);
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        CHECK(e.kind() == ModelError::Kind::network);
        CHECK(e.retries_exhausted());
    }
}

TEST_CASE("cassette record and byte-identical replay") {
    const auto cassette = temp_file("cassette.jsonl");
    const std::string prompt = "Task: <prose>saḥ\tgacchati</prose>\n";
    std::string recorded;
    {
        Stub stub;
        auto c = config(stub.url());
        c.cassette = cassette;
        c.record = true;
        recorded = query_model(prompt, c);
    }
    auto c = config("http://127.0.0.1:1/v1");
    c.cassette = cassette;
    c.max_retries = 0;
    CHECK(query_model(prompt, c) == recorded);
    try {
        query_model("other prompt", c);
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        CHECK(e.kind() == ModelError::Kind::cassette_miss);
    }
}

TEST_CASE("concurrent queries are keyed by prompt hash") {
    Stub stub;
    ModelClient client(config(stub.url()));
    std::vector<std::string> prompts;
    for (int i = 0; i < 12; ++i) prompts.push_back("<prose>p" + std::to_string(i) + "</prose>");
    std::map<std::string, std::string> failures;
    auto out = client.query_all(prompts, 4, &failures);
    CHECK(failures.empty());
    REQUIRE(out.size() == prompts.size());
    for (const auto& p : prompts) CHECK(out.at(prompt_hash(p)) == p);
}

TEST_CASE("endpoint config from json") {
    auto c = EndpointConfig::from_json({{"base_url", "http://h/v1"}, {"model", "m"}, {"max_retries", 4}});
    CHECK(c.max_retries == 4);
    CHECK(c.temperature == 0);
    CHECK_THROWS_AS(EndpointConfig::from_json({{"base_url", "http://h"}, {"model", "m"}, {"timeout_seconds", 0}}),
                    ModelError);
}
