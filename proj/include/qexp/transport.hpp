#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

#include "qexp/error.hpp"

namespace qexp {

/// POSTs a JSON body to an endpoint path and returns the decoded JSON reply.
/// Implementations throw TransportError (retriable conditions exhausted) or
/// ProtocolError (the reply is unusable).
class JsonTransport {
  public:
    virtual ~JsonTransport() = default;
    virtual nlohmann::json post(std::string_view path, const nlohmann::json& body) = 0;
    /// Identifies the remote for provenance records.
    virtual std::string describe() const = 0;
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{200};
    double backoff_factor = 2.0;
};

struct HttpOptions {
    RetryPolicy retry;
    std::size_t max_in_flight = 4;
    std::chrono::seconds timeout{120};
    std::optional<std::string> bearer_token;
};

/// HTTP transport over cpp-httplib. Connection failures, 429 and 5xx are
/// retried with exponential backoff; other 4xx and undecodable bodies raise
/// ProtocolError immediately.
class HttpTransport final : public JsonTransport {
  public:
    explicit HttpTransport(std::string base_url, HttpOptions options = {});

    nlohmann::json post(std::string_view path, const nlohmann::json& body) override;
    std::string describe() const override { return m_base_url; }

  private:
    std::string m_base_url;
    HttpOptions m_options;
    std::counting_semaphore<> m_slots;
};

/// Request hash -> recorded response, backed by a jsonl file with lines
/// `{"key", "backend", "path", "request", "response"}`. The key covers the
/// backend label too, so two models behind the same path never collide.
/// Thread-safe.
class Cassette {
  public:
    explicit Cassette(std::filesystem::path file);

    static std::string key(std::string_view backend, std::string_view path, const nlohmann::json& body);

    std::optional<nlohmann::json> find(std::string_view backend, std::string_view path,
                                       const nlohmann::json& body) const;
    /// Appends to the file unless an identical key is already present.
    void record(std::string_view backend, std::string_view path, const nlohmann::json& body,
                const nlohmann::json& response);
    std::size_t size() const;
    const std::filesystem::path& file() const noexcept { return m_file; }

  private:
    std::filesystem::path m_file;
    mutable std::mutex m_mutex;
    std::unordered_map<std::string, nlohmann::json> m_entries;
};

/// Serves only from a cassette; a miss is a ProtocolError.
class ReplayTransport final : public JsonTransport {
  public:
    ReplayTransport(std::shared_ptr<Cassette> cassette, std::string label);
    nlohmann::json post(std::string_view path, const nlohmann::json& body) override;
    std::string describe() const override { return m_label; }

  private:
    std::shared_ptr<Cassette> m_cassette;
    std::string m_label;
};

/// Forwards to an inner transport and records every exchange.
class RecordingTransport final : public JsonTransport {
  public:
    RecordingTransport(std::shared_ptr<JsonTransport> inner, std::shared_ptr<Cassette> cassette);
    nlohmann::json post(std::string_view path, const nlohmann::json& body) override;
    std::string describe() const override { return m_inner->describe(); }

  private:
    std::shared_ptr<JsonTransport> m_inner;
    std::shared_ptr<Cassette> m_cassette;
};

}  // namespace qexp
