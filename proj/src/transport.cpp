#include "qexp/transport.hpp"

#include <fstream>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "qexp/hash.hpp"

namespace qexp {

using nlohmann::json;

namespace {

struct SplitUrl {
    std::string origin;
    std::string prefix;
};

SplitUrl split_url(const std::string& url)
{
    auto scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ValidationError("endpoint URL needs a scheme: " + url);
    }
    auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) {
        return {url, ""};
    }
    std::string prefix = url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    return {url.substr(0, slash), prefix};
}

class SlotGuard {
  public:
    explicit SlotGuard(std::counting_semaphore<>& s) : m_s(s) { m_s.acquire(); }
    ~SlotGuard() { m_s.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

  private:
    std::counting_semaphore<>& m_s;
};

}  // namespace

HttpTransport::HttpTransport(std::string base_url, HttpOptions options)
    : m_base_url(std::move(base_url)),
      m_options(std::move(options)),
      m_slots(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, m_options.max_in_flight)))
{
    split_url(m_base_url);
}

json HttpTransport::post(std::string_view path, const json& body)
{
    auto [origin, prefix] = split_url(m_base_url);
    std::string full_path = prefix + std::string(path);
    std::string payload = body.dump();
    auto backoff = m_options.retry.initial_backoff;
    std::string last_error;

    SlotGuard slot(m_slots);
    for (int attempt = 0; attempt <= m_options.retry.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<long long>(static_cast<double>(backoff.count()) * m_options.retry.backoff_factor));
        }
        httplib::Client client(origin);
        client.set_connection_timeout(m_options.timeout);
        client.set_read_timeout(m_options.timeout);
        client.set_write_timeout(m_options.timeout);
        httplib::Headers headers;
        if (m_options.bearer_token) {
            headers.emplace("Authorization", "Bearer " + *m_options.bearer_token);
        }
        auto res = client.Post(full_path, headers, payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            spdlog::debug("POST {}{} failed ({}), attempt {}", origin, full_path, last_error, attempt + 1);
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            spdlog::debug("POST {}{} returned {}, attempt {}", origin, full_path, res->status, attempt + 1);
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            throw ProtocolError("POST " + origin + full_path + " returned HTTP " + std::to_string(res->status)
                                + ": " + res->body.substr(0, 200));
        }
        try {
            return json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw ProtocolError("POST " + origin + full_path + " returned invalid JSON: " + e.what());
        }
    }
    throw TransportError("POST " + origin + full_path + " failed after "
                         + std::to_string(m_options.retry.max_retries + 1) + " attempts: " + last_error);
}

Cassette::Cassette(std::filesystem::path file) : m_file(std::move(file))
{
    std::ifstream in(m_file, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            auto obj = json::parse(line);
            m_entries.insert_or_assign(obj.at("key").get<std::string>(), obj.at("response"));
        } catch (const std::exception& e) {
            throw ParseError(m_file.string(), line_no, e.what());
        }
    }
}

std::string Cassette::key(std::string_view backend, std::string_view path, const json& body)
{
    auto h = fnv1a64(backend);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(path, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(body.dump(), h);
    return hex64(h);
}

std::optional<json> Cassette::find(std::string_view backend, std::string_view path, const json& body) const
{
    std::lock_guard lock(m_mutex);
    auto it = m_entries.find(key(backend, path, body));
    if (it == m_entries.end()) {
        return std::nullopt;
    }
    return it->second;
}

void Cassette::record(std::string_view backend, std::string_view path, const json& body, const json& response)
{
    auto k = key(backend, path, body);
    std::lock_guard lock(m_mutex);
    if (m_entries.contains(k)) {
        return;
    }
    if (m_file.has_parent_path()) {
        std::filesystem::create_directories(m_file.parent_path());
    }
    std::ofstream out(m_file, std::ios::binary | std::ios::app);
    out << json{{"key", k}, {"backend", backend}, {"path", path}, {"request", body}, {"response", response}}.dump()
        << '\n';
    if (!out) {
        throw Error("cannot append to cassette " + m_file.string());
    }
    m_entries.emplace(std::move(k), response);
}

std::size_t Cassette::size() const
{
    std::lock_guard lock(m_mutex);
    return m_entries.size();
}

ReplayTransport::ReplayTransport(std::shared_ptr<Cassette> cassette, std::string label)
    : m_cassette(std::move(cassette)), m_label(std::move(label))
{}

json ReplayTransport::post(std::string_view path, const json& body)
{
    auto hit = m_cassette->find(m_label, path, body);
    if (!hit) {
        throw ProtocolError("cassette " + m_cassette->file().string() + " has no response for " + m_label
                            + std::string(path) + " (key " + Cassette::key(m_label, path, body) + ")");
    }
    return *hit;
}

RecordingTransport::RecordingTransport(std::shared_ptr<JsonTransport> inner, std::shared_ptr<Cassette> cassette)
    : m_inner(std::move(inner)), m_cassette(std::move(cassette))
{}

json RecordingTransport::post(std::string_view path, const json& body)
{
    auto response = m_inner->post(path, body);
    m_cassette->record(m_inner->describe(), path, body, response);
    return response;
}

}  // namespace qexp
