#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "facesketch/session.hpp"
#include "facesketch/suggest.hpp"

namespace fsk {

struct ServiceOptions {
    std::string address = "127.0.0.1";
    unsigned short port = 8080;  // 0 picks a free port
    std::string corpus_path;     // empty: no suggestions
    std::string debug_dir;       // forwarded to every refine
    int io_threads = 2;
    int worker_threads = 4;      // request handlers; refine occupies one
};

struct ApiRequest {
    std::string method;  // upper case
    std::string target;  // path with optional query string
    std::string body;
    std::string accept;  // Accept header, may be empty
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

enum class ComputeStatus { idle, coarse_running, refine_running };
const char* to_string(ComputeStatus status);

/// Event pushed to websocket subscribers, serialized as one JSON text frame:
/// {"type": "status", "status": ...} or
/// {"type": "preview-ready" | "mesh-ready" | "project-replaced", "stage"?: ...}.
using EventSink = std::function<void(const std::string& json_text)>;

/// Transport-independent REST handler holding every session. Thread-safe:
/// distinct sessions compute concurrently; within one session a second
/// compute while one is in flight gets 409. Reads never wait for a compute.
///
/// Routes:
///   POST /sessions                           -> 201 {"id"}
///   PUT  /sessions/{id}/coarse-sketch        PartSketch -> M_c
///   PUT  /sessions/{id}/layout               PartLayout -> M_c
///   PUT  /sessions/{id}/profile              {"target": polyline} -> M_c
///   POST /sessions/{id}/strokes              {"strokes": [...]} -> preview PNG
///   POST /sessions/{id}/refine               -> M_f
///   POST /sessions/{id}/suggest              query -> {"suggestions": [...]}
///   GET  /sessions/{id}/mesh?stage=coarse|fine -> OBJ
///   GET|PUT /sessions/{id}/project           project JSON
///   GET  /health
/// Meshes are OBJ unless ?format=summary or Accept asks for JSON.
/// Errors: 404 unknown session or route, 405 wrong method, 409 compute in
/// flight or missing state, 422 invalid payload as {"error", "field"}.
class Api {
public:
    explicit Api(ServiceOptions options = {});
    ~Api();

    ApiResponse handle(const ApiRequest& request);

    /// Returns a subscription id, 0 when the session does not exist.
    std::uint64_t subscribe(const std::string& session_id, EventSink sink);
    void unsubscribe(std::uint64_t subscription);

    std::size_t session_count() const;
    const SuggestionIndex& suggestions() const { return *index_; }

private:
    struct Session;
    std::shared_ptr<Session> find(const std::string& id) const;
    void publish(Session& s, const std::string& json_text);

    ApiResponse create_session();
    ApiResponse route_session(Session& s, const std::string& action, const ApiRequest& request,
                              const std::map<std::string, std::string>& query);

    ServiceOptions options_;
    std::shared_ptr<const SuggestionIndex> index_;
    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::atomic<std::uint64_t> next_subscription_{1};
};

/// HTTP/1.1 and websocket front end over Api (Boost.Beast). Websocket
/// clients connect to /sessions/{id}/events.
class Server {
public:
    explicit Server(ServiceOptions options);
    ~Server();

    /// Binds and starts serving; returns the bound port.
    unsigned short start();
    void stop();
    unsigned short port() const { return port_; }
    Api& api() { return *api_; }

private:
    struct Impl;
    ServiceOptions options_;
    std::unique_ptr<Api> api_;
    std::unique_ptr<Impl> impl_;
    unsigned short port_ = 0;
};

/// Splits "a/b?x=1&y=2" into path and decoded query parameters.
std::pair<std::string, std::map<std::string, std::string>> split_target(const std::string& target);

}  // namespace fsk
