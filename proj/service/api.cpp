#include <algorithm>
#include <random>
#include <sstream>

#include "facesketch/service.hpp"

namespace fsk {

const char* to_string(ComputeStatus status)
{
    switch (status) {
    case ComputeStatus::idle: return "idle";
    case ComputeStatus::coarse_running: return "coarse-running";
    case ComputeStatus::refine_running: return "refine-running";
    }
    return "idle";
}

namespace {

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string url_decode(const std::string& s)
{
    std::string out;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k] == '+') {
            out += ' ';
        } else if (s[k] == '%' && k + 2 < s.size() && hex_value(s[k + 1]) >= 0 && hex_value(s[k + 2]) >= 0) {
            out += static_cast<char>(hex_value(s[k + 1]) * 16 + hex_value(s[k + 2]));
            k += 2;
        } else {
            out += s[k];
        }
    }
    return out;
}

std::vector<std::string> split_path(const std::string& path)
{
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path) {
        if (c == '/') {
            if (!cur.empty()) parts.push_back(url_decode(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) parts.push_back(url_decode(cur));
    return parts;
}

ApiResponse json_response(int status, const Json& body) { return {status, "application/json", body.dump()}; }

ApiResponse error(int status, const std::string& message, const std::string& field = "")
{
    Json body = {{"error", message}};
    if (!field.empty()) body["field"] = field;
    return json_response(status, body);
}

std::string new_session_id()
{
    static std::mutex mutex;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mutex);
    std::ostringstream ss;
    ss << std::hex << rng();
    std::string id = ss.str();
    return std::string(16 - std::min<std::size_t>(16, id.size()), '0') + id;
}

bool wants_json(const ApiRequest& r, const std::map<std::string, std::string>& query)
{
    if (const auto it = query.find("format"); it != query.end()) return it->second == "summary" || it->second == "json";
    return r.accept.find("application/json") != std::string::npos && r.accept.find("model/obj") == std::string::npos;
}

ApiResponse mesh_response(const TriMesh& mesh, const std::string& obj, bool summary)
{
    if (summary) return json_response(200, mesh_summary(mesh));
    return {200, "model/obj", obj};
}

// Accepts {"<key>": value} or the bare value.
const Json& unwrap(const Json& j, const char* key) { return j.is_object() && j.contains(key) ? j.at(key) : j; }

}  // namespace

std::pair<std::string, std::map<std::string, std::string>> split_target(const std::string& target)
{
    const auto q = target.find('?');
    std::map<std::string, std::string> query;
    if (q != std::string::npos) {
        std::istringstream ss(target.substr(q + 1));
        for (std::string kv; std::getline(ss, kv, '&');) {
            if (kv.empty()) continue;
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                query[url_decode(kv)] = "";
            else
                query[url_decode(kv.substr(0, eq))] = url_decode(kv.substr(eq + 1));
        }
    }
    return {target.substr(0, q), query};
}

struct Api::Session {
    std::string id;
    std::mutex compute;  // held by every operation that touches `model`
    ModelingSession model;
    std::atomic<ComputeStatus> status{ComputeStatus::idle};
    double events = 0;  // timestamp source for logged inputs

    // Snapshots for readers; replaced whole after each compute.
    std::mutex snapshot_mutex;
    std::shared_ptr<const TriMesh> coarse, fine;
    std::shared_ptr<const std::string> coarse_obj, fine_obj, project_json;

    std::mutex subscriber_mutex;
    std::map<std::uint64_t, EventSink> subscribers;

    void refresh_snapshots()
    {
        auto c = model.has_coarse() ? std::make_shared<const TriMesh>(model.coarse_mesh()) : nullptr;
        auto co = c ? std::make_shared<const std::string>(to_obj_string(*c)) : nullptr;
        auto f = model.fine_mesh() ? std::make_shared<const TriMesh>(*model.fine_mesh()) : nullptr;
        auto fo = f ? std::make_shared<const std::string>(to_obj_string(*f)) : nullptr;
        auto pj = std::make_shared<const std::string>(project_to_string(model.project()));
        std::lock_guard lock(snapshot_mutex);
        coarse = std::move(c);
        coarse_obj = std::move(co);
        fine = std::move(f);
        fine_obj = std::move(fo);
        project_json = std::move(pj);
    }
};

Api::Api(ServiceOptions options) : options_(std::move(options))
{
    std::vector<SuggestionEntry> entries;
    if (!options_.corpus_path.empty()) entries = load_corpus(options_.corpus_path);
    index_ = std::make_shared<const SuggestionIndex>(std::move(entries));
}

Api::~Api() = default;

std::size_t Api::session_count() const
{
    std::lock_guard lock(sessions_mutex_);
    return sessions_.size();
}

std::shared_ptr<Api::Session> Api::find(const std::string& id) const
{
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::uint64_t Api::subscribe(const std::string& session_id, EventSink sink)
{
    const auto s = find(session_id);
    if (!s) return 0;
    const std::uint64_t sub = next_subscription_++;
    std::lock_guard lock(s->subscriber_mutex);
    s->subscribers[sub] = std::move(sink);
    return sub;
}

void Api::unsubscribe(std::uint64_t subscription)
{
    std::vector<std::shared_ptr<Session>> all;
    {
        std::lock_guard lock(sessions_mutex_);
        for (const auto& [id, s] : sessions_) all.push_back(s);
    }
    for (const auto& s : all) {
        std::lock_guard lock(s->subscriber_mutex);
        s->subscribers.erase(subscription);
    }
}

void Api::publish(Session& s, const std::string& json_text)
{
    std::vector<EventSink> sinks;
    {
        std::lock_guard lock(s.subscriber_mutex);
        for (const auto& [id, sink] : s.subscribers) sinks.push_back(sink);
    }
    for (const EventSink& sink : sinks) sink(json_text);
}

ApiResponse Api::create_session()
{
    auto s = std::make_shared<Session>();
    s->model.set_debug_dir(options_.debug_dir);
    s->refresh_snapshots();
    std::lock_guard lock(sessions_mutex_);
    do s->id = new_session_id();
    while (sessions_.count(s->id));
    sessions_[s->id] = s;
    return json_response(201, {{"id", s->id}});
}

ApiResponse Api::handle(const ApiRequest& request)
{
    const auto [path, query] = split_target(request.target);
    const std::vector<std::string> parts = split_path(path);

    if (parts.size() == 1 && parts[0] == "health") {
        if (request.method != "GET") return error(405, "method not allowed");
        return json_response(200, {{"status", "ok"}, {"sessions", session_count()}, {"suggestions", index_->size()}});
    }
    if (parts.empty() || parts[0] != "sessions") return error(404, "no such route: " + path);
    if (parts.size() == 1) {
        if (request.method != "POST") return error(405, "method not allowed");
        return create_session();
    }
    const auto s = find(parts[1]);
    if (!s) return error(404, "unknown session: " + parts[1]);
    if (parts.size() == 2) {
        if (request.method != "GET") return error(405, "method not allowed");
        std::lock_guard lock(s->snapshot_mutex);
        return json_response(200, {{"id", s->id},
                                   {"status", to_string(s->status.load())},
                                   {"has_coarse", s->coarse != nullptr},
                                   {"fine_current", s->fine != nullptr}});
    }
    if (parts.size() != 3) return error(404, "no such route: " + path);
    return route_session(*s, parts[2], request, query);
}

ApiResponse Api::route_session(Session& s, const std::string& action, const ApiRequest& request,
                               const std::map<std::string, std::string>& query)
{
    const std::string& method = request.method;
    const bool summary = wants_json(request, query);

    // -------------------------------------------------------------- reads
    if (action == "mesh") {
        if (method != "GET") return error(405, "method not allowed");
        const auto it = query.find("stage");
        const std::string stage = it == query.end() ? "coarse" : it->second;
        if (stage != "coarse" && stage != "fine") return error(422, "stage must be coarse or fine", "stage");
        std::shared_ptr<const TriMesh> mesh;
        std::shared_ptr<const std::string> obj;
        {
            std::lock_guard lock(s.snapshot_mutex);
            mesh = stage == "coarse" ? s.coarse : s.fine;
            obj = stage == "coarse" ? s.coarse_obj : s.fine_obj;
        }
        if (!mesh) return error(409, stage == "coarse" ? "no coarse mesh yet" : "fine mesh not computed for the current input");
        return mesh_response(*mesh, *obj, summary);
    }
    if (action == "project" && method == "GET") {
        std::lock_guard lock(s.snapshot_mutex);
        return {200, "application/json", *s.project_json};
    }
    if (action == "suggest") {
        if (method != "POST") return error(405, "method not allowed");
        try {
            SuggestionQuery q = parse_query(request.body);
            q.top_n = std::clamp(q.top_n, 0, 20);
            Json list = Json::array();
            for (const Suggestion& r : index_->query(q)) {
                const SuggestionEntry& e = *index_->find(r.id);
                Json strokes = Json::array();
                for (const Stroke& st : e.strokes) strokes.push_back(to_json(st));
                list.push_back({{"id", e.id},
                                {"distance", r.distance},
                                {"category", to_string(e.category)},
                                {"style", e.style},
                                {"strokes", strokes}});
            }
            Json body = {{"suggestions", list}};
            if (list.empty()) body["message"] = "no suggestions";
            return json_response(200, body);
        } catch (const std::invalid_argument& e) {
            return error(422, e.what());
        }
    }
    if (action == "events") return error(426, "connect with a websocket");

    // ----------------------------------------------------------- computes
    struct Op {
        const char* method;
        ComputeStatus status;
    };
    static const std::map<std::string, Op> ops{{"coarse-sketch", {"PUT", ComputeStatus::coarse_running}},
                                               {"layout", {"PUT", ComputeStatus::coarse_running}},
                                               {"profile", {"PUT", ComputeStatus::coarse_running}},
                                               {"strokes", {"POST", ComputeStatus::idle}},
                                               {"refine", {"POST", ComputeStatus::refine_running}},
                                               {"project", {"PUT", ComputeStatus::refine_running}}};
    const auto op = ops.find(action);
    if (op == ops.end()) return error(404, "no such route: " + action);
    if (method != op->second.method) return error(405, "method not allowed");

    std::unique_lock lock(s.compute, std::try_to_lock);
    if (!lock) return error(409, std::string("computation in flight: ") + to_string(s.status.load()));

    const ComputeStatus running = op->second.status;
    auto set_status = [&](ComputeStatus st) {
        s.status = st;
        publish(s, Json{{"type", "status"}, {"status", to_string(st)}}.dump());
    };
    if (running != ComputeStatus::idle) set_status(running);

    ApiResponse response;
    bool ok = false;
    try {
        if (action == "coarse-sketch") {
            s.model.set_sketch(part_sketch_from_json(parse_json_text(request.body)));
        } else if (action == "layout") {
            s.model.set_layout(part_layout_from_json(parse_json_text(request.body)));
        } else if (action == "profile") {
            const Json j = parse_json_text(request.body);
            const std::string where = j.is_object() ? "/target" : "";
            s.model.add_profile_edit({polyline_from_json(unwrap(j, "target"), where), s.events++});
        } else if (action == "strokes") {
            const Json j = parse_json_text(request.body);
            const Json& list = unwrap(j, "strokes");
            const std::string where = j.is_object() ? "/strokes" : "";
            if (!list.is_array()) throw JsonInputError(where, "expected an array of strokes");
            std::vector<TimedStroke> strokes;
            for (std::size_t k = 0; k < list.size(); ++k)
                strokes.push_back({stroke_from_json(list[k], where + "/" + std::to_string(k)), s.events});
            if (!strokes.empty()) s.events += 1;
            const auto& png = s.model.add_strokes(strokes);
            response = {200, "image/png", std::string(png.begin(), png.end())};
        } else if (action == "refine") {
            s.model.refine();
        } else if (action == "project") {
            s.model.load(project_from_string(request.body));
            s.events = static_cast<double>(s.model.project().profile_edits.size() + s.model.project().strokes.size());
        }
        ok = true;
    } catch (const JsonInputError& e) {
        response = error(422, e.detail(), e.location());
    } catch (const ProjectVersionError& e) {
        response = error(422, e.what(), "/schema_version");
    } catch (const SessionStateError& e) {
        response = error(409, e.what());
    } catch (const std::invalid_argument& e) {
        response = error(422, e.what());
    } catch (const std::exception& e) {
        response = error(500, e.what());
    }

    if (ok) {
        s.refresh_snapshots();
        if (action == "strokes") {
            publish(s, Json{{"type", "preview-ready"}}.dump());
        } else if (action == "refine") {
            std::lock_guard snap(s.snapshot_mutex);
            response = mesh_response(*s.fine, *s.fine_obj, summary);
        } else if (action == "project") {
            std::lock_guard snap(s.snapshot_mutex);
            response = {200, "application/json", *s.project_json};
        } else {
            std::lock_guard snap(s.snapshot_mutex);
            if (s.coarse)
                response = mesh_response(*s.coarse, *s.coarse_obj, summary);
            else
                response = json_response(200, {{"coarse", nullptr}});
        }
        if (action != "strokes") {
            publish(s, Json{{"type", "mesh-ready"}, {"stage", action == "refine" ? "fine" : "coarse"}}.dump());
            if (action == "project") publish(s, Json{{"type", "project-replaced"}}.dump());
        }
    }
    if (running != ComputeStatus::idle) set_status(ComputeStatus::idle);
    return response;
}

}  // namespace fsk
