#include "facesketch/suggest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fsk {

using nlohmann::json;

std::string to_string(SuggestionCategory category)
{
    switch (category) {
    case SuggestionCategory::nose: return "nose";
    case SuggestionCategory::eye: return "eye";
    case SuggestionCategory::mouth: return "mouth";
    case SuggestionCategory::ear: return "ear";
    case SuggestionCategory::wrinkle: return "wrinkle";
    case SuggestionCategory::other: return "other";
    }
    return "other";
}

SuggestionCategory suggestion_category_from_string(const std::string& name)
{
    for (SuggestionCategory c : {SuggestionCategory::nose, SuggestionCategory::eye, SuggestionCategory::mouth,
                                 SuggestionCategory::ear, SuggestionCategory::wrinkle, SuggestionCategory::other})
        if (to_string(c) == name) return c;
    throw std::invalid_argument("unknown suggestion category: " + name);
}

namespace {

constexpr double kSpan = descriptor_side - 4.0;
constexpr double kFalloff = 1.5;

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b)
{
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

void stamp_segment(Descriptor& d, const Vec2& a, const Vec2& b)
{
    const int i0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - kFalloff)));
    const int i1 = std::min(descriptor_side - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + kFalloff)));
    const int j0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - kFalloff)));
    const int j1 = std::min(descriptor_side - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + kFalloff)));
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const double w = 1.0 - segment_distance(Vec2(i + 0.5, j + 0.5), a, b) / kFalloff;
            double& px = d[static_cast<std::size_t>(j) * descriptor_side + i];
            px = std::max(px, w);
        }
}

}  // namespace

Descriptor stroke_descriptor(const std::vector<std::vector<Vec2>>& polylines)
{
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    Vec2 hi = -lo;
    for (const auto& line : polylines)
        for (const Vec2& p : line) {
            if (!p.allFinite()) throw std::invalid_argument("descriptor input has non-finite coordinates");
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
    if (!(lo.x() <= hi.x())) throw std::invalid_argument("descriptor input has no points");

    const double extent = (hi - lo).maxCoeff();
    const double scale = extent > 0.0 ? kSpan / extent : 1.0;
    const Vec2 centre = 0.5 * (lo + hi);
    const Vec2 grid_centre = Vec2::Constant(0.5 * descriptor_side);
    auto to_grid = [&](const Vec2& p) -> Vec2 { return (p - centre) * scale + grid_centre; };

    Descriptor d{};
    for (const auto& line : polylines) {
        if (line.size() == 1) stamp_segment(d, to_grid(line[0]), to_grid(line[0]));
        for (std::size_t k = 1; k < line.size(); ++k) stamp_segment(d, to_grid(line[k - 1]), to_grid(line[k]));
    }
    double norm = 0.0;
    for (double v : d) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : d) v /= norm;
    return d;
}

Descriptor stroke_descriptor(const std::vector<Stroke>& strokes)
{
    std::vector<std::vector<Vec2>> lines;
    lines.reserve(strokes.size());
    for (const Stroke& s : strokes) lines.push_back(s.polyline);
    return stroke_descriptor(lines);
}

double descriptor_distance(const Descriptor& a, const Descriptor& b)
{
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double e = a[k] - b[k];
        sum += e * e;
    }
    return std::sqrt(sum);
}

SuggestionEntry make_entry(std::string id, SuggestionCategory category, std::string style,
                           std::vector<Stroke> strokes)
{
    if (id.empty()) throw std::invalid_argument("suggestion id must be nonempty");
    if (strokes.empty()) throw std::invalid_argument("suggestion " + id + " has no strokes");
    constexpr double tol = 1e-9;
    for (const Stroke& s : strokes) {
        validate_stroke(s);
        for (const Vec2& p : s.polyline)
            if (p.minCoeff() < -tol || p.maxCoeff() > 1.0 + tol)
                throw std::invalid_argument("suggestion " + id + " has points outside the unit box");
    }
    SuggestionEntry e{std::move(id), category, std::move(style), std::move(strokes), {}};
    e.descriptor = stroke_descriptor(e.strokes);
    return e;
}

SuggestionIndex::SuggestionIndex(std::vector<SuggestionEntry> entries) : entries_(std::move(entries))
{
    std::sort(entries_.begin(), entries_.end(),
              [](const SuggestionEntry& a, const SuggestionEntry& b) { return a.id < b.id; });
    for (std::size_t k = 1; k < entries_.size(); ++k)
        if (entries_[k].id == entries_[k - 1].id)
            throw std::invalid_argument("duplicate suggestion id: " + entries_[k].id);
}

const SuggestionEntry* SuggestionIndex::find(const std::string& id) const
{
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const SuggestionEntry& e, const std::string& key) { return e.id < key; });
    return it != entries_.end() && it->id == id ? &*it : nullptr;
}

std::vector<Suggestion> SuggestionIndex::query(const SuggestionQuery& q) const
{
    if (q.top_n < 0) throw std::invalid_argument("top_n must be nonnegative");
    const Descriptor probe = stroke_descriptor(q.contour);
    std::vector<Suggestion> out;
    for (const SuggestionEntry& e : entries_) {
        if (e.category != q.category) continue;
        if (!q.style.empty() && e.style != q.style) continue;
        out.push_back({e.id, descriptor_distance(probe, e.descriptor)});
    }
    // entries_ is id-sorted, so a stable sort on distance breaks ties by id.
    std::stable_sort(out.begin(), out.end(),
                     [](const Suggestion& a, const Suggestion& b) { return a.distance < b.distance; });
    if (out.size() > static_cast<std::size_t>(q.top_n)) out.resize(static_cast<std::size_t>(q.top_n));
    return out;
}

std::vector<Stroke> map_strokes(const std::vector<Stroke>& strokes, const Rect& from, const Rect& to)
{
    const Vec2 fe = from.extent(), te = to.extent();
    if (!(fe.minCoeff() > 0.0) || !(te.minCoeff() > 0.0))
        throw std::invalid_argument("placement rect must have positive width and height");
    const Vec2 scale = te.cwiseQuotient(fe);
    std::vector<Stroke> out = strokes;
    for (Stroke& s : out)
        for (Vec2& p : s.polyline) p = to.min + (p - from.min).cwiseProduct(scale);
    return out;
}

std::vector<Stroke> place(const SuggestionEntry& entry, const Rect& target)
{
    return map_strokes(entry.strokes, Rect{}, target);
}

std::vector<Stroke> unplace(const std::vector<Stroke>& strokes, const Rect& target)
{
    return map_strokes(strokes, target, Rect{});
}

namespace {

json parse_json(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(e.what());
    }
}

std::vector<Vec2> polyline_from_json(const json& j)
{
    if (!j.is_array()) throw std::invalid_argument("polyline must be an array of [x, y]");
    std::vector<Vec2> pts;
    for (const json& p : j) {
        if (!p.is_array() || p.size() != 2) throw std::invalid_argument("point must be [x, y]");
        pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return pts;
}

SuggestionEntry entry_from_json(const json& j)
{
    std::vector<Stroke> strokes;
    for (const json& s : j.at("strokes")) {
        Stroke st;
        st.kind = stroke_kind_from_string(s.at("kind").get<std::string>());
        st.depth = s.value("a", 0.5);
        st.width = s.value("width", 3.0);
        st.polyline = polyline_from_json(s.at("points"));
        strokes.push_back(std::move(st));
    }
    return make_entry(j.at("id").get<std::string>(),
                      suggestion_category_from_string(j.at("category").get<std::string>()),
                      j.value("style", std::string{}), std::move(strokes));
}

}  // namespace

std::vector<SuggestionEntry> parse_corpus(const std::string& json_text)
{
    const json root = parse_json(json_text);
    if (!root.is_array()) throw std::invalid_argument("corpus must be a JSON array");
    std::vector<SuggestionEntry> entries;
    entries.reserve(root.size());
    for (std::size_t k = 0; k < root.size(); ++k) {
        try {
            entries.push_back(entry_from_json(root[k]));
        } catch (const std::exception& e) {
            throw std::invalid_argument("corpus entry " + std::to_string(k) + ": " + e.what());
        }
    }
    return entries;
}

std::vector<SuggestionEntry> load_corpus(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_corpus(ss.str());
}

std::string corpus_to_json(const std::vector<SuggestionEntry>& entries)
{
    json root = json::array();
    for (const SuggestionEntry& e : entries) {
        json strokes = json::array();
        for (const Stroke& s : e.strokes) {
            json pts = json::array();
            for (const Vec2& p : s.polyline) pts.push_back({p.x(), p.y()});
            strokes.push_back({{"kind", to_string(s.kind)}, {"a", s.depth}, {"width", s.width}, {"points", pts}});
        }
        root.push_back({{"id", e.id}, {"category", to_string(e.category)}, {"style", e.style}, {"strokes", strokes}});
    }
    return root.dump(1);
}

SuggestionQuery parse_query(const std::string& json_text)
{
    const json j = parse_json(json_text);
    try {
        SuggestionQuery q;
        q.category = suggestion_category_from_string(j.at("category").get<std::string>());
        q.style = j.value("style", std::string{});
        q.top_n = j.value("top_n", 20);
        const json& c = j.at("contour");
        if (!c.is_array() || c.empty()) throw std::invalid_argument("contour must be a nonempty array");
        if (c[0].is_array() && !c[0].empty() && c[0][0].is_array())
            for (const json& line : c) q.contour.push_back(polyline_from_json(line));
        else
            q.contour.push_back(polyline_from_json(c));
        return q;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("query: ") + e.what());
    }
}

}  // namespace fsk
