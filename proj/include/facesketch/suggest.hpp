#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "facesketch/strokes.hpp"

namespace fsk {

enum class SuggestionCategory { nose, eye, mouth, ear, wrinkle, other };

std::string to_string(SuggestionCategory category);
/// Throws std::invalid_argument for unknown names.
SuggestionCategory suggestion_category_from_string(const std::string& name);

inline constexpr int descriptor_side = 32;
using Descriptor = std::array<double, descriptor_side * descriptor_side>;

/// Raster descriptor of a set of polylines: the union bbox is scaled uniformly
/// (longer side to 28 px) and centred in a 32x32 grid, each segment is drawn
/// with a linear 1.5 px falloff, and the result is L2-normalized.
/// Invariant under translation and uniform scaling of the input.
/// Throws std::invalid_argument when there is no point or a non-finite one.
Descriptor stroke_descriptor(const std::vector<std::vector<Vec2>>& polylines);
Descriptor stroke_descriptor(const std::vector<Stroke>& strokes);

double descriptor_distance(const Descriptor& a, const Descriptor& b);

/// Stroke coordinates are in the unit box [0,1]^2; widths stay in canvas
/// pixels.
struct SuggestionEntry {
    std::string id;
    SuggestionCategory category = SuggestionCategory::other;
    std::string style;
    std::vector<Stroke> strokes;
    Descriptor descriptor{};
};

/// Validates the strokes (nonempty, each valid, inside the unit box within
/// 1e-9) and computes the descriptor.
SuggestionEntry make_entry(std::string id, SuggestionCategory category, std::string style,
                           std::vector<Stroke> strokes);

struct Suggestion {
    std::string id;
    double distance = 0.0;
};

struct SuggestionQuery {
    SuggestionCategory category = SuggestionCategory::other;
    std::string style;  // empty matches every style
    std::vector<std::vector<Vec2>> contour;
    int top_n = 20;
};

/// Immutable exact index; queries are a linear scan and safe to run
/// concurrently.
class SuggestionIndex {
public:
    SuggestionIndex() = default;
    /// Throws std::invalid_argument on duplicate ids.
    explicit SuggestionIndex(std::vector<SuggestionEntry> entries);

    std::size_t size() const { return entries_.size(); }
    const std::vector<SuggestionEntry>& entries() const { return entries_; }
    /// nullptr when absent.
    const SuggestionEntry* find(const std::string& id) const;

    /// Entries of the category (and style, when given) ordered by
    /// (distance, id), truncated to top_n. Throws std::invalid_argument for an
    /// empty contour or top_n < 0.
    std::vector<Suggestion> query(const SuggestionQuery& q) const;

private:
    std::vector<SuggestionEntry> entries_;  // sorted by id
};

struct Rect {
    Vec2 min = Vec2::Zero();
    Vec2 max = Vec2::Ones();

    Vec2 extent() const { return max - min; }
};

/// Applies the affine map `from` -> `to` to every point; kind, depth and
/// width are kept. Throws std::invalid_argument if either rect has zero or
/// negative width or height.
std::vector<Stroke> map_strokes(const std::vector<Stroke>& strokes, const Rect& from, const Rect& to);

/// Entry strokes moved from the unit box into `target`.
std::vector<Stroke> place(const SuggestionEntry& entry, const Rect& target);
/// Inverse of place: canvas strokes inside `target` back to the unit box.
std::vector<Stroke> unplace(const std::vector<Stroke>& strokes, const Rect& target);

/// Corpus format: JSON array of
/// {id, category, style, strokes: [{kind, a, width, points: [[x, y], ...]}]}.
/// Throws std::invalid_argument with the entry index on malformed input.
std::vector<SuggestionEntry> parse_corpus(const std::string& json_text);
std::vector<SuggestionEntry> load_corpus(const std::string& path);
std::string corpus_to_json(const std::vector<SuggestionEntry>& entries);

/// Query format: {category, style?, contour: [[x, y], ...] or [[[x, y], ...], ...], top_n?}.
SuggestionQuery parse_query(const std::string& json_text);

}  // namespace fsk
