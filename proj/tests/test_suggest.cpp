#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include "facesketch/suggest.hpp"
#include "oracles.hpp"

using namespace fsk;

namespace {

const std::string kCorpus = FACESKETCH_DATA_DIR "/suggestions.json";

double norm(const Descriptor& d)
{
    double s = 0.0;
    for (double v : d) s += v * v;
    return std::sqrt(s);
}

std::vector<std::vector<Vec2>> lines_of(const std::vector<Stroke>& strokes)
{
    std::vector<std::vector<Vec2>> out;
    for (const Stroke& s : strokes) out.push_back(s.polyline);
    return out;
}

// Random polylines inside the unit box.
std::vector<Stroke> random_strokes(std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Stroke> strokes(1 + rng() % 3);
    for (Stroke& s : strokes) {
        s.polyline.resize(2 + rng() % 6);
        for (Vec2& p : s.polyline) p = Vec2(u(rng), u(rng));
    }
    return strokes;
}

std::vector<double> as_vector(const Descriptor& d) { return {d.begin(), d.end()}; }

Descriptor unit_basis(int k)
{
    Descriptor d{};
    d[static_cast<std::size_t>(k)] = 1.0;
    return d;
}

}  // namespace

TEST(Category, NamesRoundTrip)
{
    for (const char* name : {"nose", "eye", "mouth", "ear", "wrinkle", "other"})
        EXPECT_EQ(to_string(suggestion_category_from_string(name)), name);
    EXPECT_THROW(suggestion_category_from_string("tail"), std::invalid_argument);
}

TEST(Descriptor, IsUnitNorm)
{
    std::mt19937 rng(3);
    for (int t = 0; t < 20; ++t) EXPECT_NEAR(norm(stroke_descriptor(random_strokes(rng))), 1.0, 1e-12);
}

TEST(Descriptor, HorizontalSegmentCoversTwoRows)
{
    // Long side maps to 28 px centred at 16: the segment runs (2,16)-(30,16).
    const Descriptor d = stroke_descriptor(std::vector<std::vector<Vec2>>{{{0.0, 5.0}, {10.0, 5.0}}});
    const double interior = 1.0 - 0.5 / 1.5;
    const double corner = 1.0 - std::sqrt(0.5) / 1.5;
    const double n = std::sqrt(56 * interior * interior + 4 * corner * corner);
    for (int j = 0; j < descriptor_side; ++j)
        for (int i = 0; i < descriptor_side; ++i) {
            double expected = 0.0;
            if (j == 15 || j == 16) {
                if (i >= 2 && i <= 29) expected = interior / n;
                if (i == 1 || i == 30) expected = corner / n;
            }
            EXPECT_NEAR(d[static_cast<std::size_t>(j * descriptor_side + i)], expected, 1e-12) << i << "," << j;
        }
}

TEST(Descriptor, InvariantToTranslationAndUniformScale)
{
    std::mt19937 rng(5);
    for (int t = 0; t < 10; ++t) {
        const auto lines = lines_of(random_strokes(rng));
        auto moved = lines;
        for (auto& l : moved)
            for (Vec2& p : l) p = 37.0 * p + Vec2(120.0, -4.5);
        const Descriptor a = stroke_descriptor(lines), b = stroke_descriptor(moved);
        EXPECT_LT(descriptor_distance(a, b), 1e-9);
    }
}

TEST(Descriptor, SensitiveToAspect)
{
    const std::vector<std::vector<Vec2>> square{{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}};
    const std::vector<std::vector<Vec2>> wide{{{0, 0}, {3, 0}, {3, 1}, {0, 1}, {0, 0}}};
    EXPECT_GT(descriptor_distance(stroke_descriptor(square), stroke_descriptor(wide)), 0.5);
}

TEST(Descriptor, SinglePointAndBadInput)
{
    EXPECT_NEAR(norm(stroke_descriptor(std::vector<std::vector<Vec2>>{{{3.0, 4.0}}})), 1.0, 1e-12);
    EXPECT_THROW(stroke_descriptor(std::vector<std::vector<Vec2>>{}), std::invalid_argument);
    EXPECT_THROW(stroke_descriptor(std::vector<std::vector<Vec2>>{{}}), std::invalid_argument);
    EXPECT_THROW(stroke_descriptor(std::vector<std::vector<Vec2>>{{{0.0, NAN}, {1.0, 1.0}}}), std::invalid_argument);
}

TEST(Entry, Validation)
{
    const Stroke ok{StrokeKind::ridge, {{0.0, 0.0}, {1.0, 1.0}}, 0.5, 3.0};
    EXPECT_NO_THROW(make_entry("a", SuggestionCategory::nose, "pig", {ok}));
    EXPECT_THROW(make_entry("a", SuggestionCategory::nose, "pig", {}), std::invalid_argument);
    EXPECT_THROW(make_entry("", SuggestionCategory::nose, "pig", {ok}), std::invalid_argument);
    Stroke outside = ok;
    outside.polyline[1] = Vec2(1.01, 0.5);
    EXPECT_THROW(make_entry("a", SuggestionCategory::nose, "pig", {outside}), std::invalid_argument);
    Stroke bad_depth = ok;
    bad_depth.depth = 1.5;
    EXPECT_THROW(make_entry("a", SuggestionCategory::nose, "pig", {bad_depth}), std::invalid_argument);
}

TEST(Index, EmptyAndSizes)
{
    const SuggestionIndex empty;
    EXPECT_EQ(empty.size(), 0u);
    EXPECT_TRUE(empty.query({SuggestionCategory::nose, "", {{{0, 0}, {1, 1}}}, 20}).empty());

    std::mt19937 rng(11);
    std::vector<SuggestionEntry> entries;
    for (int k = 0; k < 100; ++k)
        entries.push_back(make_entry("e" + std::to_string(k), SuggestionCategory::eye, "", random_strokes(rng)));
    const SuggestionIndex index(entries);
    EXPECT_EQ(index.size(), 100u);
    ASSERT_NE(index.find("e42"), nullptr);
    EXPECT_EQ(index.find("e42")->id, "e42");
    EXPECT_EQ(index.find("nope"), nullptr);

    entries.push_back(entries[7]);
    EXPECT_THROW(SuggestionIndex{entries}, std::invalid_argument);
}

TEST(Index, CategoryWithoutEntriesIsEmpty)
{
    const SuggestionIndex index(load_corpus(kCorpus));
    EXPECT_TRUE(index.query({SuggestionCategory::nose, "no-such-style", {{{0, 0}, {1, 1}}}, 20}).empty());
    std::vector<SuggestionEntry> only_noses;
    for (const SuggestionEntry& e : index.entries())
        if (e.category == SuggestionCategory::nose) only_noses.push_back(e);
    EXPECT_TRUE(SuggestionIndex(only_noses).query({SuggestionCategory::ear, "", {{{0, 0}, {1, 1}}}, 20}).empty());
}

TEST(Index, BadQueryThrows)
{
    const SuggestionIndex index(load_corpus(kCorpus));
    EXPECT_THROW(index.query({SuggestionCategory::nose, "", {}, 20}), std::invalid_argument);
    EXPECT_THROW(index.query({SuggestionCategory::nose, "", {{{0, 0}, {1, 1}}}, -1}), std::invalid_argument);
}

TEST(Index, SelfRetrievalOverTheShippedCorpus)
{
    const auto corpus = load_corpus(kCorpus);
    ASSERT_GE(corpus.size(), 50u);
    const SuggestionIndex index(corpus);
    for (const SuggestionEntry& e : corpus) {
        for (const std::string& style : {e.style, std::string{}}) {
            const auto ranked = index.query({e.category, style, lines_of(e.strokes), 20});
            ASSERT_FALSE(ranked.empty());
            EXPECT_EQ(ranked[0].id, e.id);
            EXPECT_EQ(ranked[0].distance, 0.0);
            if (ranked.size() > 1) EXPECT_GT(ranked[1].distance, 0.0) << e.id;
        }
    }
}

TEST(Index, ToyCorpusMatchesBruteForce)
{
    // Hand-built descriptors: two basis pixels and their normalized sum.
    const int p = 16 * descriptor_side + 16, q = 3 * descriptor_side + 3;
    SuggestionEntry a{"a", SuggestionCategory::mouth, "", {}, unit_basis(p)};
    SuggestionEntry b{"b", SuggestionCategory::mouth, "", {}, unit_basis(q)};
    SuggestionEntry c{"c", SuggestionCategory::mouth, "", {}, {}};
    c.descriptor[p] = c.descriptor[q] = std::sqrt(0.5);
    const SuggestionIndex index({c, b, a});

    std::mt19937 rng(17);
    for (int t = 0; t < 20; ++t) {
        const auto lines = lines_of(random_strokes(rng));
        const Descriptor probe = stroke_descriptor(lines);
        const auto expected = oracle::brute_rank(
            as_vector(probe), {{"a", as_vector(a.descriptor)}, {"b", as_vector(b.descriptor)},
                               {"c", as_vector(c.descriptor)}});
        const auto got = index.query({SuggestionCategory::mouth, "", lines, 20});
        ASSERT_EQ(got.size(), 3u);
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_EQ(got[k].id, expected[k].first);
            EXPECT_NEAR(got[k].distance, expected[k].second, 1e-12);
        }
    }
}

TEST(Index, RandomCorpusMatchesBruteForceWithTiesById)
{
    std::mt19937 rng(19);
    std::vector<SuggestionEntry> entries;
    for (int k = 0; k < 300; ++k) {
        const auto cat = k % 3 == 0 ? SuggestionCategory::ear : SuggestionCategory::wrinkle;
        entries.push_back(make_entry("r" + std::to_string(1000 - k), cat, k % 2 ? "x" : "y", random_strokes(rng)));
    }
    // Exact duplicates force distance ties.
    for (int k = 0; k < 20; ++k) {
        SuggestionEntry dup = entries[static_cast<std::size_t>(k)];
        dup.id = "d" + std::to_string(k);
        entries.push_back(dup);
    }
    std::shuffle(entries.begin(), entries.end(), rng);
    const SuggestionIndex index(entries);

    for (int t = 0; t < 10; ++t) {
        const auto lines = lines_of(random_strokes(rng));
        for (const std::string style : {"", "x"}) {
            std::vector<std::pair<std::string, std::vector<double>>> cands;
            for (const SuggestionEntry& e : entries)
                if (e.category == SuggestionCategory::ear && (style.empty() || e.style == style))
                    cands.emplace_back(e.id, as_vector(e.descriptor));
            const auto expected = oracle::brute_rank(as_vector(stroke_descriptor(lines)), cands);
            const auto got = index.query({SuggestionCategory::ear, style, lines, 1000});
            ASSERT_EQ(got.size(), expected.size());
            for (std::size_t k = 0; k < got.size(); ++k) EXPECT_EQ(got[k].id, expected[k].first);

            const auto top = index.query({SuggestionCategory::ear, style, lines, 20});
            ASSERT_EQ(top.size(), 20u);
            for (std::size_t k = 0; k < top.size(); ++k) EXPECT_EQ(top[k].id, expected[k].first);
        }
    }
}

TEST(Index, QueryLatencyAtOneThousandEntries)
{
    std::mt19937 rng(23);
    std::vector<SuggestionEntry> entries;
    for (int k = 0; k < 1000; ++k)
        entries.push_back(make_entry("n" + std::to_string(k), SuggestionCategory::nose, "", random_strokes(rng)));
    const SuggestionIndex index(entries);
    const auto lines = lines_of(random_strokes(rng));
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = index.query({SuggestionCategory::nose, "", lines, 20});
        worst = std::max(worst, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
        EXPECT_EQ(r.size(), 20u);
    }
    EXPECT_LT(worst, 50.0);
}

TEST(Index, ConcurrentQueriesAgree)
{
    const SuggestionIndex index(load_corpus(kCorpus));
    const SuggestionQuery q{SuggestionCategory::eye, "", {{{0, 0.5}, {0.5, 0.3}, {1, 0.5}}}, 5};
    const auto reference = index.query(q);
    std::vector<std::thread> threads;
    std::vector<int> mismatches(4, 0);
    for (int w = 0; w < 4; ++w)
        threads.emplace_back([&, w] {
            for (int t = 0; t < 50; ++t) {
                const auto r = index.query(q);
                if (r.size() != reference.size()) ++mismatches[static_cast<std::size_t>(w)];
                for (std::size_t k = 0; k < r.size() && k < reference.size(); ++k)
                    if (r[k].id != reference[k].id || r[k].distance != reference[k].distance)
                        ++mismatches[static_cast<std::size_t>(w)];
            }
        });
    for (auto& th : threads) th.join();
    for (int m : mismatches) EXPECT_EQ(m, 0);
}

TEST(Place, UnitTargetIsIdentity)
{
    const SuggestionIndex index(load_corpus(kCorpus));
    const SuggestionEntry& e = index.entries().front();
    EXPECT_EQ(place(e, Rect{}), e.strokes);
}

TEST(Place, ScaleAndTranslate)
{
    const Stroke s{StrokeKind::valley, {{0.0, 0.25}, {0.5, 1.0}, {1.0, 0.0}}, 0.7, 4.0};
    const SuggestionEntry e = make_entry("v", SuggestionCategory::wrinkle, "crow", {s});

    const auto doubled = place(e, Rect{{0, 0}, {2, 2}});
    for (std::size_t k = 0; k < s.polyline.size(); ++k)
        EXPECT_EQ(doubled[0].polyline[k], 2.0 * s.polyline[k]);

    const auto moved = place(e, Rect{{10, -3}, {11, -2}});
    for (std::size_t k = 0; k < s.polyline.size(); ++k)
        EXPECT_EQ(moved[0].polyline[k], s.polyline[k] + Vec2(10, -3));

    const auto canvas = place(e, Rect{{100, 200}, {180, 240}});
    EXPECT_EQ(canvas[0].kind, StrokeKind::valley);
    EXPECT_EQ(canvas[0].depth, 0.7);
    EXPECT_EQ(canvas[0].width, 4.0);
    EXPECT_EQ(canvas[0].polyline[1], Vec2(140, 240));
}

TEST(Place, RoundTripsThroughUnplace)
{
    const auto corpus = load_corpus(kCorpus);
    const Rect target{{213.7, 98.1}, {301.2, 131.9}};
    for (const SuggestionEntry& e : corpus) {
        const auto back = unplace(place(e, target), target);
        for (std::size_t s = 0; s < back.size(); ++s)
            for (std::size_t k = 0; k < back[s].polyline.size(); ++k)
                EXPECT_LT((back[s].polyline[k] - e.strokes[s].polyline[k]).norm(), 1e-9);
    }
}

TEST(Place, DegenerateRectThrows)
{
    const SuggestionEntry e = make_entry("v", SuggestionCategory::other, "", {{StrokeKind::ridge, {{0, 0}, {1, 1}}}});
    EXPECT_THROW(place(e, Rect{{5, 5}, {5, 9}}), std::invalid_argument);
    EXPECT_THROW(place(e, Rect{{5, 5}, {9, 5}}), std::invalid_argument);
    EXPECT_THROW(place(e, Rect{{5, 5}, {1, 9}}), std::invalid_argument);
}

TEST(CorpusJson, RoundTrip)
{
    const auto corpus = load_corpus(kCorpus);
    const auto again = parse_corpus(corpus_to_json(corpus));
    ASSERT_EQ(again.size(), corpus.size());
    for (std::size_t k = 0; k < corpus.size(); ++k) {
        EXPECT_EQ(again[k].id, corpus[k].id);
        EXPECT_EQ(again[k].category, corpus[k].category);
        EXPECT_EQ(again[k].style, corpus[k].style);
        EXPECT_EQ(again[k].strokes, corpus[k].strokes);
        EXPECT_EQ(again[k].descriptor, corpus[k].descriptor);
    }
}

TEST(CorpusJson, ErrorsNameTheEntry)
{
    EXPECT_THROW(parse_corpus("{}"), std::invalid_argument);
    EXPECT_THROW(parse_corpus("[{"), std::invalid_argument);
    EXPECT_TRUE(parse_corpus("[]").empty());
    const std::string bad = R"([{"id":"a","category":"eye","style":"","strokes":[{"kind":"ridge","points":[[0,0],[1,1]]}]},
                                {"id":"b","category":"tail","style":"","strokes":[{"kind":"ridge","points":[[0,0],[1,1]]}]}])";
    try {
        parse_corpus(bad);
        FAIL() << "expected an error";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("entry 1"), std::string::npos) << e.what();
    }
    EXPECT_THROW(load_corpus("/nonexistent/corpus.json"), std::runtime_error);
}

TEST(QueryJson, BothContourShapes)
{
    const SuggestionQuery single = parse_query(R"({"category":"nose","style":"pig","contour":[[0,0],[1,2]],"top_n":5})");
    EXPECT_EQ(single.category, SuggestionCategory::nose);
    EXPECT_EQ(single.style, "pig");
    EXPECT_EQ(single.top_n, 5);
    ASSERT_EQ(single.contour.size(), 1u);
    EXPECT_EQ(single.contour[0][1], Vec2(1, 2));

    const SuggestionQuery multi = parse_query(R"({"category":"eye","contour":[[[0,0],[1,0]],[[0,1],[1,1]]]})");
    EXPECT_EQ(multi.top_n, 20);
    EXPECT_TRUE(multi.style.empty());
    EXPECT_EQ(multi.contour.size(), 2u);

    EXPECT_THROW(parse_query(R"({"category":"eye"})"), std::invalid_argument);
    EXPECT_THROW(parse_query(R"({"category":"eye","contour":[]})"), std::invalid_argument);
    EXPECT_THROW(parse_query("nope"), std::invalid_argument);
}
