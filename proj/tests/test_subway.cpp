#include <gtest/gtest.h>

#include <random>

#include "pspace/subway.hpp"

using namespace pspace::subway;

namespace {

// path u - v with one edge; tokens given
Loaded single_edge(const char* token_u, bool reversed = false) {
    std::string from = reversed ? "v" : "u", to = reversed ? "u" : "v";
    std::string tok = token_u ? std::string("\"") + token_u + "\"" : "null";
    std::string txt = R"({"oriented":true,"colors":2,
      "vertices":[{"id":"u","token":)" + tok + R"(},{"id":"v","token":null}],
      "edges":[{"id":"e","from":")" + from + R"(","to":")" + to + R"(","color":"purple"}],
      "rotation":{"u":["e"],"v":["e"]},"special":"u","target":"v"})";
    return from_json_text(txt);
}

// random valid-ish instance: a cycle with chords kept planar (outerplanar fan)
Loaded random_cycle(std::mt19937& rng, int n) {
    Loaded L;
    Instance& in = L.instance;
    for (int i = 0; i < n; ++i) in.vertex_ids.push_back("v" + std::to_string(i));
    for (int i = 0; i < n; ++i) in.edges.push_back({"e" + std::to_string(i), i, (i + 1) % n, int(rng() % 2)});
    in.rotation.assign(n, {});
    for (int i = 0; i < n; ++i) in.rotation[i] = {i, (i + n - 1) % n};
    in.special = 0;
    in.target = n - 1;
    L.state.token.assign(n, 0);
    for (auto& t : L.state.token) t = int8_t(rng() % 2);
    L.state.token[1 + rng() % (n - 1)] = NoToken;
    L.state.flipped.assign(n, 0);
    for (auto& f : L.state.flipped) f = uint8_t(rng() % 2);
    L.state.special = 0;
    return L;
}

}  // namespace

TEST(Subway, SingleEdgeMoves) {
    auto L = single_edge("purple");
    auto m = legal_moves(L.instance, L.state);
    ASSERT_EQ(m.size(), 1u);
    State t = apply_move(L.instance, L.state, m[0]);
    EXPECT_EQ(head_of(L.instance, t, 0), 0);  // edge now v->u
    EXPECT_TRUE(is_won(L.instance, t));
    EXPECT_FALSE(is_won(L.instance, L.state));
    auto back = legal_moves(L.instance, t);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(apply_move(L.instance, t, back[0]), L.state);
}

TEST(Subway, ColourAndDirectionMismatch) {
    auto a = single_edge("orange");
    EXPECT_TRUE(legal_moves(a.instance, a.state).empty());
    auto b = single_edge("purple", true);
    EXPECT_TRUE(legal_moves(b.instance, b.state).empty());
    EXPECT_THROW(apply_move(b.instance, b.state, {0, 0}), IllegalMove);
}

TEST(Subway, UndirectedLeavesEdgeAlone) {
    auto L = single_edge("purple", true);
    L.instance.oriented = false;
    auto m = legal_moves(L.instance, L.state);
    ASSERT_EQ(m.size(), 1u);
    State t = apply_move(L.instance, L.state, m[0]);
    EXPECT_EQ(t.flipped[0], 0);
}

TEST(Subway, ValidVertexRule) {
    Instance in;
    in.vertex_ids = {"c", "a", "b", "d", "e"};
    in.edges = {{"1", 0, 1, Purple}, {"2", 0, 2, Purple}, {"3", 0, 3, Orange}};
    EXPECT_TRUE(is_valid_vertex(in, 0));
    in.edges[2].color = Purple;
    EXPECT_FALSE(is_valid_vertex(in, 0));
    in.edges[2].color = Orange;
    in.edges.push_back({"4", 0, 4, Orange});
    EXPECT_FALSE(is_valid_vertex(in, 0));
    EXPECT_TRUE(is_valid_vertex(in, 1));
}

TEST(Subway, ValidationCatchesBadRotationAndDegree) {
    auto L = single_edge("purple");
    EXPECT_TRUE(validate_instance(L.instance, L.state, false).empty());
    auto bad = L;
    bad.instance.rotation[0].push_back(0);
    bad.instance.rotation[1].clear();
    EXPECT_FALSE(validate_instance(bad.instance, bad.state, false).empty());
    // star with four leaves: degree 4 is one violation
    Loaded s;
    s.instance.vertex_ids = {"c", "a", "b", "d", "e"};
    s.instance.edges = {{"1", 0, 1, Purple}, {"2", 0, 2, Purple}, {"3", 0, 3, Orange}, {"4", 0, 4, Orange}};
    s.instance.rotation = {{0, 1, 2, 3}, {0}, {1}, {2}, {3}};
    s.instance.special = 1;
    s.instance.target = 2;
    s.state.token = {NoToken, Purple, Purple, Orange, Orange};
    s.state.flipped.assign(4, 0);
    s.state.special = 1;
    auto v = validate_instance(s.instance, s.state, true);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("invalid vertex c"), std::string::npos);
}

TEST(Subway, EulerRejectsNonPlanarRotation) {
    // K4 drawn planar vs a rotation that is not an embedding of the sphere
    Loaded L;
    Instance& in = L.instance;
    in.vertex_ids = {"0", "1", "2", "3"};
    in.edges = {{"a", 0, 1, 0}, {"b", 1, 2, 0}, {"c", 2, 0, 1}, {"d", 0, 3, 1}, {"e", 1, 3, 1}, {"f", 2, 3, 0}};
    // vertex 3 inside triangle 0-1-2 (CCW 0,1,2)
    in.rotation = {{0, 3, 2}, {1, 4, 0}, {2, 5, 1}, {3, 4, 5}};
    in.special = 0;
    in.target = 3;
    L.state.token = {0, 0, 1, NoToken};
    L.state.flipped.assign(6, 0);
    auto emb = embedding(in);
    EXPECT_EQ(emb.faces().size(), 4u);
    EXPECT_TRUE(validate_instance(in, L.state, false).empty());
    std::swap(in.rotation[0][0], in.rotation[0][1]);
    EXPECT_FALSE(validate_instance(in, L.state, false).empty());
}

TEST(Subway, JsonRoundTrip) {
    auto L = single_edge("purple");
    std::string a = to_json_text(L.instance, L.state);
    auto M = from_json_text(a);
    EXPECT_EQ(to_json_text(M.instance, M.state), a);
    EXPECT_THROW(from_json_text("{"), std::runtime_error);
}

TEST(Subway, ReversibilityAndConservation) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        auto L = random_cycle(rng, 3 + int(rng() % 8));
        State s = L.state;
        std::vector<std::pair<Move, State>> hist;
        for (int k = 0; k < 40; ++k) {
            auto ms = legal_moves(L.instance, s);
            if (ms.empty()) break;
            Move m = ms[rng() % ms.size()];
            State t = apply_move(L.instance, s, m);
            ASSERT_EQ(std::count(t.token.begin(), t.token.end(), 0), std::count(s.token.begin(), s.token.end(), 0));
            ASSERT_EQ(count_empty(t), count_empty(s));
            // the bubble moved to a neighbour
            int to = L.instance.other(m.edge, m.from);
            ASSERT_EQ(t.token[m.from], NoToken);
            ASSERT_EQ(s.token[to], NoToken);
            hist.push_back({m, s});
            s = t;
        }
        // undo in reverse order
        while (!hist.empty()) {
            auto [m, prev] = hist.back();
            hist.pop_back();
            int to = L.instance.other(m.edge, m.from);
            s = apply_move(L.instance, s, {m.edge, to});
            ASSERT_EQ(s, prev);
        }
        ASSERT_EQ(s, L.state);
    }
}
