#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "pspace/ncl.hpp"

using namespace pspace::ncl;

namespace {
std::string slurp(const std::string& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Single AND vertex "a" with two red and one blue edge to OR-free leaves is
// not degree-3 everywhere, so the weight tests build states by hand.
Instance and_star() {
    Instance in;
    in.vertices = {{"a", Kind::And, {-1, -1}}, {"x", Kind::And, {-1, -1}}, {"y", Kind::And, {-1, -1}}, {"z", Kind::And, {-1, -1}}};
    in.edges = {{"b", 1, 0, Color::Blue}, {"r1", 2, 0, Color::Red}, {"r2", 3, 0, Color::Red}};
    in.rotation = {{0, 1, 2}, {0}, {1}, {2}};
    in.target = 0;
    return in;
}
}  // namespace

TEST(Ncl, AndWeights) {
    Instance in = and_star();
    State s = initial_state(in);
    // all in: 4; flipping blue away leaves 2
    EXPECT_EQ(in_weight(in, s, 0), 4);
    auto f = legal_flips(in, s);
    EXPECT_NE(std::find(f.begin(), f.end(), 0), f.end());
    State t = apply_flip(in, s, 0);
    EXPECT_EQ(in_weight(in, t, 0), 2);
    // only reds in: neither red may leave
    auto g = legal_flips(in, t);
    EXPECT_EQ(std::find(g.begin(), g.end(), 1), g.end());
    EXPECT_EQ(std::find(g.begin(), g.end(), 2), g.end());
    EXPECT_THROW(apply_flip(in, t, 1), IllegalFlip);
    // the leaf x now holds the blue edge as its only weight, so it cannot go back
    EXPECT_THROW(apply_flip(in, t, 0), IllegalFlip);
}

TEST(Ncl, OrSingleBlueIsStuck) {
    Instance in;
    in.vertices = {{"o", Kind::Or, {0, 1}}, {"p", Kind::And, {-1, -1}}, {"q", Kind::And, {-1, -1}}, {"r", Kind::And, {-1, -1}}};
    in.edges = {{"a", 1, 0, Color::Blue}, {"b", 0, 2, Color::Blue}, {"c", 0, 3, Color::Blue}};
    in.rotation = {{0, 1, 2}, {0}, {1}, {2}};
    State s = initial_state(in);
    auto f = legal_flips(in, s);
    EXPECT_EQ(std::find(f.begin(), f.end(), 0), f.end());
}

TEST(Ncl, WinIgnoresOtherEdges) {
    Instance in = and_star();
    in.target = 1;
    in.target_from_to = true;
    State s = initial_state(in);
    EXPECT_TRUE(is_won(in, s));
    s.flipped[0] = 1;
    EXPECT_TRUE(is_won(in, s));
    s.flipped[1] = 1;
    EXPECT_FALSE(is_won(in, s));
}

TEST(Ncl, FixturesValidate) {
    for (const char* name : {"and_solvable", "or_unprotected"}) {
        Instance in = from_json_text(slurp(std::string(PSPACE_FIXTURES) + "/ncl/" + name + ".json"));
        EXPECT_TRUE(validate(in).empty()) << name;
    }
}
