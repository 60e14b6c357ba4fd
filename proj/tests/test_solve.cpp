#include <gtest/gtest.h>

#include <random>

#include "pspace/solve.hpp"

using namespace pspace;
using namespace pspace::solve;

namespace {
rush::State random_board(std::mt19937& rng, int n, bool fixed) {
    rush::State s;
    s.board = rush::Board(n, n);
    int hole = int(rng() % (n * n));
    int sp = int(rng() % (n * n));
    while (sp == hole) sp = int(rng() % (n * n));
    for (int i = 0; i < n * n; ++i) {
        if (i == hole) continue;
        if (fixed && i != sp && rng() % 7 == 0) {
            s.board.fixed[i] = 1;
            continue;
        }
        if (i == sp) s.special = int(s.cars.size());
        s.cars.push_back({{i / n, i % n}, 1, rng() % 2 ? rush::Orientation::Vertical : rush::Orientation::Horizontal});
    }
    return s;
}

// replay move notation through the engine
bool replay(rush::State s, const std::vector<std::string>& sol) {
    for (auto& m : sol) {
        bool done = false;
        for (auto mv : rush::legal_moves(s))
            if (rush::move_notation(s, mv) == m) {
                s = rush::apply_move(s, mv);
                done = true;
                break;
            }
        if (!done) return false;
    }
    return rush::is_won(s);
}

// iterative deepening, no memo: tiny boards only
bool idd(const rush::State& s, int depth) {
    if (rush::is_won(s)) return true;
    if (depth == 0) return false;
    for (auto m : rush::legal_moves(s))
        if (idd(rush::apply_move(s, m), depth - 1)) return true;
    return false;
}
}  // namespace

TEST(Solve, OneMoveWin) {
    auto s = rush::parse("%RH1 3 1\n.H-\n");
    auto r = solve_rush(s, 1000);
    ASSERT_TRUE(r.solvable);
    EXPECT_EQ(r.solution.size(), 1u);
    EXPECT_EQ(r.solution[0], "(0,1)L");
    EXPECT_EQ(god_number(s, 1000), 1);
    EXPECT_EQ(god_number(rush::parse("%RH1 2 1\nH.\n"), 10), 0);
}

TEST(Solve, BlockedBoardExploresOneState) {
    auto s = rush::parse("%RH1 3 3\n###\n#H#\n###\n");
    auto r = solve_rush(s, 1000);
    EXPECT_FALSE(r.solvable);
    EXPECT_EQ(r.explored, 1u);
}

TEST(Solve, BudgetFlaggedSeparately) {
    auto s = rush::parse("%RH1 3 1\n..H\n");
    auto r = solve_rush(s, 1);
    EXPECT_TRUE(r.budget_exceeded);
    EXPECT_FALSE(r.solvable);
    EXPECT_TRUE(solve_rush(s, 10).solvable);
}

TEST(Solve, GodNumberMatchesBackwardSearch) {
    std::mt19937 rng(2024);
    for (int t = 0; t < 100; ++t) {
        auto s = random_board(rng, 4, false);
        int a = god_number(s, 1 << 22), b = god_number_backward(s, 1 << 22);
        ASSERT_EQ(a, b) << rush::serialize(s);
    }
}

TEST(Solve, SolutionsReplayAndAreMinimal) {
    std::mt19937 rng(5);
    int solved = 0;
    for (int t = 0; t < 200; ++t) {
        auto s = random_board(rng, 3, t % 2 == 0);
        auto r = solve_rush(s, 1 << 20);
        if (!r.solvable) continue;
        ++solved;
        ASSERT_TRUE(replay(s, r.solution));
        int len = int(r.solution.size());
        if (len > 0 && len <= 8) ASSERT_FALSE(idd(s, len - 1));
    }
    EXPECT_GT(solved, 20);
}

TEST(Solve, DeterministicCounts) {
    std::mt19937 rng(11);
    auto s = random_board(rng, 4, false);
    auto a = solve_rush(s, 1 << 22), b = solve_rush(s, 1 << 22);
    EXPECT_EQ(a.explored, b.explored);
    EXPECT_EQ(a.solution, b.solution);
}

TEST(Solve, SubwayBfs) {
    // path a - b - c, purple edges directed toward c, special at a, target c
    subway::Instance in;
    in.vertex_ids = {"a", "b", "c"};
    in.edges = {{"ab", 0, 1, subway::Purple}, {"bc", 1, 2, subway::Purple}};
    in.rotation = {{0}, {0, 1}, {1}};
    in.special = 0;
    in.target = 2;
    subway::State s{{subway::Purple, subway::NoToken, subway::NoToken}, {0, 0}, 0};
    auto r = solve_subway(in, s, 100);
    ASSERT_TRUE(r.solvable);
    EXPECT_EQ(r.solution.size(), 2u);
    in.edges[1] = {"bc", 2, 1, subway::Purple};
    EXPECT_FALSE(solve_subway(in, s, 100).solvable);
}

TEST(Solve, HardestSmallBoardsMatchNaive) {
    for (int n = 2; n <= 3; ++n) {
        auto h = enumerate_hardest(n);
        EXPECT_EQ(h.moves, hardest_naive(n)) << n;
        EXPECT_EQ(god_number(h.witness, 1 << 20), h.moves);
        EXPECT_EQ(enumerate_hardest(n).moves, h.moves);
    }
}

// n = 5 needs an explicit opt-in, and even then the dense table does not fit
TEST(Solve, FiveByFiveIsGated) {
    EXPECT_THROW(enumerate_hardest(5), std::invalid_argument);
    EnumConstraints c;
    c.long_run = true;
    EXPECT_THROW(enumerate_hardest(5, c), BudgetExceeded);
    c = {};
    c.fixed_blocks = true;
    EXPECT_THROW(enumerate_hardest(4, c), std::invalid_argument);
}
