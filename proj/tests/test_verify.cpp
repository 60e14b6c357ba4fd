#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "pspace/solve.hpp"
#include "pspace/verify.hpp"

using namespace pspace;
using verify::GadgetKind;

namespace {
std::string slurp(const std::string& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}
std::string fx(const std::string& name) { return std::string(PSPACE_FIXTURES) + "/ncl/" + name + ".json"; }
nlohmann::json manifest() { return nlohmann::json::parse(slurp(std::string(PSPACE_FIXTURES) + "/ncl/manifest.json")); }

std::vector<std::pair<std::string, ncl::Instance>> suite() {
    std::vector<std::pair<std::string, ncl::Instance>> r;
    const auto man = manifest();
    for (auto& [name, _] : man.items()) r.push_back({name, ncl::from_json_text(slurp(fx(name)))});
    return r;
}

gadget::HarnessSpec spec(GadgetKind k, std::vector<gadget::PortBoundary> ports, bool tree = false) {
    gadget::HarnessSpec s;
    s.kind = k;
    s.ports = ports;
    s.tree = tree;
    return s;
}
constexpr gadget::PortBoundary FreeIn{true, true}, FreeOut{true, false}, PinIn{false, true}, PinOut{false, false};
}  // namespace

// ---- contracts ----

TEST(Contract, ProtectedOrIsAFiveStatePath) {
    auto r = verify::check_gadget_contract(GadgetKind::ProtectedOr);
    EXPECT_TRUE(r.ok) << r.counterexample;
    EXPECT_EQ(r.core_states, 5u);
    EXPECT_EQ(r.core_steps, 4u);
    // all boundaries with nothing pointing in are refused: 1 of 8 in/out
    // patterns, times 8 free/pinned patterns
    EXPECT_EQ(r.rejected, 8u);
}

TEST(Contract, AndTogglesBetweenTwoLocks) {
    auto r = verify::check_gadget_contract(GadgetKind::And);
    EXPECT_TRUE(r.ok) << r.counterexample;
    EXPECT_EQ(r.core_states, 2u);
    EXPECT_EQ(r.core_steps, 1u);
    // blue out and a red out: 3 of 8 in/out patterns
    EXPECT_EQ(r.rejected, 24u);
}

TEST(Contract, EdgesAndWin) {
    for (GadgetKind k : {GadgetKind::EdgeBlue, GadgetKind::EdgeRed, GadgetKind::Win}) {
        auto r = verify::check_gadget_contract(k);
        EXPECT_TRUE(r.ok) << gadget::gadget_name(k) << ": " << r.counterexample;
        EXPECT_EQ(r.core_states, k == GadgetKind::Win ? 2u : 3u);
        EXPECT_LT(r.wall_ms, 60'000.0);
    }
}

// the AND lock only changes with every port pointing in
TEST(Contract, AndToggleNeedsAllIn) {
    auto h = gadget::build_harness(spec(GadgetKind::And, {FreeIn, FreeIn, FreeIn}));
    auto ex = verify::explore_harness(h, 100'000);
    int toggles = 0;
    for (const auto& [a, b] : ex.rel.steps) {
        if (a[0] == b[0]) continue;
        ++toggles;
        EXPECT_TRUE(a[1] && a[2] && a[3]) << verify::describe(GadgetKind::And, a);
    }
    EXPECT_EQ(toggles, 1);
}

// blue port held by the AND (both reds pinned out): the edge never moves
TEST(Contract, LockedEdgeNeverFlips) {
    auto h = gadget::build_harness(spec(GadgetKind::EdgeBlue, {PinOut, PinOut, FreeOut}));
    auto ex = verify::explore_harness(h, 100'000);
    for (const auto& a : ex.rel.states) EXPECT_EQ(a[3], 0) << verify::describe(GadgetKind::EdgeBlue, a);
    auto h2 = gadget::build_harness(spec(GadgetKind::EdgeBlue, {PinIn, PinIn, FreeOut}));
    auto ex2 = verify::explore_harness(h2, 100'000);
    bool far = false;
    for (const auto& a : ex2.rel.states) far = far || a[3] == 2;
    EXPECT_TRUE(far);
}

// the comparison is strict: one extra step in the expectation is a mismatch
TEST(Contract, ExtraTransitionIsDetected) {
    auto s = spec(GadgetKind::ProtectedOr, {FreeIn, FreeIn, FreeIn});
    auto ex = verify::explore_harness(gadget::build_harness(s), 100'000);
    auto want = verify::model_relation(s);
    EXPECT_EQ(ex.rel, want);
    // the unprotected OR would also allow S1 <-> S5 with every edge in
    want.steps.insert({{1, 1, 1, 1}, {5, 1, 1, 1}});
    EXPECT_NE(ex.rel, want);
}

TEST(Contract, InconsistentBoundaryIsRefused) {
    auto s = spec(GadgetKind::And, {PinOut, PinIn, PinOut});
    EXPECT_FALSE(verify::boundary_consistent(s));
    EXPECT_THROW(gadget::build_harness(s), gadget::CompileError);
}

// ---- leakage ----

TEST(Leakage, EveryGadgetIsClean) {
    for (GadgetKind k : {GadgetKind::EdgeBlue, GadgetKind::EdgeRed, GadgetKind::And, GadgetKind::ProtectedOr,
                         GadgetKind::Win}) {
        auto r = verify::check_leakage(k);
        EXPECT_TRUE(r.ok) << gadget::gadget_name(k) << ": " << r.counterexample;
        EXPECT_GT(r.excursions, 0u);
    }
}

// a partially turned edge shows outward at both ends: the AND cannot toggle
// while it is partial
TEST(Leakage, PartialEdgeEnablesNothing) {
    auto h = gadget::build_harness(spec(GadgetKind::EdgeRed, {FreeIn, FreeIn, FreeOut}));
    auto ex = verify::explore_harness(h, 100'000);
    bool partial = false;
    for (const auto& [a, b] : ex.rel.steps) {
        partial = partial || a[3] == 1;
        if (a[0] != b[0]) EXPECT_EQ(a[3], 0);
    }
    EXPECT_TRUE(partial);
}

// ---- reversibility ----

TEST(Reversibility, EmptyWalkIsIdentity) {
    std::vector<ncl::Instance> pool{verify::random_ncl(1, 6)};
    auto r = verify::check_reversibility(pool, 10, 1, ncl::apply_flip, 0);
    EXPECT_TRUE(r.ok);
    EXPECT_EQ(r.moves, 0u);
}

TEST(Reversibility, AllEngines) {
    std::vector<ncl::Instance> np;
    for (int i = 0; i < 20; ++i) np.push_back(verify::random_ncl(i, 6 + i % 10));
    auto a = verify::check_reversibility(np, 1000, 11);
    EXPECT_TRUE(a.ok) << a.counterexample;
    EXPECT_GT(a.moves, 1000u);

    std::vector<std::pair<subway::Instance, subway::State>> sp;
    for (auto& [n, in] : suite()) {
        auto c = gadget::compile_ncl_to_ss(in);
        sp.push_back({c.instance, c.state});
    }
    auto b = verify::check_reversibility(sp, 1000, 12);
    EXPECT_TRUE(b.ok) << b.counterexample;
    EXPECT_GT(b.moves, 1000u);

    std::vector<rush::State> rp;
    for (int i = 0; i < 50; ++i) rp.push_back(verify::random_rush_board(i, 8));
    auto c = verify::check_reversibility(rp, 1000, 13);
    EXPECT_TRUE(c.ok) << c.counterexample;
    EXPECT_GT(c.moves, 1000u);
}

TEST(Reversibility, InjectedFaultsAreCaught) {
    std::vector<std::pair<subway::Instance, subway::State>> sp;
    auto c = gadget::compile_ncl_to_ss(ncl::from_json_text(slurp(fx("and_solvable"))));
    sp.push_back({c.instance, c.state});
    // token slides but the edge keeps its direction
    auto no_flip = [](const subway::Instance& in, const subway::State& s, subway::Move m) {
        subway::State t = subway::apply_move(in, s, m);
        t.flipped[m.edge] ^= 1;
        return t;
    };
    auto r = verify::check_reversibility(sp, 100, 5, no_flip);
    EXPECT_FALSE(r.ok);
    EXPECT_FALSE(r.counterexample.empty());

    std::vector<ncl::Instance> np{verify::random_ncl(3, 8)};
    auto lazy = [](const ncl::Instance&, const ncl::State& s, int) { return s; };
    EXPECT_FALSE(verify::check_reversibility(np, 100, 5, lazy).ok);

    std::vector<rush::State> rp{verify::random_rush_board(2, 6)};
    auto forward_only = [](rush::State& s, rush::Move m) {
        m.delta = 1;
        rush::apply_move_inplace(s, m);
    };
    EXPECT_FALSE(verify::check_reversibility(rp, 100, 5, forward_only).ok);
}

// ---- bubble access ----

TEST(BubbleRegion, MatchesExhaustiveSearch) {
    std::mt19937_64 rng(21);
    int compared = 0;
    for (int t = 0; t < 300; ++t) {
        rush::State s = verify::random_bubble_board(rng(), 4);
        if (s.board.width * s.board.height > 12) continue;
        ++compared;
        EXPECT_EQ(verify::bubble_region(s), verify::bubble_region_bfs(s, 2'000'000)) << rush::serialize(s);
    }
    EXPECT_GT(compared, 150);
}

TEST(BubbleRegion, OneOrientationGivesALine) {
    rush::State s = verify::random_bubble_board(9, 8);
    for (auto o : {rush::Orientation::Horizontal, rush::Orientation::Vertical}) {
        for (auto& c : s.cars) c.orient = o;
        auto in = verify::bubble_region(s);
        auto occ = rush::occupancy(s);
        int hole = int(std::find(occ.begin(), occ.end(), -1) - occ.begin());
        const int W = s.board.width;
        for (int i = 0; i < int(in.size()); ++i) {
            bool line = o == rush::Orientation::Horizontal ? i / W == hole / W : i % W == hole % W;
            EXPECT_EQ(bool(in[i]), line);
        }
    }
}

TEST(BubbleRegion, ThousandBoardsAreRectangles) {
    auto r = verify::check_bubble_rectangle(1000, 8, 2024);
    EXPECT_TRUE(r.ok) << r.counterexample;
    EXPECT_EQ(r.samples, 1000u);
}

// ---- end to end ----

TEST(Equivalence, FixturesAgreeAcrossAllThreeGames) {
    const auto man = manifest();
    std::vector<std::pair<std::string, ncl::Instance>> small;
    for (auto& [name, in] : suite())
        if (in.edges.size() <= 6 && name != "or_unprotected") small.push_back({name, in});
    auto r = verify::check_equivalence(small, 10'000'000);
    EXPECT_TRUE(r.ok);
    EXPECT_GE(r.solvable, 3u);
    EXPECT_GE(r.unsolvable, 3u);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.ncl, man[row.name]["solvable"].get<bool>()) << row.name;
        EXPECT_TRUE(row.lifted) << row.name << ": " << row.message;
        EXPECT_LE(row.rh_states, 10'000'000u);
    }
}

TEST(Equivalence, ReportsAsSortedJson) {
    verify::RectangleReport r;
    r.ok = true;
    auto j = verify::to_json(r);
    EXPECT_LT(j.find("\"counterexample\""), j.find("\"ok\""));
    EXPECT_TRUE(nlohmann::json::accept(j));
}
