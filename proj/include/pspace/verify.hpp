#pragma once
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pspace/gadgets.hpp"
#include "pspace/ncl.hpp"
#include "pspace/rush.hpp"
#include "pspace/subway.hpp"

namespace pspace::verify {

using gadget::GadgetKind;
using gadget::HarnessSpec;

// ---- gadget contracts ----

// Abstract state of a harness, one small integer per field:
//   And / ProtectedOr: lock, port0, port1, port2
//   EdgeBlue / EdgeRed: lock, port1, port2, edge, far
//   Win: near, far, edge, win
// lock is the vertex state (And 0 = blue locked, 1 = reds locked; Or 1..5),
// ports are 1 when pointing in, edge is 0 toward the AND / near end,
// 1 partially turned, 2 toward the far end; near/far are 1 when that end
// holds the edge locked; win is the win cycle's phase.
using Abstract = std::vector<int8_t>;
std::vector<std::string> abstract_fields(GadgetKind k);
std::string describe(GadgetKind k, const Abstract& a);

struct Relation {
    std::set<Abstract> states;
    std::set<std::pair<Abstract, Abstract>> steps;  // undirected, stored with first < second
    std::set<Abstract> wins;                        // one excursion away from the special reaching the target
    bool operator==(const Relation&) const = default;
};

// The gadget's intended behaviour, from lock rules alone. False when the
// boundary contradicts the rules (e.g. an AND with nothing holding it up).
bool boundary_consistent(const HarnessSpec& spec);
Relation model_relation(const HarnessSpec& spec);

// Exhaustive exploration of a built harness. A rest state has the bubble on
// the access path; everything else is an excursion. Rest states joined by
// an excursion component become one abstract step.
struct Exploration {
    Relation rel;
    size_t states = 0, rest_states = 0, components = 0;
    // leakage findings (empty = clean)
    std::vector<std::string> leaks;
};
Exploration explore_harness(const gadget::Harness& h, size_t budget);

// Every port boundary (free/pinned x in/out), tree flag and, for Win, both
// target senses.
std::vector<HarnessSpec> all_boundaries(GadgetKind k);

struct ContractReport {
    GadgetKind kind = GadgetKind::And;
    bool ok = false;
    size_t boundaries = 0, rejected = 0;  // rejected: inconsistent and refused by the builder
    size_t max_states = 0;
    // core projection, union over boundaries: the lock (vertex kinds), the
    // edge position (edges) or the win phase (Win)
    size_t core_states = 0, core_steps = 0;
    std::string counterexample;
    double wall_ms = 0;
};
ContractReport check_gadget_contract(GadgetKind kind, size_t budget = 1'000'000);

struct LeakageReport {
    GadgetKind kind = GadgetKind::And;
    bool ok = false;
    size_t boundaries = 0, excursions = 0, partial_rest_states = 0;
    std::string counterexample;
    double wall_ms = 0;
};
LeakageReport check_leakage(GadgetKind kind, size_t budget = 1'000'000);

// ---- reversibility ----
using NclApply = std::function<ncl::State(const ncl::Instance&, const ncl::State&, int)>;
using SsApply = std::function<subway::State(const subway::Instance&, const subway::State&, subway::Move)>;
using RushApply = std::function<void(rush::State&, rush::Move)>;

struct ReversalReport {
    std::string engine;
    bool ok = false;
    size_t trials = 0, moves = 0;
    std::string counterexample;
};
// Random walks of up to `max_len` moves followed by their exact reversal.
ReversalReport check_reversibility(const std::vector<ncl::Instance>& pool, size_t trials, uint64_t seed,
                                   const NclApply& apply = ncl::apply_flip, int max_len = 40);
ReversalReport check_reversibility(const std::vector<std::pair<subway::Instance, subway::State>>& pool,
                                   size_t trials, uint64_t seed, const SsApply& apply = subway::apply_move,
                                   int max_len = 40);
ReversalReport check_reversibility(const std::vector<rush::State>& pool, size_t trials, uint64_t seed,
                                   const RushApply& apply = rush::apply_move_inplace, int max_len = 40);

// ---- bubble access ----

// Cells the single empty cell can ever reach. Before its first visit a
// cell still holds its starting car, so the bubble enters y from x exactly
// when y's starting car lies along x-y: plain reachability, no state search.
std::vector<uint8_t> bubble_region(const rush::State& s);
// Same set by exhaustive search over whole boards (small boards only).
std::vector<uint8_t> bubble_region_bfs(const rush::State& s, size_t budget);

// unit cars everywhere but one empty cell, no fixed cells
rush::State random_bubble_board(uint64_t seed, int max_side);
// cars of length 1..3, some fixed cells, several empty cells
rush::State random_rush_board(uint64_t seed, int max_side);
// ring of n blue edges oriented round the cycle plus random chords; not
// planar in general, only for exercising the move engine
ncl::Instance random_ncl(uint64_t seed, int n);

struct RectangleReport {
    bool ok = false;
    size_t samples = 0, full_boards = 0;
    std::string counterexample;
};
RectangleReport check_bubble_rectangle(size_t samples, int nmax, uint64_t seed);

// ---- end-to-end ----
struct EquivalenceRow {
    std::string name;
    bool ncl = false, ss = false, rh = false;
    size_t ncl_states = 0, ss_states = 0, rh_states = 0;
    bool lifted = false;  // witnesses project to legal moves one level down
    bool budget_exceeded = false;
    std::string message;
};
struct EquivalenceReport {
    bool ok = false;
    size_t solvable = 0, unsolvable = 0;
    std::vector<EquivalenceRow> rows;
};
EquivalenceRow check_equivalence_one(const std::string& name, const ncl::Instance& in, size_t budget);
EquivalenceReport check_equivalence(const std::vector<std::pair<std::string, ncl::Instance>>& suite,
                                    size_t budget);

// ---- JSON ----
std::string to_json(const ContractReport& r);
std::string to_json(const LeakageReport& r);
std::string to_json(const ReversalReport& r);
std::string to_json(const RectangleReport& r);
std::string to_json(const EquivalenceReport& r);

}  // namespace pspace::verify
