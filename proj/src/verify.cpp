#include "pspace/verify.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "json.hpp"
#include "pspace/grid.hpp"
#include "pspace/search.hpp"
#include "pspace/solve.hpp"

namespace pspace::verify {

using gadget::Harness;
using gadget::PortBoundary;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

bool is_vertex_kind(GadgetKind k) { return k == GadgetKind::And || k == GadgetKind::ProtectedOr; }
bool is_edge_kind(GadgetKind k) { return k == GadgetKind::EdgeBlue || k == GadgetKind::EdgeRed; }

// edge positions
constexpr int8_t AtNear = 0, Partial = 1, AtFar = 2;

// ports held by a vertex in lock state `lock`
std::vector<int> lockset(bool is_and, int blue_port, int lock) {
    if (is_and) {
        if (lock == 0) return {blue_port};
        std::vector<int> r;
        for (int k = 0; k < 3; ++k)
            if (k != blue_port) r.push_back(k);
        return r;
    }
    static const std::vector<int> orl[6] = {{}, {0}, {0, 1}, {1}, {1, 2}, {2}};
    return orl[lock];
}

bool all_in(const std::vector<int>& ports, const bool in[3]) {
    for (int k : ports)
        if (!in[k]) return false;
    return true;
}
bool holds(const std::vector<int>& ports, int k) { return std::find(ports.begin(), ports.end(), k) != ports.end(); }

// lock-state moves of a vertex given which ports point in
std::vector<int> lock_moves(bool is_and, int blue_port, int lock, const bool in[3]) {
    std::vector<int> r;
    if (is_and) {
        if (in[0] && in[1] && in[2]) r.push_back(lock ^ 1);
        return r;
    }
    for (int n : {lock - 1, lock + 1}) {
        if (n < 1 || n > 5) continue;
        auto a = lockset(false, blue_port, lock), b = lockset(false, blue_port, n);
        if (all_in(a, in) && all_in(b, in)) r.push_back(n);
    }
    return r;
}

int initial_lock(bool is_and, int blue_port, const bool in[3]) {
    if (is_and) return in[blue_port] ? 0 : 1;
    return in[0] ? 1 : in[1] ? 3 : 5;
}

struct Model {
    HarnessSpec spec;
    Abstract init;

    std::vector<Abstract> next(const Abstract& a) const {
        std::vector<Abstract> out;
        auto with = [&](int f, int v) {
            Abstract b = a;
            b[f] = int8_t(v);
            out.push_back(b);
        };
        const auto& P = spec.ports;
        switch (spec.kind) {
            case GadgetKind::And:
            case GadgetKind::ProtectedOr: {
                bool is_and = spec.kind == GadgetKind::And;
                bool in[3] = {a[1] != 0, a[2] != 0, a[3] != 0};
                auto held = lockset(is_and, 0, a[0]);
                for (int k = 0; k < 3; ++k)
                    if (P[k].free && (!in[k] || !holds(held, k))) with(1 + k, !in[k]);
                for (int n : lock_moves(is_and, 0, a[0], in)) with(0, n);
                break;
            }
            case GadgetKind::EdgeBlue:
            case GadgetKind::EdgeRed: {
                int bp = spec.kind == GadgetKind::EdgeBlue ? 0 : 1;
                bool in[3] = {a[3] == AtNear, a[1] != 0, a[2] != 0};
                auto held = lockset(true, bp, a[0]);
                for (int k = 1; k < 3; ++k)
                    if (P[k - 1].free && (!in[k] || !holds(held, k))) with(k, !in[k]);
                for (int n : lock_moves(true, bp, a[0], in)) with(0, n);
                if (a[3] == AtNear && !holds(held, 0)) with(3, Partial);
                if (a[3] == Partial) with(3, AtNear), with(3, AtFar);
                if (a[3] == AtFar && !a[4]) with(3, Partial);
                if (P[2].free && a[3] == AtFar) with(4, !a[4]);
                break;
            }
            case GadgetKind::Win: {
                int8_t D = spec.needs_flip ? AtFar : AtNear;
                bool may_leave_D = a[3] == 0;
                if (P[0].free && a[2] == AtNear) with(0, !a[0]);
                if (P[1].free && a[2] == AtFar) with(1, !a[1]);
                if (a[2] == AtNear && !a[0] && (D != AtNear || may_leave_D)) with(2, Partial);
                if (a[2] == Partial) with(2, AtNear), with(2, AtFar);
                if (a[2] == AtFar && !a[1] && (D != AtFar || may_leave_D)) with(2, Partial);
                if (a[2] == D) with(3, !a[3]);
                break;
            }
        }
        return out;
    }
    // the win cycle is free to turn, and turning it walks the special home
    bool win(const Abstract& a) const {
        return spec.kind == GadgetKind::Win && a[2] == (spec.needs_flip ? AtFar : AtNear);
    }
};

Model make_model(const HarnessSpec& spec) {
    Model m{spec, {}};
    const auto& P = spec.ports;
    switch (spec.kind) {
        case GadgetKind::And:
        case GadgetKind::ProtectedOr: {
            bool in[3] = {P[0].in, P[1].in, P[2].in};
            m.init = {int8_t(initial_lock(spec.kind == GadgetKind::And, 0, in)), in[0], in[1], in[2]};
            break;
        }
        case GadgetKind::EdgeBlue:
        case GadgetKind::EdgeRed: {
            int bp = spec.kind == GadgetKind::EdgeBlue ? 0 : 1;
            bool in[3] = {true, P[0].in, P[1].in};
            m.init = {int8_t(initial_lock(true, bp, in)), in[1], in[2], AtNear, P[2].in};
            break;
        }
        case GadgetKind::Win:
            m.init = {P[0].in, P[1].in, AtNear, 0};
            break;
    }
    return m;
}

std::pair<Abstract, Abstract> ordered(const Abstract& a, const Abstract& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

// cycle phases of a state, plus where the special token sits when it
// matters (elsewhere it is a plain token on the access path)
std::vector<int> configuration(const Harness& h, const subway::State& s) {
    std::vector<int> r;
    for (int y = 0; y < int(h.compiled.trace.cycles.size()); ++y) r.push_back(gadget::cycle_phase(h.compiled, s, y));
    r.push_back(h.spec.kind == GadgetKind::Win ? s.special : -1);
    return r;
}

Abstract project(const Harness& h, const subway::State& s) {
    const auto& c = h.compiled;
    auto ph = [&](int k) { return int8_t(gadget::cycle_phase(c, s, h.stub_cycle[k])); };
    auto pos = [&]() -> int8_t {
        switch (gadget::edge_direction(c, s, h.edge)) {
            case gadget::EdgeDir::TowardU: return AtNear;
            case gadget::EdgeDir::TowardW: return AtFar;
            default: return Partial;
        }
    };
    switch (h.spec.kind) {
        case GadgetKind::And:
        case GadgetKind::ProtectedOr:
            return {int8_t(gadget::vertex_state(c, s, h.vertex)), int8_t(!ph(0)), int8_t(!ph(1)), int8_t(!ph(2))};
        case GadgetKind::EdgeBlue:
        case GadgetKind::EdgeRed:
            return {int8_t(gadget::vertex_state(c, s, h.vertex)), int8_t(!ph(0)), int8_t(!ph(1)), pos(), ph(2)};
        case GadgetKind::Win:
            return {ph(0), ph(1), pos(), int8_t(gadget::cycle_phase(c, s, c.trace.win.cycle))};
    }
    return {};
}

int core_field(GadgetKind k) { return is_vertex_kind(k) ? 0 : 3; }

struct Dsu {
    std::vector<uint32_t> p;
    explicit Dsu(size_t n) : p(n) { std::iota(p.begin(), p.end(), 0u); }
    uint32_t find(uint32_t x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void unite(uint32_t a, uint32_t b) { p[find(a)] = find(b); }
};

}  // namespace

std::vector<std::string> abstract_fields(GadgetKind k) {
    switch (k) {
        case GadgetKind::And:
        case GadgetKind::ProtectedOr: return {"lock", "port0", "port1", "port2"};
        case GadgetKind::EdgeBlue:
        case GadgetKind::EdgeRed: return {"lock", "port1", "port2", "edge", "far"};
        case GadgetKind::Win: return {"near", "far", "edge", "win"};
    }
    return {};
}

std::string describe(GadgetKind k, const Abstract& a) {
    auto f = abstract_fields(k);
    std::ostringstream os;
    os << '{';
    for (size_t i = 0; i < a.size() && i < f.size(); ++i) os << (i ? " " : "") << f[i] << '=' << int(a[i]);
    os << '}';
    return os.str();
}

bool boundary_consistent(const HarnessSpec& spec) {
    if (spec.ports.size() != gadget::harness_ports(spec.kind)) return false;
    const auto& P = spec.ports;
    switch (spec.kind) {
        // weight >= 2: the blue edge, or both reds
        case GadgetKind::And: return P[0].in || (P[1].in && P[2].in);
        case GadgetKind::ProtectedOr: return P[0].in || P[1].in || P[2].in;
        // the edge starts pointing at the AND, so the far end holds nothing
        case GadgetKind::EdgeBlue: return !P[2].in;
        case GadgetKind::EdgeRed: return (P[0].in || P[1].in) && !P[2].in;
        case GadgetKind::Win: return !P[1].in;
    }
    return false;
}

Relation model_relation(const HarnessSpec& spec) {
    Model m = make_model(spec);
    Relation r;
    std::vector<Abstract> queue{m.init};
    r.states.insert(m.init);
    for (size_t i = 0; i < queue.size(); ++i) {
        Abstract a = queue[i];
        if (m.win(a)) r.wins.insert(a);
        for (const Abstract& b : m.next(a)) {
            r.steps.insert(ordered(a, b));
            if (r.states.insert(b).second) queue.push_back(b);
        }
    }
    return r;
}

Exploration explore_harness(const Harness& h, size_t budget) {
    const auto& c = h.compiled;
    solve::SubwayProblem p(c.instance, c.state);
    std::string init = p.initial();
    solve::KeyStore seen(init.size());
    seen.insert(init);
    std::vector<std::pair<uint32_t, uint32_t>> moves;
    std::vector<uint8_t> won;
    std::string buf;
    for (size_t head = 0; head < seen.size(); ++head) {
        buf.assign(seen.key(uint32_t(head)));
        won.push_back(p.won(buf));
        if (won.back()) continue;  // the game is over there
        p.expand(buf, [&](std::string_view k, uint32_t) {
            auto [id, fresh] = seen.insert(k);
            if (fresh && seen.size() > budget) throw solve::BudgetExceeded("harness state budget exceeded");
            moves.push_back({uint32_t(head), id});
        });
    }

    Exploration ex;
    const size_t N = seen.size();
    ex.states = N;
    std::vector<uint8_t> rest(N, 0);
    std::vector<Abstract> abs(N);
    std::vector<std::vector<int>> conf(N);
    std::map<std::vector<int>, uint32_t> rest_by_conf;  // with the bubble's vertex appended
    for (uint32_t i = 0; i < N; ++i) {
        subway::State s = p.decode(seen.key(i));
        conf[i] = configuration(h, s);
        if (won[i] || !gadget::at_rest(c, s)) continue;
        rest[i] = 1;
        ++ex.rest_states;
        abs[i] = project(h, s);
        ex.rel.states.insert(abs[i]);
        auto key = conf[i];
        key.push_back(p.empty_vertex(seen.key(i), 0));
        key.push_back(p.empty_vertex(seen.key(i), 1));
        auto [it, fresh] = rest_by_conf.emplace(key, i);
        if (!fresh && ex.leaks.size() < 8)
            ex.leaks.push_back("two rest states share phases and bubble: residue left behind at " +
                               describe(h.spec.kind, abs[i]));
    }

    Dsu dsu(N);
    for (auto [a, b] : moves)
        if (!rest[a] && !rest[b]) dsu.unite(a, b);
    std::map<uint32_t, std::set<uint32_t>> touching;  // component root -> rest states next to it
    std::set<uint32_t> roots;
    for (uint32_t i = 0; i < N; ++i)
        if (!rest[i]) roots.insert(dsu.find(i));
    for (auto [a, b] : moves) {
        if (rest[a] && rest[b]) {
            if (abs[a] != abs[b]) ex.rel.steps.insert(ordered(abs[a], abs[b]));
            if (conf[a] != conf[b] && ex.leaks.size() < 8)
                ex.leaks.push_back("a move along the access path changed a phase at " + describe(h.spec.kind, abs[a]));
            continue;
        }
        if (rest[a]) touching[dsu.find(b)].insert(a);
        if (rest[b]) touching[dsu.find(a)].insert(b);
    }
    std::set<uint32_t> winning;
    for (uint32_t i = 0; i < N; ++i)
        if (won[i]) winning.insert(dsu.find(i));
    ex.components = roots.size();

    for (auto& [root, ids] : touching) {
        std::set<Abstract> as;
        std::set<std::vector<int>> cs;
        for (uint32_t i : ids) as.insert(abs[i]), cs.insert(conf[i]);
        for (auto a = as.begin(); a != as.end(); ++a)
            for (auto b = std::next(a); b != as.end(); ++b) ex.rel.steps.insert({*a, *b});
        if (winning.count(root)) ex.rel.wins.insert(as.begin(), as.end());
        // an excursion may turn one cycle or nothing
        bool bad = cs.size() > 2;
        if (cs.size() == 2) {
            const auto &x = *cs.begin(), &y = *cs.rbegin();
            int diff = 0, turned = -1;
            for (size_t k = 0; k + 1 < x.size(); ++k)
                if (x[k] != y[k]) ++diff, turned = int(k);
            // the special rides on the win cycle
            bad = diff != 1 || (x.back() != y.back() && turned != c.trace.win.cycle);
        }
        if (bad && ex.leaks.size() < 8) {
            std::string m = "excursion joins " + std::to_string(cs.size()) + " configurations:";
            for (const auto& a : as) m += " " + describe(h.spec.kind, a);
            ex.leaks.push_back(m);
        }
    }
    return ex;
}

std::vector<HarnessSpec> all_boundaries(GadgetKind k) {
    std::vector<HarnessSpec> out;
    const int n = int(gadget::harness_ports(k));
    bool has_edge = !is_vertex_kind(k);
    for (int tree = 0; tree <= (has_edge ? 1 : 0); ++tree)
        for (int flip = 0; flip <= (k == GadgetKind::Win ? 1 : 0); ++flip)
            for (int mask = 0; mask < (1 << (2 * n)); ++mask) {
                HarnessSpec s;
                s.kind = k;
                s.tree = tree;
                s.needs_flip = flip;
                for (int j = 0; j < n; ++j) s.ports.push_back({bool(mask >> (2 * j) & 1), bool(mask >> (2 * j + 1) & 1)});
                out.push_back(s);
            }
    return out;
}

namespace {

std::string spec_name(const HarnessSpec& s) {
    std::string r = gadget::gadget_name(s.kind) + "[";
    for (size_t i = 0; i < s.ports.size(); ++i)
        r += std::string(i ? "," : "") + (s.ports[i].free ? "free-" : "pinned-") + (s.ports[i].in ? "in" : "out");
    r += "]";
    if (!is_vertex_kind(s.kind)) r += s.tree ? " tree" : "";
    if (s.kind == GadgetKind::Win) r += s.needs_flip ? " flip" : " keep";
    return r;
}

// first element in one relation but not the other
std::string relation_diff(GadgetKind k, const Relation& got, const Relation& want) {
    for (const auto& a : got.states)
        if (!want.states.count(a)) return "unexpected state " + describe(k, a);
    for (const auto& a : want.states)
        if (!got.states.count(a)) return "missing state " + describe(k, a);
    for (const auto& [a, b] : got.steps)
        if (!want.steps.count({a, b})) return "unexpected step " + describe(k, a) + " <-> " + describe(k, b);
    for (const auto& [a, b] : want.steps)
        if (!got.steps.count({a, b})) return "missing step " + describe(k, a) + " <-> " + describe(k, b);
    for (const auto& a : got.wins)
        if (!want.wins.count(a)) return "unexpected win from " + describe(k, a);
    for (const auto& a : want.wins)
        if (!got.wins.count(a)) return "missing win from " + describe(k, a);
    return "";
}

// Builds every boundary; calls f(spec, harness) for the consistent ones.
// Returns an error message or "".
template <class F>
std::string each_harness(GadgetKind kind, size_t& boundaries, size_t& rejected, F&& f) {
    for (const HarnessSpec& spec : all_boundaries(kind)) {
        ++boundaries;
        bool want = boundary_consistent(spec);
        std::optional<Harness> h;
        std::string err;
        try {
            h = gadget::build_harness(spec);
        } catch (const gadget::CompileError& e) {
            err = e.what();
        }
        if (!want) {
            if (h) return spec_name(spec) + ": builder accepted a boundary the lock rules forbid";
            ++rejected;
            continue;
        }
        if (!h) return spec_name(spec) + ": " + err;
        std::string m = f(spec, *h);
        if (!m.empty()) return spec_name(spec) + ": " + m;
    }
    return "";
}

}  // namespace

ContractReport check_gadget_contract(GadgetKind kind, size_t budget) {
    auto t0 = std::chrono::steady_clock::now();
    ContractReport r;
    r.kind = kind;
    std::set<int> core;
    std::set<std::pair<int, int>> core_steps;
    int cf = core_field(kind);
    r.counterexample = each_harness(kind, r.boundaries, r.rejected, [&](const HarnessSpec& spec, const Harness& h) {
        Exploration ex = explore_harness(h, budget);
        r.max_states = std::max(r.max_states, ex.states);
        Relation want = model_relation(spec);
        std::string d = relation_diff(kind, ex.rel, want);
        if (!d.empty()) return d;
        for (const auto& a : ex.rel.states) core.insert(a[cf]);
        for (const auto& [a, b] : ex.rel.steps)
            if (a[cf] != b[cf]) core_steps.insert({std::min(a[cf], b[cf]), std::max(a[cf], b[cf])});
        return std::string();
    });
    r.core_states = core.size();
    r.core_steps = core_steps.size();
    r.ok = r.counterexample.empty();
    r.wall_ms = ms_since(t0);
    return r;
}

LeakageReport check_leakage(GadgetKind kind, size_t budget) {
    auto t0 = std::chrono::steady_clock::now();
    LeakageReport r;
    r.kind = kind;
    size_t rejected = 0;
    r.counterexample = each_harness(kind, r.boundaries, rejected, [&](const HarnessSpec&, const Harness& h) {
        Exploration ex = explore_harness(h, budget);
        r.excursions += ex.components;
        if (h.edge >= 0)
            for (const auto& a : ex.rel.states) r.partial_rest_states += a[is_edge_kind(kind) ? 3 : 2] == Partial;
        return ex.leaks.empty() ? std::string() : ex.leaks.front();
    });
    r.ok = r.counterexample.empty();
    r.wall_ms = ms_since(t0);
    return r;
}

// ---- reversibility ----

namespace {

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
}

std::string join(const std::vector<std::string>& v) {
    std::string r;
    for (const auto& x : v) r += (r.empty() ? "" : " ") + x;
    return r;
}

// Runs `trials` walks; Walk(rng, trace) returns "" or a failure message.
template <class Walk>
ReversalReport run_trials(const std::string& engine, size_t trials, uint64_t seed, Walk&& walk) {
    ReversalReport r;
    r.engine = engine;
    std::mt19937_64 rng(seed);
    for (size_t t = 0; t < trials; ++t) {
        std::vector<std::string> trace;
        std::string err;
        try {
            err = walk(rng, trace);
        } catch (const std::exception& e) {
            err = std::string("apply threw: ") + e.what();
        }
        r.moves += trace.size();
        ++r.trials;
        if (!err.empty()) {
            r.counterexample = "trial " + std::to_string(t) + ": " + err + " after [" + join(trace) + "]";
            return r;
        }
    }
    r.ok = true;
    return r;
}

int walk_length(std::mt19937_64& rng, int max_len) { return std::uniform_int_distribution<int>(0, max_len)(rng); }

}  // namespace

ReversalReport check_reversibility(const std::vector<ncl::Instance>& pool, size_t trials, uint64_t seed,
                                   const NclApply& apply, int max_len) {
    return run_trials("ncl", trials, seed, [&](std::mt19937_64& rng, std::vector<std::string>& trace) {
        const ncl::Instance& in = pick(rng, pool);
        const ncl::State s0 = ncl::initial_state(in);
        ncl::State s = s0;
        std::vector<int> done;
        for (int n = walk_length(rng, max_len); n > 0; --n) {
            auto moves = ncl::legal_flips(in, s);
            if (moves.empty()) break;
            int e = pick(rng, moves);
            ncl::State t = apply(in, s, e);
            trace.push_back(in.edges[e].id);
            if (t == s) return std::string("flip changed nothing");
            s = t;
            done.push_back(e);
        }
        for (auto it = done.rbegin(); it != done.rend(); ++it) {
            auto moves = ncl::legal_flips(in, s);
            if (std::find(moves.begin(), moves.end(), *it) == moves.end())
                return "undoing " + in.edges[*it].id + " is illegal";
            s = apply(in, s, *it);
        }
        return s == s0 ? std::string() : std::string("reversal did not restore the start");
    });
}

ReversalReport check_reversibility(const std::vector<std::pair<subway::Instance, subway::State>>& pool,
                                   size_t trials, uint64_t seed, const SsApply& apply, int max_len) {
    return run_trials("subway", trials, seed, [&](std::mt19937_64& rng, std::vector<std::string>& trace) {
        const auto& [in, s0] = pick(rng, pool);
        subway::State s = s0;
        std::vector<subway::Move> done;
        for (int n = walk_length(rng, max_len); n > 0; --n) {
            auto moves = subway::legal_moves(in, s);
            if (moves.empty()) break;
            subway::Move m = pick(rng, moves);
            trace.push_back(in.edges[m.edge].id + ":" + in.vertex_ids[m.from]);
            subway::State t = apply(in, s, m);
            if (t == s) return std::string("move changed nothing");
            s = t;
            done.push_back(m);
        }
        for (auto it = done.rbegin(); it != done.rend(); ++it) {
            subway::Move back{it->edge, in.other(it->edge, it->from)};
            auto moves = subway::legal_moves(in, s);
            if (std::find(moves.begin(), moves.end(), back) == moves.end())
                return "undoing " + in.edges[back.edge].id + " is illegal";
            s = apply(in, s, back);
        }
        return s == s0 ? std::string() : std::string("reversal did not restore the start");
    });
}

ReversalReport check_reversibility(const std::vector<rush::State>& pool, size_t trials, uint64_t seed,
                                   const RushApply& apply, int max_len) {
    return run_trials("rush", trials, seed, [&](std::mt19937_64& rng, std::vector<std::string>& trace) {
        const rush::State& s0 = pick(rng, pool);
        rush::State s = s0;
        std::vector<rush::Move> done;
        for (int n = walk_length(rng, max_len); n > 0; --n) {
            auto moves = rush::legal_moves(s);
            if (moves.empty()) break;
            rush::Move m = pick(rng, moves);
            trace.push_back(rush::move_notation(s, m));
            rush::State before = s;
            apply(s, m);
            if (s == before) return std::string("move changed nothing");
            done.push_back(m);
        }
        for (auto it = done.rbegin(); it != done.rend(); ++it) {
            rush::Move back{it->car, -it->delta};
            auto moves = rush::legal_moves(s);
            if (std::find(moves.begin(), moves.end(), back) == moves.end())
                return "undoing " + rush::move_notation(s, back) + " is illegal";
            apply(s, back);
        }
        return s == s0 ? std::string() : std::string("reversal did not restore the start");
    });
}

// ---- bubble access ----

std::vector<uint8_t> bubble_region(const rush::State& s) {
    const rush::Board& b = s.board;
    const int W = b.width, H = b.height;
    auto occ = rush::occupancy(s);
    std::vector<uint8_t> seen(size_t(W) * H, 0);
    std::vector<int> q;
    for (int i = 0; i < W * H; ++i)
        if (occ[i] == -1) seen[i] = 1, q.push_back(i);
    for (size_t k = 0; k < q.size(); ++k) {
        int x = q[k], r = x / W, c = x % W;
        const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
            int rr = r + dr[d], cc = c + dc[d];
            if (rr < 0 || cc < 0 || rr >= H || cc >= W) continue;
            int y = rr * W + cc;
            if (seen[y] || occ[y] < 0) continue;
            bool vert = s.cars[occ[y]].orient == rush::Orientation::Vertical;
            if (vert != (d < 2)) continue;
            seen[y] = 1;
            q.push_back(y);
        }
    }
    return seen;
}

std::vector<uint8_t> bubble_region_bfs(const rush::State& s, size_t budget) {
    solve::RushProblem p(s);
    std::vector<uint8_t> seen(size_t(s.board.width) * s.board.height, 0);
    solve::explore(p, budget, [&](uint32_t, std::string_view k) {
        for (int i = 0; i < p.num_empty(); ++i) seen[p.empty_cell(k, i)] = 1;
    });
    return seen;
}

rush::State random_bubble_board(uint64_t seed, int max_side) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> side(1, max_side);
    int W = side(rng), H = side(rng);
    if (W * H < 2) W = 2;
    rush::State s;
    s.board = rush::Board(W, H);
    int hole = std::uniform_int_distribution<int>(0, W * H - 1)(rng);
    for (int i = 0; i < W * H; ++i) {
        if (i == hole) continue;
        rush::Car c;
        c.anchor = {i / W, i % W};
        c.orient = rng() & 1 ? rush::Orientation::Vertical : rush::Orientation::Horizontal;
        s.cars.push_back(c);
    }
    s.special = 0;
    return s;
}

rush::State random_rush_board(uint64_t seed, int max_side) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> side(2, max_side);
    std::uniform_real_distribution<double> u(0, 1);
    int W = side(rng), H = side(rng);
    rush::State s;
    s.board = rush::Board(W, H);
    std::vector<uint8_t> used(size_t(W) * H, 0);
    for (int i = 0; i < W * H; ++i) {
        if (used[i]) continue;
        double x = u(rng);
        if (x < 0.08) {
            s.board.fixed[i] = 1;
            used[i] = 1;
            continue;
        }
        if (x < 0.3) continue;  // empty
        rush::Car c;
        c.anchor = {i / W, i % W};
        c.orient = rng() & 1 ? rush::Orientation::Vertical : rush::Orientation::Horizontal;
        c.length = 1 + int(rng() % 3);
        while (c.length > 1) {
            bool fits = true;
            for (int k = 0; k < c.length; ++k) {
                rush::Cell q = c.cell(k);
                fits = fits && s.board.in_bounds(q) && !used[s.board.idx(q)];
            }
            if (fits) break;
            --c.length;
        }
        for (int k = 0; k < c.length; ++k) used[s.board.idx(c.cell(k))] = 1;
        s.cars.push_back(c);
    }
    if (s.cars.empty()) {
        for (int i = 0; i < W * H; ++i) s.board.fixed[i] = 0;
        s.cars.push_back({{0, 0}, 1, rush::Orientation::Horizontal});
    }
    s.special = 0;
    return s;
}

ncl::Instance random_ncl(uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    ncl::Instance in;
    for (int v = 0; v < n; ++v) in.vertices.push_back({"v" + std::to_string(v), ncl::Kind::Or, {-1, -1}});
    for (int v = 0; v < n; ++v)
        in.edges.push_back({"r" + std::to_string(v), v, (v + 1) % n, ncl::Color::Blue});
    std::vector<int> free(n);
    std::iota(free.begin(), free.end(), 0);
    std::shuffle(free.begin(), free.end(), rng);
    for (size_t i = 0; i + 1 < free.size(); i += 2) {
        int a = free[i], b = free[i + 1];
        if ((a + 1) % n == b || (b + 1) % n == a) continue;
        ncl::Color col = rng() & 1 ? ncl::Color::Red : ncl::Color::Blue;
        if (rng() & 1) std::swap(a, b);
        in.edges.push_back({"c" + std::to_string(i / 2), a, b, col});
    }
    in.rotation.assign(n, {});
    for (int e = 0; e < int(in.edges.size()); ++e) {
        in.rotation[in.edges[e].tail].push_back(e);
        in.rotation[in.edges[e].head].push_back(e);
    }
    in.target = 0;
    return in;
}

RectangleReport check_bubble_rectangle(size_t samples, int nmax, uint64_t seed) {
    RectangleReport r;
    std::mt19937_64 rng(seed);
    for (size_t t = 0; t < samples; ++t) {
        rush::State s = random_bubble_board(rng(), nmax);
        const int W = s.board.width, H = s.board.height;
        auto in = bubble_region(s);
        int r0 = H, r1 = -1, c0 = W, c1 = -1;
        for (int i = 0; i < W * H; ++i)
            if (in[i]) r0 = std::min(r0, i / W), r1 = std::max(r1, i / W), c0 = std::min(c0, i % W), c1 = std::max(c1, i % W);
        std::string why;
        for (int rr = r0; rr <= r1 && why.empty(); ++rr)
            for (int cc = c0; cc <= c1; ++cc)
                if (!in[rr * W + cc]) {
                    why = "cell (" + std::to_string(rr) + "," + std::to_string(cc) + ") inside the bounding box is unreachable";
                    break;
                }
        // a concave corner shows up as a 2x2 window with three reachable cells
        for (int rr = 0; rr + 1 < H && why.empty(); ++rr)
            for (int cc = 0; cc + 1 < W; ++cc) {
                int k = in[rr * W + cc] + in[rr * W + cc + 1] + in[(rr + 1) * W + cc] + in[(rr + 1) * W + cc + 1];
                if (k == 3) {
                    why = "concave corner at (" + std::to_string(rr) + "," + std::to_string(cc) + ")";
                    break;
                }
            }
        ++r.samples;
        r.full_boards += r0 == 0 && c0 == 0 && r1 == H - 1 && c1 == W - 1;
        if (!why.empty()) {
            r.counterexample = why + "\n" + rush::serialize(s);
            return r;
        }
    }
    r.ok = true;
    return r;
}

// ---- end-to-end ----

namespace {

std::optional<subway::Move> parse_ss_move(const subway::Instance& in, const std::string& note) {
    auto colon = note.find(':'), arrow = note.find("->");
    if (colon == std::string::npos || arrow == std::string::npos) return std::nullopt;
    int e = in.edge_index(note.substr(0, colon));
    int from = in.vertex_index(note.substr(colon + 1, arrow - colon - 1));
    if (e < 0 || from < 0) return std::nullopt;
    return subway::Move{e, from};
}

std::optional<rush::Move> parse_rush_move(const rush::State& s, const std::string& note) {
    int r = 0, c = 0;
    char d = 0;
    if (std::sscanf(note.c_str(), "(%d,%d)%c", &r, &c, &d) != 3) return std::nullopt;
    for (int i = 0; i < int(s.cars.size()); ++i) {
        const rush::Car& car = s.cars[i];
        for (int k = 0; k < car.length; ++k)
            if (car.cell(k) == rush::Cell{r, c}) return rush::Move{i, d == 'L' || d == 'U' ? -1 : 1};
    }
    return std::nullopt;
}

// Replays the subway witness; the NCL states seen at rest must follow legal
// flips and the last one must be won.
std::string lift_ss(const ncl::Instance& in, const gadget::Compiled& c, const std::vector<std::string>& sol) {
    subway::State s = c.state;
    std::optional<ncl::State> last = gadget::project_ncl(c, s);
    if (!last || *last != ncl::initial_state(in)) return "start does not project to the NCL start";
    for (const auto& note : sol) {
        auto m = parse_ss_move(c.instance, note);
        if (!m) return "unreadable move " + note;
        subway::apply_move_inplace(c.instance, s, *m);
        if (!gadget::at_rest(c, s)) continue;
        auto n = gadget::project_ncl(c, s);
        if (!n || *n == *last) continue;
        auto flips = ncl::legal_flips(in, *last);
        bool one = false;
        for (int e : flips) one = one || ncl::apply_flip(in, *last, e) == *n;
        if (!one) return "subway witness implies an illegal NCL step at " + note;
        last = n;
    }
    if (!subway::is_won(c.instance, s)) return "subway witness does not win";
    if (!ncl::is_won(in, *last)) return "subway win from an NCL state that is not won";
    return "";
}

// Replays the rush witness; boards seen at rest must follow legal subway moves.
std::string lift_rh(const gadget::Compiled& c, const grid::Emitted& e, const std::vector<std::string>& sol) {
    rush::State r = e.state;
    auto last = grid::project_rest(c.instance, e.map, r);
    if (!last || *last != c.state) return "start board does not project to the subway start";
    for (const auto& note : sol) {
        auto m = parse_rush_move(r, note);
        if (!m) return "unreadable move " + note;
        rush::apply_move_inplace(r, *m);
        auto n = grid::project_rest(c.instance, e.map, r);
        if (!n || *n == *last) continue;
        bool one = false;
        for (subway::Move mv : subway::legal_moves(c.instance, *last))
            one = one || subway::apply_move(c.instance, *last, mv) == *n;
        if (!one) return "rush witness implies an illegal subway step at " + note;
        last = n;
    }
    if (!rush::is_won(r)) return "rush witness does not win";
    return "";
}

}  // namespace

EquivalenceRow check_equivalence_one(const std::string& name, const ncl::Instance& in, size_t budget) {
    EquivalenceRow row;
    row.name = name;
    try {
        auto n = solve::solve_ncl(in, budget);
        gadget::Compiled c = gadget::compile_ncl_to_ss(in);
        auto ss = solve::solve_subway(c.instance, c.state, budget);
        grid::Emitted e = grid::compile_ss_to_rh(c.instance, c.state);
        auto rh = solve::solve_rush(e.state, budget);
        row.ncl = n.solvable, row.ss = ss.solvable, row.rh = rh.solvable;
        row.ncl_states = n.explored, row.ss_states = ss.explored, row.rh_states = rh.explored;
        row.budget_exceeded = n.budget_exceeded || ss.budget_exceeded || rh.budget_exceeded;
        if (row.budget_exceeded) {
            row.message = "budget exceeded";
            return row;
        }
        std::string m;
        if (ss.solvable) m = lift_ss(in, c, ss.solution);
        if (m.empty() && rh.solvable) m = lift_rh(c, e, rh.solution);
        row.lifted = m.empty();
        row.message = m;
        if (row.ncl != row.ss || row.ss != row.rh)
            row.message = "solvability differs: ncl " + std::to_string(row.ncl) + " subway " + std::to_string(row.ss) +
                          " rush " + std::to_string(row.rh);
    } catch (const std::exception& ex) {
        row.message = ex.what();
    }
    return row;
}

EquivalenceReport check_equivalence(const std::vector<std::pair<std::string, ncl::Instance>>& suite,
                                    size_t budget) {
    EquivalenceReport r;
    r.ok = true;
    for (const auto& [name, in] : suite) {
        EquivalenceRow row = check_equivalence_one(name, in, budget);
        bool good = row.message.empty() && row.lifted && row.ncl == row.ss && row.ss == row.rh;
        r.ok = r.ok && good;
        if (good) ++(row.ncl ? r.solvable : r.unsolvable);
        r.rows.push_back(row);
    }
    return r;
}

// ---- JSON ----

std::string to_json(const ContractReport& r) {
    nlohmann::json j = {{"gadget", gadget::gadget_name(r.kind)}, {"ok", r.ok},
                        {"boundaries", r.boundaries},           {"rejected_boundaries", r.rejected},
                        {"max_states", r.max_states},           {"core_states", r.core_states},
                        {"core_transitions", r.core_steps},     {"counterexample", r.counterexample},
                        {"wall_ms", r.wall_ms}};
    return j.dump();
}

std::string to_json(const LeakageReport& r) {
    nlohmann::json j = {{"gadget", gadget::gadget_name(r.kind)}, {"ok", r.ok},
                        {"boundaries", r.boundaries},           {"excursions", r.excursions},
                        {"partial_rest_states", r.partial_rest_states},
                        {"counterexample", r.counterexample},   {"wall_ms", r.wall_ms}};
    return j.dump();
}

std::string to_json(const ReversalReport& r) {
    nlohmann::json j = {{"engine", r.engine}, {"ok", r.ok}, {"trials", r.trials}, {"moves", r.moves},
                        {"counterexample", r.counterexample}};
    return j.dump();
}

std::string to_json(const RectangleReport& r) {
    nlohmann::json j = {{"ok", r.ok}, {"samples", r.samples}, {"whole_board", r.full_boards},
                        {"counterexample", r.counterexample}};
    return j.dump();
}

std::string to_json(const EquivalenceReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& x : r.rows)
        rows.push_back({{"name", x.name}, {"ncl", x.ncl}, {"subway", x.ss}, {"rush", x.rh},
                        {"ncl_states", x.ncl_states}, {"subway_states", x.ss_states}, {"rush_states", x.rh_states},
                        {"witness_lifted", x.lifted}, {"message", x.message}});
    nlohmann::json j = {{"ok", r.ok}, {"solvable", r.solvable}, {"unsolvable", r.unsolvable}, {"instances", rows}};
    return j.dump();
}

}  // namespace pspace::verify
