#include "pspace/grid.hpp"

#include "json.hpp"
#include "pspace/solve.hpp"

#include <algorithm>
#include <array>
#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/successive_shortest_path_nonnegative_weights.hpp>
#include <climits>
#include <cstdlib>
#include <functional>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace pspace::grid {

namespace {

int mod4(int x) { return ((x % 4) + 4) % 4; }

const int DR[4] = {0, -1, 0, 1};  // row delta per side (Up is row-1)
const int DC[4] = {1, 0, -1, 0};

bool vertical(int side) { return side == Up || side == Down; }

}  // namespace

WinPattern find_win_pattern(const subway::Instance& in, const subway::State& s) {
    WinPattern w;
    auto inc = in.incidence();
    w.t = in.target;
    if (s.token[w.t] != subway::NoToken) throw LayoutError("win pattern: target vertex must start empty");
    if (inc[w.t].size() != 1) throw LayoutError("win pattern: target vertex must have exactly one edge");
    w.e_ut = inc[w.t][0];
    if (in.edges[w.e_ut].color != subway::Purple) throw LayoutError("win pattern: target edge must be purple");
    w.u = in.other(w.e_ut, w.t);
    w.s0 = s.special;
    if (s.token[w.s0] != subway::Purple) throw LayoutError("win pattern: special token must be purple");
    for (int e : inc[w.u]) {
        if (e == w.e_ut || in.edges[e].color != subway::Purple) continue;
        if (w.e_pu >= 0) throw LayoutError("win pattern: target's neighbour has two other purple edges");
        w.e_pu = e;
    }
    if (w.e_pu < 0) throw LayoutError("win pattern: no purple edge into the target's neighbour");
    w.p = in.other(w.e_pu, w.u);
    for (int e : inc[w.p])
        if (e != w.e_pu && in.other(e, w.p) == w.s0 && in.edges[e].color == subway::Purple) w.e_s0p = e;
    if (w.e_s0p < 0) throw LayoutError("win pattern: special token is not one purple hop from the approach vertex");
    if (tail_of(in, s, w.e_s0p) != w.s0 || tail_of(in, s, w.e_pu) != w.p)
        throw LayoutError("win pattern: approach edges must point toward the target");
    int purple = 0;
    for (int e : inc[w.p]) purple += in.edges[e].color == subway::Purple;
    if (inc[w.p].size() > 3 || purple != 2) throw LayoutError("win pattern: approach vertex needs a free side");
    return w;
}

PortAssignment assign_ports(const subway::Instance& in, const WinPattern& w) {
    PortAssignment pa;
    int V = in.num_vertices();
    pa.side.assign(V, {});
    for (int v = 0; v < V; ++v) {
        if (v == w.t) continue;
        std::vector<int> es;
        for (int e : in.rotation[v])
            if (e != w.e_ut) es.push_back(e);
        int k = int(es.size());
        if (k > 4 || (k > 3 && v == w.p)) throw LayoutError("vertex " + in.vertex_ids[v] + " has too many edges");
        auto want_vertical = [&](int e) { return in.edges[e].color == subway::Orange || (v == w.p && e == w.e_pu); };
        bool found = false;
        int total = 1;
        for (int i = 0; i < k; ++i) total *= 4;
        for (int code = 0; code < total && !found; ++code) {
            std::vector<int> sd(k);
            for (int i = 0, c = code; i < k; ++i, c /= 4) sd[i] = c % 4;
            bool ok = true;
            for (int i = 0; i < k && ok; ++i) {
                if (vertical(sd[i]) != want_vertical(es[i])) ok = false;
                if (v == w.p && es[i] == w.e_s0p && sd[i] != Right) ok = false;
                // strictly increasing counter-clockwise from the first
                if (i > 0 && mod4(sd[i] - sd[0]) <= mod4(sd[i - 1] - sd[0])) ok = false;
            }
            if (!ok) continue;
            found = true;
            for (int i = 0; i < k; ++i) pa.side[v][es[i]] = sd[i];
        }
        if (!found) throw LayoutError("no side assignment keeps the rotation at " + in.vertex_ids[v]);
    }
    return pa;
}

namespace {

// ---- bend assignment: min-cost flow between faces ----

using FlowTraits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
using FlowGraph = boost::adjacency_list<
    boost::vecS, boost::vecS, boost::directedS, boost::no_property,
    boost::property<boost::edge_capacity_t, long,
                    boost::property<boost::edge_residual_capacity_t, long,
                                    boost::property<boost::edge_reverse_t, FlowTraits::edge_descriptor,
                                                    boost::property<boost::edge_weight_t, long>>>>>;

struct FlowNet {
    FlowGraph g;
    FlowNet(int n) : g(n) {}
    FlowTraits::edge_descriptor arc(int a, int b, long cap, long cost) {
        auto e = boost::add_edge(a, b, g).first;
        auto r = boost::add_edge(b, a, g).first;
        boost::put(boost::edge_capacity, g, e, cap);
        boost::put(boost::edge_capacity, g, r, 0);
        boost::put(boost::edge_weight, g, e, cost);
        boost::put(boost::edge_weight, g, r, -cost);
        boost::put(boost::edge_reverse, g, e, r);
        boost::put(boost::edge_reverse, g, r, e);
        return e;
    }
    long flow(FlowTraits::edge_descriptor e) const {
        return boost::get(boost::edge_capacity, g, e) - boost::get(boost::edge_residual_capacity, g, e);
    }
};

int bend_count(int n) { return n == 0 ? 2 : std::abs(n); }

}  // namespace


namespace {

// Orthogonal graph: every edge is a straight unit-direction segment.
struct HEdge {
    int a, b, dir, origin;  // origin: instance edge, -1 box, -2 refinement
};

struct HGraph {
    std::vector<std::array<int, 4>> port;
    std::vector<HEdge> edges;

    int add_vertex() {
        port.push_back({-1, -1, -1, -1});
        return int(port.size()) - 1;
    }
    int add_edge(int a, int b, int dir, int origin) {
        if (port[a][dir] >= 0 || port[b][mod4(dir + 2)] >= 0) throw LayoutError("port clash while drawing");
        edges.push_back({a, b, dir, origin});
        int id = int(edges.size()) - 1;
        port[a][dir] = id;
        port[b][mod4(dir + 2)] = id;
        return id;
    }
    // x splits edge id; returns x
    int split(int id) {
        HEdge e = edges[id];
        int x = add_vertex();
        port[e.b][mod4(e.dir + 2)] = -1;
        edges[id].b = x;
        port[x][mod4(e.dir + 2)] = id;
        add_edge(x, e.b, e.dir, e.origin);
        return x;
    }
    int head(int id, int from) const { return edges[id].a == from ? edges[id].b : edges[id].a; }
    int heading(int id, int from) const { return edges[id].a == from ? edges[id].dir : mod4(edges[id].dir + 2); }

    struct Step {
        int edge, from, turn;  // turn at the head
    };
    std::vector<std::vector<Step>> faces() const {
        std::set<std::pair<int, int>> seen;
        std::vector<std::vector<Step>> out;
        for (int id = 0; id < int(edges.size()); ++id)
            for (int from : {edges[id].a, edges[id].b}) {
                if (seen.count({id, from})) continue;
                std::vector<Step> f;
                int e = id, u = from;
                while (!seen.count({e, u})) {
                    seen.insert({e, u});
                    int w = head(e, u);
                    int q = mod4(heading(e, u) + 2);
                    int k = 1;
                    while (port[w][mod4(q + k)] < 0) ++k;
                    f.push_back({e, u, k - 2});
                    e = port[w][mod4(q + k)];
                    u = w;
                }
                out.push_back(std::move(f));
            }
        return out;
    }
};

// Splits faces until every inner face is a rectangle.
void refine(HGraph& h) {
    for (;;) {
        auto fs = h.faces();
        bool changed = false;
        int outer = 0;
        for (auto& f : fs) {
            int sum = 0;
            for (auto& st : f) sum += st.turn;
            outer += sum == 4;
        }
        if (outer != 1) throw LayoutError("expected one outer face");
        for (auto& f : fs) {
            int sum = 0;
            for (auto& st : f) sum += st.turn;
            if (sum == 4) continue;
            if (sum != -4) throw LayoutError("face turning is not a full turn");
            int m = int(f.size());
            for (int i = 0; i < m && !changed; ++i) {
                if (f[i].turn <= 0) continue;
                int need = f[i].turn + 1, got = 0, j = i;
                bool bad = false;
                for (int step = 1; step < m && got < need; ++step) {
                    j = (i + step) % m;
                    if (f[j].turn > 0) {
                        bad = true;
                        break;
                    }
                    if (f[j].turn < 0) ++got;
                }
                if (bad || got < need) continue;
                const auto& front = f[(j + 1) % m];
                int r = h.head(f[i].edge, f[i].from);
                int hd = h.heading(f[i].edge, f[i].from);
                if (h.heading(front.edge, front.from) != mod4(hd - 1)) throw LayoutError("refinement lost its bearing");
                int x = h.split(front.edge);
                h.add_edge(r, x, hd, -2);
                changed = true;
            }
            if (changed) break;
        }
        if (!changed) return;
    }
}

struct Coords {
    std::vector<int> x, y;
};

Coords compact(const HGraph& h) {
    int n = int(h.port.size());
    std::vector<int> cx(n), cy(n);
    std::iota(cx.begin(), cx.end(), 0);
    std::iota(cy.begin(), cy.end(), 0);
    std::function<int(std::vector<int>&, int)> find = [&](std::vector<int>& p, int a) {
        while (p[a] != a) a = p[a] = p[p[a]];
        return a;
    };
    for (auto& e : h.edges) {
        if (vertical(e.dir)) cx[find(cx, e.a)] = find(cx, e.b);
        else cy[find(cy, e.a)] = find(cy, e.b);
    }
    auto solve = [&](std::vector<int>& cls, bool horiz) {
        std::vector<std::vector<int>> succ(n);
        std::vector<int> indeg(n, 0);
        for (auto& e : h.edges) {
            if (vertical(e.dir) == horiz) continue;
            int a = find(cls, e.a), b = find(cls, e.b);
            // Right and Up increase the coordinate
            if (e.dir == Left || e.dir == Down) std::swap(a, b);
            succ[a].push_back(b);
            ++indeg[b];
        }
        std::vector<int> val(n, 0), q;
        for (int v = 0; v < n; ++v)
            if (find(cls, v) == v && indeg[v] == 0) q.push_back(v);
        size_t done = 0;
        for (size_t i = 0; i < q.size(); ++i, ++done)
            for (int b : succ[q[i]]) {
                val[b] = std::max(val[b], val[q[i]] + 1);
                if (--indeg[b] == 0) q.push_back(b);
            }
        size_t classes = 0;
        for (int v = 0; v < n; ++v) classes += find(cls, v) == v;
        if (done != classes) throw LayoutError("compaction constraints are cyclic");
        std::vector<int> out(n);
        for (int v = 0; v < n; ++v) out[v] = val[find(cls, v)];
        return out;
    };
    return {solve(cx, true), solve(cy, false)};
}

}  // namespace

namespace {

// Drops rows (then columns) that hold only fixed cells and straight
// pass-through corridor cells, as long as nothing unrelated becomes adjacent.
void squeeze(GridLayout& g) {
    for (bool again = true; again;) {
        again = false;
        for (int axis = 0; axis < 2; ++axis) {
            int lines = axis == 0 ? g.height : g.width, span = axis == 0 ? g.width : g.height;
            // kind: 0 fixed, 1 taken, 2 straight along the removal axis
            std::vector<int> kind(size_t(g.width) * g.height, 0);
            auto at = [&](int line, int pos) -> int& {
                return axis == 0 ? kind[size_t(line) * g.width + pos] : kind[size_t(pos) * g.width + line];
            };
            auto lin = [&](const rush::Cell& c) { return axis == 0 ? c.row : c.col; };
            auto pos = [&](const rush::Cell& c) { return axis == 0 ? c.col : c.row; };
            for (auto& c : g.vertex_cell)
                if (c.row >= 0) at(lin(c), pos(c)) = 1;
            for (auto& cs : g.path)
                for (size_t i = 1; i + 1 < cs.size(); ++i) {
                    bool straight = pos(cs[i - 1]) == pos(cs[i]) && pos(cs[i + 1]) == pos(cs[i]);
                    at(lin(cs[i]), pos(cs[i])) = straight ? 2 : 1;
                }
            for (int l = 0; l < lines; ++l) {
                bool ok = true;
                for (int q = 0; q < span && ok; ++q) {
                    int k = at(l, q);
                    if (k == 1) ok = false;
                    if (k == 0 && l > 0 && l + 1 < lines && at(l - 1, q) != 0 && at(l + 1, q) != 0) ok = false;
                }
                if (!ok) continue;
                auto shift = [&](rush::Cell& c) {
                    int& x = axis == 0 ? c.row : c.col;
                    if (x > l) --x;
                };
                for (auto& c : g.vertex_cell)
                    if (c.row >= 0) shift(c);
                for (auto& cs : g.path) {
                    std::vector<rush::Cell> keep;
                    for (auto c : cs)
                        if (lin(c) != l) {
                            shift(c);
                            keep.push_back(c);
                        }
                    cs = std::move(keep);
                }
                (axis == 0 ? g.height : g.width) -= 1;
                again = true;
                break;
            }
        }
    }
}

}  // namespace

GridLayout orthogonal_layout(const subway::Instance& in, const PortAssignment& ports, const WinPattern& w) {
    const int V = in.num_vertices();
    // layout graph: everything but the target
    std::vector<int> lg;  // layout edge -> instance edge
    for (int e = 0; e < int(in.edges.size()); ++e)
        if (e != w.e_ut) lg.push_back(e);
    const int LE = int(lg.size());
    std::vector<int> lg_of(in.edges.size(), -1);
    for (int i = 0; i < LE; ++i) lg_of[lg[i]] = i;
    Embedding emb;
    emb.rotation.assign(V, {});
    for (int i = 0; i < LE; ++i) emb.ends.push_back({in.edges[lg[i]].tail, in.edges[lg[i]].head});
    for (int v = 0; v < V; ++v)
        for (int e : in.rotation[v])
            if (e != w.e_ut) emb.rotation[v].push_back(lg_of[e]);
    auto side = [&](int v, int le) { return ports.side[v].at(lg[le]); };

    auto faces = emb.faces();
    const int F = int(faces.size());
    std::vector<int> face_of(2 * LE);
    auto dcode = [&](Dart d) { return 2 * d.edge + (emb.ends[d.edge].first == d.from ? 0 : 1); };
    for (int f = 0; f < F; ++f)
        for (auto d : faces[f]) face_of[dcode(d)] = f;

    // outer face: the corner at p that spans its free left side
    int outer = -1;
    {
        const auto& rot = emb.rotation[w.p];
        for (size_t i = 0; i < rot.size(); ++i) {
            int e = rot[i], e2 = rot[(i + 1) % rot.size()];
            int a = side(w.p, e), b = side(w.p, e2);
            int span = mod4(b - a) == 0 ? 4 : mod4(b - a);
            if (mod4(Left - a) > 0 && mod4(Left - a) < span) outer = face_of[dcode({e, emb.other(e, w.p)})];
        }
    }
    if (outer < 0) throw LayoutError("approach vertex has no free left corner");

    // base turning per edge, with the two vertical edges at p forced to bend rightward first
    std::vector<int> n0(LE), sign_limit(LE, 0);  // +1: n >= 0 only, -1: n <= 0 only
    std::vector<int> first_turn(LE, 0);            // seen from p
    for (int i = 0; i < LE; ++i) {
        auto [a, b] = emb.ends[i];
        int c = mod4(side(b, i) + 2 - side(a, i));
        n0[i] = c % 2 == 0 ? 0 : (c == 1 ? 1 : -1);
        for (int end : {a, b}) {
            if (end != w.p || !vertical(side(w.p, i))) continue;
            // leaving p upward the first bend must be a right turn, downward a left one
            int want = side(w.p, i) == Up ? -1 : 1;
            first_turn[i] = want;
            if (end == b) want = -want;
            sign_limit[i] = want;
            if (n0[i] * want < 0) n0[i] = -n0[i];
        }
    }
    std::vector<long> turn_sum(F, 0);
    for (int f = 0; f < F; ++f) {
        const auto& fd = faces[f];
        for (size_t k = 0; k < fd.size(); ++k) {
            Dart d = fd[k], d2 = fd[(k + 1) % fd.size()];
            int wv = emb.other(d.edge, d.from);
            int a = mod4(side(wv, d2.edge) - side(wv, d.edge));
            if (a == 0) a = 4;
            turn_sum[f] += a - 2;
            turn_sum[f] += emb.ends[d.edge].first == d.from ? n0[d.edge] : -n0[d.edge];
        }
    }
    const int S = F, T = F + 1;
    FlowNet net(F + 2);
    const long INF = 1 << 20;
    long supply = 0;
    for (int f = 0; f < F; ++f) {
        long want = (f == outer ? 4 : -4) - turn_sum[f];
        if (want % 2 != 0) throw LayoutError("face turning parity is off");
        if (want > 0) net.arc(f, T, want / 2, 0);
        if (want < 0) {
            net.arc(S, f, -want / 2, 0);
            supply += -want / 2;
        }
    }
    struct EdgeArcs {
        std::vector<FlowTraits::edge_descriptor> up, down;
    };
    std::vector<EdgeArcs> arcs(LE);
    for (int i = 0; i < LE; ++i) {
        int f = face_of[2 * i], g = face_of[2 * i + 1];
        if (f == g) continue;
        // up: n += 2 moves two quarter turns from g into f
        if (sign_limit[i] >= 0) {
            long c1 = bend_count(n0[i] + 2) - bend_count(n0[i]);
            arcs[i].up.push_back(net.arc(g, f, 1, c1));
            arcs[i].up.push_back(net.arc(g, f, INF, 2));
        }
        if (sign_limit[i] <= 0) {
            long c1 = bend_count(n0[i] - 2) - bend_count(n0[i]);
            arcs[i].down.push_back(net.arc(f, g, 1, c1));
            arcs[i].down.push_back(net.arc(f, g, INF, 2));
        }
    }
    boost::successive_shortest_path_nonnegative_weights(net.g, S, T);
    long shipped = 0;
    for (auto [it, end] = boost::out_edges(S, net.g); it != end; ++it)
        if (boost::get(boost::edge_capacity, net.g, *it) > 0) shipped += net.flow(*it);
    if (shipped != supply) throw LayoutError("no bend assignment closes every face");
    std::vector<int> n(LE);
    for (int i = 0; i < LE; ++i) {
        long k = 0;
        for (auto a : arcs[i].up) k += net.flow(a);
        for (auto a : arcs[i].down) k -= net.flow(a);
        n[i] = n0[i] + int(2 * k);
    }

    // each vertex keeps its axes; work out whether it was turned half way round
    std::vector<int> rot(V, -1);
    rot[w.p] = 0;
    std::deque<int> bfs{w.p};
    while (!bfs.empty()) {
        int a = bfs.front();
        bfs.pop_front();
        for (int i : emb.rotation[a]) {
            int b = emb.other(i, a);
            int na = emb.ends[i].first == a ? n[i] : -n[i];
            int rb = mod4(side(a, i) + rot[a] + na + 2 - side(b, i));
            if (rb % 2) throw LayoutError("edge lost its colour axis");
            if (rot[b] < 0) {
                rot[b] = rb;
                bfs.push_back(b);
            } else if (rot[b] != rb) {
                throw LayoutError("inconsistent vertex turn");
            }
        }
    }

    HGraph h;
    for (int v = 0; v < V; ++v) h.add_vertex();
    GridLayout out;
    for (int i = 0; i < LE; ++i) {
        auto [a, b] = emb.ends[i];
        std::vector<int> turns;
        if (n[i] > 0) turns.assign(n[i], 1);
        else if (n[i] < 0) turns.assign(-n[i], -1);
        else if (first_turn[i] != 0) turns = {first_turn[i], -first_turn[i]};  // a Z looks the same from both ends
        else turns = {1, -1};
        out.bends += int(turns.size());
        int cur = a, hd = mod4(side(a, i) + rot[a]);
        for (int t : turns) {
            int x = h.add_vertex();
            h.add_edge(cur, x, hd, lg[i]);
            cur = x;
            hd = mod4(hd + t);
        }
        if (mod4(hd + 2) != mod4(side(b, i) + rot[b])) throw LayoutError("edge arrives on the wrong side");
        h.add_edge(cur, b, hd, lg[i]);
    }
    // frame, hooked onto p's free left side
    int A = h.add_vertex(), P = h.add_vertex(), B = h.add_vertex(), C = h.add_vertex(), D = h.add_vertex();
    h.add_edge(w.p, P, Left, -1);
    h.add_edge(A, P, Down, -1);
    h.add_edge(P, B, Down, -1);
    h.add_edge(B, C, Right, -1);
    h.add_edge(C, D, Up, -1);
    h.add_edge(D, A, Left, -1);
    refine(h);
    Coords xy = compact(h);

    // polylines per instance edge, tail first
    std::vector<std::vector<std::pair<int, int>>> pts(in.edges.size());
    int xmin = INT_MAX, xmax = INT_MIN, ymin = INT_MAX, ymax = INT_MIN;
    for (int i = 0; i < LE; ++i) {
        int e = lg[i];
        int cur = in.edges[e].tail, prev = -1;
        pts[e].push_back({xy.x[cur], xy.y[cur]});
        while (cur != in.edges[e].head || prev < 0) {
            int nxt = -1;
            for (int d = 0; d < 4; ++d) {
                int id = h.port[cur][d];
                if (id >= 0 && id != prev && h.edges[id].origin == e) nxt = id;
            }
            if (nxt < 0) throw LayoutError("lost edge " + in.edges[e].id + " while tracing");
            cur = h.head(nxt, cur);
            prev = nxt;
            pts[e].push_back({xy.x[cur], xy.y[cur]});
            if (cur < V && cur != in.edges[e].head) throw LayoutError("edge runs through a vertex");
        }
        for (auto [x, y] : pts[e]) {
            xmin = std::min(xmin, x), xmax = std::max(xmax, x);
            ymin = std::min(ymin, y), ymax = std::max(ymax, y);
        }
    }
    if (xy.x[w.p] != xmin) throw LayoutError("approach vertex is not on the left boundary");
    out.coarse_w = xmax - xmin + 1;
    out.coarse_h = ymax - ymin + 1;
    out.width = 2 * (xmax - xmin) + 3;
    out.height = 2 * (ymax - ymin) + 3;
    auto cell = [&](int x, int y) { return rush::Cell{2 * (ymax - y) + 1, 2 * (x - xmin) + 1}; };
    out.vertex_cell.assign(V, rush::Cell{-1, -1});
    for (int v = 0; v < V; ++v)
        if (v != w.t) out.vertex_cell[v] = cell(xy.x[v], xy.y[v]);
    out.path.assign(in.edges.size(), {});
    for (int i = 0; i < LE; ++i) {
        int e = lg[i];
        auto& cs = out.path[e];
        for (size_t k = 0; k + 1 < pts[e].size(); ++k) {
            rush::Cell a = cell(pts[e][k].first, pts[e][k].second), b = cell(pts[e][k + 1].first, pts[e][k + 1].second);
            int dr = (b.row > a.row) - (b.row < a.row), dc = (b.col > a.col) - (b.col < a.col);
            for (rush::Cell c = a; !(c == b); c = {c.row + dr, c.col + dc}) cs.push_back(c);
        }
        cs.push_back(cell(pts[e].back().first, pts[e].back().second));
    }
    // the approach edge leaves p to the left, runs down the margin column and rejoins
    {
        auto& cs = out.path[w.e_pu];
        bool from_p = in.edges[w.e_pu].tail == w.p;
        if (!from_p) std::reverse(cs.begin(), cs.end());
        size_t k = 1;
        while (k + 1 < cs.size() && cs[k + 1].row - cs[k].row == cs[1].row - cs[0].row &&
               cs[k + 1].col == cs[k].col)
            ++k;
        if (cs[1].col != cs[0].col || k + 1 >= cs.size() || cs[k + 1].col != cs[k].col + 1)
            throw LayoutError("approach edge does not leave p vertically and bend inward");
        std::vector<rush::Cell> re{cs[0]};
        int dr = cs[1].row > cs[0].row ? 1 : -1;
        for (int r = cs[0].row;; r += dr) {
            re.push_back({r, 0});
            if (r == cs[k].row) break;
        }
        re.insert(re.end(), cs.begin() + long(k), cs.end());
        cs = std::move(re);
        if (!from_p) std::reverse(cs.begin(), cs.end());
    }
    squeeze(out);
    return out;
}


std::vector<std::string> validate_layout(const subway::Instance& in, const GridLayout& g, const WinPattern& w) {
    std::vector<std::string> bad;
    std::map<std::pair<int, int>, int> owner;  // cell -> vertex (>=0) or ~edge
    auto claim = [&](rush::Cell c, int who) {
        if (c.row < 0 || c.col < 0 || c.row >= g.height || c.col >= g.width) {
            bad.push_back("cell out of the board");
            return;
        }
        auto [it, fresh] = owner.insert({{c.row, c.col}, who});
        if (!fresh && it->second != who) bad.push_back("cell (" + std::to_string(c.row) + "," + std::to_string(c.col) + ") used twice");
    };
    std::set<std::pair<std::pair<int, int>, std::pair<int, int>>> links;
    for (int v = 0; v < in.num_vertices(); ++v)
        if (g.vertex_cell[v].row >= 0) claim(g.vertex_cell[v], v);
    for (int e = 0; e < int(in.edges.size()); ++e) {
        const auto& cs = g.path[e];
        if (e == w.e_ut) {
            if (!cs.empty()) bad.push_back("target edge should not be drawn");
            continue;
        }
        if (cs.size() < 3) {
            bad.push_back("edge " + in.edges[e].id + " has no interior");
            continue;
        }
        if (!(cs.front() == g.vertex_cell[in.edges[e].tail]) || !(cs.back() == g.vertex_cell[in.edges[e].head]))
            bad.push_back("edge " + in.edges[e].id + " does not join its endpoints");
        int turns = 0;
        for (size_t i = 0; i + 1 < cs.size(); ++i) {
            if (std::abs(cs[i].row - cs[i + 1].row) + std::abs(cs[i].col - cs[i + 1].col) != 1)
                bad.push_back("edge " + in.edges[e].id + " jumps");
            links.insert({{cs[i].row, cs[i].col}, {cs[i + 1].row, cs[i + 1].col}});
            links.insert({{cs[i + 1].row, cs[i + 1].col}, {cs[i].row, cs[i].col}});
            if (i > 0 && (cs[i - 1].row == cs[i].row) != (cs[i].row == cs[i + 1].row)) ++turns;
        }
        if (turns == 0) bad.push_back("edge " + in.edges[e].id + " is straight");
        for (size_t i = 1; i + 1 < cs.size(); ++i) claim(cs[i], ~e);
        bool vert_end = in.edges[e].color == subway::Orange;
        if ((cs[0].col == cs[1].col) != vert_end || (cs.back().col == cs[cs.size() - 2].col) != vert_end)
            bad.push_back("edge " + in.edges[e].id + " leaves a vertex off its colour axis");
    }
    // corridors may only touch along their own path
    for (auto& [c, who] : owner)
        for (int d = 0; d < 4; ++d) {
            std::pair<int, int> n{c.first + DR[d], c.second + DC[d]};
            if (owner.count(n) && !links.count({c, n}))
                bad.push_back("cells (" + std::to_string(c.first) + "," + std::to_string(c.second) + ") and (" +
                              std::to_string(n.first) + "," + std::to_string(n.second) + ") touch");
        }
    return bad;
}

Emitted emit_board(const subway::Instance& in, const subway::State& s, const GridLayout& g, const WinPattern& w) {
    Emitted out;
    out.layout = g;
    const int n = std::max(g.width, g.height);
    rush::Board board(n, n);
    std::fill(board.fixed.begin(), board.fixed.end(), 1);
    auto idx = [&](rush::Cell c) { return c.row * n + c.col; };
    AbstractionMap& m = out.map;
    m.width = m.height = n;
    m.vertex_cell.assign(in.num_vertices(), -1);
    m.corridor.assign(in.edges.size(), {});
    m.cell_vertex.assign(size_t(n) * n, -1);
    m.cell_edge.assign(size_t(n) * n, -1);
    m.omitted_vertex = w.t;
    m.omitted_edge = w.e_ut;
    m.terminal_vertex = w.u;
    std::vector<int8_t> code(size_t(n) * n, 0);  // 0 empty, 1 H, 2 V
    for (int v = 0; v < in.num_vertices(); ++v) {
        if (g.vertex_cell[v].row < 0) continue;
        int c = idx(g.vertex_cell[v]);
        m.vertex_cell[v] = c;
        m.cell_vertex[c] = v;
        board.fixed[c] = 0;
        if (s.token[v] != subway::NoToken) code[c] = s.token[v] == subway::Purple ? 1 : 2;
    }
    for (int e = 0; e < int(in.edges.size()); ++e) {
        const auto& cs = g.path[e];
        if (cs.empty()) continue;
        bool flip = s.flipped[e];
        for (size_t i = 1; i + 1 < cs.size(); ++i) {
            int c = idx(cs[i]);
            m.corridor[e].push_back(c);
            m.cell_edge[c] = e;
            board.fixed[c] = 0;
            // the car points along its step toward the current head
            const rush::Cell& nx = flip ? cs[i - 1] : cs[i + 1];
            code[c] = nx.col == cs[i].col ? 2 : 1;
        }
    }
    // the special car is the corridor car beside p on the s0 side; it wins by
    // entering the margin cell beside p, which only the last step of p -> u does
    auto beside = [&](int e, int v) {
        const auto& cs = g.path[e];
        return in.edges[e].tail == v ? idx(cs[1]) : idx(cs[cs.size() - 2]);
    };
    m.special_cell = beside(w.e_s0p, w.p);
    m.special_home = w.s0;
    m.goal_cell = beside(w.e_pu, w.p);
    if (m.goal_cell % n != 0) throw LayoutError("goal cell is not on column 0");
    board.target = rush::Cell{m.goal_cell / n, 0};
    out.state.board = board;
    for (int c = 0; c < n * n; ++c) {
        if (!code[c]) continue;
        if (c == m.special_cell) out.state.special = int(out.state.cars.size());
        out.state.cars.push_back({{c / n, c % n}, 1, code[c] == 2 ? rush::Orientation::Vertical : rush::Orientation::Horizontal});
    }
    out.state.check();
    return out;
}

Emitted compile_ss_to_rh(const subway::Instance& in, const subway::State& s) {
    WinPattern w = find_win_pattern(in, s);
    auto attempt = [&](const subway::Instance& x) {
        PortAssignment pa = assign_ports(x, w);
        GridLayout g = orthogonal_layout(x, pa, w);
        auto bad = validate_layout(x, g, w);
        if (!bad.empty()) throw LayoutError("layout check: " + bad.front());
        return emit_board(x, s, g, w);
    };
    try {
        return attempt(in);
    } catch (const LayoutError& first) {
        // the mirror image is the same planar graph; try it before giving up
        subway::Instance mirror = in;
        for (auto& r : mirror.rotation) std::reverse(r.begin(), r.end());
        try {
            return attempt(mirror);
        } catch (const LayoutError&) {
            throw first;
        }
    }
}

std::optional<subway::State> project_rest(const subway::Instance& in, const AbstractionMap& m, const rush::State& r) {
    std::vector<int> code(size_t(m.width) * m.height, 0);
    for (const auto& c : r.cars) code[size_t(c.anchor.row) * m.width + c.anchor.col] = c.orient == rush::Orientation::Vertical ? 2 : 1;
    const auto& sp = r.cars[r.special].anchor;
    return project_rest(in, m, [&](int c) { return code[c]; }, sp.row * m.width + sp.col);
}

std::string map_to_json(const AbstractionMap& m) {
    nlohmann::json j;
    auto cell = [&](int c) { return nlohmann::json::array({c / m.width, c % m.width}); };
    j["width"] = m.width;
    j["height"] = m.height;
    nlohmann::json corr = nlohmann::json::array(), verts = nlohmann::json::array();
    for (int c : m.vertex_cell) verts.push_back(c < 0 ? nlohmann::json(nullptr) : cell(c));
    for (auto& cs : m.corridor) {
        nlohmann::json a = nlohmann::json::array();
        for (int c : cs) a.push_back(cell(c));
        corr.push_back(a);
    }
    j["corridors"] = corr;
    j["goal_cell"] = cell(m.goal_cell);
    j["omitted_edge"] = m.omitted_edge;
    j["omitted_vertex"] = m.omitted_vertex;
    j["special_cell"] = cell(m.special_cell);
    j["special_home"] = m.special_home;
    j["terminal_vertex"] = m.terminal_vertex;
    j["vertex_cells"] = verts;
    return j.dump(1) + "\n";
}

std::string render_svg(const rush::State& s) {
    const int k = 12;
    const auto& b = s.board;
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << b.width * k << "\" height=\"" << b.height * k
      << "\" viewBox=\"0 0 " << b.width * k << " " << b.height * k << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int r = 0; r < b.height; ++r)
        for (int c = 0; c < b.width; ++c)
            if (b.is_fixed({r, c})) o << "<rect x=\"" << c * k << "\" y=\"" << r * k << "\" width=\"" << k << "\" height=\"" << k << "\" fill=\"#333\"/>\n";
    for (size_t i = 0; i < s.cars.size(); ++i) {
        const auto& car = s.cars[i];
        bool v = car.orient == rush::Orientation::Vertical;
        int w = v ? k - 4 : car.length * k - 2, h = v ? car.length * k - 2 : k - 4;
        int x = car.anchor.col * k + (v ? 2 : 1), y = car.anchor.row * k + (v ? 1 : 2);
        const char* fill = int(i) == s.special ? "#d22" : v ? "#e8912d" : "#8a4fbf";
        o << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h << "\" rx=\"2\" fill=\"" << fill << "\"/>\n";
    }
    if (b.target) {
        double cx = b.target->col * k + k / 2.0, cy = b.target->row * k + k / 2.0;
        o << "<text x=\"" << cx << "\" y=\"" << cy + 4 << "\" font-size=\"" << k << "\" text-anchor=\"middle\">*</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

BisimReport check_bisimulation(const subway::Instance& in, const subway::State& s0, const Emitted& em, size_t budget) {
    BisimReport rep;
    const AbstractionMap& m = em.map;
    auto fail = [&](std::string msg) {
        rep.ok = false;
        if (rep.message.empty()) rep.message = std::move(msg);
        return rep;
    };
    // Subway side; reaching the terminal vertex counts as won
    std::set<std::string> ss;
    {
        std::deque<subway::State> q{s0};
        std::set<std::string> seen{subway::state_key(in, s0)};
        while (!q.empty()) {
            subway::State cur = std::move(q.front());
            q.pop_front();
            if (subway::is_won(in, cur) || cur.special == m.terminal_vertex) {
                rep.ss_solvable = true;
                continue;
            }
            ss.insert(subway::state_key(in, cur));
            for (auto mv : subway::legal_moves(in, cur)) {
                subway::State nx = subway::apply_move(in, cur, mv);
                if (seen.insert(subway::state_key(in, nx)).second) {
                    if (seen.size() > budget) {
                        rep.budget_exceeded = true;
                        return fail("subway state budget exceeded");
                    }
                    q.push_back(std::move(nx));
                }
            }
        }
        rep.ss_states = seen.size();
    }
    // Rush side
    solve::RushProblem rp(em.state);
    if (rp.num_empty() != 1) return fail("board should have exactly one empty cell");
    solve::KeyStore seen(rp.initial().size());
    seen.insert(rp.initial());
    std::map<std::string, uint32_t> rest_of;  // subway key -> rush id
    std::string buf;
    try {
        for (size_t head = 0; head < seen.size(); ++head) {
            buf.assign(seen.key(uint32_t(head)));
            if (rp.won(buf)) {
                rep.rush_solvable = true;
                continue;
            }
            int moves = 0;
            rp.expand(buf, [&](std::string_view k, uint32_t) {
                ++moves;
                if (seen.insert(k).second && seen.size() > budget) throw solve::BudgetExceeded("rush budget");
            });
            int bubble = rp.empty_cell(buf, 0);
            if (m.cell_vertex[bubble] < 0) {
                rep.max_corridor_moves = std::max(rep.max_corridor_moves, moves);
                if (moves > 2) return fail("corridor position with " + std::to_string(moves) + " moves");
                continue;
            }
            auto st = project_rest(in, m, [&](int c) { return rp.cell_code(buf, c); }, rp.special_cell(buf));
            if (!st) return fail("bubble on a vertex cell but the board is not at rest");
            st->flipped[m.omitted_edge] = s0.flipped[m.omitted_edge];
            std::string key = subway::state_key(in, *st);
            if (!ss.count(key)) return fail("rest state with no subway counterpart");
            auto [it, fresh] = rest_of.insert({key, uint32_t(head)});
            if (!fresh) return fail("two rest states read as one subway state");
        }
    } catch (const solve::BudgetExceeded&) {
        rep.budget_exceeded = true;
        rep.rush_states = seen.size();
        return fail("rush state budget exceeded");
    }
    rep.rush_states = seen.size();
    rep.rest_states = rest_of.size();
    if (rest_of.size() != ss.size())
        return fail("subway has " + std::to_string(ss.size()) + " live states, rest states cover " +
                    std::to_string(rest_of.size()));
    if (rep.ss_solvable != rep.rush_solvable) return fail("solvability differs");
    rep.ok = true;
    return rep;
}

}  // namespace pspace::grid
