#include "pspace/gadgets.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boyer_myrvold_planar_test.hpp>

#include "json.hpp"

namespace pspace::gadget {

using subway::Orange;
using subway::Purple;

DualTree build_dual_tree(const ncl::Instance& in) {
    DualTree t;
    Embedding emb = in.embedding();
    t.faces = emb.faces();
    t.face_of_dart.assign(2 * in.edges.size(), -1);
    for (int f = 0; f < int(t.faces.size()); ++f)
        for (Dart d : t.faces[f]) t.face_of_dart[2 * d.edge + (in.edges[d.edge].tail == d.from ? 0 : 1)] = f;
    t.root = std::min(t.face_of(in.target, true), t.face_of(in.target, false));
    t.parent_edge.assign(t.faces.size(), -1);
    t.depth.assign(t.faces.size(), -1);
    t.depth[t.root] = 0;
    std::deque<int> q{t.root};
    while (!q.empty()) {
        int f = q.front();
        q.pop_front();
        for (Dart d : t.faces[f]) {
            bool from_tail = in.edges[d.edge].tail == d.from;
            int g = t.face_of(d.edge, !from_tail);
            if (t.depth[g] >= 0) continue;
            t.depth[g] = t.depth[f] + 1;
            t.parent_edge[g] = d.edge;
            t.tree_edges.push_back(d.edge);
            q.push_back(g);
        }
    }
    return t;
}

namespace {

// Graph under construction. Edges are stored as (u, v); `orient` 0 means u->v.
struct Builder {
    struct E {
        int u, v, color;
        std::vector<int> cycles;
        std::vector<std::pair<int, int>> lits;  // (cycle, alpha)
        int orient = 0;                         // for edges on no cycle
    };
    std::vector<std::string> names;
    std::vector<E> edges;
    std::map<std::pair<int, int>, int> lookup;
    std::vector<Cycle> cycles;

    int vtx(const std::string& n) {
        names.push_back(n);
        return int(names.size()) - 1;
    }
    int find(int a, int b) const {
        auto it = lookup.find({std::min(a, b), std::max(a, b)});
        return it == lookup.end() ? -1 : it->second;
    }
    int edge(int a, int b, int color) {
        if (find(a, b) >= 0) throw CompileError("internal: duplicate edge " + names[a] + "-" + names[b]);
        edges.push_back({a, b, color, {}, {}, 0});
        lookup[{std::min(a, b), std::max(a, b)}] = int(edges.size()) - 1;
        return int(edges.size()) - 1;
    }
    int cycle(Cycle c) {
        int id = int(cycles.size());
        size_t k = c.listing.size();
        for (size_t i = 0; i < k; ++i) {
            int a = c.listing[i], b = c.listing[(i + 1) % k];
            int e = find(a, b);
            if (e < 0) e = edge(a, b, Purple);
            edges[e].cycles.push_back(id);
        }
        cycles.push_back(std::move(c));
        return id;
    }
    void lit(int a, int b, int cyc, int alpha) {
        int e = find(a, b);
        if (e < 0) throw CompileError("internal: no edge for literal");
        edges[e].lits.push_back({cyc, alpha});
    }
    // 0 when the listing of cycle c walks edge e from u to v
    int lt(int c, int e) const {
        const auto& L = cycles[c].listing;
        size_t k = L.size();
        for (size_t i = 0; i < k; ++i) {
            int a = L[i], b = L[(i + 1) % k];
            if (a == edges[e].u && b == edges[e].v) return 0;
            if (a == edges[e].v && b == edges[e].u) return 1;
        }
        throw CompileError("internal: edge not on cycle");
    }
    int alpha(int e, int c) const {
        for (auto [cc, a] : edges[e].lits)
            if (cc == c) return a;
        throw CompileError("internal: missing literal");
    }
    // reference orientation of a shared edge implied by cycle c's direction
    int base_from(int e, int c) const { return lt(c, e) ^ cycles[c].dir ^ alpha(e, c); }
    // direction cycle c needs so that edge e agrees with the base implied by cycle k
    int dir_for(int e, int c, int k, int lt_c) const { return base_from(e, k) ^ alpha(e, c) ^ lt_c; }
};

struct Port {
    int pre = -1, post = -1;  // endpoint next to corner (pred(e), e) / (e, succ(e))
    int cycle = -1;
    int alpha_c = 0;          // edge-gadget cycle consistent iff vertex cycle phase == alpha_c
};

int succ_of(const std::vector<int>& rot, int e) {
    auto it = std::find(rot.begin(), rot.end(), e);
    return rot[(size_t(it - rot.begin()) + 1) % rot.size()];
}
int pred_of(const std::vector<int>& rot, int e) {
    auto it = std::find(rot.begin(), rot.end(), e);
    return rot[(size_t(it - rot.begin()) + rot.size() - 1) % rot.size()];
}

// What a vertex gadget needs to know about its surroundings. `rot` holds
// edge ids in CCW order, `in[k]` whether rot[k] points in initially.
struct VertexSpec {
    std::string name;
    ncl::Kind kind = ncl::Kind::And;
    std::vector<int> rot;
    std::vector<bool> blue, in;
    int L = -1, R = -1;  // Or protected pair
};

VertexTrace add_vertex_gadget(Builder& b, const VertexSpec& sp, int v, std::map<int, Port>& ports,
                              std::map<int, std::vector<int>>& corner_x0) {
    const auto& rot = sp.rot;
    const std::string& nm = sp.name;
    auto pos = [&](int e) { return int(std::find(rot.begin(), rot.end(), e) - rot.begin()); };
    auto pin = [&](int e) { return bool(sp.in[pos(e)]); };
    VertexTrace vt;
    vt.vertex = v;
    vt.kind = sp.kind;
    if (sp.kind == ncl::Kind::And) {
        int blue = -1;
        for (int e : rot)
            if (sp.blue[pos(e)]) blue = e;
        vt.blue_locked = pin(blue);
        int a[3], bb[3];
        for (int k = 0; k < 3; ++k) {
            a[k] = b.vtx(nm + ".a" + std::to_string(k));
            bb[k] = b.vtx(nm + ".b" + std::to_string(k));
            b.edge(a[k], bb[k], Orange);
        }
        int x = b.vtx(nm + ".x");
        Cycle y{nm + ".Y", Owner::Vertex, v, {a[0], bb[0], x, a[1], bb[1], a[2], bb[2]}, 0, 0, x};
        int cy = b.cycle(y);
        vt.cycles = {cy};
        for (int k = 0; k < 3; ++k) {
            int e = rot[k];
            bool locked = sp.blue[k] == vt.blue_locked;
            ports[e] = Port{a[k], bb[k], cy, locked ? 1 : 0};
        }
        corner_x0[rot[0]].push_back(x);
        return vt;
    }
    int L = sp.L, R = sp.R, M = -1;
    for (int e : rot)
        if (e != L && e != R) M = e;
    vt.left = L, vt.middle = M, vt.right = R;
    int r1 = 0, r2 = 0, r3 = 0;
    if (pin(L))
        vt.initial = 1;
    else if (pin(M))
        vt.initial = 3, r1 = 1, r2 = 1;
    else
        vt.initial = 5, r2 = 1, r3 = 1;
    auto V_ = [&](const char* s) { return b.vtx(nm + "." + s); };
    int b1 = V_("b1"), b2 = V_("b2"), t1 = V_("t1"), t2 = V_("t2"), m1 = V_("m1"), m2 = V_("m2");
    int aL = V_("aL"), bL = V_("bL"), aR = V_("aR"), bR = V_("bR"), aM = V_("aM"), bM = V_("bM");
    int x1 = V_("x1"), x2 = V_("x2"), x3 = V_("x3"), y1p = V_("y1p");
    b.edge(b1, b2, Orange);
    b.edge(t2, m2, Orange);
    b.edge(m1, t1, Orange);
    b.edge(m1, m2, Purple);
    b.edge(aL, bL, Orange);
    b.edge(bR, aR, Orange);
    b.edge(aM, bM, Orange);
    b.edge(y1p, m1, Orange);
    int c1 = b.cycle({nm + ".Y1", Owner::Vertex, v, {m1, m2, aM, bM, x1, y1p}, 0, r1, x1});
    int c2 = b.cycle({nm + ".Y2", Owner::Vertex, v, {b1, b2, t2, m2, m1, t1, aL, bL, x2}, 0, r2, x2});
    int c3 = b.cycle({nm + ".Y3", Owner::Vertex, v, {b1, b2, x3, bR, aR, t2, m2, m1, t1}, 1, r3, x3});
    vt.cycles = {c1, c2, c3};
    b.lit(m1, m2, c1, 0);
    b.lit(m1, m2, c2, 1);
    b.lit(m1, m2, c3, 0);
    for (auto [p, q] : {std::pair{b1, b2}, {t2, m2}, {m1, t1}}) {
        b.lit(p, q, c2, 0);
        b.lit(p, q, c3, 1);
    }
    bool pm = pred_of(rot, L) == M;
    ports[L] = Port{pm ? aL : bL, pm ? bL : aL, c2, 1};
    bool pr = pred_of(rot, R) == M;
    ports[R] = Port{pr ? aR : bR, pr ? bR : aR, c3, 0};
    bool pmr = pred_of(rot, M) == R;
    ports[M] = Port{pmr ? aM : bM, pmr ? bM : aM, c1, 0};
    if (succ_of(rot, L) == R) {
        corner_x0[L] = {x2, x3};
        corner_x0[M] = {x1};
    } else {
        corner_x0[R] = {x3, x2};
        corner_x0[L] = {x1};
    }
    return vt;
}

struct EdgeOut {
    EdgeTrace trace;
    std::vector<int> top_x0;  // entrance vertices from U to W
    int win_wA = -1, win_wB = -1, win_cycle_at = -1;
};

// pu/pw: ports at U (initial head) and W. top_from_U: the entry face is on
// the U side of the T rail.
EdgeOut add_edge_gadget(Builder& b, const std::string& nm, int e, const Port& pu, const Port& pw, bool top_from_U,
                        bool is_tree, bool win_here, bool needs_flip) {
    EdgeOut out;
    EdgeTrace& et = out.trace;
    et.edge = e;
    int T0 = top_from_U ? pu.pre : pu.post, B0 = top_from_U ? pu.post : pu.pre;
    int T5 = top_from_U ? pw.post : pw.pre, B5 = top_from_U ? pw.pre : pw.post;
    int sU = b.find(T0, B0), sW = b.find(T5, B5);

    // literals on the port rungs (cycle ids are known in advance)
    int first = int(b.cycles.size());
    int cid[6] = {pu.cycle, first, first + 1, first + 2, first + 3, first + 4};
    b.lit(T0, B0, pu.cycle, 0);
    b.lit(T0, B0, cid[1], pu.alpha_c);
    b.lit(T5, B5, pw.cycle, 1);
    b.lit(T5, B5, cid[5], pw.alpha_c);
    // C1 walks T0 -> B0, C5 walks B5 -> T5
    int lt1 = b.edges[sU].u == T0 ? 0 : 1;
    int lt5 = b.edges[sW].u == B5 ? 0 : 1;
    int d1 = b.base_from(sU, pu.cycle) ^ pu.alpha_c ^ lt1;
    int d5 = b.base_from(sW, pw.cycle) ^ pw.alpha_c ^ lt5;
    int d3 = is_tree ? 0 : d1;
    et.twist_u = d1 != d3;
    et.twist_w = d5 != d3;
    int dirs[6] = {0, d1, d3, d3, d3, d5};

    struct Link {
        bool twist = false;
        int T = -1, B = -1, ot1 = -1, ot2 = -1, ob1 = -1, ob2 = -1;
    } link[6];
    link[0].T = T0, link[0].B = B0;
    link[5].T = T5, link[5].B = B5;
    for (int i = 1; i <= 4; ++i) {
        std::string p = nm + ".l" + std::to_string(i);
        link[i].twist = (i == 1 && et.twist_u) || (i == 4 && et.twist_w);
        if (link[i].twist) {
            link[i].ot1 = b.vtx(p + "t1");
            link[i].ot2 = b.vtx(p + "t2");
            link[i].ob1 = b.vtx(p + "b1");
            link[i].ob2 = b.vtx(p + "b2");
            b.edge(link[i].ob1, link[i].ob2, Orange);
            b.edge(link[i].ot2, link[i].ot1, Orange);
        } else {
            link[i].T = b.vtx(p + "T");
            link[i].B = b.vtx(p + "B");
            b.edge(link[i].T, link[i].B, Orange);
        }
    }
    int X[6], M3 = -1;
    for (int i = 1; i <= 5; ++i) X[i] = b.vtx(nm + ".x" + std::to_string(i));
    if (is_tree) M3 = b.vtx(nm + ".q");
    int wA = -1, wB = -1;
    if (win_here) {
        wA = b.vtx(nm + ".wA");
        wB = b.vtx(nm + ".wB");
        b.edge(wA, wB, Orange);
    }
    for (int i = 1; i <= 5; ++i) {
        const Link &l = link[i - 1], &r = link[i];
        std::vector<int> s;
        if (l.twist)
            s.insert(s.end(), {l.ob1, l.ob2});
        else
            s.push_back(l.B);
        if (i == 3 && M3 >= 0) s.push_back(M3);
        if (r.twist)
            s.insert(s.end(), {r.ob1, r.ob2, r.ot2, r.ot1});
        else
            s.insert(s.end(), {r.B, r.T});
        if (win_here && needs_flip && i == 5)
            s.insert(s.end(), {wB, wA, X[5]});
        else if (win_here && !needs_flip && i == 1)
            s.insert(s.end(), {X[1], wA, wB});
        else
            s.push_back(X[i]);
        if (l.twist)
            s.insert(s.end(), {l.ot2, l.ot1});
        else
            s.push_back(l.T);
        Cycle c{nm + ".C" + std::to_string(i), Owner::Edge, e, s, dirs[i], 0, X[i]};
        int id = b.cycle(c);
        if (id != cid[i]) throw CompileError("internal: cycle numbering");
        et.cycles[i - 1] = id;
    }
    for (int i = 1; i <= 4; ++i) {
        const Link& l = link[i];
        if (l.twist) {
            b.lit(l.ob1, l.ob2, cid[i], 0);
            b.lit(l.ob1, l.ob2, cid[i + 1], 1);
            b.lit(l.ot1, l.ot2, cid[i], 0);
            b.lit(l.ot1, l.ot2, cid[i + 1], 1);
        } else {
            b.lit(l.T, l.B, cid[i], 0);
            b.lit(l.T, l.B, cid[i + 1], 1);
        }
    }
    for (int i = 1; i <= 5; ++i) out.top_x0.push_back(X[i]);
    if (M3 >= 0) {
        int z = b.vtx(nm + ".z");
        b.edge(z, M3, Orange);  // z -> q
        et.exit_node = z;
        et.exit_vertex = M3;
    }
    if (win_here) {
        out.win_wA = wA, out.win_wB = wB;
        out.win_cycle_at = needs_flip ? cid[5] : cid[1];
    }
    return out;
}

// The win cycle; returns its entrance vertex.
int add_win_gadget(Builder& b, WinTrace& w, bool needs_flip, int win_wA, int win_wB, int win_cycle_at, int target_edge) {
    w.needs_flip = needs_flip;
    w.attached = win_cycle_at;
    int xW = b.vtx("win.x"), s0 = b.vtx("win.s0"), s1 = b.vtx("win.s1");
    int n1 = b.vtx("win.n1"), t = b.vtx("win.t");
    b.edge(s1, n1, Orange);
    b.edge(s1, t, Purple);  // s1 -> t
    int aW = needs_flip ? 1 : 0;
    int sh = b.find(win_wA, win_wB);
    int ltW = b.edges[sh].u == win_wA ? 0 : 1;  // W walks wA -> wB
    int id = int(b.cycles.size());
    b.lit(win_wA, win_wB, id, aW);
    b.lit(win_wA, win_wB, win_cycle_at, 0);
    int dW = b.base_from(sh, win_cycle_at) ^ aW ^ ltW;
    // The special starts just behind x0. Any walk into W first pulls it
    // onto x0, where it is stuck (x0's only other edge is the orange
    // entrance), and only the closing step of a full turn moves it on to
    // s1 beside the target. Partial walks blocked at the shared edge and
    // side entries at a shared vertex never shift that last arrow.
    std::vector<int> L;
    if (dW == 0)
        L = {win_wA, win_wB, s0, xW, s1, n1};
    else
        L = {win_wA, win_wB, n1, s1, xW, s0};
    b.cycle({"win.W", Owner::Win, target_edge, L, dW, 0, xW});
    w.cycle = id;
    w.s0 = s0, w.s1 = s1, w.target = t;
    return xW;
}

// A face tree, or the access path of a harness: nodes[0] is nearest the root.
// Entrance nodes are created for x0 vertices; negative entries -(z+1) are
// existing nodes.
std::vector<int> add_tree_path(Builder& b, const std::vector<int>& seq, int root, std::map<int, int>& entrance_of) {
    std::vector<int> nodes;
    if (root >= 0) nodes.push_back(root);
    for (int x : seq) {
        if (x < 0) {
            nodes.push_back(-x - 1);
            continue;
        }
        int E = b.vtx(b.names[x] + ".e");
        b.edge(x, E, Orange);  // x0 -> E
        if (!entrance_of.emplace(x, E).second) throw CompileError("internal: entrance listed twice");
        nodes.push_back(E);
    }
    for (size_t j = 1; j < nodes.size(); ++j) b.edge(nodes[j], nodes[j - 1], Purple);  // toward the root
    return nodes;
}

// Orientation from cycle phases, tokens, planar rotation, validation, trace.
// `tree_nodes` carry purple tokens, `exit_nodes` orange ones; `root` is the
// bubble. Cycles without an entrance are allowed only when `pinned_ok`.
void finish(Builder& b, Compiled& out, const std::vector<std::pair<int, int>>& tree_nodes,
            const std::vector<int>& exit_nodes, const std::map<int, int>& entrance_of, int root, int special,
            int target, bool pinned_ok) {
    TraceMap& tr = out.trace;
    for (size_t c = 0; c < b.cycles.size(); ++c) {
        auto it = entrance_of.find(b.cycles[c].x0);
        if (it == entrance_of.end()) {
            if (pinned_ok) continue;
            throw CompileError("internal: cycle " + b.cycles[c].name + " has no entrance");
        }
        b.cycles[c].entrance = it->second;
    }

    // ---- orientation ----
    const int NV = int(b.names.size());
    std::vector<int> orient(b.edges.size());
    for (size_t e = 0; e < b.edges.size(); ++e) {
        auto& E = b.edges[e];
        if (E.cycles.empty()) {
            orient[e] = E.orient;
            continue;
        }
        if (E.cycles.size() == 1) {
            int c = E.cycles[0];
            orient[e] = b.lt(c, int(e)) ^ b.cycles[c].dir ^ b.cycles[c].phase;
            continue;
        }
        if (E.lits.size() != E.cycles.size())
            throw CompileError("internal: shared edge " + b.names[E.u] + "-" + b.names[E.v] + " lacks literals");
        int base = b.base_from(int(e), E.lits[0].first);
        for (auto [c, a] : E.lits)
            if (b.base_from(int(e), c) != base)
                throw CompileError("internal: direction conflict on " + b.names[E.u] + "-" + b.names[E.v]);
        int o = base;
        for (int c : E.cycles) o ^= b.cycles[c].phase;
        orient[e] = o;
    }
    auto cur = [&](int c) { return b.cycles[c].dir ^ b.cycles[c].phase; };
    auto consistent = [&](int c, int e) { return orient[e] == (b.lt(c, e) ^ cur(c)); };

    // ---- tokens ----
    std::vector<int8_t> token(NV, subway::NoToken);
    std::vector<std::vector<std::pair<int, int>>> on(NV);  // (cycle, position)
    for (int c = 0; c < int(b.cycles.size()); ++c)
        for (int i = 0; i < int(b.cycles[c].listing.size()); ++i) on[b.cycles[c].listing[i]].push_back({c, i});
    auto out_edge = [&](int c, int i) {
        const auto& L = b.cycles[c].listing;
        int k = int(L.size());
        int nb = cur(c) == 0 ? L[(i + 1) % k] : L[(i + k - 1) % k];
        return b.find(L[i], nb);
    };
    std::vector<char> is_x0(NV, 0);
    for (auto& c : b.cycles) is_x0[c.x0] = 1;
    for (int v = 0; v < NV; ++v) {
        if (on[v].empty()) continue;
        if (is_x0[v]) {
            token[v] = Orange;
            continue;
        }
        int col = -1;
        for (auto [c, i] : on[v]) {
            const auto& L = b.cycles[c].listing;
            int k = int(L.size());
            int ea = b.find(L[i], L[(i + 1) % k]), eb = b.find(L[i], L[(i + k - 1) % k]);
            if (!consistent(c, ea) || !consistent(c, eb)) continue;
            int cc = b.edges[out_edge(c, i)].color;
            if (col >= 0 && col != cc) throw CompileError("internal: token conflict at " + b.names[v]);
            col = cc;
        }
        if (col < 0) throw CompileError("internal: no cycle can move the token at " + b.names[v]);
        token[v] = int8_t(col);
    }
    for (auto [n, f] : tree_nodes) token[n] = Purple;
    for (int z : exit_nodes) token[z] = Orange;
    token[root] = subway::NoToken;
    token[target] = subway::NoToken;

    // every enabled cycle must be able to turn
    for (int c = 0; c < int(b.cycles.size()); ++c) {
        const auto& L = b.cycles[c].listing;
        int k = int(L.size());
        bool en = true;
        for (int i = 0; i < k; ++i) en = en && consistent(c, b.find(L[i], L[(i + 1) % k]));
        if (!en) continue;
        for (int i = 0; i < k; ++i) {
            if (L[i] == b.cycles[c].x0) continue;
            if (token[L[i]] != b.edges[out_edge(c, i)].color)
                throw CompileError("internal: enabled cycle " + b.cycles[c].name + " cannot turn");
        }
    }

    // ---- planar rotation ----
    using G = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS,
                                    boost::property<boost::vertex_index_t, int>,
                                    boost::property<boost::edge_index_t, int>>;
    G g(NV);
    for (size_t e = 0; e < b.edges.size(); ++e) boost::add_edge(b.edges[e].u, b.edges[e].v, int(e), g);
    std::vector<std::vector<boost::graph_traits<G>::edge_descriptor>> emb(NV);
    if (!boost::boyer_myrvold_planarity_test(boost::boyer_myrvold_params::graph = g,
                                             boost::boyer_myrvold_params::embedding = &emb[0]))
        throw CompileError("internal: compiled graph is not planar");
    auto eidx = boost::get(boost::edge_index, g);

    subway::Instance& si = out.instance;
    si.oriented = true;
    si.colors = 2;
    si.vertex_ids = b.names;
    for (size_t e = 0; e < b.edges.size(); ++e) {
        const auto& E = b.edges[e];
        int t = orient[e] == 0 ? E.u : E.v, hd = orient[e] == 0 ? E.v : E.u;
        si.edges.push_back({"s" + std::to_string(e), t, hd, E.color});
    }
    si.rotation.assign(NV, {});
    for (int v = 0; v < NV; ++v)
        for (auto ed : emb[v]) si.rotation[v].push_back(eidx[ed]);
    si.special = special;
    si.target = target;
    subway::State& st = out.state;
    st.token = token;
    st.flipped.assign(si.edges.size(), 0);
    st.special = special;
    auto problems = subway::validate_instance(si, st, true);
    if (!problems.empty()) throw CompileError("internal: compiled instance fails validation: " + problems.front());

    // ---- trace ----
    for (int c = 0; c < int(b.cycles.size()); ++c) {
        const auto& L = b.cycles[c].listing;
        int k = int(L.size());
        for (int i = 0; i < k; ++i) {
            int e = b.find(L[i], L[(i + 1) % k]);
            if (b.edges[e].cycles.size() == 1) {
                b.cycles[c].indicator = e;
                break;
            }
        }
        if (b.cycles[c].indicator < 0) throw CompileError("internal: cycle without a private edge");
    }
    tr.cycles = b.cycles;
    tr.bubble = root;
    tr.tree_node_face.assign(NV, -1);
    for (auto [n, f] : tree_nodes) tr.tree_node_face[n] = f;
    tr.owner_of_vertex.assign(NV, -1);
    for (int v = 0; v < NV; ++v)
        if (!on[v].empty()) tr.owner_of_vertex[v] = on[v].front().first;
}

}  // namespace

Compiled compile_ncl_to_ss(const ncl::Instance& in, const CompileOptions& opt) {
    auto bad = ncl::validate(in);
    if (!bad.empty()) throw CompileError("invalid NCL instance: " + bad.front());
    if (opt.check_protected && !ncl::verify_protected(in, opt.protected_budget))
        throw CompileError("an OR vertex can have both protected edges pointing in");

    DualTree dt = build_dual_tree(in);
    Builder b;
    Compiled out;
    TraceMap& tr = out.trace;
    const int V = in.num_vertices(), NE = int(in.edges.size());
    std::vector<std::map<int, Port>> ports(V);                  // per vertex: edge -> port
    std::vector<std::map<int, std::vector<int>>> corner_x0(V);  // per vertex: e -> x0s at corner (e, succ e)

    // ---- vertex gadgets ----
    for (int v = 0; v < V; ++v) {
        VertexSpec sp;
        sp.name = in.vertices[v].id;
        sp.kind = in.vertices[v].kind;
        sp.rot = in.rotation[v];
        for (int e : sp.rot) {
            sp.blue.push_back(in.edges[e].color == ncl::Color::Blue);
            sp.in.push_back(in.edges[e].head == v);
        }
        sp.L = in.vertices[v].prot[0];
        sp.R = in.vertices[v].prot[1];
        tr.vertices.push_back(add_vertex_gadget(b, sp, v, ports[v], corner_x0[v]));
    }

    // ---- edge gadgets ----
    std::vector<char> is_tree(NE, 0);
    for (int e : dt.tree_edges) is_tree[e] = 1;
    std::vector<std::vector<int>> top_x0(NE);
    std::vector<char> top_from_U(NE, 0);
    std::vector<int> exit_node(NE, -1);
    bool needs_flip = !in.target_from_to;
    int win_wA = -1, win_wB = -1, win_cycle_at = -1;
    for (int e = 0; e < NE; ++e) {
        int U = in.edges[e].head, W = in.edges[e].tail;
        int fU = dt.face_of(e, false), fW = dt.face_of(e, true);
        int F = fU;
        if (dt.depth[fW] < dt.depth[fU] || (dt.depth[fW] == dt.depth[fU] && fW < fU)) F = fW;
        top_from_U[e] = fU == F;
        EdgeOut eo = add_edge_gadget(b, in.edges[e].id, e, ports[U].at(e), ports[W].at(e), top_from_U[e], is_tree[e],
                                     e == in.target, needs_flip);
        eo.trace.U = U;
        eo.trace.W = W;
        eo.trace.entry_face = F;
        eo.trace.far_face = F == fU ? fW : fU;
        top_x0[e] = eo.top_x0;
        exit_node[e] = eo.trace.exit_node;
        if (e == in.target) win_wA = eo.win_wA, win_wB = eo.win_wB, win_cycle_at = eo.win_cycle_at;
        tr.edges.push_back(eo.trace);
    }

    // ---- win gadget ----
    int xW = add_win_gadget(b, tr.win, needs_flip, win_wA, win_wB, win_cycle_at, in.target);
    if (needs_flip)
        top_x0[in.target].push_back(xW);
    else
        top_x0[in.target].insert(top_x0[in.target].begin(), xW);

    // ---- face trees ----
    std::map<int, int> entrance_of;  // x0 -> tree node
    int h = -1;
    std::vector<std::pair<int, int>> tree_nodes;  // (vertex, face)
    for (int f = 0; f < int(dt.faces.size()); ++f) {
        std::vector<int> seq;  // x0 vertices, or z nodes encoded as -(z+1)
        for (Dart d : dt.faces[f]) {
            int e = d.edge;
            bool from_U = in.edges[e].head == d.from;
            int w = in.other(e, d.from);
            if (bool(top_from_U[e]) == from_U) {
                if (from_U)
                    seq.insert(seq.end(), top_x0[e].begin(), top_x0[e].end());
                else
                    seq.insert(seq.end(), top_x0[e].rbegin(), top_x0[e].rend());
            } else if (exit_node[e] >= 0) {
                seq.push_back(-(exit_node[e] + 1));
            }
            auto it = corner_x0[w].find(e);
            if (it != corner_x0[w].end()) seq.insert(seq.end(), it->second.begin(), it->second.end());
        }
        if (f == dt.root) {
            h = b.vtx("root");
        } else {
            auto it = std::find_if(seq.begin(), seq.end(), [](int x) { return x < 0; });
            if (it == seq.end()) throw CompileError("internal: face without exit");
            std::rotate(seq.begin(), it, seq.end());
        }
        for (int n : add_tree_path(b, seq, f == dt.root ? h : -1, entrance_of)) tree_nodes.push_back({n, f});
    }
    std::vector<int> exits;
    for (int z : exit_node)
        if (z >= 0) exits.push_back(z);
    finish(b, out, tree_nodes, exits, entrance_of, h, tr.win.s0, tr.win.target, false);
    return out;
}

namespace {

// A lone 3-cycle standing in for the edge gadget at a vertex port. It walks
// the rung like C1 does, so phase 0 means the edge points into the vertex.
int add_edge_stub(Builder& b, const std::string& nm, const Port& p, int phase) {
    int T0 = p.pre, B0 = p.post, xs = b.vtx(nm + ".x");
    int rung = b.find(T0, B0);
    int id = int(b.cycles.size());
    b.lit(T0, B0, p.cycle, 0);
    b.lit(T0, B0, id, p.alpha_c);
    int lt = b.edges[rung].u == T0 ? 0 : 1;
    int d = b.base_from(rung, p.cycle) ^ p.alpha_c ^ lt;
    return b.cycle({nm, Owner::Harness, -1, {T0, B0, xs}, d, phase, xs});
}

// A lone 3-cycle standing in for a vertex gadget at one end of an edge.
// Phase 1 holds the edge locked.
Port add_vertex_stub(Builder& b, const std::string& nm, int phase) {
    int a = b.vtx(nm + ".a"), bb = b.vtx(nm + ".b"), x = b.vtx(nm + ".x");
    b.edge(a, bb, Orange);
    int cy = b.cycle({nm, Owner::Harness, -1, {a, bb, x}, 0, phase, x});
    return Port{a, bb, cy, 0};
}

}  // namespace

std::string gadget_name(GadgetKind k) {
    switch (k) {
        case GadgetKind::EdgeBlue: return "EdgeBlue";
        case GadgetKind::EdgeRed: return "EdgeRed";
        case GadgetKind::And: return "And";
        case GadgetKind::ProtectedOr: return "ProtectedOr";
        case GadgetKind::Win: return "Win";
    }
    return "?";
}

size_t harness_ports(GadgetKind k) { return k == GadgetKind::Win ? 2 : 3; }

Harness build_harness(const HarnessSpec& spec) {
    if (spec.ports.size() != harness_ports(spec.kind)) throw CompileError("harness: wrong number of ports");
    const auto& P = spec.ports;
    auto reject = [](const char* why) { throw CompileError(std::string("harness: ") + why); };
    switch (spec.kind) {
        case GadgetKind::And:
            if (!P[0].in && !(P[1].in && P[2].in)) reject("AND needs blue or both reds pointing in");
            break;
        case GadgetKind::ProtectedOr:
            if (!P[0].in && !P[1].in && !P[2].in) reject("OR needs an edge pointing in");
            break;
        case GadgetKind::EdgeRed:
            if (!P[0].in && !P[1].in) reject("AND needs blue or both reds pointing in");
            [[fallthrough]];
        case GadgetKind::EdgeBlue:
            if (P[2].in) reject("the far end cannot lock an edge pointing away from it");
            break;
        case GadgetKind::Win:
            if (P[1].in) reject("the far end cannot lock an edge pointing away from it");
            break;
    }

    Builder b;
    Harness h;
    h.spec = spec;
    TraceMap tr;
    // entrances in the cyclic order they meet the outer face; `top` is the
    // edge gadget's entry side, whose direction along the face is tried both ways
    std::vector<std::vector<int>> blocks;
    int top = -1;
    std::map<int, std::vector<int>> corners;
    auto vertex = [&](ncl::Kind kind, std::vector<bool> blue, std::vector<bool> in) {
        VertexSpec vs;
        vs.name = kind == ncl::Kind::And ? "and" : "or";
        vs.kind = kind;
        vs.rot = {0, 1, 2};
        vs.blue = blue;
        vs.in = in;
        vs.L = 0, vs.R = 2;  // Or: ports are (L, M, R)
        std::map<int, Port> ports;
        tr.vertices.push_back(add_vertex_gadget(b, vs, 0, ports, corners));
        h.vertex = 0;
        return ports;
    };
    auto stub_edge = [&](const Port& p, bool in) {
        int c = add_edge_stub(b, "stub" + std::to_string(h.stub_cycle.size()), p, in ? 0 : 1);
        h.stub_cycle.push_back(c);
        return c;
    };
    auto stub_vertex = [&](int k) {
        Port p = add_vertex_stub(b, "stub" + std::to_string(k), P[k].in ? 1 : 0);
        h.stub_cycle.push_back(p.cycle);
        return p;
    };
    auto x0_if = [&](int c, bool free) { return free ? std::vector<int>{b.cycles[c].x0} : std::vector<int>{}; };
    auto edge = [&](const Port& pu, const Port& pw, bool win) {
        EdgeOut eo = add_edge_gadget(b, "e", 0, pu, pw, true, spec.tree, win, spec.needs_flip);
        eo.trace.U = 0;
        eo.trace.W = 1;
        tr.edges.push_back(eo.trace);
        h.edge = 0;
        return eo;
    };

    switch (spec.kind) {
        case GadgetKind::And:
        case GadgetKind::ProtectedOr: {
            bool is_and = spec.kind == GadgetKind::And;
            auto ports = vertex(is_and ? ncl::Kind::And : ncl::Kind::Or, {is_and, !is_and, !is_and},
                                {P[0].in, P[1].in, P[2].in});
            for (int k = 0; k < 3; ++k) {
                blocks.push_back(x0_if(stub_edge(ports.at(k), P[k].in), P[k].free));
                blocks.push_back(corners[k]);
            }
            break;
        }
        case GadgetKind::EdgeBlue:
        case GadgetKind::EdgeRed: {
            // port 0 of the AND carries the edge under test and points in
            bool blue0 = spec.kind == GadgetKind::EdgeBlue;
            auto ports = vertex(ncl::Kind::And, {blue0, !blue0, false}, {true, P[0].in, P[1].in});
            int s1 = stub_edge(ports.at(1), P[0].in), s2 = stub_edge(ports.at(2), P[1].in);
            Port pw = stub_vertex(2);
            EdgeOut eo = edge(ports.at(0), pw, false);
            blocks = {corners[0], x0_if(s1, P[0].free), corners[1], x0_if(s2, P[1].free), corners[2], eo.top_x0,
                      x0_if(pw.cycle, P[2].free)};
            top = 5;
            break;
        }
        case GadgetKind::Win: {
            Port pu = stub_vertex(0), pw = stub_vertex(1);
            EdgeOut eo = edge(pu, pw, true);
            int xW = add_win_gadget(b, tr.win, spec.needs_flip, eo.win_wA, eo.win_wB, eo.win_cycle_at, 0);
            if (spec.needs_flip)
                eo.top_x0.push_back(xW);
            else
                eo.top_x0.insert(eo.top_x0.begin(), xW);
            blocks = {x0_if(pu.cycle, P[0].free), eo.top_x0, x0_if(pw.cycle, P[1].free)};
            top = 1;
            break;
        }
    }

    int special, target;
    if (spec.kind == GadgetKind::Win) {
        special = tr.win.s0;
        target = tr.win.target;
    } else {
        // a token that never matters, next to a target it cannot reach
        special = b.vtx("harness.special");
        target = b.vtx("harness.target");
        b.edge(target, special, Purple);
        tr.win.s0 = special;
        tr.win.target = target;
    }
    int root = b.vtx("root");
    std::vector<int> exits;
    if (h.edge >= 0 && tr.edges[0].exit_node >= 0) exits.push_back(tr.edges[0].exit_node);
    for (int attempt = 0;; ++attempt) {
        Builder bb = b;
        std::vector<int> seq;
        for (int i = 0; i < int(blocks.size()); ++i) {
            if (i == top && attempt == 1)
                seq.insert(seq.end(), blocks[i].rbegin(), blocks[i].rend());
            else
                seq.insert(seq.end(), blocks[i].begin(), blocks[i].end());
        }
        if (spec.kind != GadgetKind::Win) seq.push_back(-(special + 1));
        std::map<int, int> entrance_of;
        std::vector<std::pair<int, int>> nodes;
        for (int n : add_tree_path(bb, seq, root, entrance_of)) nodes.push_back({n, 0});
        h.compiled = Compiled{};
        h.compiled.trace = tr;
        try {
            finish(bb, h.compiled, nodes, exits, entrance_of, root, special, target, true);
            return h;
        } catch (const CompileError& e) {
            if (attempt == 1 || top < 0 || std::string(e.what()).find("planar") == std::string::npos) throw;
        }
    }
}

int cycle_phase(const Compiled& c, const subway::State& s, int cycle) {
    const Cycle& y = c.trace.cycles[cycle];
    return y.phase ^ s.flipped[y.indicator];
}

EdgeDir edge_direction(const Compiled& c, const subway::State& s, int e) {
    const EdgeTrace& et = c.trace.edges[e];
    if (cycle_phase(c, s, et.cycles[0]) == 0) return EdgeDir::TowardU;
    if (cycle_phase(c, s, et.cycles[4]) == 1) return EdgeDir::TowardW;
    return EdgeDir::Partial;
}

std::optional<ncl::State> project_ncl(const Compiled& c, const subway::State& s) {
    ncl::State n;
    for (int e = 0; e < int(c.trace.edges.size()); ++e) {
        EdgeDir d = edge_direction(c, s, e);
        if (d == EdgeDir::Partial) return std::nullopt;
        n.flipped.push_back(d == EdgeDir::TowardW ? 1 : 0);
    }
    return n;
}

int vertex_state(const Compiled& c, const subway::State& s, int v) {
    const VertexTrace& vt = c.trace.vertices[v];
    if (vt.kind == ncl::Kind::And) return int(vt.blue_locked) ^ cycle_phase(c, s, vt.cycles[0]) ^ 1;
    int r = cycle_phase(c, s, vt.cycles[0]) * 4 + cycle_phase(c, s, vt.cycles[1]) * 2 + cycle_phase(c, s, vt.cycles[2]);
    switch (r) {
        case 0b000: return 1;
        case 0b100: return 2;
        case 0b110: return 3;
        case 0b111: return 4;
        case 0b011: return 5;
    }
    return 0;
}

bool at_rest(const Compiled& c, const subway::State& s) {
    for (int v = 0; v < int(s.token.size()); ++v)
        if (s.token[v] == subway::NoToken && v != c.trace.win.target && c.trace.tree_node_face[v] < 0) return false;
    return true;
}

std::string trace_to_json(const Compiled& c) {
    using nlohmann::json;
    const auto& tr = c.trace;
    const auto& ids = c.instance.vertex_ids;
    json j;
    json cyc = json::array();
    for (const Cycle& y : tr.cycles) {
        json l = json::array();
        for (int v : y.listing) l.push_back(ids[v]);
        cyc.push_back({{"name", y.name}, {"vertices", l}, {"entrance", ids[y.x0]}});
    }
    j["cycles"] = cyc;
    json es = json::object();
    for (const EdgeTrace& et : tr.edges) {
        json x = json::array();
        for (int k : et.cycles) x.push_back(tr.cycles[k].name);
        es[std::to_string(et.edge)] = {{"cycles", x}, {"twist_u", et.twist_u}, {"twist_w", et.twist_w},
                                       {"exit", et.exit_node >= 0 ? json(ids[et.exit_node]) : json(nullptr)}};
    }
    j["edges"] = es;
    j["bubble"] = ids[tr.bubble];
    j["special"] = ids[tr.win.s0];
    j["target"] = ids[tr.win.target];
    return j.dump(2) + "\n";
}

}  // namespace pspace::gadget
