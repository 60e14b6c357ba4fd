#pragma once
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pspace/rush.hpp"
#include "pspace/subway.hpp"

namespace pspace::grid {

// Sides are numbered counter-clockwise so that side+1 is a left turn.
enum Side : int { Right = 0, Up = 1, Left = 2, Down = 3 };

class LayoutError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// The board has no cell for the target vertex. The special token's last
// two hops are s0 -> p -> u; `u` is the target's only neighbour.
struct WinPattern {
    int s0 = -1, p = -1, u = -1, t = -1;
    int e_s0p = -1, e_pu = -1, e_ut = -1;
};
// Throws LayoutError naming the first rule that fails.
WinPattern find_win_pattern(const subway::Instance& in, const subway::State& s);

struct PortAssignment {
    std::vector<std::map<int, int>> side;  // vertex -> (edge -> Side)
};
// Purple on Left/Right, orange on Up/Down, counter-clockwise order kept.
// The p-u edge is given a vertical side here and moved to p's left by emit.
PortAssignment assign_ports(const subway::Instance& in, const WinPattern& w);

struct GridLayout {
    int width = 0, height = 0;
    std::vector<rush::Cell> vertex_cell;           // row -1: not drawn (the target)
    std::vector<std::vector<rush::Cell>> path;     // per edge, tail..head of in.edges, endpoints included
    int coarse_w = 0, coarse_h = 0, bends = 0;
};
GridLayout orthogonal_layout(const subway::Instance& in, const PortAssignment& ports, const WinPattern& w);
// Disjointness, unit steps, one turn at least, colour axis at both ends.
std::vector<std::string> validate_layout(const subway::Instance& in, const GridLayout& g, const WinPattern& w);

struct AbstractionMap {
    int width = 0, height = 0;
    std::vector<int> vertex_cell;              // row-major index, -1 if not drawn
    std::vector<std::vector<int>> corridor;    // interior cells, tail..head of in.edges
    std::vector<int> cell_vertex;              // -1 when not a vertex cell
    std::vector<int> cell_edge;                // -1 when not a corridor cell
    int special_cell = -1;  // corridor cell the special car starts in
    int special_home = -1;  // vertex whose token that car stands for there
    int goal_cell = -1;
    int omitted_vertex = -1, omitted_edge = -1;
    int terminal_vertex = -1;  // special here already means a win (u)
};

struct Emitted {
    rush::State state;
    AbstractionMap map;
    GridLayout layout;
};
Emitted emit_board(const subway::Instance& in, const subway::State& s, const GridLayout& g, const WinPattern& w);
// Whole pipeline.
Emitted compile_ss_to_rh(const subway::Instance& in, const subway::State& s);

// At-rest read-out; nullopt when the bubble is in a corridor or some
// corridor is half shifted. `code(cell)`: 0 empty, 1 horizontal, 2 vertical.
template <class CodeFn>
std::optional<subway::State> project_rest(const subway::Instance& in, const AbstractionMap& m, CodeFn&& code,
                                          int special_cell);
std::optional<subway::State> project_rest(const subway::Instance& in, const AbstractionMap& m, const rush::State& r);

std::string map_to_json(const AbstractionMap& m);
std::string render_svg(const rush::State& s);

struct BisimReport {
    bool ok = false;
    bool budget_exceeded = false;
    size_t ss_states = 0, rush_states = 0, rest_states = 0;
    int max_corridor_moves = 0;
    bool ss_solvable = false, rush_solvable = false;
    std::string message;  // first counterexample when !ok
};
BisimReport check_bisimulation(const subway::Instance& in, const subway::State& s, const Emitted& e, size_t budget);

// ---- template body ----
template <class CodeFn>
std::optional<subway::State> project_rest(const subway::Instance& in, const AbstractionMap& m, CodeFn&& code,
                                          int special_cell) {
    subway::State out;
    int V = in.num_vertices(), E = int(in.edges.size());
    out.token.assign(V, subway::NoToken);
    out.flipped.assign(E, 0);
    int empties = 0;
    for (int v = 0; v < V; ++v) {
        int c = m.vertex_cell[v];
        if (c < 0) continue;
        int k = code(c);
        if (k == 0) ++empties;
        else out.token[v] = int8_t(k == 1 ? subway::Purple : subway::Orange);
    }
    if (empties != 1) return std::nullopt;
    const int W = m.width;
    for (int e = 0; e < E; ++e) {
        const auto& cs = m.corridor[e];
        if (cs.empty()) continue;
        int a = m.vertex_cell[in.edges[e].tail], b = m.vertex_cell[in.edges[e].head];
        bool fwd = true, bwd = true;
        for (size_t i = 0; i < cs.size(); ++i) {
            int k = code(cs[i]);
            if (k == 0) return std::nullopt;
            int nx = i + 1 < cs.size() ? cs[i + 1] : b;
            int pv = i > 0 ? cs[i - 1] : a;
            bool vert = k == 2;
            if (vert != (std::abs(nx - cs[i]) == W)) fwd = false;
            if (vert != (std::abs(pv - cs[i]) == W)) bwd = false;
        }
        if (fwd == bwd) {
            if (!fwd) return std::nullopt;
            throw std::logic_error("corridor without a turn");
        }
        out.flipped[e] = fwd ? 0 : 1;
    }
    if (special_cell == m.special_cell) out.special = m.special_home;
    else if (special_cell >= 0 && m.cell_vertex[special_cell] >= 0) out.special = m.cell_vertex[special_cell];
    else return std::nullopt;
    return out;
}

}  // namespace pspace::grid
