#pragma once
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pspace/ncl.hpp"
#include "pspace/subway.hpp"

namespace pspace::gadget {

enum class Owner { Vertex, Edge, Win, Harness };

// A rotating cycle. `listing` is the vertex order; the cycle's arrows at its
// reference phase follow the listing when dir == 0.
struct Cycle {
    std::string name;
    Owner owner = Owner::Vertex;
    int owner_id = -1;
    std::vector<int> listing;
    int dir = 0;
    int phase = 0;       // actual phase relative to the reference
    int x0 = -1;         // entrance vertex on the cycle
    int entrance = -1;   // face-tree node hanging off x0
    int indicator = -1;  // an SS edge only this cycle touches
};

struct DualTree {
    std::vector<std::vector<Dart>> faces;
    std::vector<int> face_of_dart;  // index 2*e + (from == tail ? 0 : 1)
    int root = 0;
    std::vector<int> parent_edge;  // per face; -1 for the root
    std::vector<int> depth;
    std::vector<int> tree_edges;  // NCL edge ids carrying an exit

    int face_of(int e, bool from_tail) const { return face_of_dart[2 * e + (from_tail ? 0 : 1)]; }
};

DualTree build_dual_tree(const ncl::Instance& in);

struct EdgeTrace {
    int edge = -1;
    int U = -1, W = -1;        // NCL vertices: initial head / initial tail
    int cycles[5] = {-1, -1, -1, -1, -1};
    bool twist_u = false;      // overlap link between the first two cycles
    bool twist_w = false;      // and between the last two
    int entry_face = -1, far_face = -1;
    int exit_node = -1;        // z, first node of the child face tree
    int exit_vertex = -1;      // q on the middle cycle
};

struct VertexTrace {
    int vertex = -1;
    ncl::Kind kind = ncl::Kind::And;
    std::vector<int> cycles;   // And: {Y}; Or: {Y1 (middle), Y2 (left), Y3 (right)}
    int left = -1, middle = -1, right = -1;  // Or port edges
    bool blue_locked = true;   // And reference lockset: {blue} or {red, red}
    int initial = 1;           // Or state index at start
};

struct WinTrace {
    int cycle = -1;
    int attached = -1;  // edge-gadget cycle it shares an edge with
    bool needs_flip = false;
    int s0 = -1, s1 = -1, target = -1;
};

struct TraceMap {
    std::vector<Cycle> cycles;
    std::vector<EdgeTrace> edges;
    std::vector<VertexTrace> vertices;
    WinTrace win;
    int bubble = -1;                 // root-face empty node
    std::vector<int> tree_node_face;  // SS vertex -> CL face for face-tree nodes, -1 otherwise
    std::vector<int> owner_of_vertex; // SS vertex -> cycle index of first owning cycle, -1 for tree nodes
};

struct Compiled {
    subway::Instance instance;
    subway::State state;
    TraceMap trace;
};

class CompileError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct CompileOptions {
    bool check_protected = true;  // run verify_protected first
    size_t protected_budget = 2'000'000;
};

Compiled compile_ncl_to_ss(const ncl::Instance& in, const CompileOptions& opt = {});

// ---- abstract projections (used by verify) ----

// Phase of a cycle read from its indicator edge (meaningful at rest).
int cycle_phase(const Compiled& c, const subway::State& s, int cycle);

enum class EdgeDir { TowardU, TowardW, Partial };
EdgeDir edge_direction(const Compiled& c, const subway::State& s, int ncl_edge);
// NCL orientation implied by a Subway state; nullopt if some edge is partial
std::optional<ncl::State> project_ncl(const Compiled& c, const subway::State& s);
// 1..5 for Or, 0/1 (blue locked / reds locked) for And
int vertex_state(const Compiled& c, const subway::State& s, int ncl_vertex);
// true when the bubble sits on a face-tree node
bool at_rest(const Compiled& c, const subway::State& s);

std::string trace_to_json(const Compiled& c);

// ---- harnesses (used by verify) ----
// One gadget built by the same code as the compiler, with stubs in place of
// its neighbours and a plain access path in place of the face trees.
enum class GadgetKind { EdgeBlue, EdgeRed, And, ProtectedOr, Win };
std::string gadget_name(GadgetKind k);

// Edge stubs: `in` = points into the gadget. Vertex stubs: `in` = holds the
// edge locked. A pinned stub has no entrance and never turns.
struct PortBoundary {
    bool free = true;
    bool in = true;
};
// Ports: And (blue, red, red); ProtectedOr (left, middle, right);
// EdgeBlue/EdgeRed (the AND's two other ports, far vertex); Win (near
// vertex, far vertex). The edge under test starts pointing at the near end.
struct HarnessSpec {
    GadgetKind kind = GadgetKind::And;
    std::vector<PortBoundary> ports;
    bool tree = false;        // edge carries an exit to the far face
    bool needs_flip = false;  // Win: the target wins once flipped
};
size_t harness_ports(GadgetKind k);
struct Harness {
    Compiled compiled;
    HarnessSpec spec;
    std::vector<int> stub_cycle;  // per port
    int vertex = -1;              // index into trace.vertices, -1 when absent
    int edge = -1;                // index into trace.edges
};
// Throws CompileError when the boundary contradicts the gadget's locks.
Harness build_harness(const HarnessSpec& spec);

}  // namespace pspace::gadget
