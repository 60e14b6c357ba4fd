#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pspace/embedding.hpp"

namespace pspace::subway {

constexpr int Purple = 0;
constexpr int Orange = 1;
constexpr int8_t NoToken = -1;

struct Edge {
    std::string id;
    int tail = 0;  // initial direction tail->head when oriented
    int head = 0;
    int color = 0;
};

struct Instance {
    bool oriented = true;
    int colors = 2;
    std::vector<std::string> vertex_ids;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> rotation;  // per vertex, CCW incident edge indices
    int special = 0;                         // vertex holding the special token initially
    int target = 0;
    bool numeric_ids = false;  // JSON ids were integers

    int num_vertices() const { return int(vertex_ids.size()); }
    int other(int e, int v) const { return edges[e].tail == v ? edges[e].head : edges[e].tail; }
    // incident edge lists derived from endpoints (rotation order not implied)
    std::vector<std::vector<int>> incidence() const;
    int vertex_index(const std::string& id) const;  // -1 when absent
    int edge_index(const std::string& id) const;
};

struct State {
    std::vector<int8_t> token;    // colour or NoToken
    std::vector<uint8_t> flipped;  // per edge, 1 = reversed relative to Instance::edges
    int special = 0;               // vertex holding the special token
    bool operator==(const State&) const = default;
};

struct Move {
    int edge = 0;
    int from = 0;  // vertex the token leaves
    bool operator==(const Move&) const = default;
};

class IllegalMove : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline int tail_of(const Instance& in, const State& s, int e) {
    return s.flipped[e] ? in.edges[e].head : in.edges[e].tail;
}
inline int head_of(const Instance& in, const State& s, int e) {
    return s.flipped[e] ? in.edges[e].tail : in.edges[e].head;
}

std::vector<Move> legal_moves(const Instance& in, const State& s);
State apply_move(const Instance& in, const State& s, Move m);
void apply_move_inplace(const Instance& in, State& s, Move m);
bool is_won(const Instance& in, const State& s);
bool is_valid_vertex(const Instance& in, int v);

Embedding embedding(const Instance& in);

// Empty when everything checks out. Strict adds valid vertices and the
// bubble count (one empty vertex besides an empty target).
std::vector<std::string> validate_instance(const Instance& in, const State& s, bool strict);

int count_empty(const State& s);
std::string state_key(const Instance& in, const State& s);

// JSON (see README). Throws std::runtime_error with a message on malformed input.
struct Loaded {
    Instance instance;
    State state;
};
Loaded from_json_text(const std::string& text);
std::string to_json_text(const Instance& in, const State& s);
std::string color_name(int c);

}  // namespace pspace::subway
