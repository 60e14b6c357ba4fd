#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pspace/embedding.hpp"

namespace pspace::ncl {

enum class Kind : uint8_t { And, Or };
enum class Color : uint8_t { Red, Blue };

inline int weight(Color c) { return c == Color::Red ? 1 : 2; }

struct Vertex {
    std::string id;
    Kind kind = Kind::And;
    int prot[2] = {-1, -1};  // protected edge indices (Or only)
};

struct Edge {
    std::string id;
    int tail = 0;  // initial orientation tail->head
    int head = 0;
    Color color = Color::Red;
};

struct Instance {
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> rotation;  // CCW incident edge indices
    int target = 0;
    bool target_from_to = true;  // winning orientation is from->to of the JSON edge

    int num_vertices() const { return int(vertices.size()); }
    Embedding embedding() const;
    int other(int e, int v) const { return edges[e].tail == v ? edges[e].head : edges[e].tail; }
};

// 1 = edge reversed relative to its initial orientation
struct State {
    std::vector<uint8_t> flipped;
    bool operator==(const State&) const = default;
};

class IllegalFlip : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

State initial_state(const Instance& in);
inline int head_of(const Instance& in, const State& s, int e) {
    return s.flipped[e] ? in.edges[e].tail : in.edges[e].head;
}
int in_weight(const Instance& in, const State& s, int v);
bool satisfied(const Instance& in, const State& s);

std::vector<int> legal_flips(const Instance& in, const State& s);
State apply_flip(const Instance& in, const State& s, int e);
bool is_won(const Instance& in, const State& s);

// Structural checks: degree 3, AND = 2 red + 1 blue, OR = 3 blue with a
// protected pair, Euler, initial orientation satisfied.
std::vector<std::string> validate(const Instance& in);

class BudgetExceeded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Exhaustive over reachable states; throws BudgetExceeded.
bool verify_protected(const Instance& in, size_t budget = 10'000'000);

// Lock-relevant configuration at an OR: bitmask of incident (rotation-order)
// edges pointing in.
uint8_t or_inward_mask(const Instance& in, const State& s, int v);

Instance from_json_text(const std::string& text);
std::string to_json_text(const Instance& in, const State& s);

}  // namespace pspace::ncl
