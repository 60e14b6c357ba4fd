#pragma once
#include <string>
#include <utility>
#include <vector>

namespace pspace {

// Combinatorial map: endpoints per edge plus CCW rotation per vertex.
struct Dart {
    int edge;
    int from;
    bool operator==(const Dart&) const = default;
};

struct Embedding {
    std::vector<std::pair<int, int>> ends;   // edge -> (u, v)
    std::vector<std::vector<int>> rotation;  // vertex -> CCW edge list

    int num_vertices() const { return int(rotation.size()); }
    int other(int e, int v) const { return ends[e].first == v ? ends[e].second : ends[e].first; }
    // dart following d around its face
    Dart next(Dart d) const;
    std::vector<std::vector<Dart>> faces() const;
    // messages for rotation/incidence mismatches and Euler failures
    std::vector<std::string> check(const std::vector<std::string>& names) const;
};

}  // namespace pspace
