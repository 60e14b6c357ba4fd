#include "pspace/embedding.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <numeric>

namespace pspace {

Dart Embedding::next(Dart d) const {
    int w = other(d.edge, d.from);
    const auto& rot = rotation[w];
    auto it = std::find(rot.begin(), rot.end(), d.edge);
    size_t i = size_t(it - rot.begin());
    return {rot[(i + 1) % rot.size()], w};
}

std::vector<std::vector<Dart>> Embedding::faces() const {
    int E = int(ends.size());
    std::vector<uint8_t> seen(2 * size_t(E), 0);
    auto code = [&](Dart d) { return 2 * d.edge + (ends[d.edge].first == d.from ? 0 : 1); };
    std::vector<std::vector<Dart>> out;
    for (int s = 0; s < 2 * E; ++s) {
        if (seen[s]) continue;
        Dart d{s / 2, s % 2 == 0 ? ends[s / 2].first : ends[s / 2].second};
        std::vector<Dart> f;
        while (!seen[code(d)]) {
            seen[code(d)] = 1;
            f.push_back(d);
            d = next(d);
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<std::string> Embedding::check(const std::vector<std::string>& names) const {
    std::vector<std::string> bad;
    int V = num_vertices();
    std::vector<std::vector<int>> inc(V);
    for (int e = 0; e < int(ends.size()); ++e) {
        auto [u, v] = ends[e];
        if (u < 0 || v < 0 || u >= V || v >= V) {
            bad.push_back("edge endpoint out of range");
            return bad;
        }
        if (u == v) {
            bad.push_back("self-loop at " + names[u]);
            return bad;
        }
        inc[u].push_back(e);
        inc[v].push_back(e);
    }
    for (int v = 0; v < V; ++v) {
        auto a = inc[v], b = rotation[v];
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) bad.push_back("rotation at " + names[v] + " does not list exactly its incident edges");
    }
    if (!bad.empty()) return bad;
    std::vector<int> comp(V);
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
    for (auto [u, v] : ends) comp[find(u)] = find(v);
    std::map<int, std::array<long, 3>> cnt;
    for (int v = 0; v < V; ++v) cnt[find(v)][0]++;
    for (auto [u, v] : ends) cnt[find(u)][1]++;
    for (auto& f : faces()) cnt[find(f[0].from)][2]++;
    for (auto& [root, c] : cnt) {
        long f = c[1] == 0 ? 1 : c[2];
        if (c[0] - c[1] + f != 2)
            bad.push_back("Euler check fails on the component of " + names[root] + " (V-E+F=" +
                          std::to_string(c[0] - c[1] + f) + ")");
    }
    return bad;
}

}  // namespace pspace
