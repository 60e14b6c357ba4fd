#pragma once
// Generic breadth-first search over fixed-length byte keys.
#include <chrono>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pspace::solve {

class BudgetExceeded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Hash set of fixed-length keys; ids are insertion order.
class KeyStore {
  public:
    explicit KeyStore(size_t key_len) : len_(key_len ? key_len : 1) { table_.assign(1024, Empty); }

    size_t size() const { return count_; }
    size_t key_len() const { return len_; }
    std::string_view key(uint32_t id) const { return {reinterpret_cast<const char*>(&arena_[size_t(id) * len_]), len_}; }

    // returns (id, inserted)
    std::pair<uint32_t, bool> insert(std::string_view k) {
        if (k.size() != len_) throw std::logic_error("KeyStore: key length changed");
        if ((count_ + 1) * 2 > table_.size()) grow();
        size_t mask = table_.size() - 1;
        size_t h = hash(k) & mask;
        while (table_[h] != Empty) {
            if (std::memcmp(&arena_[size_t(table_[h]) * len_], k.data(), len_) == 0) return {table_[h], false};
            h = (h + 1) & mask;
        }
        uint32_t id = uint32_t(count_++);
        arena_.insert(arena_.end(), k.begin(), k.end());
        table_[h] = id;
        return {id, true};
    }

    long find(std::string_view k) const {
        size_t mask = table_.size() - 1;
        size_t h = hash(k) & mask;
        while (table_[h] != Empty) {
            if (std::memcmp(&arena_[size_t(table_[h]) * len_], k.data(), len_) == 0) return table_[h];
            h = (h + 1) & mask;
        }
        return -1;
    }

  private:
    static constexpr uint32_t Empty = 0xffffffffu;
    static uint64_t hash(std::string_view k) {
        uint64_t h = 1469598103934665603ull;
        size_t i = 0;
        for (; i + 8 <= k.size(); i += 8) {
            uint64_t w;
            std::memcpy(&w, k.data() + i, 8);
            h = (h ^ w) * 0x9E3779B97F4A7C15ull;
            h ^= h >> 29;
        }
        for (; i < k.size(); ++i) h = (h ^ uint8_t(k[i])) * 1099511628211ull;
        h ^= h >> 32;
        return h * 0xD6E8FEB86659FD93ull;
    }
    void grow() {
        std::vector<uint32_t> t(table_.size() * 2, Empty);
        size_t mask = t.size() - 1;
        for (uint32_t id = 0; id < count_; ++id) {
            size_t h = hash(key(id)) & mask;
            while (t[h] != Empty) h = (h + 1) & mask;
            t[h] = id;
        }
        table_.swap(t);
    }

    size_t len_;
    size_t count_ = 0;
    std::vector<uint8_t> arena_;
    std::vector<uint32_t> table_;
};

struct SearchResult {
    bool solvable = false;
    bool budget_exceeded = false;
    std::vector<std::string> solution;  // move notation per step
    size_t explored = 0;
    size_t frontier_peak = 0;
    double wall_ms = 0;
};

// Problem P provides:
//   std::string initial() const;
//   template <class F> void expand(std::string_view key, F&& emit) const;  // emit(std::string_view, uint32_t move)
//   bool won(std::string_view key) const;
//   std::string notate(std::string_view key, uint32_t move) const;
template <class P>
SearchResult bfs(const P& p, size_t budget) {
    auto t0 = std::chrono::steady_clock::now();
    SearchResult r;
    std::string init = p.initial();
    KeyStore seen(init.size());
    std::vector<uint32_t> parent;
    std::vector<uint32_t> via;
    seen.insert(init);
    parent.push_back(0);
    via.push_back(0);
    long goal = p.won(init) ? 0 : -1;
    size_t level_end = 1, head = 0;
    std::string buf;
    while (goal < 0 && head < seen.size()) {
        if (head == level_end) level_end = seen.size();
        r.frontier_peak = std::max(r.frontier_peak, level_end - head);
        uint32_t cur = uint32_t(head++);
        buf.assign(seen.key(cur));
        p.expand(buf, [&](std::string_view k, uint32_t mv) {
            if (goal >= 0) return;
            auto [id, fresh] = seen.insert(k);
            if (!fresh) return;
            parent.push_back(cur);
            via.push_back(mv);
            if (p.won(k)) goal = id;
            if (seen.size() > budget) throw BudgetExceeded("state budget exceeded");
        });
    }
    r.explored = seen.size();
    if (goal >= 0) {
        r.solvable = true;
        std::vector<uint32_t> chain;
        for (uint32_t x = uint32_t(goal); x != 0; x = parent[x]) chain.push_back(x);
        for (auto it = chain.rbegin(); it != chain.rend(); ++it)
            r.solution.push_back(p.notate(seen.key(parent[*it]), via[*it]));
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// Budget overrun reported as a flag instead of an exception.
template <class P>
SearchResult bfs_flagged(const P& p, size_t budget) {
    try {
        return bfs(p, budget);
    } catch (const BudgetExceeded&) {
        SearchResult r;
        r.budget_exceeded = true;
        r.explored = budget;
        return r;
    }
}

// Visit every reachable key (no early exit). Returns the store.
template <class P, class F>
KeyStore explore(const P& p, size_t budget, F&& on_state) {
    std::string init = p.initial();
    KeyStore seen(init.size());
    seen.insert(init);
    std::string buf;
    for (size_t head = 0; head < seen.size(); ++head) {
        buf.assign(seen.key(uint32_t(head)));
        on_state(uint32_t(head), std::string_view(buf));
        p.expand(buf, [&](std::string_view k, uint32_t) {
            if (seen.insert(k).second && seen.size() > budget) throw BudgetExceeded("state budget exceeded");
        });
    }
    return seen;
}

}  // namespace pspace::solve
