#pragma once
#include <string>
#include <string_view>
#include <vector>

#include "pspace/ncl.hpp"
#include "pspace/rush.hpp"
#include "pspace/search.hpp"
#include "pspace/subway.hpp"

namespace pspace::solve {

// Rush Hour with unit cars. Key: sorted empty cells, special cell, then one
// orientation bit per cell that can ever hold either orientation.
class RushProblem {
  public:
    explicit RushProblem(const rush::State& s);

    std::string initial() const { return init_; }
    template <class F>
    void expand(std::string_view key, F&& emit) const;
    bool won(std::string_view key) const;
    std::string notate(std::string_view key, uint32_t move) const;

    std::string encode(const rush::State& s) const;
    rush::State decode(std::string_view key) const;
    // cell index (row-major) of the special car / empty cells
    int special_cell(std::string_view key) const { return rd(key, nempty_); }
    int empty_cell(std::string_view key, int i) const { return rd(key, i); }
    int num_empty() const { return nempty_; }
    // 0 empty, 1 horizontal, 2 vertical (special included)
    int cell_code(std::string_view key, int cell) const;
    const rush::Board& board() const { return board_; }

  private:
    // cell ids take idb_ bytes: 2, or 3 on boards past 65535 cells
    int rd(std::string_view k, int i) const {
        const char* p = k.data() + idb_ * i;
        int v = uint8_t(p[0]) | (uint8_t(p[1]) << 8);
        return idb_ == 3 ? v | (uint8_t(p[2]) << 16) : v;
    }
    void wr(std::string& k, int i, int v) const {
        char* p = k.data() + idb_ * i;
        p[0] = char(v & 0xff);
        p[1] = char((v >> 8) & 0xff);
        if (idb_ == 3) p[2] = char(v >> 16);
    }
    bool vbit(std::string_view k, int cell) const {
        int b = var_index_[cell];
        return (uint8_t(k[bits_off_ + b / 8]) >> (b % 8)) & 1;
    }
    void set_vbit(std::string& k, int cell, bool v) const {
        int b = var_index_[cell];
        uint8_t& x = reinterpret_cast<uint8_t&>(k[bits_off_ + b / 8]);
        x = uint8_t(v ? (x | (1u << (b % 8))) : (x & ~(1u << (b % 8))));
    }
    bool is_empty(std::string_view k, int cell) const {
        for (int i = 0; i < nempty_; ++i)
            if (rd(k, i) == cell) return true;
        return false;
    }

    rush::Board board_;
    int nempty_ = 0;
    int bits_off_ = 0;
    int idb_ = 2;
    std::vector<int> var_index_;       // -1 if the cell's orientation never changes
    std::vector<uint8_t> fixed_vert_;  // orientation of non-variable cells
    std::string init_;
};

template <class F>
void RushProblem::expand(std::string_view key, F&& emit) const {
    const int W = board_.width, H = board_.height;
    std::string k;
    for (int i = 0; i < nempty_; ++i) {
        int e = rd(key, i);
        int er = e / W, ec = e % W;
        // dir: 0 car moves down into e (car above), 1 up, 2 right, 3 left
        static const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
            int r = er + dr[d], c = ec + dc[d];
            if (r < 0 || c < 0 || r >= H || c >= W) continue;
            int n = r * W + c;
            if (board_.fixed[n] || is_empty(key, n)) continue;
            bool vert = var_index_[n] >= 0 ? vbit(key, n) : fixed_vert_[n];
            if (vert != (d < 2)) continue;
            k.assign(key);
            wr(k, i, n);
            if (rd(key, nempty_) == n) wr(k, nempty_, e);
            if (var_index_[n] >= 0) set_vbit(k, n, false);
            if (var_index_[e] >= 0) set_vbit(k, e, vert);
            // keep empties sorted
            for (int a = i; a > 0 && rd(k, a - 1) > rd(k, a); --a) {
                int x = rd(k, a);
                wr(k, a, rd(k, a - 1));
                wr(k, a - 1, x);
            }
            for (int a = i; a + 1 < nempty_ && rd(k, a) > rd(k, a + 1); ++a) {
                int x = rd(k, a);
                wr(k, a, rd(k, a + 1));
                wr(k, a + 1, x);
            }
            emit(std::string_view(k), uint32_t(n * 4 + d));
        }
    }
}

// Oriented or undirected Subway Shuffle. Key: sorted empty vertices, special
// vertex, token colour bytes/bits, edge flip bits.
class SubwayProblem {
  public:
    SubwayProblem(const subway::Instance& in, const subway::State& s);

    std::string initial() const { return init_; }
    template <class F>
    void expand(std::string_view key, F&& emit) const;
    bool won(std::string_view key) const { return rd(key, nempty_) == in_.target; }
    std::string notate(std::string_view key, uint32_t move) const;

    std::string encode(const subway::State& s) const;
    subway::State decode(std::string_view key) const;
    int num_empty() const { return nempty_; }
    int empty_vertex(std::string_view key, int i) const { return rd(key, i); }
    int token(std::string_view key, int v) const;  // -1 empty
    bool flipped(std::string_view key, int e) const {
        return (uint8_t(key[flip_off_ + e / 8]) >> (e % 8)) & 1;
    }
    const subway::Instance& instance() const { return in_; }

  private:
    static int rd(std::string_view k, int i) { return uint8_t(k[2 * i]) | (uint8_t(k[2 * i + 1]) << 8); }
    static void wr(std::string& k, int i, int v) {
        k[2 * i] = char(v & 0xff);
        k[2 * i + 1] = char(v >> 8);
    }
    void set_token(std::string& k, int v, int c) const;  // c = -1 clears
    const subway::Instance& in_;
    std::vector<std::vector<int>> inc_;
    int nempty_ = 0;
    int tok_off_ = 0, flip_off_ = 0;
    std::string init_;
};

template <class F>
void SubwayProblem::expand(std::string_view key, F&& emit) const {
    std::string k;
    for (int i = 0; i < nempty_; ++i) {
        int h = rd(key, i);
        for (int e : inc_[h]) {
            const subway::Edge& ed = in_.edges[e];
            int t = in_.other(e, h);
            if (in_.oriented) {
                int head = flipped(key, e) ? ed.tail : ed.head;
                if (head != h) continue;
            }
            if (token(key, t) != ed.color) continue;
            k.assign(key);
            wr(k, i, t);
            if (rd(key, nempty_) == t) wr(k, nempty_, h);
            set_token(k, h, ed.color);
            set_token(k, t, -1);
            if (in_.oriented) k[flip_off_ + e / 8] = char(uint8_t(k[flip_off_ + e / 8]) ^ (1u << (e % 8)));
            for (int a = i; a > 0 && rd(k, a - 1) > rd(k, a); --a) {
                int x = rd(k, a);
                wr(k, a, rd(k, a - 1));
                wr(k, a - 1, x);
            }
            for (int a = i; a + 1 < nempty_ && rd(k, a) > rd(k, a + 1); ++a) {
                int x = rd(k, a);
                wr(k, a, rd(k, a + 1));
                wr(k, a + 1, x);
            }
            emit(std::string_view(k), uint32_t(e * 2 + (t == ed.tail ? 0 : 1)));
        }
    }
}

class NclProblem {
  public:
    explicit NclProblem(const ncl::Instance& in) : in_(in) {}
    std::string initial() const { return encode(ncl::initial_state(in_)); }
    template <class F>
    void expand(std::string_view key, F&& emit) const {
        ncl::State s = decode(key);
        for (int e : ncl::legal_flips(in_, s)) {
            s.flipped[e] ^= 1;
            emit(std::string_view(encode(s)), uint32_t(e));
            s.flipped[e] ^= 1;
        }
    }
    bool won(std::string_view key) const { return ncl::is_won(in_, decode(key)); }
    std::string notate(std::string_view, uint32_t move) const { return in_.edges[move].id; }
    std::string encode(const ncl::State& s) const;
    ncl::State decode(std::string_view key) const;

  private:
    const ncl::Instance& in_;
};

// General-length Rush Hour (state_key is decodable).
class GeneralRushProblem {
  public:
    explicit GeneralRushProblem(const rush::State& s) : proto_(s) {}
    std::string initial() const { return rush::state_key(proto_); }
    template <class F>
    void expand(std::string_view key, F&& emit) const {
        rush::State s = decode(key);
        auto moves = rush::legal_moves(s);
        for (size_t i = 0; i < moves.size(); ++i) {
            rush::State t = rush::apply_move(s, moves[i]);
            emit(std::string_view(rush::state_key(t)), uint32_t(i));
        }
    }
    bool won(std::string_view key) const { return rush::is_won(decode(key)); }
    std::string notate(std::string_view key, uint32_t move) const {
        rush::State s = decode(key);
        return rush::move_notation(s, rush::legal_moves(s)[move]);
    }
    rush::State decode(std::string_view key) const;

  private:
    rush::State proto_;
};

SearchResult solve_rush(const rush::State& s, size_t budget);
SearchResult solve_subway(const subway::Instance& in, const subway::State& s, size_t budget);
SearchResult solve_ncl(const ncl::Instance& in, size_t budget);

// Shortest solution length, -1 when unsolvable.
int god_number(const rush::State& s, size_t budget);
// Same quantity by a second route: enumerate the component, then
// multi-source BFS back from every winning state.
int god_number_backward(const rush::State& s, size_t budget);

struct EnumConstraints {
    bool fixed_blocks = false;  // allow fixed cells (n <= 3 only)
    bool long_run = false;      // required for n = 5
};

struct HardestResult {
    int n = 0;
    int moves = -1;              // maximal shortest-solution length
    rush::State witness;
    size_t solvable_instances = 0;   // instances (bubble, special, orientations) with a solution
    size_t canonical_instances = 0;  // same, up to the vertical flip
};

HardestResult enumerate_hardest(int n, const EnumConstraints& c = {});

// Independent oracle: generic engine, per-component flood fill plus
// multi-source BFS from the winning states. No fixed blocks.
int hardest_naive(int n);

}  // namespace pspace::solve
