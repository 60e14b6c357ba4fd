#include "pspace/solve.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace pspace::solve {

using rush::Orientation;

RushProblem::RushProblem(const rush::State& s) : board_(s.board) {
    s.check();
    for (const auto& c : s.cars)
        if (c.length != 1) throw std::invalid_argument("RushProblem needs unit cars; use GeneralRushProblem");
    const int W = board_.width, H = board_.height, N = W * H;
    if (N > (1 << 24) - 1) throw std::invalid_argument("board too large for 24-bit cell ids");
    idb_ = N > 65535 ? 3 : 2;
    auto occ = rush::occupancy(s);
    var_index_.assign(N, -1);
    fixed_vert_.assign(N, 0);
    int nvar = 0;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            int i = r * W + c;
            if (board_.fixed[i]) continue;
            auto fr = [&](int rr, int cc) { return rr >= 0 && cc >= 0 && rr < H && cc < W && !board_.fixed[rr * W + cc]; };
            bool hz = fr(r, c - 1) || fr(r, c + 1);
            bool vt = fr(r - 1, c) || fr(r + 1, c);
            if (hz && vt) {
                var_index_[i] = nvar++;
            } else if (occ[i] >= 0) {
                fixed_vert_[i] = s.cars[occ[i]].orient == Orientation::Vertical;
            } else {
                fixed_vert_[i] = vt && !hz;
            }
        }
    nempty_ = 0;
    for (int i = 0; i < N; ++i)
        if (!board_.fixed[i] && occ[i] == -1) ++nempty_;
    bits_off_ = idb_ * (nempty_ + 1);
    init_ = encode(s);
}

std::string RushProblem::encode(const rush::State& s) const {
    const int W = board_.width;
    int nvar = 0;
    for (int v : var_index_) nvar += v >= 0;
    std::string k(size_t(bits_off_ + (nvar + 7) / 8), '\0');
    auto occ = rush::occupancy(s);
    int j = 0;
    for (int i = 0; i < int(occ.size()); ++i)
        if (occ[i] == -1) {
            if (j >= nempty_) throw std::invalid_argument("empty-cell count changed");
            wr(k, j++, i);
        }
    if (j != nempty_) throw std::invalid_argument("empty-cell count changed");
    const auto& sp = s.cars[s.special].anchor;
    wr(k, nempty_, sp.row * W + sp.col);
    for (const auto& c : s.cars) {
        int i = c.anchor.row * W + c.anchor.col;
        if (var_index_[i] >= 0) set_vbit(k, i, c.orient == Orientation::Vertical);
    }
    return k;
}

int RushProblem::cell_code(std::string_view key, int cell) const {
    if (board_.fixed[cell] || is_empty(key, cell)) return 0;
    bool v = var_index_[cell] >= 0 ? vbit(key, cell) : fixed_vert_[cell];
    return v ? 2 : 1;
}

rush::State RushProblem::decode(std::string_view key) const {
    rush::State s;
    s.board = board_;
    const int W = board_.width, N = W * board_.height;
    int sp = special_cell(key);
    for (int i = 0; i < N; ++i) {
        int code = cell_code(key, i);
        if (!code) continue;
        if (i == sp) s.special = int(s.cars.size());
        s.cars.push_back({{i / W, i % W}, 1, code == 2 ? Orientation::Vertical : Orientation::Horizontal});
    }
    return s;
}

bool RushProblem::won(std::string_view key) const {
    int sp = special_cell(key);
    if (board_.target) return sp == board_.target->row * board_.width + board_.target->col;
    return sp % board_.width == 0;
}

std::string RushProblem::notate(std::string_view, uint32_t move) const {
    int n = int(move / 4), d = int(move % 4);
    static const char dir[4] = {'D', 'U', 'R', 'L'};
    std::ostringstream os;
    os << '(' << n / board_.width << ',' << n % board_.width << ')' << dir[d];
    return os.str();
}

SubwayProblem::SubwayProblem(const subway::Instance& in, const subway::State& s) : in_(in), inc_(in.incidence()) {
    if (in.num_vertices() > 65535) throw std::invalid_argument("instance too large for 16-bit vertex ids");
    nempty_ = subway::count_empty(s);
    tok_off_ = 2 * (nempty_ + 1);
    int tok_bytes = in.colors <= 2 ? (in.num_vertices() + 7) / 8 : in.num_vertices();
    flip_off_ = tok_off_ + tok_bytes;
    init_ = encode(s);
}

void SubwayProblem::set_token(std::string& k, int v, int c) const {
    if (in_.colors <= 2) {
        uint8_t& x = reinterpret_cast<uint8_t&>(k[tok_off_ + v / 8]);
        x = uint8_t(c == 1 ? (x | (1u << (v % 8))) : (x & ~(1u << (v % 8))));
    } else {
        k[tok_off_ + v] = char(c < 0 ? 0 : c);
    }
}

int SubwayProblem::token(std::string_view key, int v) const {
    for (int i = 0; i < nempty_; ++i)
        if (rd(key, i) == v) return -1;
    if (in_.colors <= 2) return (uint8_t(key[tok_off_ + v / 8]) >> (v % 8)) & 1;
    return uint8_t(key[tok_off_ + v]);
}

std::string SubwayProblem::encode(const subway::State& s) const {
    std::string k(size_t(flip_off_ + (in_.edges.size() + 7) / 8), '\0');
    int j = 0;
    for (int v = 0; v < in_.num_vertices(); ++v) {
        if (s.token[v] == subway::NoToken) {
            if (j >= nempty_) throw std::invalid_argument("empty-vertex count changed");
            wr(k, j++, v);
        } else {
            set_token(k, v, s.token[v]);
        }
    }
    if (j != nempty_) throw std::invalid_argument("empty-vertex count changed");
    wr(k, nempty_, s.special);
    for (size_t e = 0; e < s.flipped.size(); ++e)
        if (s.flipped[e]) k[flip_off_ + e / 8] = char(uint8_t(k[flip_off_ + e / 8]) | (1u << (e % 8)));
    return k;
}

subway::State SubwayProblem::decode(std::string_view key) const {
    subway::State s;
    s.token.resize(in_.num_vertices());
    for (int v = 0; v < in_.num_vertices(); ++v) s.token[v] = int8_t(token(key, v));
    s.flipped.resize(in_.edges.size());
    for (size_t e = 0; e < in_.edges.size(); ++e) s.flipped[e] = flipped(key, int(e));
    s.special = rd(key, nempty_);
    return s;
}

std::string SubwayProblem::notate(std::string_view, uint32_t move) const {
    int e = int(move / 2);
    const auto& ed = in_.edges[e];
    int from = move % 2 == 0 ? ed.tail : ed.head;
    return ed.id + ":" + in_.vertex_ids[from] + "->" + in_.vertex_ids[in_.other(e, from)];
}

std::string NclProblem::encode(const ncl::State& s) const {
    std::string k((s.flipped.size() + 7) / 8 + 1, '\0');
    for (size_t e = 0; e < s.flipped.size(); ++e)
        if (s.flipped[e]) k[e / 8] = char(uint8_t(k[e / 8]) | (1u << (e % 8)));
    return k;
}

ncl::State NclProblem::decode(std::string_view key) const {
    ncl::State s;
    s.flipped.resize(in_.edges.size());
    for (size_t e = 0; e < s.flipped.size(); ++e) s.flipped[e] = (uint8_t(key[e / 8]) >> (e % 8)) & 1;
    return s;
}

rush::State GeneralRushProblem::decode(std::string_view key) const {
    rush::State s;
    s.board = proto_.board;
    const int W = s.board.width;
    for (int i = 0; i < int(key.size()); ++i) {
        uint8_t b = uint8_t(key[i]);
        if (b == 0 || b == 1 || b == 0xff) continue;
        bool special = b & 0x80;
        b &= 0x7f;
        rush::Car c{{i / W, i % W}, b / 2, (b & 1) ? Orientation::Vertical : Orientation::Horizontal};
        if (special) s.special = int(s.cars.size());
        s.cars.push_back(c);
    }
    return s;
}

static bool unit_only(const rush::State& s) {
    return std::all_of(s.cars.begin(), s.cars.end(), [](const rush::Car& c) { return c.length == 1; });
}

SearchResult solve_rush(const rush::State& s, size_t budget) {
    if (unit_only(s)) return bfs_flagged(RushProblem(s), budget);
    return bfs_flagged(GeneralRushProblem(s), budget);
}

SearchResult solve_subway(const subway::Instance& in, const subway::State& s, size_t budget) {
    return bfs_flagged(SubwayProblem(in, s), budget);
}

SearchResult solve_ncl(const ncl::Instance& in, size_t budget) { return bfs_flagged(NclProblem(in), budget); }

int god_number(const rush::State& s, size_t budget) {
    SearchResult r = unit_only(s) ? bfs(RushProblem(s), budget) : bfs(GeneralRushProblem(s), budget);
    return r.solvable ? int(r.solution.size()) : -1;
}

int god_number_backward(const rush::State& s, size_t budget) {
    GeneralRushProblem p(s);
    std::vector<uint8_t> winning;
    KeyStore all = explore(p, budget, [&](uint32_t, std::string_view k) { winning.push_back(p.won(k)); });
    // adjacency is symmetric (moves are reversible), so walk forward from the winners
    std::vector<int> dist(all.size(), -1);
    std::deque<uint32_t> q;
    for (uint32_t i = 0; i < all.size(); ++i)
        if (winning[i]) dist[i] = 0, q.push_back(i);
    std::string buf;
    while (!q.empty()) {
        uint32_t x = q.front();
        q.pop_front();
        buf.assign(all.key(x));
        p.expand(buf, [&](std::string_view k, uint32_t) {
            long y = all.find(k);
            if (y >= 0 && dist[y] < 0) {
                dist[y] = dist[x] + 1;
                q.push_back(uint32_t(y));
            }
        });
    }
    return dist[0];
}

namespace {

// Dense index over (bubble, special, orientation bits) for n x n boards.
struct Dense {
    int n, N;
    uint32_t fixed_mask;
    uint64_t index(int b, int s, uint32_t bits) const { return ((uint64_t(b) * N + s) << N) | bits; }
    void unpack(uint64_t idx, int& b, int& s, uint32_t& bits) const {
        bits = uint32_t(idx & ((1ull << N) - 1));
        uint64_t bs = idx >> N;
        s = int(bs % N);
        b = int(bs / N);
    }
    bool valid(int b, int s, uint32_t bits) const {
        if (b == s) return false;
        if ((fixed_mask >> b) & 1 || (fixed_mask >> s) & 1) return false;
        if ((bits >> b) & 1) return false;
        return (bits & fixed_mask) == 0;
    }
    template <class F>
    void neighbours(int b, int s, uint32_t bits, F&& f) const {
        int br = b / n, bc = b % n;
        static const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
            int r = br + dr[d], c = bc + dc[d];
            if (r < 0 || c < 0 || r >= n || c >= n) continue;
            int m = r * n + c;
            if ((fixed_mask >> m) & 1) continue;
            bool vert = (bits >> m) & 1;
            if (vert != (d < 2)) continue;
            uint32_t nb = (bits & ~(1u << m)) | (uint32_t(vert) << b);
            f(m, s == m ? b : s, nb);
        }
    }
    uint64_t flip(int b, int s, uint32_t bits) const {
        auto fl = [&](int x) { return (n - 1 - x / n) * n + x % n; };
        uint32_t nb = 0;
        for (int i = 0; i < N; ++i)
            if ((bits >> i) & 1) nb |= 1u << fl(i);
        return index(fl(b), fl(s), nb);
    }
};

}  // namespace

HardestResult enumerate_hardest(int n, const EnumConstraints& c) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (n >= 5 && !c.long_run) throw std::invalid_argument("n >= 5 needs the long-run flag");
    if (n >= 5) throw BudgetExceeded("n >= 5 dense enumeration exceeds desk memory");
    if (c.fixed_blocks && n > 3) throw std::invalid_argument("fixed-block universe limited to n <= 3");
    const int N = n * n;
    HardestResult res;
    res.n = n;
    uint32_t masks = c.fixed_blocks ? (1u << N) : 1u;
    std::vector<int16_t> dist(size_t(N) * N << N);
    for (uint32_t mask = 0; mask < masks; ++mask) {
        Dense D{n, N, mask};
        std::fill(dist.begin(), dist.end(), int16_t(-1));
        std::vector<uint64_t> cur, nxt;
        for (int b = 0; b < N; ++b)
            for (int s = 0; s < N; s += n)  // special on column 0
                for (uint32_t bits = 0; bits < (1u << N); ++bits)
                    if (D.valid(b, s, bits)) {
                        uint64_t i = D.index(b, s, bits);
                        dist[i] = 0;
                        cur.push_back(i);
                    }
        int level = 0;
        while (!cur.empty()) {
            nxt.clear();
            for (uint64_t i : cur) {
                int b, s;
                uint32_t bits;
                D.unpack(i, b, s, bits);
                D.neighbours(b, s, bits, [&](int b2, int s2, uint32_t bits2) {
                    uint64_t j = D.index(b2, s2, bits2);
                    if (dist[j] < 0) {
                        dist[j] = int16_t(level + 1);
                        nxt.push_back(j);
                    }
                });
            }
            ++level;
            cur.swap(nxt);
        }
        for (uint64_t i = 0; i < dist.size(); ++i) {
            if (dist[i] < 0) continue;
            int b, s;
            uint32_t bits;
            D.unpack(i, b, s, bits);
            ++res.solvable_instances;
            uint64_t f = D.flip(b, s, bits);
            if (i <= f) ++res.canonical_instances;
            if (dist[i] > res.moves) {
                res.moves = dist[i];
                rush::State w;
                w.board = rush::Board(n, n);
                for (int x = 0; x < N; ++x) {
                    if ((mask >> x) & 1) {
                        w.board.fixed[x] = 1;
                        continue;
                    }
                    if (x == b) continue;
                    if (x == s) w.special = int(w.cars.size());
                    w.cars.push_back({{x / n, x % n}, 1, ((bits >> x) & 1) ? Orientation::Vertical : Orientation::Horizontal});
                }
                res.witness = w;
            }
        }
    }
    return res;
}

int hardest_naive(int n) {
    // Plain char grids: '.', 'h', 'v', 'H', 'V'. Every board with one hole and
    // one special car; flood each component, then BFS back from its winners.
    const int N = n * n;
    std::unordered_map<std::string, int> comp_of;
    int best = -1;
    auto moves_of = [&](const std::string& g) {
        std::vector<std::string> out;
        int hole = int(g.find('.'));
        int hr = hole / n, hc = hole % n;
        const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
            int r = hr + dr[d], c = hc + dc[d];
            if (r < 0 || c < 0 || r >= n || c >= n) continue;
            char ch = g[r * n + c];
            bool vert = ch == 'v' || ch == 'V';
            if (vert != (d < 2)) continue;
            std::string h = g;
            std::swap(h[r * n + c], h[hole]);
            out.push_back(h);
        }
        return out;
    };
    auto winning = [&](const std::string& g) {
        for (int r = 0; r < n; ++r)
            if (g[r * n] == 'H' || g[r * n] == 'V') return true;
        return false;
    };
    for (int hole = 0; hole < N; ++hole)
        for (int sp = 0; sp < N; ++sp) {
            if (sp == hole) continue;
            for (uint32_t bits = 0; bits < (1u << N); ++bits) {
                if ((bits >> hole) & 1) continue;
                std::string g(N, 'h');
                for (int i = 0; i < N; ++i)
                    if ((bits >> i) & 1) g[i] = 'v';
                g[hole] = '.';
                g[sp] = g[sp] == 'v' ? 'V' : 'H';
                if (comp_of.count(g)) continue;
                // flood the component
                std::vector<std::string> members{g};
                comp_of[g] = 1;
                for (size_t k = 0; k < members.size(); ++k)
                    for (auto& h : moves_of(members[k]))
                        if (comp_of.emplace(h, 1).second) members.push_back(h);
                std::unordered_map<std::string, int> d;
                std::deque<std::string> q;
                for (auto& m : members)
                    if (winning(m)) d[m] = 0, q.push_back(m);
                while (!q.empty()) {
                    std::string x = q.front();
                    q.pop_front();
                    for (auto& h : moves_of(x))
                        if (!d.count(h)) d[h] = d[x] + 1, q.push_back(h);
                }
                for (auto& [k, v] : d) best = std::max(best, v);
            }
        }
    return best;
}

}  // namespace pspace::solve
