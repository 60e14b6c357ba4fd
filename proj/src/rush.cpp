#include "pspace/rush.hpp"

#include <sstream>

namespace pspace::rush {

std::vector<int> occupancy(const State& s) {
    const Board& b = s.board;
    std::vector<int> occ(size_t(b.width) * b.height, -1);
    for (size_t i = 0; i < occ.size(); ++i)
        if (b.fixed[i]) occ[i] = -2;
    for (int ci = 0; ci < int(s.cars.size()); ++ci) {
        const Car& c = s.cars[ci];
        for (int k = 0; k < c.length; ++k) {
            Cell x = c.cell(k);
            if (!b.in_bounds(x)) throw std::invalid_argument("car out of bounds");
            int& o = occ[b.idx(x)];
            if (o == -2) throw std::invalid_argument("car overlaps fixed cell");
            if (o >= 0) throw std::invalid_argument("cars overlap");
            o = ci;
        }
    }
    return occ;
}

void State::check() const {
    if (board.width < 1 || board.height < 1) throw std::invalid_argument("empty board");
    if (board.fixed.size() != size_t(board.width) * board.height) throw std::invalid_argument("fixed mask size");
    if (special < 0 || special >= int(cars.size())) throw std::invalid_argument("no special car");
    if (board.target) {
        if (!board.in_bounds(*board.target)) throw std::invalid_argument("target out of bounds");
        if (board.is_fixed(*board.target)) throw std::invalid_argument("target is fixed");
    }
    for (const Car& c : cars)
        if (c.length < 1) throw std::invalid_argument("car length < 1");
    (void)occupancy(*this);
}

static bool free_cell(const Board& b, const std::vector<int>& occ, Cell c) {
    return b.in_bounds(c) && occ[b.idx(c)] == -1;
}

std::vector<Move> legal_moves(const State& s) {
    std::vector<int> occ = occupancy(s);
    std::vector<Move> out;
    for (int ci = 0; ci < int(s.cars.size()); ++ci) {
        const Car& c = s.cars[ci];
        for (int d : {-1, +1}) {
            Cell into = d < 0 ? c.cell(-1) : c.cell(c.length);
            if (free_cell(s.board, occ, into)) out.push_back({ci, d});
        }
    }
    return out;
}

void apply_move_inplace(State& s, Move m) {
    if (m.car < 0 || m.car >= int(s.cars.size()) || (m.delta != 1 && m.delta != -1))
        throw IllegalMove("bad move");
    Car& c = s.cars[m.car];
    Cell into = m.delta < 0 ? c.cell(-1) : c.cell(c.length);
    if (!s.board.in_bounds(into) || s.board.is_fixed(into)) throw IllegalMove("blocked");
    for (int ci = 0; ci < int(s.cars.size()); ++ci) {
        const Car& o = s.cars[ci];
        for (int k = 0; k < o.length; ++k)
            if (o.cell(k) == into) throw IllegalMove("occupied");
    }
    if (c.orient == Orientation::Horizontal)
        c.anchor.col += m.delta;
    else
        c.anchor.row += m.delta;
}

State apply_move(const State& s, Move m) {
    State t = s;
    apply_move_inplace(t, m);
    return t;
}

bool is_won(const State& s) {
    const Car& c = s.cars[s.special];
    if (!s.board.target) return c.anchor.col == 0;
    for (int k = 0; k < c.length; ++k)
        if (c.cell(k) == *s.board.target) return true;
    return false;
}

std::string state_key(const State& s) {
    const Board& b = s.board;
    std::string key(size_t(b.width) * b.height, '\0');
    for (size_t i = 0; i < key.size(); ++i)
        if (b.fixed[i]) key[i] = char(0xff);
    for (int ci = 0; ci < int(s.cars.size()); ++ci) {
        const Car& c = s.cars[ci];
        // anchor byte carries shape; trailing cells are just "covered"
        uint8_t code = uint8_t(2 * c.length + (c.orient == Orientation::Vertical ? 1 : 0));
        if (ci == s.special) code |= 0x80;
        key[b.idx(c.anchor)] = char(code);
        for (int k = 1; k < c.length; ++k) key[b.idx(c.cell(k))] = 1;
    }
    return key;
}

std::string move_notation(const State& s, Move m) {
    const Car& c = s.cars[m.car];
    char dir;
    if (c.orient == Orientation::Horizontal)
        dir = m.delta < 0 ? 'L' : 'R';
    else
        dir = m.delta < 0 ? 'U' : 'D';
    std::ostringstream os;
    os << '(' << c.anchor.row << ',' << c.anchor.col << ')' << dir;
    return os.str();
}

static std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    for (auto& l : lines)
        while (!l.empty() && (l.back() == ' ' || l.back() == '\t')) l.pop_back();
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

State parse(const std::string& text) {
    auto lines = split_lines(text);
    if (lines.empty()) throw ParseError("empty input", 1, 1);
    std::istringstream hdr(lines[0]);
    std::string magic;
    int w = 0, h = 0;
    hdr >> magic;
    if (magic != "%RH1") throw ParseError("expected header %RH1", 1, 1);
    if (!(hdr >> w >> h) || w < 1 || h < 1) throw ParseError("bad board dimensions", 1, 6);
    std::string rest;
    if (hdr >> rest) throw ParseError("trailing header text", 1, 1);
    if (int(lines.size()) < 1 + h) throw ParseError("missing board rows", int(lines.size()) + 1, 1);

    State s;
    s.board = Board(w, h);
    int special = -1;
    for (int r = 0; r < h; ++r) {
        const std::string& row = lines[1 + r];
        if (int(row.size()) != w) throw ParseError("row width " + std::to_string(row.size()) + " != " + std::to_string(w), r + 2, 1);
        for (int c = 0; c < w; ++c) {
            char ch = row[c];
            Cell cell{r, c};
            switch (ch) {
                case '#': s.board.fixed[s.board.idx(cell)] = 1; break;
                case '.': break;
                case '-': s.cars.push_back({cell, 1, Orientation::Horizontal}); break;
                case '|': s.cars.push_back({cell, 1, Orientation::Vertical}); break;
                case 'H':
                case 'V':
                    if (special >= 0) throw ParseError("more than one special car (H/V)", r + 2, c + 1);
                    special = int(s.cars.size());
                    s.cars.push_back({cell, 1, ch == 'H' ? Orientation::Horizontal : Orientation::Vertical});
                    break;
                default: throw ParseError(std::string("unknown cell character '") + ch + "'", r + 2, c + 1);
            }
        }
    }
    if (special < 0) throw ParseError("no special car (H/V)", 2, 1);
    s.special = special;
    size_t next = 1 + h;
    if (next < lines.size()) {
        std::istringstream g(lines[next]);
        std::string word;
        int gr = -1, gc = -1;
        g >> word;
        if (word != "goal" || !(g >> gr >> gc)) throw ParseError("expected 'goal <row> <col>'", int(next) + 1, 1);
        s.board.target = Cell{gr, gc};
        ++next;
    }
    if (next < lines.size()) throw ParseError("unexpected trailing line", int(next) + 1, 1);
    try {
        s.check();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), 1, 1);
    }
    return s;
}

std::string serialize(const State& s) {
    for (const Car& c : s.cars)
        if (c.length != 1) throw std::invalid_argument("%RH1 holds unit cars only");
    const Board& b = s.board;
    std::vector<std::string> rows(b.height, std::string(b.width, '.'));
    for (int r = 0; r < b.height; ++r)
        for (int c = 0; c < b.width; ++c)
            if (b.is_fixed({r, c})) rows[r][c] = '#';
    for (int ci = 0; ci < int(s.cars.size()); ++ci) {
        const Car& c = s.cars[ci];
        bool hz = c.orient == Orientation::Horizontal;
        rows[c.anchor.row][c.anchor.col] = ci == s.special ? (hz ? 'H' : 'V') : (hz ? '-' : '|');
    }
    std::ostringstream os;
    os << "%RH1 " << b.width << ' ' << b.height << '\n';
    for (auto& r : rows) os << r << '\n';
    if (b.target) os << "goal " << b.target->row << ' ' << b.target->col << '\n';
    return os.str();
}

}  // namespace pspace::rush
