#pragma once
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pspace::rush {

struct Cell {
    int row = 0;
    int col = 0;
    bool operator==(const Cell&) const = default;
    auto operator<=>(const Cell&) const = default;
};

enum class Orientation : uint8_t { Horizontal, Vertical };

struct Car {
    Cell anchor;  // top-left
    int length = 1;
    Orientation orient = Orientation::Horizontal;
    bool operator==(const Car&) const = default;

    Cell cell(int i) const {
        return orient == Orientation::Horizontal ? Cell{anchor.row, anchor.col + i}
                                                 : Cell{anchor.row + i, anchor.col};
    }
};

struct Board {
    int width = 1;
    int height = 1;
    std::vector<uint8_t> fixed;    // row-major
    std::optional<Cell> target;    // nullopt: LeftEdge goal

    Board() = default;
    Board(int w, int h) : width(w), height(h), fixed(size_t(w) * h, 0) {}

    bool in_bounds(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < height && c.col < width; }
    bool is_fixed(Cell c) const { return fixed[idx(c)] != 0; }
    size_t idx(Cell c) const { return size_t(c.row) * width + c.col; }
    bool operator==(const Board&) const = default;
};

struct Move {
    int car = 0;    // index into State::cars
    int delta = 0;  // -1 or +1 along the car's axis
    bool operator==(const Move&) const = default;
};

class IllegalMove : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Car ids are their positions in `cars`.
struct State {
    Board board;
    std::vector<Car> cars;
    int special = 0;

    // throws std::invalid_argument on overlap, out of bounds or a missing special car
    void check() const;
    bool operator==(const State&) const = default;
};

std::vector<Move> legal_moves(const State& s);
State apply_move(const State& s, Move m);
void apply_move_inplace(State& s, Move m);
bool is_won(const State& s);

// Occupancy-with-orientation per cell; non-special cars of equal shape are
// interchangeable. Byte per cell.
std::string state_key(const State& s);

// Occupancy grid: -1 empty, -2 fixed, otherwise car index.
std::vector<int> occupancy(const State& s);

// (<row>,<col>)<L|R|U|D> naming the car cell that leaves and its direction
std::string move_notation(const State& s, Move m);

struct ParseError : std::runtime_error {
    int line;
    int col;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error("line " + std::to_string(line_) + ", col " + std::to_string(col_) + ": " + msg),
          line(line_), col(col_) {}
};

// %RH1 text format (unit cars only)
State parse(const std::string& text);
std::string serialize(const State& s);

}  // namespace pspace::rush
