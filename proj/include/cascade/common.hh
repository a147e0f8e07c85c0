#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cascade {

enum class ErrorKind {
    Parse,
    Coverage,
    Invalid,
    Capacity,
    Unroutable,
    Cycle,
    Schedule,
    Simulation,
};

const char *to_string(ErrorKind kind);

/// Every failure raised by the toolkit. `kind` lets drivers map failures
/// onto exit codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct Coord {
    int row = 0;
    int col = 0;
    auto operator<=>(const Coord &) const = default;
};

std::string to_string(Coord c);
/// Parses the "r,c" form used by every file format.
Coord parse_coord(std::string_view text);

enum class TileKind : std::uint8_t { PE, MEM, IO };

const char *to_string(TileKind kind);
std::optional<TileKind> parse_tile_kind(std::string_view text);

/// Tile sides plus `Core`, the pseudo-side a segment uses when it starts at
/// or ends in the tile's own logic instead of a neighbouring tile.
enum class Side : std::uint8_t { N = 0, E = 1, S = 2, W = 3, Core = 4 };

inline constexpr Side kSides[4] = {Side::N, Side::E, Side::S, Side::W};

const char *to_string(Side side);
std::optional<Side> parse_side(std::string_view text);
Side opposite(Side side);
Coord neighbor(Coord c, Side side);

/// One-based line number containing byte offset `pos` of `text`.
int line_of_offset(std::string_view text, std::size_t pos);

} // namespace cascade
