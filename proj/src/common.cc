#include "cascade/common.hh"

#include <algorithm>
#include <charconv>

namespace cascade {

const char *to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::Invalid: return "invalid";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::Unroutable: return "unroutable";
    case ErrorKind::Cycle: return "cycle";
    case ErrorKind::Schedule: return "schedule";
    case ErrorKind::Simulation: return "simulation";
    }
    return "?";
}

std::string to_string(Coord c) { return std::to_string(c.row) + "," + std::to_string(c.col); }

Coord parse_coord(std::string_view text)
{
    auto comma = text.find(',');
    Coord c;
    if (comma == std::string_view::npos)
        throw Error(ErrorKind::Parse, "bad coordinate '" + std::string(text) + "'");
    auto a = std::from_chars(text.data(), text.data() + comma, c.row);
    auto b = std::from_chars(text.data() + comma + 1, text.data() + text.size(), c.col);
    if (a.ec != std::errc() || b.ec != std::errc() || a.ptr != text.data() + comma ||
        b.ptr != text.data() + text.size())
        throw Error(ErrorKind::Parse, "bad coordinate '" + std::string(text) + "'");
    return c;
}

const char *to_string(TileKind kind)
{
    switch (kind) {
    case TileKind::PE: return "PE";
    case TileKind::MEM: return "MEM";
    case TileKind::IO: return "IO";
    }
    return "?";
}

std::optional<TileKind> parse_tile_kind(std::string_view text)
{
    if (text == "PE") return TileKind::PE;
    if (text == "MEM") return TileKind::MEM;
    if (text == "IO") return TileKind::IO;
    return std::nullopt;
}

const char *to_string(Side side)
{
    switch (side) {
    case Side::N: return "N";
    case Side::E: return "E";
    case Side::S: return "S";
    case Side::W: return "W";
    case Side::Core: return "C";
    }
    return "?";
}

std::optional<Side> parse_side(std::string_view text)
{
    if (text == "N") return Side::N;
    if (text == "E") return Side::E;
    if (text == "S") return Side::S;
    if (text == "W") return Side::W;
    if (text == "C") return Side::Core;
    return std::nullopt;
}

Side opposite(Side side)
{
    switch (side) {
    case Side::N: return Side::S;
    case Side::S: return Side::N;
    case Side::E: return Side::W;
    case Side::W: return Side::E;
    case Side::Core: return Side::Core;
    }
    return Side::Core;
}

Coord neighbor(Coord c, Side side)
{
    switch (side) {
    case Side::N: return {c.row - 1, c.col};
    case Side::S: return {c.row + 1, c.col};
    case Side::E: return {c.row, c.col + 1};
    case Side::W: return {c.row, c.col - 1};
    case Side::Core: return c;
    }
    return c;
}

int line_of_offset(std::string_view text, std::size_t pos)
{
    pos = std::min(pos, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

} // namespace cascade
