#pragma once

#include <map>
#include <string>
#include <vector>

#include "cascade/arch.hh"
#include "cascade/pnr.hh"
#include "json.hpp"

namespace cascade {

/// Per-tile configuration. Tile records only hold relative references
/// (sides, tracks, cell slots, offsets), so moving a block of tiles moves its
/// configuration unchanged. Node and net names live beside the records.
struct Config {
    int rows = 0;
    int cols = 0;
    Mode mode = Mode::Dense;
    std::map<Coord, nlohmann::ordered_json> tiles;
    /// "r,c/slot" -> node id.
    std::map<std::string, std::string> names;
    /// "r,c/slot" of a driver -> id of the net it drives.
    std::map<std::string, std::string> net_names;
};

Config emit_config(const RoutedApp &r, const ArchSpec &spec);
/// Rebuilds the placed and routed application a configuration encodes.
RoutedApp decode_config(const Config &cfg, const ArchSpec &spec);
std::vector<std::string> validate_config(const Config &cfg, const ArchSpec &spec);

/// Adds factor-1 copies of the configured block on free tiles of matching
/// kinds (column offsets nearest first, every row offset for each). Copy k renames every node
/// and net with the suffix "@k".
Config duplicate_config(const Config &cfg, const ArchSpec &spec, int factor);

std::string serialize_config(const Config &cfg);
Config parse_config(const std::string &text);

/// Empty when both describe the same nodes, placement, connectivity and
/// routes; net ids are ignored (nets are matched by driver).
std::vector<std::string> design_differences(const RoutedApp &a, const RoutedApp &b);

} // namespace cascade
