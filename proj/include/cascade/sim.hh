#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascade/dfg.hh"
#include "cascade/pnr.hh"

namespace cascade {

/// nullopt is an undefined (not yet valid) value.
using Value = std::optional<std::uint16_t>;

struct Stimulus {
    /// IO_IN id -> one value per cycle (dense) or the token stream (sparse).
    std::map<std::string, std::vector<Value>> inputs;
};

struct DenseTrace {
    /// IO_OUT id -> value seen every cycle.
    std::map<std::string, std::vector<Value>> outputs;
    int cycles = 0;
};

/// Cycle-accurate run until the stimulus is consumed and no defined value
/// remains in flight. Throws ErrorKind::Simulation past max_cycles.
DenseTrace simulate_dense(const AppGraph &g, const Stimulus &stim, int max_cycles = 100000);
/// Runs the placed design, switch-box registers included.
DenseTrace simulate_dense(const RoutedApp &r, const Stimulus &stim, int max_cycles = 100000);

/// Graph in which every enabled switch-box register becomes a REG node.
AppGraph materialize_route_registers(const RoutedApp &r);

struct Equivalence {
    bool equal = false;
    /// Cycles b lags a.
    int offset = 0;
    std::string reason;
};

/// Compares two traces after shifting b by one latency common to all outputs.
Equivalence equivalent_modulo_latency(const DenseTrace &a, const DenseTrace &b);

struct SparseTrace {
    /// IO_OUT id -> data tokens received, in order.
    std::map<std::string, std::vector<std::uint16_t>> outputs;
    std::map<std::string, bool> eos;
    bool deadlock = false;
    int cycles = 0;
};

/// Ready/valid simulation. Every input stream ends with an end-of-stream
/// token; the run stops once each output has seen one, or on deadlock.
SparseTrace simulate_sparse(const AppGraph &g, const Stimulus &stim, int max_cycles = 100000);

Stimulus parse_stimulus(const std::string &text);
std::string trace_json(const DenseTrace &t);
std::string trace_json(const SparseTrace &t);

/// Deterministic pseudo-random stimulus for every IO_IN of `g`.
Stimulus random_stimulus(const AppGraph &g, int length, std::uint64_t seed);

} // namespace cascade
