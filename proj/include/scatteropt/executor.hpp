#pragma once

#include "scatteropt/assembly.hpp"

#include <cstdint>
#include <vector>

namespace scatteropt {

enum class RunStatus { Converged, MaxIters, Diverged };

const char* to_string(RunStatus s);

/// Delay firing schedule. In asynchronous mode every delay latches
/// independently with its Bernoulli probability each global tick;
/// synchronous mode fires everything every tick.
struct Schedule {
    enum class Mode { Synchronous, Asynchronous };

    Mode mode = Mode::Synchronous;
    double update_prob = 1.0;            // uniform p for every delay
    std::vector<double> per_port_prob;   // optional, aligned with delayed ports
    std::uint64_t rng_seed = 0;
    long max_iters = 1000000;
    double fixed_point_tol = 1e-9;
    int snapshot_stride = 0;             // 0 disables state snapshots
};

struct TraceRow {
    long iteration = 0;
    double residual = 0.0;          // ||d[n] - d[n-1]||_inf over delayed ports
    double stationarity = 0.0;      // ||G c - d||_inf over the full state
    double conservation = 0.0;      // sum c_i^2 - d_i^2 over the full state
};

struct Snapshot {
    long iteration = 0;
    StateVector state;
};

struct Trace {
    std::vector<TraceRow> rows;
    std::vector<Snapshot> snapshots;
    RunStatus status = RunStatus::MaxIters;
    long iterations = 0;
};

struct RunResult {
    StateVector state;
    Trace trace;
};

/// One global tick: fired delays latch g_hat c + e_hat at their port,
/// unfired delays hold, every non-source CR then produces c = m(d), and the
/// source ports are resolved algebraically. Reads only the previous tick's
/// state; deterministic given (seed, tick). Throws NonFiniteStateError on
/// overflow past the divergence guard.
StateVector step(const SystemGraph& sg, const StateVector& state, const Schedule& schedule,
                 long tick);

/// Iterates step until the residual stays at or below fixed_point_tol for a
/// full confirmation window with every delay having fired inside it, or
/// until max_iters. A divergence-guard trip ends the run with status
/// Diverged (the trace is preserved).
RunResult run(const SystemGraph& sg, const Schedule& schedule);
RunResult run(const SystemGraph& sg, const Schedule& schedule, const StateVector& init);

/// Residuals of both transformed condition families (per LI block and per
/// CR block, sources re-expanded) and of the untransformed conditions after
/// inverting the coordinate change.
struct FixedPointReport {
    std::vector<double> li_transformed;  // ||G_l c - d||_inf per LI block
    std::vector<double> cr_transformed;  // ||m_k(d) - c||_inf per CR block
    std::vector<double> li_primal;       // ||A a_in - a_out||_inf per LI block
    std::vector<double> li_dual;         // ||b_in + A^T b_out||_inf per LI block
    std::vector<double> cr_primal;       // ||a - f(y)||_inf per CR block
    std::vector<double> cr_dual;         // ||b - g(y)||_inf per CR block
    double max_transformed = 0.0;
    double max_untransformed = 0.0;

    double max_overall() const { return std::max(max_transformed, max_untransformed); }
};

FixedPointReport verify_fixed_point(const SystemGraph& sg, const StateVector& state);

/// Zero-initialized full state for a graph.
StateVector zero_state(const SystemGraph& sg);

} // namespace scatteropt
