#pragma once

#include "scatteropt/executor.hpp"
#include "scatteropt/problem.hpp"
#include "scatteropt/recovery.hpp"
#include "scatteropt/transform.hpp"

#include <string>

namespace scatteropt {

/// Parses the line-oriented problem format:
///
///   # comment
///   n <count>
///   cr <kind> idx <i...> [<key> <value...>]
///   li <kind> in <i...> out <i...> [matrix <row-major values>]
///
/// CR kinds: quadratic (q), linear (slope), source (value), abs (weight),
/// nonneg, box (lo, hi; inf/-inf allowed), zero, equal.
/// LI kinds: chain, replicator, negator, general (matrix).
/// Errors reference the offending line.
Problem parse_problem(const std::string& text);
Problem parse_problem_file(const std::string& path);

/// Canonical text form of a catalog-built problem; parse(emit(p)) equals p
/// on the problem model. Throws for Custom blocks.
std::string emit_problem(const Problem& p);

void write_state(const std::string& path, const StateVector& state);
StateVector read_state(const std::string& path);

void write_trace_csv(const std::string& path, const Trace& trace);
void write_snapshots_csv(const std::string& path, const Trace& trace);

/// Key-value solution block as printed by the solve command.
std::string format_solution(const Solution& sol, const Trace& trace);

} // namespace scatteropt
