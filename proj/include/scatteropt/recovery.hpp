#pragma once

#include "scatteropt/executor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace scatteropt {

/// A recovered solution in the original variables: the primal/dual decision
/// vectors, per-block internal parameters where the derivation provides an
/// inverse, both costs, the duality gap, and the residual families.
struct Solution {
    Eigen::VectorXd a_star;
    Eigen::VectorXd b_star;
    std::vector<std::optional<Eigen::VectorXd>> y_blocks;
    std::optional<Eigen::VectorXd> y_star; // global, set when every block recovers
    double primal_cost = 0.0;
    double dual_cost = 0.0;
    double gap = 0.0;
    bool costs_valid = false;
    FixedPointReport residuals;
};

/// Inverts the coordinate change at (an approximate) fixed point and
/// evaluates costs through the problem model.
Solution recover(const SystemGraph& sg, const StateVector& state);

/// Result of the first-order flatness probe: least-squares log-log slope of
/// |cost(y* + t delta) - cost(y*)| against t over feasible directions.
/// Directions whose cost change sits below the noise floor count as flat.
struct FlatnessProbe {
    double min_slope = kInf;
    int directions = 0;
    int flat_directions = 0;

    bool pass(double required = 1.9) const {
        return directions == flat_directions || min_slope >= required;
    }
};

struct StationarityOptions {
    int directions = 32;
    std::uint64_t seed = 0xd1a6057ull;
};

struct StationarityReport {
    std::vector<double> li_primal; // ||A a_in - a_out|| per LI block
    std::vector<double> li_dual;   // ||b_in + A^T b_out|| per LI block
    std::vector<double> cr_primal; // ||a - f(y)|| per recoverable block
    std::vector<double> cr_dual;   // ||b - g(y)|| per recoverable block
    double max_feasibility = 0.0;
    FlatnessProbe primal_flatness;
    FlatnessProbe dual_flatness;
};

/// Feasibility residuals in the original variables plus the first-order
/// cost-flatness probes along random feasible directions (null space of the
/// stacked linear constraints composed with the block Jacobians).
StationarityReport stationarity_report(const Solution& sol, const Problem& p,
                                       const StationarityOptions& opts = {});

} // namespace scatteropt
