#pragma once

#include "scatteropt/problem.hpp"

namespace scatteropt {

/// Reference solvers for the test and comparison paths. They share no code
/// with the scattering/fixed-point machinery: kkt_solve stacks the
/// first-order system densely, grid_solve enumerates feasible grid points.

struct KktSolution {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
};

/// True when every block is representable in the stacked quadratic system
/// (quadratic, linear, source, zero, equal kinds).
bool kkt_supported(const Problem& p);

/// Dense solve of the stacked first-order conditions for problems made of
/// quadratic/linear costs, pins, and equality blocks under the LI
/// constraints. The dual vector is assembled from the constraint
/// multipliers with the sign convention b_in = -A^T b_out. Throws
/// SingularKktError when the system is not uniquely solvable and
/// BadParamsError for unsupported block kinds.
KktSolution kkt_solve(const Problem& p);

struct GridSolution {
    Eigen::VectorXd a;
    double value = 0.0;
};

/// Exhaustive search over the LI input variables on a uniform grid;
/// outputs follow from the constraints, set memberships are enforced at
/// half-resolution tolerance, and the best feasible point wins. Requires
/// at most three free dimensions.
GridSolution grid_solve(const Problem& p, double lo, double hi, double resolution);

} // namespace scatteropt
