#pragma once

#include "scatteropt/partition.hpp"

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace scatteropt {

using VecFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using CostFn = std::function<double(const Eigen::VectorXd&)>;
using JacFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using CoordFn = std::function<double(int, double)>; // (coordinate, y) -> value

/// One cost block in canonical form: internal parameters y, coupled maps
/// (f, g) and cost Q with grad Q = J_f^T g.
struct CanonicalCR {
    int dim = 1;
    VecFn f;
    VecFn g;
    CostFn q;
    JacFn jacobian_f; // optional closed form; finite differences otherwise

    // Per-coordinate scalar maps, set when the block is separable. These
    // drive the generic map derivation and the reduction sweep.
    CoordFn f_coord;
    CoordFn g_coord;

    bool separable() const { return static_cast<bool>(f_coord); }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
    double lo = -kInf;
    double hi = kInf;
};

/// Feasible sets for reduced-form blocks: boxes, per-coordinate interval
/// unions, halfspaces, affine equality sets, and points. Membership is
/// decidable and projection is idempotent.
class FeasibleSet {
public:
    enum class Kind { All, Box, IntervalUnion, Halfspace, Point, AllEqual, ZeroSum };

    static FeasibleSet all(int dim);
    static FeasibleSet box(std::vector<Interval> per_coord);
    static FeasibleSet interval_union(std::vector<std::vector<Interval>> per_coord);
    static FeasibleSet halfspace(Eigen::VectorXd normal, double offset); // n.x <= offset
    static FeasibleSet point(Eigen::VectorXd value);
    static FeasibleSet all_equal(int dim);
    static FeasibleSet zero_sum(int dim);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }

    bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
    Eigen::VectorXd project(const Eigen::VectorXd& x) const;

    /// Box accessor (valid for Box kind).
    const std::vector<Interval>& intervals() const { return box_; }

private:
    Kind kind_ = Kind::All;
    int dim_ = 0;
    std::vector<Interval> box_;
    std::vector<std::vector<Interval>> unions_;
    Eigen::VectorXd normal_;
    double offset_ = 0.0;
    Eigen::VectorXd point_;
};

/// Reduced form of a cost block: cost directly in the decision variables
/// over a feasible set.
struct ReducedCR {
    int dim = 1;
    CostFn q_hat;
    FeasibleSet set;
};

/// Dual-side data for a block: co-cost R = <f, g> - Q, plus a reduced dual
/// (R_hat over set B) when one exists.
struct DualCR {
    int dim = 1;
    CostFn r;
    std::optional<CostFn> r_hat;
    std::optional<FeasibleSet> set_b;
};

/// One linear interconnection constraint a_out = A a_in.
struct LIBlock {
    Eigen::MatrixXd a; // n_out x n_in

    int n_in() const { return static_cast<int>(a.cols()); }
    int n_out() const { return static_cast<int>(a.rows()); }
};

/// Catalog element kinds. Custom marks programmatically supplied blocks.
enum class CrKind {
    Quadratic,   // q/2 a^2 per coordinate, q >= 0
    LinearCost,  // slope * a per coordinate
    ConstSource, // pins a to a constant vector
    AbsValue,    // weight * |a| per coordinate
    NonNeg,      // a >= 0
    Box,         // lo <= a <= hi
    ZeroVar,     // a = 0
    Equal,       // all coordinates equal
    Custom,
};

const char* to_string(CrKind k);

struct CrParams {
    double q = 0.0;
    double slope = 0.0;
    double weight = 0.0;
    double lo = -kInf;
    double hi = kInf;
    Eigen::VectorXd values;
};

/// A fully described cost block: catalog identity plus canonical, reduced,
/// and dual representations (whichever exist).
struct CrEntry {
    CrKind kind = CrKind::Custom;
    CrParams params;
    CanonicalCR canonical;
    std::optional<ReducedCR> reduced;
    std::optional<DualCR> dual;

    bool has_canonical() const { return static_cast<bool>(canonical.f); }
};

/// A problem instance: the dual partitioning plus its K cost blocks and
/// L linear interconnections, aligned with the partition's block lists.
struct Problem {
    IndexPartition partition;
    std::vector<CrEntry> crs;
    std::vector<LIBlock> lis;
};

/// Partition validation plus per-block dimension agreement.
void validate_problem(const Problem& p);

/// Canonical dual: swaps (f, g), replaces Q by R = <f,g> - Q, and replaces
/// each A by -A^T with inputs and outputs exchanged. Throws
/// NotCanonicalError when a block lacks a parametric representation.
Problem build_dual(const Problem& p);

struct CouplingSample {
    Eigen::VectorXd y;
    double rel_error = 0.0;
};

struct CouplingReport {
    std::vector<CouplingSample> samples;
    double max_rel_error = 0.0;
    bool pass = false;
};

/// Central-difference check of grad Q == J_f^T g at the given points;
/// passes iff every relative error is <= tol.
CouplingReport check_gradient_coupling(const CanonicalCR& cr,
                                       const std::vector<Eigen::VectorXd>& samples,
                                       double tol = 1e-5);

struct SweepOptions {
    double lo = -10.0;
    double hi = 10.0;
    int points = 1001;
};

/// Reduction of a separable canonical block to (Q_hat, A) by sweeping the
/// parametrization. Throws NotReducibleError when the swept (a, Q) relation
/// is multivalued, NotCanonicalError when no parametric form is available.
ReducedCR reduce_form(const CanonicalCR& cr, const SweepOptions& opts = {});

/// Sum of per-block costs at a global parameter vector y (length N).
double eval_primal_cost_y(const Problem& p, const Eigen::VectorXd& y);
/// Sum of reduced costs at a global decision vector a (length N); requires
/// reduced forms on every block.
double eval_primal_cost_a(const Problem& p, const Eigen::VectorXd& a);
/// Dual objective -sum R_k at a global parameter vector y.
double eval_dual_cost_y(const Problem& p, const Eigen::VectorXd& y);

/// R_k evaluated through the defining identity <f, g> - Q.
double eval_r(const CanonicalCR& cr, const Eigen::VectorXd& y);

/// Chunks a global length-N vector by a partition's block index lists.
Eigen::VectorXd gather(const Eigen::VectorXd& global, const std::vector<int>& idx);
void scatter(Eigen::VectorXd& global, const std::vector<int>& idx, const Eigen::VectorXd& local);

/// Central-difference Jacobian with step 1e-6 (1 + |y_i|).
Eigen::MatrixXd numeric_jacobian(const VecFn& f, const Eigen::VectorXd& y);

} // namespace scatteropt
