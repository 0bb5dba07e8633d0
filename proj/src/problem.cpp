#include "scatteropt/problem.hpp"
#include "scatteropt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scatteropt {

// ---------------------------------------------------------------------------
// FeasibleSet
// ---------------------------------------------------------------------------

FeasibleSet FeasibleSet::all(int dim) {
    FeasibleSet s;
    s.kind_ = Kind::All;
    s.dim_ = dim;
    return s;
}

FeasibleSet FeasibleSet::box(std::vector<Interval> per_coord) {
    FeasibleSet s;
    s.kind_ = Kind::Box;
    s.dim_ = static_cast<int>(per_coord.size());
    for (const Interval& iv : per_coord)
        if (!(iv.lo <= iv.hi))
            throw BadParamsError("box interval with lo > hi");
    s.box_ = std::move(per_coord);
    return s;
}

FeasibleSet FeasibleSet::interval_union(std::vector<std::vector<Interval>> per_coord) {
    FeasibleSet s;
    s.kind_ = Kind::IntervalUnion;
    s.dim_ = static_cast<int>(per_coord.size());
    for (const auto& ivs : per_coord) {
        if (ivs.empty())
            throw BadParamsError("interval union with an empty coordinate");
        for (const Interval& iv : ivs)
            if (!(iv.lo <= iv.hi))
                throw BadParamsError("interval with lo > hi");
    }
    s.unions_ = std::move(per_coord);
    return s;
}

FeasibleSet FeasibleSet::halfspace(Eigen::VectorXd normal, double offset) {
    if (normal.norm() == 0.0)
        throw BadParamsError("halfspace with zero normal");
    FeasibleSet s;
    s.kind_ = Kind::Halfspace;
    s.dim_ = static_cast<int>(normal.size());
    s.normal_ = std::move(normal);
    s.offset_ = offset;
    return s;
}

FeasibleSet FeasibleSet::point(Eigen::VectorXd value) {
    FeasibleSet s;
    s.kind_ = Kind::Point;
    s.dim_ = static_cast<int>(value.size());
    s.point_ = std::move(value);
    return s;
}

FeasibleSet FeasibleSet::all_equal(int dim) {
    if (dim < 2)
        throw BadParamsError("all_equal set needs dim >= 2");
    FeasibleSet s;
    s.kind_ = Kind::AllEqual;
    s.dim_ = dim;
    return s;
}

FeasibleSet FeasibleSet::zero_sum(int dim) {
    if (dim < 2)
        throw BadParamsError("zero_sum set needs dim >= 2");
    FeasibleSet s;
    s.kind_ = Kind::ZeroSum;
    s.dim_ = dim;
    return s;
}

bool FeasibleSet::contains(const Eigen::VectorXd& x, double tol) const {
    if (static_cast<int>(x.size()) != dim_)
        throw DimMismatchError("feasible-set membership: wrong dimension");
    switch (kind_) {
    case Kind::All:
        return true;
    case Kind::Box:
        for (int i = 0; i < dim_; ++i)
            if (x[i] < box_[static_cast<std::size_t>(i)].lo - tol ||
                x[i] > box_[static_cast<std::size_t>(i)].hi + tol)
                return false;
        return true;
    case Kind::IntervalUnion:
        for (int i = 0; i < dim_; ++i) {
            bool inside = false;
            for (const Interval& iv : unions_[static_cast<std::size_t>(i)])
                if (x[i] >= iv.lo - tol && x[i] <= iv.hi + tol) {
                    inside = true;
                    break;
                }
            if (!inside)
                return false;
        }
        return true;
    case Kind::Halfspace:
        return normal_.dot(x) <= offset_ + tol;
    case Kind::Point:
        return (x - point_).lpNorm<Eigen::Infinity>() <= tol;
    case Kind::AllEqual: {
        for (int i = 1; i < dim_; ++i)
            if (std::abs(x[i] - x[0]) > tol)
                return false;
        return true;
    }
    case Kind::ZeroSum:
        return std::abs(x.sum()) <= tol;
    }
    return false;
}

Eigen::VectorXd FeasibleSet::project(const Eigen::VectorXd& x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw DimMismatchError("feasible-set projection: wrong dimension");
    switch (kind_) {
    case Kind::All:
        return x;
    case Kind::Box: {
        Eigen::VectorXd y = x;
        for (int i = 0; i < dim_; ++i)
            y[i] = std::min(std::max(y[i], box_[static_cast<std::size_t>(i)].lo),
                            box_[static_cast<std::size_t>(i)].hi);
        return y;
    }
    case Kind::IntervalUnion: {
        Eigen::VectorXd y = x;
        for (int i = 0; i < dim_; ++i) {
            double best = 0.0, best_dist = kInf;
            for (const Interval& iv : unions_[static_cast<std::size_t>(i)]) {
                const double p = std::min(std::max(x[i], iv.lo), iv.hi);
                const double dist = std::abs(p - x[i]);
                if (dist < best_dist) {
                    best_dist = dist;
                    best = p;
                }
            }
            y[i] = best;
        }
        return y;
    }
    case Kind::Halfspace: {
        const double excess = normal_.dot(x) - offset_;
        if (excess <= 0.0)
            return x;
        return x - (excess / normal_.squaredNorm()) * normal_;
    }
    case Kind::Point:
        return point_;
    case Kind::AllEqual:
        return Eigen::VectorXd::Constant(dim_, x.mean());
    case Kind::ZeroSum:
        return x - Eigen::VectorXd::Constant(dim_, x.mean());
    }
    return x;
}

// ---------------------------------------------------------------------------
// Problem validation
// ---------------------------------------------------------------------------

const char* to_string(CrKind k) {
    switch (k) {
    case CrKind::Quadratic: return "quadratic";
    case CrKind::LinearCost: return "linear";
    case CrKind::ConstSource: return "source";
    case CrKind::AbsValue: return "abs";
    case CrKind::NonNeg: return "nonneg";
    case CrKind::Box: return "box";
    case CrKind::ZeroVar: return "zero";
    case CrKind::Equal: return "equal";
    case CrKind::Custom: return "custom";
    }
    return "custom";
}

void validate_problem(const Problem& p) {
    validate_partition(p.partition);
    if (p.crs.size() != p.partition.cr_blocks.size())
        throw DimMismatchError("problem has " + std::to_string(p.crs.size()) +
                               " CR entries for " + std::to_string(p.partition.cr_blocks.size()) +
                               " CR blocks");
    if (p.lis.size() != p.partition.li_blocks.size())
        throw DimMismatchError("problem has " + std::to_string(p.lis.size()) +
                               " LI entries for " + std::to_string(p.partition.li_blocks.size()) +
                               " LI blocks");
    for (std::size_t k = 0; k < p.crs.size(); ++k)
        if (p.crs[k].canonical.dim != static_cast<int>(p.partition.cr_blocks[k].size()))
            throw DimMismatchError("CR block " + std::to_string(k) + ": entry dim " +
                                   std::to_string(p.crs[k].canonical.dim) +
                                   " vs partition length " +
                                   std::to_string(p.partition.cr_blocks[k].size()));
    for (std::size_t l = 0; l < p.lis.size(); ++l) {
        const IoSplit& s = p.partition.li_io_split[l];
        if (p.lis[l].n_in() != s.n_in || p.lis[l].n_out() != s.n_out)
            throw DimMismatchError("LI block " + std::to_string(l) + ": matrix is " +
                                   std::to_string(p.lis[l].n_out()) + "x" +
                                   std::to_string(p.lis[l].n_in()) + " but split is (" +
                                   std::to_string(s.n_in) + ", " + std::to_string(s.n_out) + ")");
        if (!p.lis[l].a.allFinite())
            throw BadParamsError("LI block " + std::to_string(l) + " has non-finite entries");
    }
}

// ---------------------------------------------------------------------------
// Dual construction
// ---------------------------------------------------------------------------

double eval_r(const CanonicalCR& cr, const Eigen::VectorXd& y) {
    if (!cr.f || !cr.g || !cr.q)
        throw NotCanonicalError("R identity needs evaluable f, g, Q");
    return cr.f(y).dot(cr.g(y)) - cr.q(y);
}

Problem build_dual(const Problem& p) {
    Problem d;
    d.partition = p.partition;
    // Dual LI constraint b_in = -A^T b_out reads as a map from the primal
    // outputs (now inputs) to the primal inputs (now outputs).
    for (std::size_t l = 0; l < p.lis.size(); ++l) {
        LIBlock dual_li;
        dual_li.a = -p.lis[l].a.transpose();
        d.lis.push_back(std::move(dual_li));
        const IoSplit s = p.partition.li_io_split[l];
        d.partition.li_io_split[l] = IoSplit{s.n_out, s.n_in};
        // reorder the block index list so inputs (the old outputs) lead
        const auto& idx = p.partition.li_blocks[l];
        std::vector<int> reordered(idx.begin() + s.n_in, idx.end());
        reordered.insert(reordered.end(), idx.begin(), idx.begin() + s.n_in);
        d.partition.li_blocks[l] = std::move(reordered);
    }
    for (const CrEntry& e : p.crs) {
        if (!e.has_canonical() || !e.canonical.g || !e.canonical.q)
            throw NotCanonicalError("build_dual: block lacks a parametric (f, g, Q) form");
        CrEntry de;
        de.kind = CrKind::Custom;
        CanonicalCR c;
        c.dim = e.canonical.dim;
        c.f = e.canonical.g;
        c.g = e.canonical.f;
        const CanonicalCR primal = e.canonical;
        c.q = [primal](const Eigen::VectorXd& y) { return eval_r(primal, y); };
        if (e.canonical.f_coord && e.canonical.g_coord) {
            c.f_coord = e.canonical.g_coord;
            c.g_coord = e.canonical.f_coord;
        }
        de.canonical = std::move(c);
        // a reduced dual (R_hat over B) moves into the dual entry's primal slot
        if (e.dual && e.dual->r_hat && e.dual->set_b)
            de.reduced = ReducedCR{e.canonical.dim, *e.dual->r_hat, *e.dual->set_b};
        d.crs.push_back(std::move(de));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Gradient coupling
// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd central_grad(const CostFn& q, const Eigen::VectorXd& y) {
    Eigen::VectorXd g(y.size());
    Eigen::VectorXd yp = y, ym = y;
    for (int i = 0; i < y.size(); ++i) {
        const double h = 1e-6 * (1.0 + std::abs(y[i]));
        yp[i] = y[i] + h;
        ym[i] = y[i] - h;
        g[i] = (q(yp) - q(ym)) / (2.0 * h);
        yp[i] = y[i];
        ym[i] = y[i];
    }
    return g;
}

} // namespace

Eigen::MatrixXd numeric_jacobian(const VecFn& f, const Eigen::VectorXd& y) {
    const Eigen::VectorXd f0 = f(y);
    Eigen::MatrixXd j(f0.size(), y.size());
    Eigen::VectorXd yp = y, ym = y;
    for (int i = 0; i < y.size(); ++i) {
        const double h = 1e-6 * (1.0 + std::abs(y[i]));
        yp[i] = y[i] + h;
        ym[i] = y[i] - h;
        j.col(i) = (f(yp) - f(ym)) / (2.0 * h);
        yp[i] = y[i];
        ym[i] = y[i];
    }
    return j;
}

CouplingReport check_gradient_coupling(const CanonicalCR& cr,
                                       const std::vector<Eigen::VectorXd>& samples,
                                       double tol) {
    if (!cr.f || !cr.g || !cr.q)
        throw NotCanonicalError("gradient coupling needs evaluable f, g, Q");
    CouplingReport report;
    for (const Eigen::VectorXd& y : samples) {
        const Eigen::VectorXd grad_fd = central_grad(cr.q, y);
        const Eigen::MatrixXd jf = cr.jacobian_f ? cr.jacobian_f(y) : numeric_jacobian(cr.f, y);
        const Eigen::VectorXd coupled = jf.transpose() * cr.g(y);
        const double scale = std::max({1.0, grad_fd.norm(), coupled.norm()});
        CouplingSample s;
        s.y = y;
        s.rel_error = (grad_fd - coupled).norm() / scale;
        report.max_rel_error = std::max(report.max_rel_error, s.rel_error);
        report.samples.push_back(std::move(s));
    }
    report.pass = report.max_rel_error <= tol;
    return report;
}

// ---------------------------------------------------------------------------
// Reduction sweep
// ---------------------------------------------------------------------------

namespace {

struct SweepPoint {
    double a;
    double q;
    double y;
};

// Locates a y with f(y) == a by scanning the swept grid for a bracketing
// cell, then bisecting. Grid must enclose a crossing.
double invert_on_sweep(const std::vector<SweepPoint>& pts, const CoordFn& f, int coord,
                       double a) {
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        const double fa = pts[j].a - a, fb = pts[j + 1].a - a;
        if (fa == 0.0)
            return pts[j].y;
        if (fa * fb <= 0.0) {
            double lo = pts[j].y, hi = pts[j + 1].y;
            double flo = fa;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(coord, mid) - a;
                if (fm == 0.0 || hi - lo < 1e-15 * (1.0 + std::abs(mid)))
                    return mid;
                if (flo * fm <= 0.0)
                    hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
            }
            return 0.5 * (lo + hi);
        }
    }
    // No bracketing cell: a lies outside the swept range; return the
    // parameter of the nearest swept value.
    const SweepPoint* best = &pts.front();
    for (const SweepPoint& sp : pts)
        if (std::abs(sp.a - a) < std::abs(best->a - a))
            best = &sp;
    return best->y;
}

} // namespace

ReducedCR reduce_form(const CanonicalCR& cr, const SweepOptions& opts) {
    if (!cr.separable() || !cr.g_coord)
        throw NotCanonicalError("reduce_form handles separable parametric blocks");
    if (opts.points < 3 || !(opts.hi > opts.lo))
        throw BadParamsError("reduce_form: bad sweep options");

    const int dim = cr.dim;
    std::vector<std::vector<SweepPoint>> sweeps(static_cast<std::size_t>(dim));
    std::vector<Interval> ranges(static_cast<std::size_t>(dim));

    for (int i = 0; i < dim; ++i) {
        auto& pts = sweeps[static_cast<std::size_t>(i)];
        pts.reserve(static_cast<std::size_t>(opts.points));
        Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
        for (int j = 0; j < opts.points; ++j) {
            const double t = opts.lo + (opts.hi - opts.lo) * j / (opts.points - 1);
            y[i] = t;
            pts.push_back(SweepPoint{cr.f_coord(i, t), cr.q(y), t});
        }
        y[i] = 0.0;

        // Multivaluedness: nearly equal a with clearly different Q.
        std::vector<SweepPoint> sorted = pts;
        std::sort(sorted.begin(), sorted.end(),
                  [](const SweepPoint& l, const SweepPoint& r) { return l.a < r.a; });
        double a_scale = 1.0;
        for (const SweepPoint& sp : sorted)
            a_scale = std::max(a_scale, std::abs(sp.a));
        for (std::size_t j = 0; j + 1 < sorted.size(); ++j) {
            const SweepPoint& l = sorted[j];
            const SweepPoint& r = sorted[j + 1];
            if (std::abs(r.a - l.a) <= 1e-7 * a_scale &&
                std::abs(r.q - l.q) > 1e-5 * (1.0 + std::abs(l.q)))
                throw NotReducibleError("coordinate " + std::to_string(i) +
                                        ": two cost values trace to the same decision value near a = " +
                                        std::to_string(l.a));
        }

        // Achievable range. A sweep end whose slope has collapsed relative
        // to the mean slope is an asymptote (finite bound); an end still
        // moving at the range extreme extends that extreme to infinity.
        const double h = (opts.hi - opts.lo) / (opts.points - 1);
        const double a_min = sorted.front().a, a_max = sorted.back().a;
        Interval range{a_min, a_max};
        const double mean_slope = (a_max - a_min) / (opts.hi - opts.lo);
        const double saturation = 1e-3 * std::max(mean_slope, 1e-300);
        const double span_tol = 1e-9 * a_scale;
        const double end_slope[2] = {std::abs(pts[1].a - pts[0].a) / h,
                                     std::abs(pts[pts.size() - 1].a - pts[pts.size() - 2].a) / h};
        const double end_a[2] = {pts.front().a, pts.back().a};
        for (int e = 0; e < 2; ++e) {
            if (end_slope[e] <= saturation)
                continue; // saturating end: bound stays finite
            if (std::abs(end_a[e] - a_max) <= span_tol)
                range.hi = kInf;
            else if (std::abs(end_a[e] - a_min) <= span_tol)
                range.lo = -kInf;
        }
        ranges[static_cast<std::size_t>(i)] = range;
    }

    ReducedCR red;
    red.dim = dim;
    red.set = FeasibleSet::box(ranges);
    const CoordFn f_coord = cr.f_coord;
    const CostFn q = cr.q;
    red.q_hat = [sweeps, f_coord, q, dim](const Eigen::VectorXd& a) {
        if (static_cast<int>(a.size()) != dim)
            throw DimMismatchError("Q_hat: wrong dimension");
        // Separable: invert each coordinate, then evaluate Q at the joint y.
        Eigen::VectorXd y(dim);
        for (int i = 0; i < dim; ++i)
            y[i] = invert_on_sweep(sweeps[static_cast<std::size_t>(i)], f_coord, i, a[i]);
        return q(y);
    };
    return red;
}

// ---------------------------------------------------------------------------
// Cost evaluation
// ---------------------------------------------------------------------------

Eigen::VectorXd gather(const Eigen::VectorXd& global, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j)
        out[static_cast<Eigen::Index>(j)] = global[idx[j]];
    return out;
}

void scatter(Eigen::VectorXd& global, const std::vector<int>& idx, const Eigen::VectorXd& local) {
    for (std::size_t j = 0; j < idx.size(); ++j)
        global[idx[j]] = local[static_cast<Eigen::Index>(j)];
}

double eval_primal_cost_y(const Problem& p, const Eigen::VectorXd& y) {
    if (y.size() != p.partition.n_total)
        throw DimMismatchError("primal cost: y length vs partition");
    double total = 0.0;
    for (std::size_t k = 0; k < p.crs.size(); ++k) {
        if (!p.crs[k].canonical.q)
            throw NotCanonicalError("primal cost: block " + std::to_string(k) + " lacks Q");
        total += p.crs[k].canonical.q(gather(y, p.partition.cr_blocks[k]));
    }
    return total;
}

double eval_primal_cost_a(const Problem& p, const Eigen::VectorXd& a) {
    if (a.size() != p.partition.n_total)
        throw DimMismatchError("primal cost: a length vs partition");
    double total = 0.0;
    for (std::size_t k = 0; k < p.crs.size(); ++k) {
        if (!p.crs[k].reduced)
            throw NotReducibleError("primal cost in a: block " + std::to_string(k) +
                                    " has no reduced form");
        total += p.crs[k].reduced->q_hat(gather(a, p.partition.cr_blocks[k]));
    }
    return total;
}

double eval_dual_cost_y(const Problem& p, const Eigen::VectorXd& y) {
    if (y.size() != p.partition.n_total)
        throw DimMismatchError("dual cost: y length vs partition");
    double total = 0.0;
    for (std::size_t k = 0; k < p.crs.size(); ++k)
        total -= eval_r(p.crs[k].canonical, gather(y, p.partition.cr_blocks[k]));
    return total;
}

} // namespace scatteropt
