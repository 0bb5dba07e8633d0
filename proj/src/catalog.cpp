#include "scatteropt/catalog.hpp"
#include "scatteropt/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace scatteropt {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double clamp1(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// The derived nonnegativity element map; box maps are built from shifted
// copies of it rather than a fresh derivation.
double nonneg_map(double d) { return std::abs(d); }

double box_map(double d, double lo, double hi) {
    const double t_lo = std::isfinite(lo) ? nonneg_map(d - lo / kSqrt2) + lo / kSqrt2 : d;
    const double t_hi = std::isfinite(hi) ? nonneg_map(d - hi / kSqrt2) - hi / kSqrt2 : -d;
    return t_lo - t_hi - d;
}

VecFn coordwise(std::function<double(double)> f) {
    return [f = std::move(f)](const Eigen::VectorXd& y) {
        Eigen::VectorXd out(y.size());
        for (int i = 0; i < y.size(); ++i)
            out[i] = f(y[i]);
        return out;
    };
}

JacFn diag_jacobian(std::function<double(double)> fprime) {
    return [fprime = std::move(fprime)](const Eigen::VectorXd& y) {
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(y.size(), y.size());
        for (int i = 0; i < y.size(); ++i)
            j(i, i) = fprime(y[i]);
        return j;
    };
}

CatalogElement make_quadratic(double q, int dim) {
    if (q < 0.0)
        throw BadParamsError("quadratic element: curvature q must be >= 0, got " +
                             std::to_string(q));
    CatalogElement el;
    el.entry.kind = CrKind::Quadratic;
    el.entry.params.q = q;

    CanonicalCR c;
    c.dim = dim;
    c.f = [](const Eigen::VectorXd& y) { return y; };
    c.g = [q](const Eigen::VectorXd& y) { return (q * y).eval(); };
    c.q = [q](const Eigen::VectorXd& y) { return 0.5 * q * y.squaredNorm(); };
    c.jacobian_f = [](const Eigen::VectorXd& y) {
        return Eigen::MatrixXd::Identity(y.size(), y.size()).eval();
    };
    c.f_coord = [](int, double y) { return y; };
    c.g_coord = [q](int, double y) { return q * y; };
    el.entry.canonical = std::move(c);

    el.entry.reduced = ReducedCR{
        dim, [q](const Eigen::VectorXd& a) { return 0.5 * q * a.squaredNorm(); },
        FeasibleSet::all(dim)};

    DualCR dual;
    dual.dim = dim;
    dual.r = [q](const Eigen::VectorXd& y) { return 0.5 * q * y.squaredNorm(); };
    if (q > 0.0) {
        dual.r_hat = [q](const Eigen::VectorXd& b) { return b.squaredNorm() / (2.0 * q); };
        dual.set_b = FeasibleSet::all(dim);
    } else {
        dual.r_hat = [](const Eigen::VectorXd&) { return 0.0; };
        dual.set_b = FeasibleSet::point(Eigen::VectorXd::Zero(dim));
    }
    el.entry.dual = std::move(dual);

    const double rho = (1.0 - q) / (1.0 + q);
    el.map.dim = dim;
    el.map.apply = [rho](const Eigen::VectorXd& d) { return (rho * d).eval(); };
    el.map.param = [q](const Eigen::VectorXd& d) { return (kSqrt2 / (1.0 + q) * d).eval(); };
    el.map.classification = q == 0.0 ? MapClass::Neutral : MapClass::DissipativeEverywhere;
    return el;
}

CatalogElement make_linear(double slope, int dim) {
    CatalogElement el;
    el.entry.kind = CrKind::LinearCost;
    el.entry.params.slope = slope;

    CanonicalCR c;
    c.dim = dim;
    c.f = [](const Eigen::VectorXd& y) { return y; };
    c.g = [slope](const Eigen::VectorXd& y) {
        return Eigen::VectorXd::Constant(y.size(), slope).eval();
    };
    c.q = [slope](const Eigen::VectorXd& y) { return slope * y.sum(); };
    c.jacobian_f = [](const Eigen::VectorXd& y) {
        return Eigen::MatrixXd::Identity(y.size(), y.size()).eval();
    };
    c.f_coord = [](int, double y) { return y; };
    c.g_coord = [slope](int, double) { return slope; };
    el.entry.canonical = std::move(c);

    el.entry.reduced = ReducedCR{
        dim, [slope](const Eigen::VectorXd& a) { return slope * a.sum(); },
        FeasibleSet::all(dim)};

    DualCR dual;
    dual.dim = dim;
    dual.r = [](const Eigen::VectorXd&) { return 0.0; };
    dual.r_hat = [](const Eigen::VectorXd&) { return 0.0; };
    dual.set_b = FeasibleSet::point(Eigen::VectorXd::Constant(dim, slope));
    el.entry.dual = std::move(dual);

    const double shift = kSqrt2 * slope;
    el.map.dim = dim;
    el.map.apply = [shift](const Eigen::VectorXd& d) {
        return (d.array() - shift).matrix().eval();
    };
    el.map.param = [slope](const Eigen::VectorXd& d) {
        return (kSqrt2 * d.array() - slope).matrix().eval();
    };
    if (slope == 0.0) {
        el.map.classification = MapClass::Neutral;
    } else {
        el.map.classification = MapClass::Source;
        el.map.source_params = SourceParams{Eigen::MatrixXd::Identity(dim, dim),
                                            Eigen::VectorXd::Constant(dim, -shift)};
    }
    return el;
}

CatalogElement make_source(Eigen::VectorXd value, int dim) {
    if (value.size() == 1 && dim > 1)
        value = Eigen::VectorXd::Constant(dim, value[0]);
    if (static_cast<int>(value.size()) != dim)
        throw BadParamsError("source element: expected " + std::to_string(dim) +
                             " values, got " + std::to_string(value.size()));
    if (!value.allFinite())
        throw BadParamsError("source element: values must be finite");
    CatalogElement el;
    el.entry.kind = CrKind::ConstSource;
    el.entry.params.values = value;

    CanonicalCR c;
    c.dim = dim;
    c.f = [value](const Eigen::VectorXd&) { return value; };
    c.g = [](const Eigen::VectorXd& y) { return y; };
    c.q = [](const Eigen::VectorXd&) { return 0.0; };
    c.jacobian_f = [](const Eigen::VectorXd& y) {
        return Eigen::MatrixXd::Zero(y.size(), y.size()).eval();
    };
    c.f_coord = [value](int i, double) { return value[i]; };
    c.g_coord = [](int, double y) { return y; };
    el.entry.canonical = std::move(c);

    el.entry.reduced = ReducedCR{dim, [](const Eigen::VectorXd&) { return 0.0; },
                                 FeasibleSet::point(value)};

    DualCR dual;
    dual.dim = dim;
    dual.r = [value](const Eigen::VectorXd& y) { return value.dot(y); };
    dual.r_hat = [value](const Eigen::VectorXd& b) { return value.dot(b); };
    dual.set_b = FeasibleSet::all(dim);
    el.entry.dual = std::move(dual);

    el.map.dim = dim;
    const Eigen::VectorXd offset = kSqrt2 * value;
    el.map.apply = [offset](const Eigen::VectorXd& d) { return (offset - d).eval(); };
    el.map.param = [value](const Eigen::VectorXd& d) {
        return (kSqrt2 * d - value).eval();
    };
    if (value.lpNorm<Eigen::Infinity>() > 0.0) {
        el.map.classification = MapClass::Source;
        el.map.source_params =
            SourceParams{(-Eigen::MatrixXd::Identity(dim, dim)).eval(), offset};
    } else {
        el.map.classification = MapClass::Neutral;
    }
    return el;
}

CatalogElement make_abs(double weight, int dim) {
    if (weight < 0.0)
        throw BadParamsError("abs element: weight must be >= 0, got " +
                             std::to_string(weight));
    CatalogElement el;
    el.entry.kind = CrKind::AbsValue;
    el.entry.params.weight = weight;

    const double w = weight;
    auto shrink = [w](double y) { return std::copysign(std::max(std::abs(y) - w, 0.0), y); };
    auto clampw = [w](double y) { return clamp1(y, -w, w); };

    CanonicalCR c;
    c.dim = dim;
    c.f = coordwise(shrink);
    c.g = coordwise(clampw);
    c.q = [w, shrink](const Eigen::VectorXd& y) {
        double total = 0.0;
        for (int i = 0; i < y.size(); ++i)
            total += w * std::abs(shrink(y[i]));
        return total;
    };
    c.jacobian_f = diag_jacobian([w](double y) { return std::abs(y) > w ? 1.0 : 0.0; });
    c.f_coord = [shrink](int, double y) { return shrink(y); };
    c.g_coord = [clampw](int, double y) { return clampw(y); };
    el.entry.canonical = std::move(c);

    el.entry.reduced = ReducedCR{
        dim, [w](const Eigen::VectorXd& a) { return w * a.lpNorm<1>(); },
        FeasibleSet::all(dim)};

    DualCR dual;
    dual.dim = dim;
    dual.r = [](const Eigen::VectorXd&) { return 0.0; };
    dual.r_hat = [](const Eigen::VectorXd&) { return 0.0; };
    dual.set_b = FeasibleSet::box(std::vector<Interval>(static_cast<std::size_t>(dim),
                                                        Interval{-w, w}));
    el.entry.dual = std::move(dual);

    // knees at +-w/sqrt(2); reflection in between, unit shifts outside
    const double knee = w / kSqrt2;
    el.map.dim = dim;
    el.map.apply = [w, knee](const Eigen::VectorXd& d) {
        Eigen::VectorXd c_out(d.size());
        for (int i = 0; i < d.size(); ++i) {
            if (d[i] >= knee)
                c_out[i] = d[i] - kSqrt2 * w;
            else if (d[i] <= -knee)
                c_out[i] = d[i] + kSqrt2 * w;
            else
                c_out[i] = -d[i];
        }
        return c_out;
    };
    el.map.param = [](const Eigen::VectorXd& d) { return (kSqrt2 * d).eval(); };
    el.map.classification = w == 0.0 ? MapClass::Neutral : MapClass::PassiveEverywhere;
    if (w > 0.0)
        el.map.knees = {-knee, knee};
    return el;
}

CatalogElement make_nonneg(int dim) {
    CatalogElement el;
    el.entry.kind = CrKind::NonNeg;

    CanonicalCR c;
    c.dim = dim;
    c.f = coordwise([](double y) { return std::max(y, 0.0); });
    c.g = coordwise([](double y) { return std::min(y, 0.0); });
    c.q = [](const Eigen::VectorXd&) { return 0.0; };
    c.jacobian_f = diag_jacobian([](double y) { return y > 0.0 ? 1.0 : 0.0; });
    c.f_coord = [](int, double y) { return std::max(y, 0.0); };
    c.g_coord = [](int, double y) { return std::min(y, 0.0); };
    el.entry.canonical = std::move(c);

    el.entry.reduced = ReducedCR{
        dim, [](const Eigen::VectorXd&) { return 0.0; },
        FeasibleSet::box(std::vector<Interval>(static_cast<std::size_t>(dim),
                                               Interval{0.0, kInf}))};

    DualCR dual;
    dual.dim = dim;
    dual.r = [](const Eigen::VectorXd&) { return 0.0; };
    dual.r_hat = [](const Eigen::VectorXd&) { return 0.0; };
    dual.set_b = FeasibleSet::box(std::vector<Interval>(static_cast<std::size_t>(dim),
                                                        Interval{-kInf, 0.0}));
    el.entry.dual = std::move(dual);

    el.map.dim = dim;
    el.map.apply = coordwise(nonneg_map);
    el.map.param = [](const Eigen::VectorXd& d) { return (kSqrt2 * d).eval(); };
    el.map.classification = MapClass::Neutral;
    el.map.knees = {0.0};
    return el;
}

CatalogElement make_box(double lo, double hi, int dim) {
    if (!(lo <= hi))
        throw BadParamsError("box element: lo > hi");
    if (lo == hi)
        throw BadParamsError("box element: degenerate interval; use a source pin");
    CatalogElement el;
    el.entry.kind = CrKind::Box;
    el.entry.params.lo = lo;
    el.entry.params.hi = hi;

    CanonicalCR c;
    c.dim = dim;
    c.f = coordwise([lo, hi](double y) { return clamp1(y, lo, hi); });
    c.g = coordwise([lo, hi](double y) { return y - clamp1(y, lo, hi); });
    c.q = [](const Eigen::VectorXd&) { return 0.0; };
    c.jacobian_f = diag_jacobian([lo, hi](double y) { return (y > lo && y < hi) ? 1.0 : 0.0; });
    c.f_coord = [lo, hi](int, double y) { return clamp1(y, lo, hi); };
    c.g_coord = [lo, hi](int, double y) { return y - clamp1(y, lo, hi); };
    el.entry.canonical = std::move(c);

    el.entry.reduced = ReducedCR{
        dim, [](const Eigen::VectorXd&) { return 0.0; },
        FeasibleSet::box(std::vector<Interval>(static_cast<std::size_t>(dim),
                                               Interval{lo, hi}))};

    DualCR dual;
    dual.dim = dim;
    dual.r = [lo, hi](const Eigen::VectorXd& y) {
        double total = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            const double b = y[i] - clamp1(y[i], lo, hi);
            total += b > 0.0 ? hi * b : (b < 0.0 ? lo * b : 0.0);
        }
        return total;
    };
    dual.r_hat = [lo, hi](const Eigen::VectorXd& b) {
        double total = 0.0;
        for (int i = 0; i < b.size(); ++i)
            total += b[i] > 0.0 ? hi * b[i] : (b[i] < 0.0 ? lo * b[i] : 0.0);
        return total;
    };
    dual.set_b = FeasibleSet::box(std::vector<Interval>(
        static_cast<std::size_t>(dim),
        Interval{std::isfinite(lo) ? -kInf : 0.0, std::isfinite(hi) ? kInf : 0.0}));
    el.entry.dual = std::move(dual);

    el.map.dim = dim;
    el.map.apply = coordwise([lo, hi](double d) { return box_map(d, lo, hi); });
    el.map.param = [](const Eigen::VectorXd& d) { return (kSqrt2 * d).eval(); };
    const bool reflected_halfline = (lo == 0.0 && hi == kInf) || (lo == -kInf && hi == 0.0);
    const bool free_interval = lo == -kInf && hi == kInf;
    el.map.classification = (reflected_halfline || free_interval)
                                ? MapClass::Neutral
                                : MapClass::PassiveEverywhere;
    if (std::isfinite(lo))
        el.map.knees.push_back(lo / kSqrt2);
    if (std::isfinite(hi))
        el.map.knees.push_back(hi / kSqrt2);
    return el;
}

CatalogElement make_zero(int dim) {
    CatalogElement el;
    el.entry.kind = CrKind::ZeroVar;

    CanonicalCR c;
    c.dim = dim;
    c.f = [](const Eigen::VectorXd& y) { return Eigen::VectorXd::Zero(y.size()).eval(); };
    c.g = [](const Eigen::VectorXd& y) { return y; };
    c.q = [](const Eigen::VectorXd&) { return 0.0; };
    c.jacobian_f = [](const Eigen::VectorXd& y) {
        return Eigen::MatrixXd::Zero(y.size(), y.size()).eval();
    };
    c.f_coord = [](int, double) { return 0.0; };
    c.g_coord = [](int, double y) { return y; };
    el.entry.canonical = std::move(c);

    el.entry.reduced = ReducedCR{dim, [](const Eigen::VectorXd&) { return 0.0; },
                                 FeasibleSet::point(Eigen::VectorXd::Zero(dim))};

    DualCR dual;
    dual.dim = dim;
    dual.r = [](const Eigen::VectorXd&) { return 0.0; };
    dual.r_hat = [](const Eigen::VectorXd&) { return 0.0; };
    dual.set_b = FeasibleSet::all(dim);
    el.entry.dual = std::move(dual);

    el.map.dim = dim;
    el.map.apply = [](const Eigen::VectorXd& d) { return (-d).eval(); };
    el.map.param = [](const Eigen::VectorXd& d) { return (kSqrt2 * d).eval(); };
    el.map.classification = MapClass::Neutral;
    return el;
}

CatalogElement make_equal(int dim) {
    if (dim < 2)
        throw BadParamsError("equal element needs dim >= 2");
    CatalogElement el;
    el.entry.kind = CrKind::Equal;

    CanonicalCR c;
    c.dim = dim;
    c.f = [](const Eigen::VectorXd& y) {
        return Eigen::VectorXd::Constant(y.size(), y[0]).eval();
    };
    c.g = [](const Eigen::VectorXd& y) {
        return (y.array() - y.mean()).matrix().eval();
    };
    c.q = [](const Eigen::VectorXd&) { return 0.0; };
    c.jacobian_f = [](const Eigen::VectorXd& y) {
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(y.size(), y.size());
        j.col(0).setOnes();
        return j;
    };
    // not separable: no per-coordinate maps
    el.entry.canonical = std::move(c);

    el.entry.reduced = ReducedCR{dim, [](const Eigen::VectorXd&) { return 0.0; },
                                 FeasibleSet::all_equal(dim)};

    DualCR dual;
    dual.dim = dim;
    dual.r = [](const Eigen::VectorXd&) { return 0.0; };
    dual.r_hat = [](const Eigen::VectorXd&) { return 0.0; };
    dual.set_b = FeasibleSet::zero_sum(dim);
    el.entry.dual = std::move(dual);

    el.map.dim = dim;
    el.map.apply = [](const Eigen::VectorXd& d) {
        return (Eigen::VectorXd::Constant(d.size(), 2.0 * d.mean()) - d).eval();
    };
    el.map.param = [](const Eigen::VectorXd& d) {
        const double t = kSqrt2 * d.mean();
        Eigen::VectorXd y(d.size());
        y[0] = t;
        for (int i = 1; i < d.size(); ++i)
            y[i] = t + kSqrt2 * (d[i] - d[0]);
        return y;
    };
    el.map.classification = MapClass::Neutral;
    return el;
}

} // namespace

CatalogElement catalog_cr(CrKind kind, const CrParams& params, int dim) {
    if (dim < 1)
        throw BadParamsError("catalog element needs dim >= 1");
    switch (kind) {
    case CrKind::Quadratic: return make_quadratic(params.q, dim);
    case CrKind::LinearCost: return make_linear(params.slope, dim);
    case CrKind::ConstSource: return make_source(params.values, dim);
    case CrKind::AbsValue: return make_abs(params.weight, dim);
    case CrKind::NonNeg: return make_nonneg(dim);
    case CrKind::Box: return make_box(params.lo, params.hi, dim);
    case CrKind::ZeroVar: return make_zero(dim);
    case CrKind::Equal: return make_equal(dim);
    case CrKind::Custom: break;
    }
    throw BadParamsError("catalog_cr: custom blocks are built directly, not from the catalog");
}

LIBlock catalog_li(LiKind kind, const LiParams& params) {
    LIBlock li;
    switch (kind) {
    case LiKind::EqualityChain:
        if (params.n < 1)
            throw BadParamsError("equality chain needs n >= 1");
        li.a = Eigen::MatrixXd::Identity(params.n, params.n);
        return li;
    case LiKind::Replicator:
        if (params.n < 1)
            throw BadParamsError("replicator needs fan-out >= 1");
        li.a = Eigen::MatrixXd::Ones(params.n, 1);
        return li;
    case LiKind::Negator:
        if (params.n < 1)
            throw BadParamsError("negator needs n >= 1");
        li.a = -Eigen::MatrixXd::Identity(params.n, params.n);
        return li;
    case LiKind::General:
        if (params.a.size() == 0)
            throw BadParamsError("general LI block needs a matrix");
        if (!params.a.allFinite())
            throw BadParamsError("general LI block has non-finite entries");
        li.a = params.a;
        return li;
    }
    throw BadParamsError("catalog_li: unknown kind");
}

} // namespace scatteropt
