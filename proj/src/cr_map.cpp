#include "scatteropt/cr_map.hpp"
#include "scatteropt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace scatteropt {

const char* to_string(MapClass c) {
    switch (c) {
    case MapClass::Neutral: return "neutral";
    case MapClass::PassiveEverywhere: return "passive-everywhere";
    case MapClass::DissipativeEverywhere: return "dissipative-everywhere";
    case MapClass::Source: return "source";
    case MapClass::Unclassified: return "unclassified";
    }
    return "unclassified";
}

// ---------------------------------------------------------------------------
// Generic derivation
// ---------------------------------------------------------------------------

namespace {

struct CoordTransform {
    double m00, m01, m10, m11;
};

// d-component of the transformed parametric curve for one coordinate.
double curve_d(const CanonicalCR& cr, const CoordTransform& ct, int coord, double y) {
    return ct.m10 * cr.f_coord(coord, y) + ct.m11 * cr.g_coord(coord, y);
}

void probe_monotone(const CanonicalCR& cr, const CoordTransform& ct, int coord) {
    // coarse log-spaced probe; catches direction reversals of d(y)
    std::vector<double> ys;
    for (double t = 1e-3; t <= 1e4; t *= 4.0) {
        ys.push_back(-t);
        ys.push_back(t);
    }
    ys.push_back(0.0);
    std::sort(ys.begin(), ys.end());
    int direction = 0;
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
        const double lo = curve_d(cr, ct, coord, ys[j]);
        const double hi = curve_d(cr, ct, coord, ys[j + 1]);
        if (hi == lo)
            continue;
        const int dir = hi > lo ? 1 : -1;
        if (direction == 0)
            direction = dir;
        else if (dir != direction)
            throw NonInvertibleParametrizationError(
                "coordinate " + std::to_string(coord) + ": d(y) reverses direction on [" +
                std::to_string(ys[j]) + ", " + std::to_string(ys[j + 1]) + "]");
    }
    if (direction == 0)
        throw NonInvertibleParametrizationError("coordinate " + std::to_string(coord) +
                                                ": d(y) is constant on the probe grid");
}

// Solves curve_d(y) == target for a monotone parametrization by expanding
// bracket plus bisection; tolerance 1e-12, capped at 200 iterations.
double solve_curve(const CanonicalCR& cr, const CoordTransform& ct, int coord, double target) {
    double lo = -1.0, hi = 1.0;
    double flo = curve_d(cr, ct, coord, lo) - target;
    double fhi = curve_d(cr, ct, coord, hi) - target;
    for (int it = 0; flo * fhi > 0.0; ++it) {
        if (it >= 64)
            throw NonInvertibleParametrizationError(
                "coordinate " + std::to_string(coord) + ": no bracket for d = " +
                std::to_string(target) + " (parametrization does not reach it)");
        lo *= 2.0;
        hi *= 2.0;
        flo = curve_d(cr, ct, coord, lo) - target;
        fhi = curve_d(cr, ct, coord, hi) - target;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = curve_d(cr, ct, coord, mid) - target;
        if (fm == 0.0 || hi - lo <= 1e-12 * (1.0 + std::abs(mid)))
            return mid;
        if (flo * fm <= 0.0)
            fhi = fm, hi = mid;
        else
            flo = fm, lo = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

CRMap derive_cr(const CanonicalCR& cr, const TransformConvention& t,
                const std::vector<int>& indices) {
    if (!cr.separable() || !cr.g_coord)
        throw DerivationError("generic derivation requires a separable parametric block");
    if (static_cast<int>(indices.size()) != cr.dim)
        throw DimMismatchError("derive_cr: block dim vs index list");

    std::vector<CoordTransform> cts;
    cts.reserve(indices.size());
    for (int gi : indices) {
        const Eigen::Matrix2d& m = t.matrix(gi);
        cts.push_back(CoordTransform{m(0, 0), m(0, 1), m(1, 0), m(1, 1)});
    }
    for (int j = 0; j < cr.dim; ++j)
        probe_monotone(cr, cts[static_cast<std::size_t>(j)], j);

    CRMap out;
    out.dim = cr.dim;
    out.form = MapForm::ImplicitParametric;
    const CanonicalCR block = cr;
    out.param = [block, cts](const Eigen::VectorXd& d) {
        if (static_cast<int>(d.size()) != block.dim)
            throw DimMismatchError("CR map: wrong input dimension");
        Eigen::VectorXd y(block.dim);
        for (int j = 0; j < block.dim; ++j)
            y[j] = solve_curve(block, cts[static_cast<std::size_t>(j)], j, d[j]);
        return y;
    };
    const VecFn param = out.param;
    out.apply = [block, cts, param](const Eigen::VectorXd& d) {
        const Eigen::VectorXd y = param(d);
        Eigen::VectorXd c(block.dim);
        for (int j = 0; j < block.dim; ++j) {
            const CoordTransform& ct = cts[static_cast<std::size_t>(j)];
            c[j] = ct.m00 * block.f_coord(j, y[j]) + ct.m01 * block.g_coord(j, y[j]);
        }
        return c;
    };
    return out;
}

CRMap derive_cr(const CanonicalCR& cr) {
    TransformConvention t(cr.dim);
    std::vector<int> idx(static_cast<std::size_t>(cr.dim));
    for (int j = 0; j < cr.dim; ++j)
        idx[static_cast<std::size_t>(j)] = j;
    return derive_cr(cr, t, idx);
}

// ---------------------------------------------------------------------------
// Classification battery
// ---------------------------------------------------------------------------

namespace {

double op_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0)
        return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()[0];
}

} // namespace

ClassifyReport classify_map(const CRMap& m, const BatterySpec& spec) {
    if (!m.apply)
        throw BadParamsError("classify_map: map has no apply function");
    ClassifyReport rep;
    const int n = m.dim;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> box(spec.box_lo, spec.box_hi);
    auto random_vec = [&] {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i)
            v[i] = box(rng);
        return v;
    };

    // Exact affinity: fit S and e from unit probes, demand three-point
    // collinearity per coordinate and agreement on random probes.
    const Eigen::VectorXd e0 = m.apply(Eigen::VectorXd::Zero(n));
    Eigen::MatrixXd s_fit(n, n);
    double collinearity = 0.0;
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        u[j] = 1.0;
        const Eigen::VectorXd m1 = m.apply(u);
        u[j] = 2.0;
        const Eigen::VectorXd m2 = m.apply(u);
        s_fit.col(j) = m1 - e0;
        collinearity = std::max(collinearity, (m2 - 2.0 * m1 + e0).lpNorm<Eigen::Infinity>());
    }
    double probe_residual = collinearity;
    for (int trial = 0; trial < 64; ++trial) {
        const Eigen::VectorXd x = random_vec();
        const double dev = (m.apply(x) - (s_fit * x + e0)).lpNorm<Eigen::Infinity>() /
                           std::max(1.0, x.lpNorm<Eigen::Infinity>());
        probe_residual = std::max(probe_residual, dev);
    }
    rep.affine_residual = probe_residual;
    const bool affine = probe_residual <= spec.affine_tol;
    if (affine) {
        rep.fitted = SourceParams{s_fit, e0};
        rep.s_norm = op_norm(s_fit);
        if (e0.lpNorm<Eigen::Infinity>() > spec.affine_tol) {
            rep.result = rep.s_norm <= 1.0 + spec.passive_slack ? MapClass::Source
                                                                : MapClass::Unclassified;
            return rep;
        }
    }

    // Neutrality over the battery.
    double neutral_dev = 0.0;
    for (int trial = 0; trial < spec.samples; ++trial) {
        const Eigen::VectorXd x = random_vec();
        neutral_dev = std::max(neutral_dev, std::abs(m.apply(x).norm() - x.norm()) /
                                                std::max(1.0, x.norm()));
        if (neutral_dev > spec.neutral_tol && trial > 16)
            break;
    }
    rep.max_neutral_dev = neutral_dev;
    if (neutral_dev <= spec.neutral_tol) {
        rep.result = MapClass::Neutral;
        return rep;
    }

    // Incremental gain over random pairs plus knee-adjacent pairs.
    double max_gain = 0.0;
    auto gain_pair = [&](const Eigen::VectorXd& x0, const Eigen::VectorXd& x1) {
        const double dx = (x1 - x0).norm();
        if (dx < spec.min_pair_separation)
            return;
        max_gain = std::max(max_gain, (m.apply(x1) - m.apply(x0)).norm() / dx);
    };
    for (int trial = 0; trial < spec.samples; ++trial)
        gain_pair(random_vec(), random_vec());
    std::uniform_real_distribution<double> tiny(-1e-3, 1e-3);
    for (double knee : m.knees)
        for (int j = 0; j < n; ++j)
            for (int trial = 0; trial < 32; ++trial) {
                Eigen::VectorXd x0 = random_vec(), x1 = x0;
                x0[j] = knee + tiny(rng);
                x1[j] = knee + tiny(rng);
                gain_pair(x0, x1);
                // same-branch small steps as well
                Eigen::VectorXd x2 = x0;
                x2[j] = x0[j] + std::abs(tiny(rng)) + 1e-6;
                gain_pair(x0, x2);
            }
    rep.max_gain = max_gain;
    if (max_gain < 1.0 - spec.passive_slack) {
        rep.result = MapClass::DissipativeEverywhere;
        rep.dissipation_margin = 1.0 - max_gain;
    } else if (max_gain <= 1.0 + spec.passive_slack) {
        rep.result = MapClass::PassiveEverywhere;
    } else {
        rep.result = MapClass::Unclassified;
    }
    return rep;
}

} // namespace scatteropt
