#include "scatteropt/recovery.hpp"
#include "scatteropt/errors.hpp"

#include <cmath>
#include <random>

namespace scatteropt {

Solution recover(const SystemGraph& sg, const StateVector& state) {
    if (state.size() != sg.n())
        throw DimMismatchError("recover: state length vs graph");
    Solution sol;
    auto [a, b] = inverse_transform(state, sg.conv);
    sol.a_star = std::move(a);
    sol.b_star = std::move(b);

    bool all_y = true;
    Eigen::VectorXd y_global = Eigen::VectorXd::Zero(sg.n());
    for (const CrNode& node : sg.crs) {
        if (node.map.param) {
            Eigen::VectorXd y = node.map.param(gather(state.d, node.indices));
            scatter(y_global, node.indices, y);
            sol.y_blocks.emplace_back(std::move(y));
        } else {
            all_y = false;
            sol.y_blocks.emplace_back(std::nullopt);
        }
    }
    if (all_y) {
        sol.y_star = y_global;
        sol.primal_cost = eval_primal_cost_y(sg.problem, y_global);
        sol.dual_cost = eval_dual_cost_y(sg.problem, y_global);
        sol.gap = sol.primal_cost - sol.dual_cost;
        sol.costs_valid = true;
    }
    sol.residuals = verify_fixed_point(sg, state);
    return sol;
}

namespace {

// Null-space basis of M (columns spanning {x : M x = 0}).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, int n) {
    if (m.rows() == 0)
        return Eigen::MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = 1e-10 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > cutoff)
            ++rank;
    return svd.matrixV().rightCols(n - rank);
}

// Least-squares slope of log10|dF| vs log10 t over points above the noise
// floor; infinity when fewer than two usable points (flat direction).
FlatnessProbe probe_directions(const std::function<double(const Eigen::VectorXd&)>& cost,
                               const Eigen::VectorXd& y0, const Eigen::MatrixXd& basis,
                               int directions, std::uint64_t seed) {
    FlatnessProbe probe;
    if (basis.cols() == 0)
        return probe;
    const double f0 = cost(y0);
    const double floor = 1e-13 * std::max(1.0, std::abs(f0));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double ts[4] = {1e-2, 1e-3, 1e-4, 1e-5};
    for (int dir = 0; dir < directions; ++dir) {
        Eigen::VectorXd coeff(basis.cols());
        for (int i = 0; i < coeff.size(); ++i)
            coeff[i] = gauss(rng);
        Eigen::VectorXd delta = basis * coeff;
        const double norm = delta.norm();
        if (norm < 1e-14)
            continue;
        delta /= norm;
        ++probe.directions;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int pts = 0;
        for (double t : ts) {
            const double df = std::abs(cost(y0 + t * delta) - f0);
            if (df <= floor)
                continue;
            const double lx = std::log10(t), ly = std::log10(df);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++pts;
        }
        if (pts < 2) {
            ++probe.flat_directions;
            continue;
        }
        const double slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
        probe.min_slope = std::min(probe.min_slope, slope);
    }
    return probe;
}

// Stacked linear-constraint rows in the global decision coordinates.
// Primal: a_out - A a_in = 0. Dual: b_in + A^T b_out = 0.
void constraint_rows(const Problem& p, bool dual, Eigen::MatrixXd& rows) {
    const int n = p.partition.n_total;
    int m = 0;
    for (std::size_t l = 0; l < p.lis.size(); ++l)
        m += dual ? p.partition.li_io_split[l].n_in : p.partition.li_io_split[l].n_out;
    rows = Eigen::MatrixXd::Zero(m, n);
    int r0 = 0;
    for (std::size_t l = 0; l < p.lis.size(); ++l) {
        const auto& idx = p.partition.li_blocks[l];
        const IoSplit split = p.partition.li_io_split[l];
        const Eigen::MatrixXd& a = p.lis[l].a;
        if (!dual) {
            for (int r = 0; r < split.n_out; ++r) {
                rows(r0 + r, idx[static_cast<std::size_t>(split.n_in + r)]) = 1.0;
                for (int c = 0; c < split.n_in; ++c)
                    rows(r0 + r, idx[static_cast<std::size_t>(c)]) -= a(r, c);
            }
            r0 += split.n_out;
        } else {
            for (int r = 0; r < split.n_in; ++r) {
                rows(r0 + r, idx[static_cast<std::size_t>(r)]) = 1.0;
                for (int c = 0; c < split.n_out; ++c)
                    rows(r0 + r, idx[static_cast<std::size_t>(split.n_in + c)]) += a(c, r);
            }
            r0 += split.n_in;
        }
    }
}

// Block-diagonal Jacobian of the stacked f (or g) maps at y*.
Eigen::MatrixXd stacked_jacobian(const Problem& p, const Eigen::VectorXd& y_global,
                                 bool of_g) {
    const int n = p.partition.n_total;
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < p.crs.size(); ++k) {
        const auto& idx = p.partition.cr_blocks[k];
        const CanonicalCR& c = p.crs[k].canonical;
        const Eigen::VectorXd y_blk = gather(y_global, idx);
        Eigen::MatrixXd jb;
        if (!of_g && c.jacobian_f)
            jb = c.jacobian_f(y_blk);
        else
            jb = numeric_jacobian(of_g ? c.g : c.f, y_blk);
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t col = 0; col < idx.size(); ++col)
                j(idx[r], idx[col]) = jb(static_cast<Eigen::Index>(r),
                                         static_cast<Eigen::Index>(col));
    }
    return j;
}

} // namespace

StationarityReport stationarity_report(const Solution& sol, const Problem& p,
                                       const StationarityOptions& opts) {
    StationarityReport rep;
    const int n = p.partition.n_total;
    if (sol.a_star.size() != n || sol.b_star.size() != n)
        throw DimMismatchError("stationarity_report: solution length vs problem");

    for (std::size_t l = 0; l < p.lis.size(); ++l) {
        const auto& idx = p.partition.li_blocks[l];
        const IoSplit split = p.partition.li_io_split[l];
        Eigen::VectorXd a_in(split.n_in), a_out(split.n_out), b_in(split.n_in),
            b_out(split.n_out);
        for (int j = 0; j < split.n_in; ++j) {
            a_in[j] = sol.a_star[idx[static_cast<std::size_t>(j)]];
            b_in[j] = sol.b_star[idx[static_cast<std::size_t>(j)]];
        }
        for (int j = 0; j < split.n_out; ++j) {
            a_out[j] = sol.a_star[idx[static_cast<std::size_t>(split.n_in + j)]];
            b_out[j] = sol.b_star[idx[static_cast<std::size_t>(split.n_in + j)]];
        }
        rep.li_primal.push_back((p.lis[l].a * a_in - a_out).lpNorm<Eigen::Infinity>());
        rep.li_dual.push_back(
            (b_in + p.lis[l].a.transpose() * b_out).lpNorm<Eigen::Infinity>());
    }
    for (std::size_t k = 0; k < p.crs.size(); ++k) {
        if (k >= sol.y_blocks.size() || !sol.y_blocks[k] || !p.crs[k].has_canonical())
            continue;
        const auto& idx = p.partition.cr_blocks[k];
        const Eigen::VectorXd& y = *sol.y_blocks[k];
        rep.cr_primal.push_back(
            (gather(sol.a_star, idx) - p.crs[k].canonical.f(y)).lpNorm<Eigen::Infinity>());
        rep.cr_dual.push_back(
            (gather(sol.b_star, idx) - p.crs[k].canonical.g(y)).lpNorm<Eigen::Infinity>());
    }
    for (double v : rep.li_primal)
        rep.max_feasibility = std::max(rep.max_feasibility, v);
    for (double v : rep.li_dual)
        rep.max_feasibility = std::max(rep.max_feasibility, v);
    for (double v : rep.cr_primal)
        rep.max_feasibility = std::max(rep.max_feasibility, v);
    for (double v : rep.cr_dual)
        rep.max_feasibility = std::max(rep.max_feasibility, v);

    if (sol.y_star) {
        const Eigen::VectorXd& y0 = *sol.y_star;
        Eigen::MatrixXd c_primal, c_dual;
        constraint_rows(p, false, c_primal);
        constraint_rows(p, true, c_dual);
        const Eigen::MatrixXd basis_p =
            null_space(c_primal * stacked_jacobian(p, y0, false), n);
        const Eigen::MatrixXd basis_d =
            null_space(c_dual * stacked_jacobian(p, y0, true), n);
        auto primal_cost = [&p](const Eigen::VectorXd& y) {
            return eval_primal_cost_y(p, y);
        };
        auto dual_cost = [&p](const Eigen::VectorXd& y) { return eval_dual_cost_y(p, y); };
        rep.primal_flatness =
            probe_directions(primal_cost, y0, basis_p, opts.directions, opts.seed);
        rep.dual_flatness =
            probe_directions(dual_cost, y0, basis_d, opts.directions, opts.seed ^ 0x9e37ull);
    }
    return rep;
}

} // namespace scatteropt
