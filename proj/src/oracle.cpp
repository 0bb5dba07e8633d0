#include "scatteropt/oracle.hpp"
#include "scatteropt/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace scatteropt {

bool kkt_supported(const Problem& p) {
    for (const CrEntry& e : p.crs)
        switch (e.kind) {
        case CrKind::Quadratic:
        case CrKind::LinearCost:
        case CrKind::ConstSource:
        case CrKind::ZeroVar:
        case CrKind::Equal:
            continue;
        default:
            return false;
        }
    return true;
}

KktSolution kkt_solve(const Problem& p) {
    validate_problem(p);
    if (!kkt_supported(p))
        throw BadParamsError("kkt_solve: problem has non-quadratic-program blocks");
    const int n = p.partition.n_total;

    Eigen::VectorXd quad = Eigen::VectorXd::Zero(n);   // diagonal curvature
    Eigen::VectorXd linear = Eigen::VectorXd::Zero(n); // linear cost slope
    struct Pin {
        int index;
        double value;
    };
    std::vector<Pin> pins;
    std::vector<std::pair<int, int>> equal_pairs; // a_j = a_first rows

    for (std::size_t k = 0; k < p.crs.size(); ++k) {
        const auto& idx = p.partition.cr_blocks[k];
        const CrEntry& e = p.crs[k];
        switch (e.kind) {
        case CrKind::Quadratic:
            for (int gi : idx)
                quad[gi] = e.params.q;
            break;
        case CrKind::LinearCost:
            for (int gi : idx)
                linear[gi] = e.params.slope;
            break;
        case CrKind::ConstSource:
            for (std::size_t j = 0; j < idx.size(); ++j)
                pins.push_back(Pin{idx[j], e.params.values[static_cast<Eigen::Index>(j)]});
            break;
        case CrKind::ZeroVar:
            for (int gi : idx)
                pins.push_back(Pin{gi, 0.0});
            break;
        case CrKind::Equal:
            for (std::size_t j = 1; j < idx.size(); ++j)
                equal_pairs.emplace_back(idx[0], idx[j]);
            break;
        default:
            break;
        }
    }

    int m_li = 0;
    for (const IoSplit& s : p.partition.li_io_split)
        m_li += s.n_out;
    const int m = m_li + static_cast<int>(pins.size()) + static_cast<int>(equal_pairs.size());

    // stacked constraints: c_rows x = rhs
    Eigen::MatrixXd c_rows = Eigen::MatrixXd::Zero(m, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    int r0 = 0;
    for (std::size_t l = 0; l < p.lis.size(); ++l) {
        const auto& idx = p.partition.li_blocks[l];
        const IoSplit split = p.partition.li_io_split[l];
        for (int r = 0; r < split.n_out; ++r) {
            c_rows(r0 + r, idx[static_cast<std::size_t>(split.n_in + r)]) = 1.0;
            for (int c = 0; c < split.n_in; ++c)
                c_rows(r0 + r, idx[static_cast<std::size_t>(c)]) -= p.lis[l].a(r, c);
        }
        r0 += split.n_out;
    }
    for (const Pin& pin : pins) {
        c_rows(r0, pin.index) = 1.0;
        rhs[r0] = pin.value;
        ++r0;
    }
    for (const auto& [first, other] : equal_pairs) {
        c_rows(r0, other) = 1.0;
        c_rows(r0, first) = -1.0;
        ++r0;
    }

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = quad.asDiagonal();
    kkt.topRightCorner(n, m) = c_rows.transpose();
    kkt.bottomLeftCorner(m, n) = c_rows;
    Eigen::VectorXd full_rhs(n + m);
    full_rhs.head(n) = -linear;
    full_rhs.tail(m) = rhs;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible())
        throw SingularKktError("stacked first-order system is singular");
    const Eigen::VectorXd sol = lu.solve(full_rhs);

    KktSolution out;
    out.a = sol.head(n);
    // dual variables from the LI multipliers alone: b = -C_li^T mu_li
    const Eigen::VectorXd mu_li = sol.segment(n, m_li);
    out.b = -c_rows.topRows(m_li).transpose() * mu_li;
    return out;
}

namespace {

struct FreeVar {
    int li_block;
    int input_pos;
    int global_index;
};

} // namespace

GridSolution grid_solve(const Problem& p, double lo, double hi, double resolution) {
    validate_problem(p);
    if (!(resolution > 0.0) || !(hi > lo))
        throw BadParamsError("grid_solve: bad bounds or resolution");

    std::vector<FreeVar> free_vars;
    for (std::size_t l = 0; l < p.lis.size(); ++l)
        for (int j = 0; j < p.partition.li_io_split[l].n_in; ++j)
            free_vars.push_back(FreeVar{static_cast<int>(l), j,
                                        p.partition.li_blocks[l][static_cast<std::size_t>(j)]});
    if (free_vars.size() > 3)
        throw BadParamsError("grid_solve: more than three free dimensions");

    // per-dimension candidate values; pinned inputs collapse to the pin
    std::vector<std::vector<double>> candidates(free_vars.size());
    const PartitionMaps maps = build_maps(p.partition);
    for (std::size_t v = 0; v < free_vars.size(); ++v) {
        const int gi = free_vars[v].global_index;
        const CrEntry& e = p.crs[static_cast<std::size_t>(maps.cr_of_index[static_cast<std::size_t>(gi)])];
        if (e.kind == CrKind::ConstSource) {
            const int pos = maps.cr_pos_of_index[static_cast<std::size_t>(gi)];
            candidates[v] = {e.params.values[pos]};
        } else if (e.kind == CrKind::ZeroVar) {
            candidates[v] = {0.0};
        } else {
            const long steps = static_cast<long>(std::floor((hi - lo) / resolution)) + 1;
            if (steps > 20000000L)
                throw BadParamsError("grid_solve: grid too fine");
            candidates[v].reserve(static_cast<std::size_t>(steps));
            for (long s = 0; s < steps; ++s)
                candidates[v].push_back(lo + resolution * static_cast<double>(s));
        }
    }
    double total = 1;
    for (const auto& c : candidates)
        total *= static_cast<double>(c.size());
    if (total > 2e7)
        throw BadParamsError("grid_solve: grid too fine for the dimension count");

    const double member_tol = 0.5 * resolution + 1e-9;
    GridSolution best;
    best.value = kInf;
    Eigen::VectorXd a(p.partition.n_total);
    std::vector<std::size_t> pick(free_vars.size(), 0);

    auto evaluate = [&]() {
        for (std::size_t v = 0; v < free_vars.size(); ++v)
            a[free_vars[v].global_index] = candidates[v][pick[v]];
        for (std::size_t l = 0; l < p.lis.size(); ++l) {
            const auto& idx = p.partition.li_blocks[l];
            const IoSplit split = p.partition.li_io_split[l];
            Eigen::VectorXd a_in(split.n_in);
            for (int j = 0; j < split.n_in; ++j)
                a_in[j] = a[idx[static_cast<std::size_t>(j)]];
            const Eigen::VectorXd a_out = p.lis[l].a * a_in;
            for (int j = 0; j < split.n_out; ++j)
                a[idx[static_cast<std::size_t>(split.n_in + j)]] = a_out[j];
        }
        double value = 0.0;
        for (std::size_t k = 0; k < p.crs.size(); ++k) {
            if (!p.crs[k].reduced)
                throw NotReducibleError("grid_solve: block " + std::to_string(k) +
                                        " has no reduced form");
            const Eigen::VectorXd a_blk = gather(a, p.partition.cr_blocks[k]);
            if (!p.crs[k].reduced->set.contains(a_blk, member_tol))
                return;
            value += p.crs[k].reduced->q_hat(a_blk);
        }
        if (value < best.value) {
            best.value = value;
            best.a = a;
        }
    };

    // odometer over the candidate lists
    while (true) {
        evaluate();
        std::size_t v = 0;
        for (; v < pick.size(); ++v) {
            if (++pick[v] < candidates[v].size())
                break;
            pick[v] = 0;
        }
        if (v == pick.size())
            break;
        if (free_vars.empty())
            break;
    }
    if (!std::isfinite(best.value))
        throw BadParamsError("grid_solve: no feasible grid point in the given bounds");
    return best;
}

} // namespace scatteropt
