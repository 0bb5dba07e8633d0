#include "scatteropt/executor.hpp"
#include "scatteropt/errors.hpp"
#include "scatteropt/rng.hpp"

#include <cmath>
#include <string>

namespace scatteropt {

namespace {

constexpr double kDivergenceGuard = 1e12;

double port_prob(const Schedule& s, std::size_t pos) {
    if (s.mode == Schedule::Mode::Synchronous)
        return 1.0;
    if (!s.per_port_prob.empty())
        return s.per_port_prob[pos];
    return s.update_prob;
}

// Latch decision for one delay at one tick; keyed on (seed, tick, port) so
// it is reproducible and independent of evaluation order.
bool delay_fires(const Schedule& s, long tick, int port, std::size_t pos) {
    if (s.mode == Schedule::Mode::Synchronous)
        return true;
    return counter_u01(s.rng_seed, static_cast<std::uint64_t>(tick),
                       static_cast<std::uint64_t>(port)) < port_prob(s, pos);
}

void check_schedule(const SystemGraph& sg, const Schedule& s) {
    if (s.mode == Schedule::Mode::Asynchronous) {
        auto check = [](double p) {
            if (!(p > 0.0) || p > 1.0)
                throw BadParamsError("schedule: update probability must lie in (0, 1], got " +
                                     std::to_string(p));
        };
        if (s.per_port_prob.empty())
            check(s.update_prob);
        else {
            if (s.per_port_prob.size() != sg.delayed_ports.size())
                throw DimMismatchError("schedule: per-port probabilities vs delayed ports");
            for (double p : s.per_port_prob)
                check(p);
        }
    }
    if (s.max_iters < 1)
        throw BadParamsError("schedule: max_iters must be positive");
    if (!(s.fixed_point_tol > 0.0))
        throw BadParamsError("schedule: fixed_point_tol must be positive");
}

void check_finite(const StateVector& st) {
    if (!st.c.allFinite() || !st.d.allFinite())
        throw NonFiniteStateError("state contains NaN/Inf");
    if (st.d.lpNorm<Eigen::Infinity>() > kDivergenceGuard ||
        st.c.lpNorm<Eigen::Infinity>() > kDivergenceGuard)
        throw NonFiniteStateError("state exceeded the divergence guard (|x| > 1e12)");
}

} // namespace

const char* to_string(RunStatus s) {
    switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIters: return "max-iters";
    case RunStatus::Diverged: return "diverged";
    }
    return "max-iters";
}

StateVector zero_state(const SystemGraph& sg) {
    StateVector st;
    st.c = Eigen::VectorXd::Zero(sg.n());
    st.d = Eigen::VectorXd::Zero(sg.n());
    return st;
}

StateVector step(const SystemGraph& sg, const StateVector& state, const Schedule& schedule,
                 long tick) {
    if (!sg.reduced)
        throw DerivationError("step: run reduce_sources before iterating");
    if (state.size() != sg.n())
        throw DimMismatchError("step: state length vs graph");
    const ReducedAffine& red = *sg.reduced;
    const auto& dports = sg.delayed_ports;
    const auto nd = static_cast<Eigen::Index>(dports.size());

    Eigen::VectorXd c_d(nd);
    for (Eigen::Index j = 0; j < nd; ++j)
        c_d[j] = state.c[dports[static_cast<std::size_t>(j)]];
    const Eigen::VectorXd d_prop = red.g_hat * c_d + red.e_hat;

    StateVector next = state;
    for (Eigen::Index j = 0; j < nd; ++j) {
        const int port = dports[static_cast<std::size_t>(j)];
        if (delay_fires(schedule, tick, port, static_cast<std::size_t>(j)))
            next.d[port] = d_prop[j];
    }
    for (const CrNode& node : sg.crs) {
        if (node.is_source)
            continue;
        Eigen::VectorXd d_block(static_cast<Eigen::Index>(node.indices.size()));
        for (std::size_t r = 0; r < node.indices.size(); ++r)
            d_block[static_cast<Eigen::Index>(r)] = next.d[node.indices[r]];
        const Eigen::VectorXd c_block = node.map.apply(d_block);
        for (std::size_t r = 0; r < node.indices.size(); ++r)
            next.c[node.indices[r]] = c_block[static_cast<Eigen::Index>(r)];
    }
    expand_sources(sg, next);
    check_finite(next);
    return next;
}

namespace {

RunResult run_impl(const SystemGraph& sg, const Schedule& schedule, StateVector state) {
    check_schedule(sg, schedule);
    if (!sg.reduced)
        throw DerivationError("run: run reduce_sources before iterating");
    if (state.size() != sg.n())
        throw DimMismatchError("run: init state length vs graph");

    const auto& dports = sg.delayed_ports;
    double min_p = 1.0;
    for (std::size_t j = 0; j < dports.size(); ++j)
        min_p = std::min(min_p, port_prob(schedule, j));
    const long window =
        schedule.mode == Schedule::Mode::Synchronous
            ? 1
            : 4 * static_cast<long>(std::ceil(1.0 / min_p));

    expand_sources(sg, state);
    RunResult result;
    result.trace.status = RunStatus::MaxIters;
    std::vector<long> last_fired(dports.size(), 0);
    long quiet_ticks = 0;

    for (long tick = 1; tick <= schedule.max_iters; ++tick) {
        StateVector next;
        try {
            next = step(sg, state, schedule, tick);
        } catch (const NonFiniteStateError&) {
            result.trace.status = RunStatus::Diverged;
            result.trace.iterations = tick;
            break;
        }
        double residual = 0.0;
        for (std::size_t j = 0; j < dports.size(); ++j) {
            const int port = dports[j];
            residual = std::max(residual, std::abs(next.d[port] - state.d[port]));
            if (delay_fires(schedule, tick, port, j))
                last_fired[j] = tick;
        }
        state = std::move(next);

        TraceRow row;
        row.iteration = tick;
        row.residual = residual;
        row.stationarity = (sg.g_aggregate * state.c - state.d).lpNorm<Eigen::Infinity>();
        row.conservation = state.c.squaredNorm() - state.d.squaredNorm();
        result.trace.rows.push_back(row);
        if (schedule.snapshot_stride > 0 && tick % schedule.snapshot_stride == 0)
            result.trace.snapshots.push_back(Snapshot{tick, state});

        quiet_ticks = residual <= schedule.fixed_point_tol ? quiet_ticks + 1 : 0;
        if (quiet_ticks >= window) {
            // every delay must have fired inside the quiet window, so that
            // held ports cannot fake a fixed point
            bool all_fired = true;
            for (std::size_t j = 0; j < dports.size(); ++j)
                if (last_fired[j] <= tick - window) {
                    all_fired = false;
                    break;
                }
            if (all_fired || dports.empty()) {
                result.trace.status = RunStatus::Converged;
                result.trace.iterations = tick;
                break;
            }
        }
        result.trace.iterations = tick;
    }
    if (dports.empty() && result.trace.status == RunStatus::MaxIters) {
        // source-only systems settle in the algebraic solve
        result.trace.status = RunStatus::Converged;
    }
    if (schedule.snapshot_stride > 0 &&
        (result.trace.snapshots.empty() ||
         result.trace.snapshots.back().iteration != result.trace.iterations))
        result.trace.snapshots.push_back(Snapshot{result.trace.iterations, state});
    result.state = std::move(state);
    return result;
}

} // namespace

RunResult run(const SystemGraph& sg, const Schedule& schedule) {
    return run_impl(sg, schedule, zero_state(sg));
}

RunResult run(const SystemGraph& sg, const Schedule& schedule, const StateVector& init) {
    return run_impl(sg, schedule, init);
}

FixedPointReport verify_fixed_point(const SystemGraph& sg, const StateVector& state) {
    if (state.size() != sg.n())
        throw DimMismatchError("verify_fixed_point: state length vs graph");
    FixedPointReport rep;
    const Problem& p = sg.problem;

    for (std::size_t l = 0; l < sg.scattering.size(); ++l) {
        const auto& idx = p.partition.li_blocks[l];
        const Eigen::VectorXd c = gather(state.c, idx);
        const Eigen::VectorXd d = gather(state.d, idx);
        rep.li_transformed.push_back(
            (sg.scattering[l].g * c - d).lpNorm<Eigen::Infinity>());
    }
    for (const CrNode& node : sg.crs) {
        const Eigen::VectorXd c = gather(state.c, node.indices);
        const Eigen::VectorXd d = gather(state.d, node.indices);
        rep.cr_transformed.push_back((node.map.apply(d) - c).lpNorm<Eigen::Infinity>());
    }

    auto [a, b] = inverse_transform(state, sg.conv);
    for (std::size_t l = 0; l < p.lis.size(); ++l) {
        const auto& idx = p.partition.li_blocks[l];
        const IoSplit split = p.partition.li_io_split[l];
        Eigen::VectorXd a_in(split.n_in), a_out(split.n_out), b_in(split.n_in),
            b_out(split.n_out);
        for (int j = 0; j < split.n_in; ++j) {
            a_in[j] = a[idx[static_cast<std::size_t>(j)]];
            b_in[j] = b[idx[static_cast<std::size_t>(j)]];
        }
        for (int j = 0; j < split.n_out; ++j) {
            a_out[j] = a[idx[static_cast<std::size_t>(split.n_in + j)]];
            b_out[j] = b[idx[static_cast<std::size_t>(split.n_in + j)]];
        }
        rep.li_primal.push_back(
            (p.lis[l].a * a_in - a_out).lpNorm<Eigen::Infinity>());
        rep.li_dual.push_back(
            (b_in + p.lis[l].a.transpose() * b_out).lpNorm<Eigen::Infinity>());
    }
    for (std::size_t k = 0; k < sg.crs.size(); ++k) {
        const CrNode& node = sg.crs[k];
        const CrEntry& entry = p.crs[k];
        const Eigen::VectorXd a_blk = gather(a, node.indices);
        const Eigen::VectorXd b_blk = gather(b, node.indices);
        if (node.map.param && entry.has_canonical() && entry.canonical.g) {
            const Eigen::VectorXd y = node.map.param(gather(state.d, node.indices));
            rep.cr_primal.push_back(
                (a_blk - entry.canonical.f(y)).lpNorm<Eigen::Infinity>());
            rep.cr_dual.push_back(
                (b_blk - entry.canonical.g(y)).lpNorm<Eigen::Infinity>());
        } else if (entry.reduced) {
            rep.cr_primal.push_back(
                (a_blk - entry.reduced->set.project(a_blk)).lpNorm<Eigen::Infinity>());
            rep.cr_dual.push_back(0.0);
        } else {
            rep.cr_primal.push_back(0.0);
            rep.cr_dual.push_back(0.0);
        }
    }

    for (double v : rep.li_transformed)
        rep.max_transformed = std::max(rep.max_transformed, v);
    for (double v : rep.cr_transformed)
        rep.max_transformed = std::max(rep.max_transformed, v);
    for (double v : rep.li_primal)
        rep.max_untransformed = std::max(rep.max_untransformed, v);
    for (double v : rep.li_dual)
        rep.max_untransformed = std::max(rep.max_untransformed, v);
    for (double v : rep.cr_primal)
        rep.max_untransformed = std::max(rep.max_untransformed, v);
    for (double v : rep.cr_dual)
        rep.max_untransformed = std::max(rep.max_untransformed, v);
    return rep;
}

} // namespace scatteropt
