// Command-line front end: problem-file ingestion, run orchestration, and
// trace/solution emission.

#include "CLI11.hpp"

#include "scatteropt/assembly.hpp"
#include "scatteropt/catalog.hpp"
#include "scatteropt/errors.hpp"
#include "scatteropt/executor.hpp"
#include "scatteropt/oracle.hpp"
#include "scatteropt/problem_io.hpp"
#include "scatteropt/recovery.hpp"

#include <cstdio>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitMaxIters = 3;
constexpr int kExitNumerical = 4;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void print_matrix(const Eigen::MatrixXd& m, const std::string& indent) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::cout << indent;
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            std::cout << (c ? " " : "") << fmt(m(r, c));
        std::cout << "\n";
    }
}

struct SolveFlags {
    std::string mode = "sync";
    double p = 1.0;
    std::uint64_t seed = 0;
    double tol = 1e-9;
    long max_iters = 1000000;
    std::string trace_path;
    std::string state_path;
    int snapshots = 0;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& flags) {
    cmd->add_option("--mode", flags.mode, "Delay schedule: sync or async")
        ->check(CLI::IsMember({"sync", "async"}));
    cmd->add_option("--p", flags.p, "Bernoulli update probability (async)");
    cmd->add_option("--seed", flags.seed, "RNG seed for the latch processes");
    cmd->add_option("--tol", flags.tol, "Fixed-point tolerance");
    cmd->add_option("--max-iters", flags.max_iters, "Iteration cap");
}

scatteropt::Schedule make_schedule(const SolveFlags& flags) {
    scatteropt::Schedule s;
    s.mode = flags.mode == "async" ? scatteropt::Schedule::Mode::Asynchronous
                                   : scatteropt::Schedule::Mode::Synchronous;
    s.update_prob = flags.p;
    s.rng_seed = flags.seed;
    s.max_iters = flags.max_iters;
    s.fixed_point_tol = flags.tol;
    s.snapshot_stride = flags.snapshots;
    return s;
}

int run_validate(const std::string& file) {
    const scatteropt::Problem p = scatteropt::parse_problem_file(file);
    scatteropt::validate_problem(p);
    // gradient-coupling spot check on every parametric block
    for (std::size_t k = 0; k < p.crs.size(); ++k) {
        if (!p.crs[k].has_canonical())
            continue;
        std::vector<Eigen::VectorXd> samples;
        // offsets chosen to miss the knee points of piecewise elements
        for (double v : {-2.1371, -0.5233, 0.3893, 1.7119})
            samples.push_back(Eigen::VectorXd::Constant(p.crs[k].canonical.dim, v));
        const auto rep = scatteropt::check_gradient_coupling(p.crs[k].canonical, samples);
        if (!rep.pass) {
            std::cout << "cr block " << k << ": gradient coupling violated (max rel err "
                      << fmt(rep.max_rel_error) << ")\n";
            return kExitValidation;
        }
    }
    std::cout << "ok: n=" << p.partition.n_total << " cr_blocks=" << p.crs.size()
              << " li_blocks=" << p.lis.size() << "\n";
    return kExitOk;
}

int run_derive(const std::string& file) {
    const scatteropt::Problem p = scatteropt::parse_problem_file(file);
    scatteropt::SystemGraph sg = scatteropt::reduce_sources(scatteropt::assemble(p));
    for (std::size_t l = 0; l < sg.scattering.size(); ++l) {
        std::cout << "li block " << l << ": " << sg.scattering[l].n_in() << " in, "
                  << sg.scattering[l].n_out() << " out, G =\n";
        print_matrix(sg.scattering[l].g, "  ");
    }
    for (std::size_t k = 0; k < sg.crs.size(); ++k) {
        const auto& node = sg.crs[k];
        std::cout << "cr block " << k << " (" << scatteropt::to_string(p.crs[k].kind)
                  << "): " << scatteropt::to_string(node.map.classification);
        if (node.map.source_params) {
            std::cout << ", S =";
            for (Eigen::Index r = 0; r < node.map.source_params->s.rows(); ++r)
                for (Eigen::Index c = 0; c < node.map.source_params->s.cols(); ++c)
                    std::cout << ' ' << fmt(node.map.source_params->s(r, c));
            std::cout << ", e =";
            for (Eigen::Index i = 0; i < node.map.source_params->e.size(); ++i)
                std::cout << ' ' << fmt(node.map.source_params->e[i]);
        }
        std::cout << "\n";
    }
    std::cout << "delayed ports: " << sg.delayed_ports.size()
              << ", source ports: " << sg.source_ports.size() << "\n";
    if (!sg.source_ports.empty()) {
        std::cout << "reduced update G_hat =\n";
        print_matrix(sg.reduced->g_hat, "  ");
        std::cout << "reduced offset e_hat =";
        for (Eigen::Index i = 0; i < sg.reduced->e_hat.size(); ++i)
            std::cout << ' ' << fmt(sg.reduced->e_hat[i]);
        std::cout << "\nloop condition " << fmt(sg.reduced->loop_condition) << "\n";
    }
    return kExitOk;
}

int run_solve(const std::string& file, const SolveFlags& flags) {
    const scatteropt::Problem p = scatteropt::parse_problem_file(file);
    scatteropt::SystemGraph sg = scatteropt::reduce_sources(scatteropt::assemble(p));
    const scatteropt::RunResult result = scatteropt::run(sg, make_schedule(flags));
    const scatteropt::Solution sol = scatteropt::recover(sg, result.state);
    std::cout << scatteropt::format_solution(sol, result.trace);
    if (!flags.trace_path.empty()) {
        scatteropt::write_trace_csv(flags.trace_path, result.trace);
        if (flags.snapshots > 0)
            scatteropt::write_snapshots_csv(flags.trace_path + ".states.csv", result.trace);
    }
    if (!flags.state_path.empty())
        scatteropt::write_state(flags.state_path, result.state);
    switch (result.trace.status) {
    case scatteropt::RunStatus::Converged: return kExitOk;
    case scatteropt::RunStatus::MaxIters: return kExitMaxIters;
    case scatteropt::RunStatus::Diverged: return kExitNumerical;
    }
    return kExitNumerical;
}

int run_verify(const std::string& file, const std::string& state_path, double tol) {
    const scatteropt::Problem p = scatteropt::parse_problem_file(file);
    scatteropt::SystemGraph sg = scatteropt::reduce_sources(scatteropt::assemble(p));
    const scatteropt::StateVector state = scatteropt::read_state(state_path);
    const scatteropt::FixedPointReport rep = scatteropt::verify_fixed_point(sg, state);
    const scatteropt::Solution sol = scatteropt::recover(sg, state);
    const scatteropt::StationarityReport st = scatteropt::stationarity_report(sol, p);
    std::cout << "transformed_residual " << fmt(rep.max_transformed) << "\n";
    std::cout << "untransformed_residual " << fmt(rep.max_untransformed) << "\n";
    std::cout << "feasibility_residual " << fmt(st.max_feasibility) << "\n";
    if (st.primal_flatness.directions > 0)
        std::cout << "primal_flatness_slope "
                  << (st.primal_flatness.directions == st.primal_flatness.flat_directions
                          ? "flat"
                          : fmt(st.primal_flatness.min_slope))
                  << "\n";
    if (st.dual_flatness.directions > 0)
        std::cout << "dual_flatness_slope "
                  << (st.dual_flatness.directions == st.dual_flatness.flat_directions
                          ? "flat"
                          : fmt(st.dual_flatness.min_slope))
                  << "\n";
    const double bound = 10.0 * tol;
    const bool pass = rep.max_overall() <= bound && st.max_feasibility <= bound;
    std::cout << (pass ? "pass" : "fail") << " (bound " << fmt(bound) << ")\n";
    return pass ? kExitOk : kExitNumerical;
}

int run_compare(const std::string& file, const SolveFlags& flags, double grid_lo,
                double grid_hi, double resolution) {
    const scatteropt::Problem p = scatteropt::parse_problem_file(file);
    scatteropt::SystemGraph sg = scatteropt::reduce_sources(scatteropt::assemble(p));
    const scatteropt::RunResult result = scatteropt::run(sg, make_schedule(flags));
    if (result.trace.status != scatteropt::RunStatus::Converged) {
        std::cout << "solver did not converge: " << to_string(result.trace.status) << "\n";
        return result.trace.status == scatteropt::RunStatus::MaxIters ? kExitMaxIters
                                                                      : kExitNumerical;
    }
    const scatteropt::Solution sol = scatteropt::recover(sg, result.state);
    double dev_a = 0.0, dev_b = 0.0, bound = 0.0;
    if (scatteropt::kkt_supported(p)) {
        const scatteropt::KktSolution oracle = scatteropt::kkt_solve(p);
        dev_a = (sol.a_star - oracle.a).lpNorm<Eigen::Infinity>();
        dev_b = (sol.b_star - oracle.b).lpNorm<Eigen::Infinity>();
        bound = 1e-6;
        std::cout << "oracle kkt\n";
        std::cout << "max_dev_a " << fmt(dev_a) << "\nmax_dev_b " << fmt(dev_b) << "\n";
    } else {
        const scatteropt::GridSolution oracle = scatteropt::grid_solve(p, grid_lo, grid_hi,
                                                                       resolution);
        dev_a = (sol.a_star - oracle.a).lpNorm<Eigen::Infinity>();
        bound = resolution;
        std::cout << "oracle grid (resolution " << fmt(resolution) << ")\n";
        std::cout << "max_dev_a " << fmt(dev_a) << "\n";
    }
    const bool pass = dev_a <= bound && dev_b <= bound;
    std::cout << (pass ? "pass" : "fail") << " (bound " << fmt(bound) << ")\n";
    return pass ? kExitOk : kExitNumerical;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed-style fixed-point solver for primal/dual stationarity systems"};
    app.require_subcommand(1);

    std::string file;
    SolveFlags flags;
    std::string state_path;
    double verify_tol = 1e-9;
    double grid_lo = -5.0, grid_hi = 5.0, resolution = 1e-3;

    CLI::App* validate = app.add_subcommand("validate", "Partition and coupling checks");
    validate->add_option("file", file, "Problem file")->required();

    CLI::App* derive = app.add_subcommand(
        "derive", "Print derived interconnection matrices, map classes, and reductions");
    derive->add_option("file", file, "Problem file")->required();

    CLI::App* solve = app.add_subcommand("solve", "Run the system to a fixed point");
    solve->add_option("file", file, "Problem file")->required();
    add_solve_flags(solve, flags);
    solve->add_option("--trace", flags.trace_path, "Write per-iteration CSV rows here");
    solve->add_option("--state", flags.state_path, "Write the final state here");
    solve->add_option("--snapshots", flags.snapshots,
                      "Snapshot stride for <trace>.states.csv");

    CLI::App* verify = app.add_subcommand("verify", "Check a saved state against the "
                                                    "stationarity conditions");
    verify->add_option("file", file, "Problem file")->required();
    verify->add_option("--state", state_path, "Saved state file")->required();
    verify->add_option("--tol", verify_tol, "Fixed-point tolerance the state targets");

    CLI::App* compare = app.add_subcommand("compare", "Solve and cross-check against the "
                                                      "reference oracle");
    compare->add_option("file", file, "Problem file")->required();
    add_solve_flags(compare, flags);
    compare->add_option("--grid-lo", grid_lo, "Grid oracle lower bound");
    compare->add_option("--grid-hi", grid_hi, "Grid oracle upper bound");
    compare->add_option("--resolution", resolution, "Grid oracle resolution");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed())
            return run_validate(file);
        if (derive->parsed())
            return run_derive(file);
        if (solve->parsed())
            return run_solve(file, flags);
        if (verify->parsed())
            return run_verify(file, state_path, verify_tol);
        if (compare->parsed())
            return run_compare(file, flags, grid_lo, grid_hi, resolution);
    } catch (const scatteropt::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const scatteropt::CoverageError& e) {
        std::cerr << "coverage error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const scatteropt::SplitError& e) {
        std::cerr << "split error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const scatteropt::DimMismatchError& e) {
        std::cerr << "dimension error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const scatteropt::BadParamsError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const scatteropt::Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
