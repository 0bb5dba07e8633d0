// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Usage: acceptance <problems-dir>

#include "scatteropt/assembly.hpp"
#include "scatteropt/catalog.hpp"
#include "scatteropt/executor.hpp"
#include "scatteropt/oracle.hpp"
#include "scatteropt/problem_io.hpp"
#include "scatteropt/recovery.hpp"
#include "scatteropt/scattering.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

using namespace scatteropt;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %2d. %s: %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    if (!pass)
        ++g_failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            m(r, c) = gauss(rng);
    return m;
}

struct Canned {
    std::string file;
    bool use_kkt;
};

const std::vector<Canned> kCanned = {
    {"pinned_quadratic.prob", true}, {"consensus.prob", true},
    {"soft_threshold.prob", false},  {"box_quadratic.prob", false},
    {"chain3.prob", true},
};

// --------------------------------------------------------------------------

void criterion_orthonormality(std::vector<LIBlock>& blocks_out) {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> dim(1, 8);
    const auto start = std::chrono::steady_clock::now();
    double worst_ortho = 0.0, worst_invol = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        LIBlock li;
        li.a = random_matrix(rng, dim(rng), dim(rng));
        const ScatteringBlock sb = build_scattering(li);
        const int n = sb.ports();
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
        worst_ortho = std::max(worst_ortho,
                               (sb.g.transpose() * sb.g - id).lpNorm<Eigen::Infinity>());
        worst_invol = std::max(worst_invol, (sb.g * sb.g - id).lpNorm<Eigen::Infinity>());
        if (trial < 20)
            blocks_out.push_back(li);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = worst_ortho <= 1e-10 && worst_invol <= 1e-10 && secs < 5.0;
    report(1, "orthonormality of 200 random interconnections", pass,
           "max |G^T G - I| = " + fmt(worst_ortho) + ", max |G^2 - I| = " + fmt(worst_invol) +
               ", " + fmt(secs) + " s");
}

void criterion_behavior(const std::vector<LIBlock>& blocks) {
    double worst = 0.0;
    std::uint64_t seed = 7;
    for (const LIBlock& li : blocks) {
        const ScatteringBlock sb = build_scattering(li);
        worst = std::max(worst, verify_behavior(sb, 1000, seed++).max_deviation);
    }
    report(2, "behavioral equivalence d = G c", worst <= 1e-9,
           "max |G c - d| = " + fmt(worst) + " over " + std::to_string(blocks.size()) +
               " blocks x 1000 samples");
}

void criterion_conservation() {
    // several blocks covering one global index space
    std::mt19937_64 rng(103);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Problem p;
    p.partition.n_total = 9;
    p.partition.cr_blocks = {{0, 3}, {1, 4}, {2, 5}, {6, 7, 8}};
    p.partition.li_blocks = {{0, 1, 2}, {3, 4, 5, 6}, {7, 8}};
    p.partition.li_io_split = {{1, 2}, {2, 2}, {1, 1}};
    LIBlock l0, l1, l2;
    l0.a = random_matrix(rng, 2, 1);
    l1.a = random_matrix(rng, 2, 2);
    l2.a = random_matrix(rng, 1, 1);
    p.lis = {l0, l1, l2};
    const TransformConvention t(9);

    double worst_ab = 0.0, worst_cd = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::VectorXd a(9), b(9);
        for (std::size_t l = 0; l < p.lis.size(); ++l) {
            const auto& idx = p.partition.li_blocks[l];
            const IoSplit split = p.partition.li_io_split[l];
            Eigen::VectorXd a_in(split.n_in), b_out(split.n_out);
            for (int j = 0; j < split.n_in; ++j)
                a_in[j] = gauss(rng);
            for (int j = 0; j < split.n_out; ++j)
                b_out[j] = gauss(rng);
            const Eigen::VectorXd a_out = p.lis[l].a * a_in;
            const Eigen::VectorXd b_in = -p.lis[l].a.transpose() * b_out;
            for (int j = 0; j < split.n_in; ++j) {
                a[idx[static_cast<std::size_t>(j)]] = a_in[j];
                b[idx[static_cast<std::size_t>(j)]] = b_in[j];
            }
            for (int j = 0; j < split.n_out; ++j) {
                a[idx[static_cast<std::size_t>(split.n_in + j)]] = a_out[j];
                b[idx[static_cast<std::size_t>(split.n_in + j)]] = b_out[j];
            }
        }
        worst_ab = std::max(worst_ab, std::abs(a.dot(b)));
        const StateVector s = forward_transform(a, b, t);
        worst_cd = std::max(worst_cd, std::abs(s.c.squaredNorm() - s.d.squaredNorm()));
    }
    report(3, "conservation isomorphism sum(ab) = 0 => sum(c^2 - d^2) = 0",
           worst_ab <= 1e-9 && worst_cd <= 1e-9,
           "max |sum ab| = " + fmt(worst_ab) + ", max |sum c^2 - d^2| = " + fmt(worst_cd));
}

void criterion_set_equivalence() {
    const double s2 = std::sqrt(2.0);
    std::vector<CatalogElement> els;
    for (double q : {0.0, 0.5, 1.0, 3.0}) {
        CrParams prm;
        prm.q = q;
        els.push_back(catalog_cr(CrKind::Quadratic, prm, 1));
    }
    {
        CrParams prm;
        prm.slope = -1.3;
        els.push_back(catalog_cr(CrKind::LinearCost, prm, 1));
    }
    {
        CrParams prm;
        prm.values = Eigen::VectorXd::Constant(1, 0.7);
        els.push_back(catalog_cr(CrKind::ConstSource, prm, 1));
    }
    {
        CrParams prm;
        prm.weight = 1.5;
        els.push_back(catalog_cr(CrKind::AbsValue, prm, 1));
    }
    els.push_back(catalog_cr(CrKind::NonNeg, {}, 1));
    for (auto [lo, hi] : {std::pair{-1.0, 2.0}, std::pair{0.0, kInf}, std::pair{-kInf, 0.5}}) {
        CrParams prm;
        prm.lo = lo;
        prm.hi = hi;
        els.push_back(catalog_cr(CrKind::Box, prm, 1));
    }
    els.push_back(catalog_cr(CrKind::ZeroVar, {}, 1));

    double worst = 0.0;
    for (const CatalogElement& el : els) {
        for (int j = 0; j < 1000; ++j) {
            const double t = -10.0 + 20.0 * j / 999.0;
            const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, t);
            const Eigen::VectorXd a = el.entry.canonical.f(y);
            const Eigen::VectorXd b = el.entry.canonical.g(y);
            const Eigen::VectorXd c = (a - b) / s2;
            const Eigen::VectorXd d = (a + b) / s2;
            worst = std::max(worst, (el.map.apply(d) - c).lpNorm<Eigen::Infinity>());
        }
        // knee points of piecewise maps, hit exactly
        for (double knee : el.map.knees) {
            const Eigen::VectorXd d = Eigen::VectorXd::Constant(1, knee);
            const Eigen::VectorXd y = el.map.param(d);
            const Eigen::VectorXd c_expect =
                (el.entry.canonical.f(y) - el.entry.canonical.g(y)) / s2;
            worst = std::max(worst, (el.map.apply(d) - c_expect).lpNorm<Eigen::Infinity>());
        }
    }
    // the equality block, swept over a 2-d parameter grid
    const CatalogElement eq = catalog_cr(CrKind::Equal, {}, 2);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            Eigen::VectorXd y(2);
            y << -6.0 + 12.0 * i / 31.0, -6.0 + 12.0 * j / 31.0;
            const Eigen::VectorXd a = eq.entry.canonical.f(y);
            const Eigen::VectorXd b = eq.entry.canonical.g(y);
            worst = std::max(
                worst, (eq.map.apply((a + b) / s2) - (a - b) / s2).lpNorm<Eigen::Infinity>());
        }
    report(4, "constitutive-relation set-equivalence sweeps", worst <= 1e-9,
           "max graph deviation = " + fmt(worst) + " over " + std::to_string(els.size() + 1) +
               " elements");
}

void criterion_classification() {
    CrParams prm;
    prm.q = 1.0;
    const auto quad_rep = classify_map(catalog_cr(CrKind::Quadratic, prm, 1).map);
    const bool quad_ok = quad_rep.result == MapClass::DissipativeEverywhere &&
                         quad_rep.max_gain <= 1e-9;

    const auto abs_rep = classify_map(catalog_cr(CrKind::NonNeg, {}, 2).map);
    const bool abs_ok = abs_rep.result == MapClass::Neutral && abs_rep.max_neutral_dev <= 1e-12;

    CrParams src;
    src.values = Eigen::VectorXd::Constant(2, -1.25);
    const auto src_rep = classify_map(catalog_cr(CrKind::ConstSource, src, 2).map);
    bool src_ok = src_rep.result == MapClass::Source && src_rep.fitted.has_value();
    if (src_ok) {
        src_ok = (src_rep.fitted->s + Eigen::MatrixXd::Identity(2, 2))
                         .lpNorm<Eigen::Infinity>() == 0.0 &&
                 src_rep.affine_residual == 0.0;
    }
    report(5, "classification battery (q=1 gain, |d| neutrality, source detection)",
           quad_ok && abs_ok && src_ok,
           "gain = " + fmt(quad_rep.max_gain) + ", neutral dev = " +
               fmt(abs_rep.max_neutral_dev) + ", source residual = " +
               fmt(src_rep.affine_residual));
}

struct SolveRecord {
    std::string name;
    Problem problem;
    SystemGraph graph;
    RunResult sync;
    Solution sync_sol;
    bool ok = false;
};

void criterion_oracle_equivalence(const std::filesystem::path& dir,
                                  std::vector<SolveRecord>& records) {
    bool all = true;
    std::string detail;
    for (const Canned& canned : kCanned) {
        SolveRecord rec;
        rec.name = canned.file.substr(0, canned.file.find('.'));
        rec.problem = parse_problem_file((dir / canned.file).string());
        rec.graph = reduce_sources(assemble(rec.problem));
        Schedule sched;
        sched.max_iters = 100000;
        const auto start = std::chrono::steady_clock::now();
        rec.sync = run(rec.graph, sched);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.sync_sol = recover(rec.graph, rec.sync.state);

        double dev = kInf;
        if (rec.sync.trace.status == RunStatus::Converged) {
            if (canned.use_kkt) {
                const KktSolution oracle = kkt_solve(rec.problem);
                dev = std::max((rec.sync_sol.a_star - oracle.a).lpNorm<Eigen::Infinity>(),
                               (rec.sync_sol.b_star - oracle.b).lpNorm<Eigen::Infinity>());
                rec.ok = dev <= 1e-6;
            } else {
                const GridSolution oracle = grid_solve(rec.problem, -5.0, 5.0, 1e-3);
                dev = (rec.sync_sol.a_star - oracle.a).lpNorm<Eigen::Infinity>();
                rec.ok = dev <= 1e-3;
            }
        }
        rec.ok = rec.ok && secs < 1.0 && rec.sync.trace.iterations < 100000;
        all = all && rec.ok;
        detail += rec.name + " dev=" + fmt(dev) + " it=" +
                  std::to_string(rec.sync.trace.iterations) + "; ";
        records.push_back(std::move(rec));
    }
    report(6, "end-to-end oracle equivalence on 5 canned problems", all, detail);
}

void criterion_async_agreement(std::vector<SolveRecord>& records) {
    bool all = true;
    std::string detail;
    double worst = 0.0;
    for (SolveRecord& rec : records) {
        for (double p : {0.25, 0.5, 0.9}) {
            for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                Schedule sched;
                sched.mode = Schedule::Mode::Asynchronous;
                sched.update_prob = p;
                sched.rng_seed = seed;
                sched.max_iters = 200000;
                const RunResult r = run(rec.graph, sched);
                if (r.trace.status != RunStatus::Converged) {
                    all = false;
                    detail += rec.name + " p=" + fmt(p) + " seed=" + std::to_string(seed) +
                              " did not converge; ";
                    continue;
                }
                const Solution sol = recover(rec.graph, r.state);
                const double dev = std::max(
                    (sol.a_star - rec.sync_sol.a_star).lpNorm<Eigen::Infinity>(),
                    (sol.b_star - rec.sync_sol.b_star).lpNorm<Eigen::Infinity>());
                worst = std::max(worst, dev);
                if (dev > 1e-6) {
                    all = false;
                    detail += rec.name + " p=" + fmt(p) + " seed=" + std::to_string(seed) +
                              " dev=" + fmt(dev) + "; ";
                }
            }
        }
    }
    report(7, "sync/async agreement over p in {0.25, 0.5, 0.9}, 5 seeds", all,
           detail.empty() ? "max deviation = " + fmt(worst) : detail);
}

void criterion_fixed_point_check(const std::vector<SolveRecord>& records) {
    bool all = true;
    double worst = 0.0;
    for (const SolveRecord& rec : records) {
        if (rec.sync.trace.status != RunStatus::Converged) {
            all = false;
            continue;
        }
        const FixedPointReport rep = verify_fixed_point(rec.graph, rec.sync.state);
        worst = std::max(worst, rep.max_overall());
        all = all && rep.max_overall() <= 10.0 * 1e-9;
    }
    report(8, "every converged run satisfies the stationarity conditions", all,
           "max residual = " + fmt(worst) + " (bound 1e-8)");
}

void criterion_flatness(const std::vector<SolveRecord>& records) {
    bool all = true;
    std::string detail;
    for (const SolveRecord& rec : records) {
        const StationarityReport rep = stationarity_report(rec.sync_sol, rec.problem);
        const bool ok = rep.primal_flatness.pass(1.9) && rep.dual_flatness.pass(1.9);
        all = all && ok;
        const auto describe = [](const FlatnessProbe& probe) {
            return probe.directions == probe.flat_directions ? std::string("flat")
                                                             : fmt(probe.min_slope);
        };
        detail += rec.name + " slope=" + describe(rep.primal_flatness) + "/" +
                  describe(rep.dual_flatness) + "; ";
    }
    report(9, "first-order flatness along 32 feasible directions", all, detail);
}

void criterion_determinism(const std::vector<SolveRecord>& records) {
    bool all = true;
    for (const SolveRecord& rec : records) {
        Schedule sched;
        sched.mode = Schedule::Mode::Asynchronous;
        sched.update_prob = 0.5;
        sched.rng_seed = 99;
        sched.snapshot_stride = 8;
        const RunResult r1 = run(rec.graph, sched);
        const RunResult r2 = run(rec.graph, sched);
        const auto tmp = std::filesystem::temp_directory_path();
        const auto p1 = tmp / ("acc_trace_1_" + rec.name + ".csv");
        const auto p2 = tmp / ("acc_trace_2_" + rec.name + ".csv");
        write_trace_csv(p1.string(), r1.trace);
        write_trace_csv(p2.string(), r2.trace);
        std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
        std::stringstream s1, s2;
        s1 << f1.rdbuf();
        s2 << f2.rdbuf();
        all = all && s1.str() == s2.str() && !s1.str().empty();
        std::filesystem::remove(p1);
        std::filesystem::remove(p2);
    }
    report(10, "byte-identical traces for identical seeds and flags", all,
           all ? "all canned problems reproduce exactly" : "trace mismatch");
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <problems-dir>\n";
        return 2;
    }
    const std::filesystem::path dir(argv[1]);

    std::vector<LIBlock> sampled_blocks;
    criterion_orthonormality(sampled_blocks);
    criterion_behavior(sampled_blocks);
    criterion_conservation();
    criterion_set_equivalence();
    criterion_classification();

    std::vector<SolveRecord> records;
    criterion_oracle_equivalence(dir, records);
    criterion_async_agreement(records);
    criterion_fixed_point_check(records);
    criterion_flatness(records);
    criterion_determinism(records);

    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
