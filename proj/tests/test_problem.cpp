#include "doctest.h"

#include "scatteropt/catalog.hpp"
#include "scatteropt/errors.hpp"
#include "scatteropt/problem.hpp"

#include <cmath>
#include <random>

using namespace scatteropt;

namespace {

CanonicalCR scalar_block(std::function<double(double)> f, std::function<double(double)> g,
                         std::function<double(double)> q) {
    CanonicalCR c;
    c.dim = 1;
    c.f = [f](const Eigen::VectorXd& y) {
        return Eigen::VectorXd::Constant(1, f(y[0])).eval();
    };
    c.g = [g](const Eigen::VectorXd& y) {
        return Eigen::VectorXd::Constant(1, g(y[0])).eval();
    };
    c.q = [q](const Eigen::VectorXd& y) { return q(y[0]); };
    c.f_coord = [f](int, double y) { return f(y); };
    c.g_coord = [g](int, double y) { return g(y); };
    return c;
}

Problem two_index_pinned_quadratic() {
    Problem p;
    p.partition.n_total = 2;
    p.partition.cr_blocks = {{0}, {1}};
    p.partition.li_blocks = {{0, 1}};
    p.partition.li_io_split = {{1, 1}};
    CrParams quad;
    quad.q = 1.0;
    p.crs.push_back(catalog_cr(CrKind::Quadratic, quad, 1).entry);
    CrParams src;
    src.values = Eigen::VectorXd::Constant(1, 1.0);
    p.crs.push_back(catalog_cr(CrKind::ConstSource, src, 1).entry);
    p.lis.push_back(catalog_li(LiKind::EqualityChain, LiParams{1, {}}));
    return p;
}

} // namespace

TEST_CASE("dual blocks carry R through the identity") {
    SUBCASE("f = id, g = id, Q = y^2/2 gives R = y^2/2") {
        const Problem p = two_index_pinned_quadratic(); // block 0 is q = 1
        const Problem d = build_dual(p);
        for (double y : {-2.0, -0.3, 0.0, 1.5, 4.0}) {
            const Eigen::VectorXd yv = Eigen::VectorXd::Constant(1, y);
            CHECK(d.crs[0].canonical.q(yv) == doctest::Approx(0.5 * y * y).epsilon(1e-12));
        }
    }
    SUBCASE("zero coupling gives R = 0") {
        CanonicalCR c = scalar_block([](double y) { return y; },
                                     [](double) { return 0.0; },
                                     [](double) { return 0.0; });
        for (double y : {-2.0, 0.0, 3.0})
            CHECK(eval_r(c, Eigen::VectorXd::Constant(1, y)) == 0.0);
    }
    SUBCASE("f = id, g = qy, Q = qy^2/2 gives R = qy^2/2") {
        const double q = 2.5;
        CrParams params;
        params.q = q;
        const CrEntry e = catalog_cr(CrKind::Quadratic, params, 1).entry;
        for (double y : {-1.0, 0.7, 2.0}) {
            const Eigen::VectorXd yv = Eigen::VectorXd::Constant(1, y);
            CHECK(eval_r(e.canonical, yv) == doctest::Approx(0.5 * q * y * y).epsilon(1e-12));
        }
    }
}

TEST_CASE("build_dual needs parametric blocks") {
    Problem p = two_index_pinned_quadratic();
    p.crs[0].canonical = CanonicalCR{}; // reduced-only block: no (f, g, Q)
    p.crs[0].canonical.dim = 1;
    p.crs[0].reduced = ReducedCR{1, [](const Eigen::VectorXd&) { return 0.0; },
                                 FeasibleSet::all(1)};
    CHECK_THROWS_AS(build_dual(p), NotCanonicalError);
}

TEST_CASE("dual linear constraints flip to -A^T with swapped ports") {
    Problem p = two_index_pinned_quadratic();
    p.lis[0].a = Eigen::MatrixXd::Constant(1, 1, 2.0);
    const Problem d = build_dual(p);
    CHECK(d.lis[0].a(0, 0) == -2.0);
    CHECK(d.partition.li_io_split[0].n_in == 1);
    CHECK(d.partition.li_blocks[0][0] == 1); // old output leads
    // involution on the linear structure
    const Problem dd = build_dual(d);
    CHECK(dd.lis[0].a(0, 0) == 2.0);
    CHECK(dd.partition.li_blocks[0][0] == 0);
}

TEST_CASE("R + Q = <f, g> pointwise for every catalog element") {
    std::vector<CatalogElement> elements;
    elements.push_back(catalog_cr(CrKind::Quadratic, [] { CrParams c; c.q = 1.7; return c; }(), 2));
    elements.push_back(catalog_cr(CrKind::LinearCost, [] { CrParams c; c.slope = -0.4; return c; }(), 2));
    elements.push_back(catalog_cr(CrKind::ConstSource, [] {
                           CrParams c;
                           c.values = Eigen::VectorXd::Constant(2, 1.2);
                           return c;
                       }(), 2));
    elements.push_back(catalog_cr(CrKind::AbsValue, [] { CrParams c; c.weight = 0.8; return c; }(), 2));
    elements.push_back(catalog_cr(CrKind::NonNeg, {}, 2));
    elements.push_back(catalog_cr(CrKind::Box, [] { CrParams c; c.lo = -1.0; c.hi = 2.0; return c; }(), 2));
    elements.push_back(catalog_cr(CrKind::ZeroVar, {}, 2));
    elements.push_back(catalog_cr(CrKind::Equal, {}, 2));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (const CatalogElement& el : elements) {
        REQUIRE(el.entry.dual.has_value());
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXd y(2);
            y << u(rng), u(rng);
            const double lhs = el.entry.dual->r(y) + el.entry.canonical.q(y);
            const double rhs = el.entry.canonical.f(y).dot(el.entry.canonical.g(y));
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
            // and the generic identity agrees with the closed-form R
            CHECK(eval_r(el.entry.canonical, y) ==
                  doctest::Approx(el.entry.dual->r(y)).epsilon(1e-9));
        }
    }
}

TEST_CASE("gradient coupling checks") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    SUBCASE("quadratic block passes on 100 random points") {
        CrParams params;
        params.q = 0.9;
        const CrEntry e = catalog_cr(CrKind::Quadratic, params, 1).entry;
        std::vector<Eigen::VectorXd> samples;
        for (int i = 0; i < 100; ++i)
            samples.push_back(Eigen::VectorXd::Constant(1, u(rng)));
        CHECK(check_gradient_coupling(e.canonical, samples).pass);
    }
    SUBCASE("perturbed cost with unchanged g fails at large |y|") {
        CanonicalCR bad = scalar_block(
            [](double y) { return y; }, [](double y) { return y; },
            [](double y) { return 0.5 * y * y + 0.01 * y * y * y; });
        std::vector<Eigen::VectorXd> samples{Eigen::VectorXd::Constant(1, 8.0)};
        const auto rep = check_gradient_coupling(bad, samples);
        CHECK_FALSE(rep.pass);
        CHECK(rep.max_rel_error > 1e-3);
    }
    SUBCASE("zero gradient passes") {
        CanonicalCR flat = scalar_block([](double y) { return y; },
                                        [](double) { return 0.0; },
                                        [](double) { return 4.2; });
        std::vector<Eigen::VectorXd> samples{Eigen::VectorXd::Constant(1, -1.0),
                                             Eigen::VectorXd::Constant(1, 2.0)};
        CHECK(check_gradient_coupling(flat, samples).pass);
    }
}

TEST_CASE("reduction sweep") {
    SUBCASE("identity f keeps the cost and an unbounded set") {
        CanonicalCR c = scalar_block([](double y) { return y; },
                                     [](double y) { return y; },
                                     [](double y) { return 0.5 * y * y; });
        const ReducedCR red = reduce_form(c);
        CHECK(red.set.kind() == FeasibleSet::Kind::Box);
        CHECK(red.set.intervals()[0].lo == -kInf);
        CHECK(red.set.intervals()[0].hi == kInf);
        for (double a : {-7.3, -0.2, 0.0, 1.0, 6.9})
            CHECK(red.q_hat(Eigen::VectorXd::Constant(1, a)) ==
                  doctest::Approx(0.5 * a * a).epsilon(1e-9));
    }
    SUBCASE("saturating f restricts the set to the open unit interval") {
        CanonicalCR c = scalar_block(
            [](double y) { return std::tanh(y); }, [](double y) { return y; },
            [](double y) { return y * std::tanh(y) - std::log(std::cosh(y)); });
        const ReducedCR red = reduce_form(c);
        CHECK(red.set.intervals()[0].lo == doctest::Approx(-1.0).epsilon(1e-7));
        CHECK(red.set.intervals()[0].hi == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(std::isfinite(red.set.intervals()[0].lo));
        CHECK(std::isfinite(red.set.intervals()[0].hi));
        CHECK_FALSE(red.set.contains(Eigen::VectorXd::Constant(1, 1.0)));
        // swept pairs land on the graph of Q_hat
        for (int j = 0; j < 1000; ++j) {
            const double y = -9.7 + 19.4 * j / 999.0;
            const double a = std::tanh(y);
            const double q = y * std::tanh(y) - std::log(std::cosh(y));
            CHECK(std::abs(red.q_hat(Eigen::VectorXd::Constant(1, a)) - q) <= 1e-9);
        }
    }
    SUBCASE("multivalued relation is rejected") {
        CanonicalCR c = scalar_block([](double y) { return y * y; },
                                     [](double y) { return y == 0.0 ? 0.0 : 0.5 / y; },
                                     [](double y) { return y; });
        CHECK_THROWS_AS(reduce_form(c), NotReducibleError);
    }
    SUBCASE("folded f with a single-valued graph reduces") {
        CanonicalCR c = scalar_block([](double y) { return y * y; },
                                     [](double y) { return y * y; },
                                     [](double y) { return 0.5 * y * y * y * y; });
        const ReducedCR red = reduce_form(c);
        CHECK(red.set.intervals()[0].lo == doctest::Approx(0.0).epsilon(1e-12));
        for (double a : {0.3, 2.0, 9.4})
            CHECK(red.q_hat(Eigen::VectorXd::Constant(1, a)) ==
                  doctest::Approx(0.5 * a * a).epsilon(1e-8));
    }
    SUBCASE("non-parametric blocks are rejected") {
        CanonicalCR c;
        c.dim = 1;
        CHECK_THROWS_AS(reduce_form(c), NotCanonicalError);
    }
}

TEST_CASE("sweep reproduction within 1e-9 on a fresh grid") {
    // reduce, then check on a off-grid sweep (not the construction grid)
    CrParams params;
    params.q = 2.0;
    const CrEntry e = catalog_cr(CrKind::Quadratic, params, 1).entry;
    const ReducedCR red = reduce_form(e.canonical);
    for (int j = 0; j < 1000; ++j) {
        const double y = -9.5 + 19.0 * (j + 0.37) / 1000.0;
        const Eigen::VectorXd yv = Eigen::VectorXd::Constant(1, y);
        const double a = e.canonical.f(yv)[0];
        CHECK(std::abs(red.q_hat(Eigen::VectorXd::Constant(1, a)) - e.canonical.q(yv)) <=
              1e-9);
    }
}

TEST_CASE("cost evaluation") {
    Problem p = two_index_pinned_quadratic();
    SUBCASE("all-zero parameters give zero cost") {
        CHECK(eval_primal_cost_y(p, Eigen::VectorXd::Zero(2)) == 0.0);
    }
    SUBCASE("single quadratic block at y = 2") {
        Eigen::VectorXd y(2);
        y << 2.0, 0.0;
        CHECK(eval_primal_cost_y(p, y) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("primal minus dual equals the coupling inner product") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::VectorXd y(2);
            y << u(rng), u(rng);
            double inner = 0.0;
            for (std::size_t k = 0; k < p.crs.size(); ++k) {
                const Eigen::VectorXd yk = gather(y, p.partition.cr_blocks[k]);
                inner += p.crs[k].canonical.f(yk).dot(p.crs[k].canonical.g(yk));
            }
            const double lhs = eval_primal_cost_y(p, y) - eval_dual_cost_y(p, y);
            CHECK(lhs == doctest::Approx(inner).epsilon(1e-10));
        }
    }
    SUBCASE("reduced cost at a") {
        Eigen::VectorXd a(2);
        a << 3.0, 1.0;
        CHECK(eval_primal_cost_a(p, a) == doctest::Approx(4.5).epsilon(1e-12));
    }
    SUBCASE("length mismatch raises") {
        CHECK_THROWS_AS(eval_primal_cost_y(p, Eigen::VectorXd::Zero(3)), DimMismatchError);
    }
}

TEST_CASE("feasible sets: membership and idempotent projection") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<FeasibleSet> sets;
    sets.push_back(FeasibleSet::all(3));
    sets.push_back(FeasibleSet::box({Interval{-1.0, 2.0}, Interval{0.0, kInf}}));
    sets.push_back(FeasibleSet::interval_union(
        {{Interval{-2.0, -1.0}, Interval{1.0, 2.0}}, {Interval{0.0, 0.5}}}));
    sets.push_back(FeasibleSet::halfspace(Eigen::Vector2d(1.0, 1.0), 1.0));
    sets.push_back(FeasibleSet::point(Eigen::Vector2d(0.3, -0.7)));
    sets.push_back(FeasibleSet::all_equal(3));
    sets.push_back(FeasibleSet::zero_sum(3));
    for (const FeasibleSet& s : sets) {
        for (int trial = 0; trial < 200; ++trial) {
            Eigen::VectorXd x(s.dim());
            for (int i = 0; i < s.dim(); ++i)
                x[i] = u(rng);
            const Eigen::VectorXd p1 = s.project(x);
            CHECK(s.contains(p1, 1e-9));
            const Eigen::VectorXd p2 = s.project(p1);
            CHECK((p2 - p1).lpNorm<Eigen::Infinity>() <= 1e-12);
        }
    }
    CHECK_THROWS_AS(FeasibleSet::box({Interval{2.0, 1.0}}), BadParamsError);
}

TEST_CASE("problem validation catches block dimension mismatches") {
    Problem p = two_index_pinned_quadratic();
    p.crs[0].canonical.dim = 2;
    CHECK_THROWS_AS(validate_problem(p), DimMismatchError);

    Problem q = two_index_pinned_quadratic();
    q.lis[0].a = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(validate_problem(q), DimMismatchError);
}

TEST_CASE("catalog parameter validation") {
    CrParams neg;
    neg.q = -0.5;
    CHECK_THROWS_AS(catalog_cr(CrKind::Quadratic, neg, 1), BadParamsError);
    CrParams w;
    w.weight = -1.0;
    CHECK_THROWS_AS(catalog_cr(CrKind::AbsValue, w, 1), BadParamsError);
    CrParams degenerate;
    degenerate.lo = 1.0;
    degenerate.hi = 1.0;
    CHECK_THROWS_AS(catalog_cr(CrKind::Box, degenerate, 1), BadParamsError);
    CHECK_THROWS_AS(catalog_cr(CrKind::Equal, {}, 1), BadParamsError);
    CrParams too_many;
    too_many.values = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(catalog_cr(CrKind::ConstSource, too_many, 2), BadParamsError);
}
