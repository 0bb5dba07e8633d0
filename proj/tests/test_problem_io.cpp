#include "doctest.h"

#include "scatteropt/errors.hpp"
#include "scatteropt/problem_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace scatteropt;

namespace {

const char* kMinimal = R"(# minimal pinned quadratic
n 2
cr quadratic idx 0 q 1
cr source idx 1 value 1
li chain in 0 out 1
)";

bool problems_equal(const Problem& lhs, const Problem& rhs) {
    if (lhs.partition.n_total != rhs.partition.n_total ||
        lhs.partition.cr_blocks != rhs.partition.cr_blocks ||
        lhs.partition.li_blocks != rhs.partition.li_blocks ||
        lhs.crs.size() != rhs.crs.size() || lhs.lis.size() != rhs.lis.size())
        return false;
    for (std::size_t l = 0; l < lhs.partition.li_io_split.size(); ++l)
        if (lhs.partition.li_io_split[l].n_in != rhs.partition.li_io_split[l].n_in ||
            lhs.partition.li_io_split[l].n_out != rhs.partition.li_io_split[l].n_out)
            return false;
    for (std::size_t k = 0; k < lhs.crs.size(); ++k) {
        const CrEntry& a = lhs.crs[k];
        const CrEntry& b = rhs.crs[k];
        if (a.kind != b.kind || a.params.q != b.params.q || a.params.slope != b.params.slope ||
            a.params.weight != b.params.weight || a.params.lo != b.params.lo ||
            a.params.hi != b.params.hi || a.params.values.size() != b.params.values.size())
            return false;
        for (Eigen::Index i = 0; i < a.params.values.size(); ++i)
            if (a.params.values[i] != b.params.values[i])
                return false;
    }
    for (std::size_t l = 0; l < lhs.lis.size(); ++l) {
        if (lhs.lis[l].a.rows() != rhs.lis[l].a.rows() ||
            lhs.lis[l].a.cols() != rhs.lis[l].a.cols())
            return false;
        if ((lhs.lis[l].a - rhs.lis[l].a).lpNorm<Eigen::Infinity>() != 0.0)
            return false;
    }
    return true;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("minimal problem file parses to the expected shape") {
    const Problem p = parse_problem(kMinimal);
    CHECK(p.partition.n_total == 2);
    REQUIRE(p.crs.size() == 2);
    CHECK(p.crs[0].kind == CrKind::Quadratic);
    CHECK(p.crs[1].kind == CrKind::ConstSource);
    REQUIRE(p.lis.size() == 1);
    CHECK(p.lis[0].a(0, 0) == 1.0);
}

TEST_CASE("overlapping index lists raise CoverageError") {
    const char* text = R"(
n 2
cr quadratic idx 0 1 q 1
cr source idx 1 value 1
li chain in 0 out 1
)";
    CHECK_THROWS_AS(parse_problem(text), CoverageError);
}

TEST_CASE("negative curvature is rejected with its line number") {
    const char* text = R"(n 2
cr quadratic idx 0 q -2
cr source idx 1 value 1
li chain in 0 out 1
)";
    try {
        parse_problem(text);
        FAIL("expected BadParamsError");
    } catch (const BadParamsError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_AS(parse_problem("frobnicate 3\n"), ParseError);
    try {
        parse_problem("n 2\ncr quadratic q 1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_problem("cr quadratic idx 0 q 1\n"), ParseError); // missing n
    CHECK_THROWS_AS(parse_problem("n 2\nn 3\n"), ParseError);               // duplicate n
    CHECK_THROWS_AS(parse_problem("n 2\ncr quadratic idx 0 q 1\n"
                                  "cr zero idx 1\nli general in 0 out 1 matrix 1 2\n"),
                    ParseError); // wrong matrix arity
}

TEST_CASE("all catalog kinds round-trip through emit") {
    const char* text = R"(
n 12
cr quadratic idx 0 q 1.5
cr linear idx 1 slope -0.25
cr source idx 2 3 value 0.5 -1.5
cr abs idx 4 weight 2
cr nonneg idx 5
cr box idx 6 lo -1 hi inf
cr zero idx 7
cr equal idx 8 9
cr box idx 10 11 lo -0.5 hi 0.5
li replicator in 0 out 1 2
li general in 3 out 4 5 matrix 1.25 -0.5
li chain in 6 out 7
li negator in 8 10 out 9 11
)";
    const Problem p1 = parse_problem(text);
    const std::string emitted = emit_problem(p1);
    const Problem p2 = parse_problem(emitted);
    CHECK(problems_equal(p1, p2));
    CHECK(emit_problem(p2) == emitted); // emission is a fixed point
}

TEST_CASE("state files round-trip exactly") {
    StateVector st;
    st.c = Eigen::Vector3d(0.1, -2.5e-17, 3.7);
    st.d = Eigen::Vector3d(1.0 / 3.0, 2.0, -0.125);
    const auto path = temp_file("scatteropt_state_test.txt");
    write_state(path.string(), st);
    const StateVector rt = read_state(path.string());
    CHECK((rt.c - st.c).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((rt.d - st.d).lpNorm<Eigen::Infinity>() == 0.0);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(read_state("/nonexistent/state.txt"), ParseError);
}

TEST_CASE("trace CSV has the documented header and row shape") {
    Trace trace;
    trace.status = RunStatus::Converged;
    trace.iterations = 2;
    trace.rows.push_back(TraceRow{1, 0.5, 0.25, -3e-16});
    trace.rows.push_back(TraceRow{2, 0.0, 0.0, 0.0});
    const auto path = temp_file("scatteropt_trace_test.csv");
    write_trace_csv(path.string(), trace);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "iteration,residual,stationarity_residual,conservation_residual");
    std::getline(in, line);
    CHECK(line == "1,0.5,0.25,-2.9999999999999999e-16");
    std::getline(in, line);
    CHECK(line == "2,0,0,0");
    std::filesystem::remove(path);
}
