#include "scatteropt/problem_io.hpp"
#include "scatteropt/catalog.hpp"
#include "scatteropt/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace scatteropt {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Line {
    int number;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(const std::string& text) {
    std::vector<Line> lines;
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        const auto hash = raw.find('#');
        if (hash != std::string::npos)
            raw.erase(hash);
        std::istringstream ls(raw);
        Line line{number, {}};
        std::string tok;
        while (ls >> tok)
            line.tokens.push_back(tok);
        if (!line.tokens.empty())
            lines.push_back(std::move(line));
    }
    return lines;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ParseError("line " + std::to_string(line) + ": " + msg);
}

bool is_int(const std::string& s) {
    if (s.empty())
        return false;
    std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (start == s.size())
        return false;
    for (std::size_t i = start; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            return false;
    return true;
}

int parse_int(const Line& line, std::size_t pos, const char* what) {
    if (pos >= line.tokens.size() || !is_int(line.tokens[pos]))
        fail(line.number, std::string("expected an integer for ") + what);
    return std::stoi(line.tokens[pos]);
}

double parse_double(const Line& line, std::size_t pos, const char* what) {
    if (pos >= line.tokens.size())
        fail(line.number, std::string("expected a number for ") + what);
    const std::string& s = line.tokens[pos];
    if (s == "inf" || s == "+inf")
        return kInf;
    if (s == "-inf")
        return -kInf;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            fail(line.number, "bad number '" + s + "' for " + what);
        return v;
    } catch (const std::logic_error&) {
        fail(line.number, "bad number '" + s + "' for " + what);
    }
}

std::vector<int> parse_index_list(const Line& line, std::size_t& pos) {
    std::vector<int> idx;
    while (pos < line.tokens.size() && is_int(line.tokens[pos]))
        idx.push_back(std::stoi(line.tokens[pos++]));
    if (idx.empty())
        fail(line.number, "expected at least one index");
    return idx;
}

struct CrDecl {
    int line;
    CrKind kind;
    CrParams params;
    std::vector<int> indices;
};

struct LiDecl {
    int line;
    LiKind kind;
    Eigen::MatrixXd matrix; // General only
    std::vector<int> in;
    std::vector<int> out;
};

CrKind cr_kind_of(const Line& line, const std::string& word) {
    if (word == "quadratic")
        return CrKind::Quadratic;
    if (word == "linear")
        return CrKind::LinearCost;
    if (word == "source")
        return CrKind::ConstSource;
    if (word == "abs")
        return CrKind::AbsValue;
    if (word == "nonneg")
        return CrKind::NonNeg;
    if (word == "box")
        return CrKind::Box;
    if (word == "zero")
        return CrKind::ZeroVar;
    if (word == "equal")
        return CrKind::Equal;
    fail(line.number, "unknown cr kind '" + word + "'");
}

CrDecl parse_cr(const Line& line) {
    CrDecl decl;
    decl.line = line.number;
    if (line.tokens.size() < 2)
        fail(line.number, "cr line needs a kind");
    decl.kind = cr_kind_of(line, line.tokens[1]);
    std::size_t pos = 2;
    if (pos >= line.tokens.size() || line.tokens[pos] != "idx")
        fail(line.number, "cr line needs 'idx <indices>'");
    ++pos;
    decl.indices = parse_index_list(line, pos);
    std::vector<double> values;
    while (pos < line.tokens.size()) {
        const std::string key = line.tokens[pos];
        if (key == "q")
            decl.params.q = parse_double(line, ++pos, "q"), ++pos;
        else if (key == "slope")
            decl.params.slope = parse_double(line, ++pos, "slope"), ++pos;
        else if (key == "weight")
            decl.params.weight = parse_double(line, ++pos, "weight"), ++pos;
        else if (key == "lo")
            decl.params.lo = parse_double(line, ++pos, "lo"), ++pos;
        else if (key == "hi")
            decl.params.hi = parse_double(line, ++pos, "hi"), ++pos;
        else if (key == "value") {
            ++pos;
            while (pos < line.tokens.size() && !std::isalpha(static_cast<unsigned char>(
                                                    line.tokens[pos][0])))
                values.push_back(parse_double(line, pos, "value")), ++pos;
            if (values.empty())
                fail(line.number, "value needs at least one number");
        } else
            fail(line.number, "unknown cr parameter '" + key + "'");
    }
    if (!values.empty()) {
        decl.params.values.resize(static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i)
            decl.params.values[static_cast<Eigen::Index>(i)] = values[i];
    }
    return decl;
}

LiDecl parse_li(const Line& line) {
    LiDecl decl;
    decl.line = line.number;
    if (line.tokens.size() < 2)
        fail(line.number, "li line needs a kind");
    const std::string& word = line.tokens[1];
    std::size_t pos = 2;
    if (pos >= line.tokens.size() || line.tokens[pos] != "in")
        fail(line.number, "li line needs 'in <indices>'");
    ++pos;
    decl.in = parse_index_list(line, pos);
    if (pos >= line.tokens.size() || line.tokens[pos] != "out")
        fail(line.number, "li line needs 'out <indices>'");
    ++pos;
    decl.out = parse_index_list(line, pos);

    if (word == "chain")
        decl.kind = LiKind::EqualityChain;
    else if (word == "replicator")
        decl.kind = LiKind::Replicator;
    else if (word == "negator")
        decl.kind = LiKind::Negator;
    else if (word == "general")
        decl.kind = LiKind::General;
    else
        fail(line.number, "unknown li kind '" + word + "'");

    if (decl.kind == LiKind::General) {
        if (pos >= line.tokens.size() || line.tokens[pos] != "matrix")
            fail(line.number, "general li needs 'matrix <values>'");
        ++pos;
        const std::size_t rows = decl.out.size(), cols = decl.in.size();
        if (line.tokens.size() - pos != rows * cols)
            fail(line.number, "matrix needs " + std::to_string(rows * cols) +
                                  " values (" + std::to_string(rows) + "x" +
                                  std::to_string(cols) + " row-major)");
        decl.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                decl.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    parse_double(line, pos++, "matrix entry");
    } else if (pos < line.tokens.size()) {
        fail(line.number, "unexpected trailing tokens after '" + line.tokens[pos - 1] + "'");
    }

    // structural checks the catalog cannot see
    if (decl.kind == LiKind::Replicator && decl.in.size() != 1)
        fail(line.number, "replicator takes exactly one input index");
    if ((decl.kind == LiKind::EqualityChain || decl.kind == LiKind::Negator) &&
        decl.in.size() != decl.out.size())
        fail(line.number, "chain/negator need equally many inputs and outputs");
    return decl;
}

} // namespace

Problem parse_problem(const std::string& text) {
    const std::vector<Line> lines = tokenize(text);
    int n = -1;
    std::vector<CrDecl> crs;
    std::vector<LiDecl> lis;
    for (const Line& line : lines) {
        const std::string& head = line.tokens[0];
        if (head == "n") {
            if (n >= 0)
                fail(line.number, "duplicate 'n' declaration");
            n = parse_int(line, 1, "n");
            if (n <= 0)
                fail(line.number, "n must be positive");
        } else if (head == "cr") {
            crs.push_back(parse_cr(line));
        } else if (head == "li") {
            lis.push_back(parse_li(line));
        } else {
            fail(line.number, "unknown directive '" + head + "'");
        }
    }
    if (n < 0)
        throw ParseError("missing 'n <count>' declaration");

    Problem p;
    p.partition.n_total = n;
    for (const CrDecl& decl : crs) {
        p.partition.cr_blocks.push_back(decl.indices);
        try {
            p.crs.push_back(
                catalog_cr(decl.kind, decl.params, static_cast<int>(decl.indices.size()))
                    .entry);
        } catch (const BadParamsError& e) {
            throw BadParamsError("line " + std::to_string(decl.line) + ": " + e.what());
        }
    }
    for (const LiDecl& decl : lis) {
        std::vector<int> block = decl.in;
        block.insert(block.end(), decl.out.begin(), decl.out.end());
        p.partition.li_blocks.push_back(std::move(block));
        p.partition.li_io_split.push_back(
            IoSplit{static_cast<int>(decl.in.size()), static_cast<int>(decl.out.size())});
        LiParams params;
        if (decl.kind == LiKind::General)
            params.a = decl.matrix;
        else if (decl.kind == LiKind::Replicator)
            params.n = static_cast<int>(decl.out.size());
        else
            params.n = static_cast<int>(decl.in.size());
        try {
            p.lis.push_back(catalog_li(decl.kind, params));
        } catch (const BadParamsError& e) {
            throw BadParamsError("line " + std::to_string(decl.line) + ": " + e.what());
        }
    }
    validate_problem(p);
    return p;
}

Problem parse_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open problem file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem(buf.str());
}

std::string emit_problem(const Problem& p) {
    validate_problem(p);
    std::ostringstream out;
    out << "n " << p.partition.n_total << "\n";
    for (std::size_t k = 0; k < p.crs.size(); ++k) {
        const CrEntry& e = p.crs[k];
        if (e.kind == CrKind::Custom)
            throw BadParamsError("emit_problem: custom blocks have no file representation");
        out << "cr " << to_string(e.kind) << " idx";
        for (int gi : p.partition.cr_blocks[k])
            out << ' ' << gi;
        switch (e.kind) {
        case CrKind::Quadratic: out << " q " << fmt(e.params.q); break;
        case CrKind::LinearCost: out << " slope " << fmt(e.params.slope); break;
        case CrKind::AbsValue: out << " weight " << fmt(e.params.weight); break;
        case CrKind::Box:
            out << " lo " << (std::isfinite(e.params.lo) ? fmt(e.params.lo) : "-inf")
                << " hi " << (std::isfinite(e.params.hi) ? fmt(e.params.hi) : "inf");
            break;
        case CrKind::ConstSource:
            out << " value";
            for (Eigen::Index i = 0; i < e.params.values.size(); ++i)
                out << ' ' << fmt(e.params.values[i]);
            break;
        default: break;
        }
        out << "\n";
    }
    for (std::size_t l = 0; l < p.lis.size(); ++l) {
        const auto& idx = p.partition.li_blocks[l];
        const IoSplit split = p.partition.li_io_split[l];
        out << "li general in";
        for (int j = 0; j < split.n_in; ++j)
            out << ' ' << idx[static_cast<std::size_t>(j)];
        out << " out";
        for (int j = 0; j < split.n_out; ++j)
            out << ' ' << idx[static_cast<std::size_t>(split.n_in + j)];
        out << " matrix";
        for (int r = 0; r < split.n_out; ++r)
            for (int c = 0; c < split.n_in; ++c)
                out << ' ' << fmt(p.lis[l].a(r, c));
        out << "\n";
    }
    return out.str();
}

void write_state(const std::string& path, const StateVector& state) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open state file for writing: " + path);
    out << "n " << state.size() << "\n";
    for (int i = 0; i < state.size(); ++i)
        out << i << ' ' << fmt(state.c[i]) << ' ' << fmt(state.d[i]) << "\n";
}

StateVector read_state(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open state file: " + path);
    std::string tag;
    int n = 0;
    if (!(in >> tag >> n) || tag != "n" || n <= 0)
        throw ParseError("state file must start with 'n <count>': " + path);
    StateVector st;
    st.c.resize(n);
    st.d.resize(n);
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    int idx;
    double c, d;
    while (in >> idx >> c >> d) {
        if (idx < 0 || idx >= n)
            throw ParseError("state file index out of range: " + std::to_string(idx));
        st.c[idx] = c;
        st.d[idx] = d;
        seen[static_cast<std::size_t>(idx)] = true;
    }
    for (int i = 0; i < n; ++i)
        if (!seen[static_cast<std::size_t>(i)])
            throw ParseError("state file is missing index " + std::to_string(i));
    return st;
}

void write_trace_csv(const std::string& path, const Trace& trace) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open trace file for writing: " + path);
    out << "iteration,residual,stationarity_residual,conservation_residual\n";
    for (const TraceRow& row : trace.rows)
        out << row.iteration << ',' << fmt(row.residual) << ',' << fmt(row.stationarity)
            << ',' << fmt(row.conservation) << "\n";
}

void write_snapshots_csv(const std::string& path, const Trace& trace) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open snapshot file for writing: " + path);
    out << "iteration,series,index,value\n";
    for (const Snapshot& snap : trace.snapshots) {
        for (int i = 0; i < snap.state.size(); ++i)
            out << snap.iteration << ",c," << i << ',' << fmt(snap.state.c[i]) << "\n";
        for (int i = 0; i < snap.state.size(); ++i)
            out << snap.iteration << ",d," << i << ',' << fmt(snap.state.d[i]) << "\n";
    }
}

std::string format_solution(const Solution& sol, const Trace& trace) {
    std::ostringstream out;
    out << "status " << to_string(trace.status) << "\n";
    out << "iterations " << trace.iterations << "\n";
    if (!trace.rows.empty())
        out << "final_residual " << fmt(trace.rows.back().residual) << "\n";
    out << "transformed_residual " << fmt(sol.residuals.max_transformed) << "\n";
    out << "untransformed_residual " << fmt(sol.residuals.max_untransformed) << "\n";
    if (sol.costs_valid) {
        out << "primal_cost " << fmt(sol.primal_cost) << "\n";
        out << "dual_cost " << fmt(sol.dual_cost) << "\n";
        out << "duality_gap " << fmt(sol.gap) << "\n";
    }
    out << "a";
    for (Eigen::Index i = 0; i < sol.a_star.size(); ++i)
        out << ' ' << fmt(sol.a_star[i]);
    out << "\nb";
    for (Eigen::Index i = 0; i < sol.b_star.size(); ++i)
        out << ' ' << fmt(sol.b_star[i]);
    out << "\n";
    if (sol.y_star) {
        out << "y";
        for (Eigen::Index i = 0; i < sol.y_star->size(); ++i)
            out << ' ' << fmt((*sol.y_star)[i]);
        out << "\n";
    }
    return out.str();
}

} // namespace scatteropt
