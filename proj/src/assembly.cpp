#include "scatteropt/assembly.hpp"
#include "scatteropt/catalog.hpp"
#include "scatteropt/errors.hpp"

#include <algorithm>
#include <string>

namespace scatteropt {

namespace {

CRMap map_for_entry(const CrEntry& e, const TransformConvention& t,
                    const std::vector<int>& indices) {
    bool all_default = true;
    for (int gi : indices)
        if (!t.is_default(gi))
            all_default = false;
    if (e.kind != CrKind::Custom && all_default)
        return catalog_cr(e.kind, e.params, e.canonical.dim).map;
    if (!e.has_canonical())
        throw DerivationError("CR block lacks a canonical form to derive from");
    if (!e.canonical.separable())
        throw DerivationError("non-separable custom CR blocks need the default convention "
                              "and a catalog kind");
    return derive_cr(e.canonical, t, indices);
}

} // namespace

SystemGraph assemble(const Problem& p, const TransformConvention& t) {
    validate_problem(p);
    if (t.size() != p.partition.n_total)
        throw DimMismatchError("assemble: convention covers " + std::to_string(t.size()) +
                               " indices, problem has " +
                               std::to_string(p.partition.n_total));
    SystemGraph sg;
    sg.problem = p;
    sg.conv = t;
    sg.maps = build_maps(p.partition);

    const int n = p.partition.n_total;
    sg.g_aggregate = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t l = 0; l < p.lis.size(); ++l) {
        const auto& idx = p.partition.li_blocks[l];
        ScatteringBlock sb = build_scattering(p.lis[l], t, idx);
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < idx.size(); ++c)
                sg.g_aggregate(idx[r], idx[c]) =
                    sb.g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        sg.scattering.push_back(std::move(sb));
    }

    for (std::size_t k = 0; k < p.crs.size(); ++k) {
        CrNode node;
        node.indices = p.partition.cr_blocks[k];
        node.map = map_for_entry(p.crs[k], t, node.indices);
        node.is_source = node.map.classification == MapClass::Source &&
                         node.map.source_params.has_value();
        for (int gi : node.indices)
            (node.is_source ? sg.source_ports : sg.delayed_ports).push_back(gi);
        sg.crs.push_back(std::move(node));
    }
    std::sort(sg.delayed_ports.begin(), sg.delayed_ports.end());
    std::sort(sg.source_ports.begin(), sg.source_ports.end());
    return sg;
}

SystemGraph assemble(const Problem& p) {
    return assemble(p, TransformConvention(std::max(p.partition.n_total, 1)));
}

SystemGraph reduce_sources(SystemGraph sg) {
    const int nd = static_cast<int>(sg.delayed_ports.size());
    const int ns = static_cast<int>(sg.source_ports.size());

    // position of each global source port within the stacked source vector
    std::vector<int> source_pos(static_cast<std::size_t>(sg.n()), -1);
    for (int j = 0; j < ns; ++j)
        source_pos[static_cast<std::size_t>(sg.source_ports[static_cast<std::size_t>(j)])] = j;

    Eigen::MatrixXd s_stack = Eigen::MatrixXd::Zero(ns, ns);
    Eigen::VectorXd e_stack = Eigen::VectorXd::Zero(ns);
    for (const CrNode& node : sg.crs) {
        if (!node.is_source)
            continue;
        const SourceParams& sp = *node.map.source_params;
        for (std::size_t r = 0; r < node.indices.size(); ++r) {
            const int gr = source_pos[static_cast<std::size_t>(node.indices[r])];
            e_stack[gr] = sp.e[static_cast<Eigen::Index>(r)];
            for (std::size_t c = 0; c < node.indices.size(); ++c) {
                const int gc = source_pos[static_cast<std::size_t>(node.indices[c])];
                s_stack(gr, gc) = sp.s(static_cast<Eigen::Index>(r),
                                       static_cast<Eigen::Index>(c));
            }
        }
    }

    auto block = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
        Eigen::MatrixXd m(rows.size(), cols.size());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < cols.size(); ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    sg.g_aggregate(rows[r], cols[c]);
        return m;
    };
    const Eigen::MatrixXd g_dd = block(sg.delayed_ports, sg.delayed_ports);
    const Eigen::MatrixXd g_ds = block(sg.delayed_ports, sg.source_ports);
    const Eigen::MatrixXd g_sd = block(sg.source_ports, sg.delayed_ports);
    const Eigen::MatrixXd g_ss = block(sg.source_ports, sg.source_ports);

    ReducedAffine red;
    red.s_stack = s_stack;
    red.e_stack = e_stack;
    if (ns == 0) {
        red.g_hat = g_dd;
        red.e_hat = Eigen::VectorXd::Zero(nd);
        red.source_gain = Eigen::MatrixXd::Zero(0, nd);
        red.source_offset = Eigen::VectorXd::Zero(0);
    } else {
        const Eigen::MatrixXd loop = Eigen::MatrixXd::Identity(ns, ns) - g_ss * s_stack;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(loop, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smax = svd.singularValues()[0];
        const double smin = svd.singularValues()[ns - 1];
        red.loop_condition = smin > 0.0 ? smax / smin : kInf;
        if (!(smin > smax * 1e-14))
            throw SingularLoopError("source loop I - G_SS S is singular (condition ~ " +
                                    std::to_string(red.loop_condition) + ")");
        red.ill_conditioned = red.loop_condition > 1e12;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(loop);
        red.source_gain = lu.solve(g_sd);           // d_S = source_gain c_D + source_offset
        red.source_offset = lu.solve(g_ss * e_stack);
        red.g_hat = g_dd + g_ds * s_stack * red.source_gain;
        red.e_hat = g_ds * (s_stack * red.source_offset + e_stack);
    }
    sg.reduced = std::move(red);
    return sg;
}

void expand_sources(const SystemGraph& sg, StateVector& state) {
    if (!sg.reduced)
        throw DerivationError("expand_sources: graph has no reduced form yet");
    const ReducedAffine& red = *sg.reduced;
    const int ns = static_cast<int>(sg.source_ports.size());
    if (ns == 0)
        return;
    Eigen::VectorXd c_d(static_cast<Eigen::Index>(sg.delayed_ports.size()));
    for (std::size_t j = 0; j < sg.delayed_ports.size(); ++j)
        c_d[static_cast<Eigen::Index>(j)] = state.c[sg.delayed_ports[j]];
    const Eigen::VectorXd d_s = red.source_gain * c_d + red.source_offset;
    const Eigen::VectorXd c_s = red.s_stack * d_s + red.e_stack;
    for (int j = 0; j < ns; ++j) {
        state.d[sg.source_ports[static_cast<std::size_t>(j)]] = d_s[j];
        state.c[sg.source_ports[static_cast<std::size_t>(j)]] = c_s[j];
    }
}

} // namespace scatteropt
