#pragma once

#include "scatteropt/cr_map.hpp"
#include "scatteropt/problem.hpp"
#include "scatteropt/scattering.hpp"
#include "scatteropt/transform.hpp"

#include <optional>
#include <vector>

namespace scatteropt {

/// One wired constitutive relation: its transformed map and the global
/// indices it drives.
struct CrNode {
    CRMap map;
    std::vector<int> indices;
    bool is_source = false;
};

/// The affine system left after eliminating the algebraic loops through the
/// source elements. Acts on the delayed ports only:
///
///   d_D <- g_hat c_D + e_hat
///
/// and reconstructs the source ports from d_S = source_gain c_D +
/// source_offset, c_S = S d_S + e.
struct ReducedAffine {
    Eigen::MatrixXd g_hat;
    Eigen::VectorXd e_hat;
    Eigen::MatrixXd source_gain;
    Eigen::VectorXd source_offset;
    Eigen::MatrixXd s_stack;
    Eigen::VectorXd e_stack;
    double loop_condition = 1.0;
    bool ill_conditioned = false;
};

/// The assembled architecture: aggregate orthonormal interconnection,
/// classified constitutive maps, delay placement, and (after
/// reduce_sources) the source-free affine update.
struct SystemGraph {
    Problem problem;
    TransformConvention conv{1};
    PartitionMaps maps;
    std::vector<ScatteringBlock> scattering; // per LI block
    Eigen::MatrixXd g_aggregate;             // N x N, orthonormal
    std::vector<CrNode> crs;                 // per CR block
    std::vector<int> delayed_ports;          // global indices, ascending
    std::vector<int> source_ports;           // global indices, ascending
    std::optional<ReducedAffine> reduced;

    int n() const { return problem.partition.n_total; }
};

/// Wires the problem: builds each scattering block, derives and classifies
/// each constitutive map, and places one delay on every non-source CR input
/// port. Throws CoverageError / DerivationError on structural failures.
SystemGraph assemble(const Problem& p, const TransformConvention& t);
SystemGraph assemble(const Problem& p);

/// Eliminates the algebraic loops between the source elements and the
/// interconnection. Throws SingularLoopError (with a conditioning estimate
/// in the message) if I - G_SS S is not invertible.
SystemGraph reduce_sources(SystemGraph sg);

/// Source-port values consistent with the given delayed-port outputs;
/// writes them into the full state.
void expand_sources(const SystemGraph& sg, StateVector& state);

} // namespace scatteropt
