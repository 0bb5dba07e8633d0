#pragma once

#include "scatteropt/problem.hpp"
#include "scatteropt/transform.hpp"

#include <cstdint>
#include <vector>

namespace scatteropt {

/// The orthonormal interconnection map realizing one linear constraint pair
/// a_out = A a_in, b_in = -A^T b_out in transformed coordinates: d = G c.
/// Port order within the block is inputs first, then outputs.
struct ScatteringBlock {
    Eigen::MatrixXd g;
    LIBlock source_block;

    int n_in() const { return source_block.n_in(); }
    int n_out() const { return source_block.n_out(); }
    int ports() const { return static_cast<int>(g.rows()); }
};

/// Constructs G for a block whose global indices carry the given
/// convention. Under the uniform default convention this is the closed
/// block form
///
///   G = [ (I+A^T A)^{-1}(I-A^T A)   2(I+A^T A)^{-1}A^T      ]
///       [ 2A(I+A^T A)^{-1}          (I+AA^T)^{-1}(AA^T - I) ]
///
/// obtained by eliminating (a_in, b_out) from the four transformed port
/// equations; it is symmetric and involutive. Mixed per-index conventions
/// fall back to a QR-based elimination of the port behavior.
ScatteringBlock build_scattering(const LIBlock& li, const TransformConvention& t,
                                 const std::vector<int>& indices);

/// Uniform default convention over the block's ports.
ScatteringBlock build_scattering(const LIBlock& li);

/// QR-based elimination, usable under any admissible convention; the
/// closed form above is cross-checked against it in the tests.
ScatteringBlock build_scattering_generic(const LIBlock& li, const TransformConvention& t,
                                         const std::vector<int>& indices);

struct BehaviorReport {
    double max_deviation = 0.0;
    int trials = 0;
};

/// Samples random (a_in, b_out), forms both sides of the defining
/// set-equivalence, and reports the worst deviation of d - G c.
BehaviorReport verify_behavior(const ScatteringBlock& sb, const TransformConvention& t,
                               const std::vector<int>& indices, int trials = 1000,
                               std::uint64_t seed = 0x5eedLL);

BehaviorReport verify_behavior(const ScatteringBlock& sb, int trials = 1000,
                               std::uint64_t seed = 0x5eedLL);

} // namespace scatteropt
