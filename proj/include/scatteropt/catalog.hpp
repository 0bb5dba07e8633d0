#pragma once

#include "scatteropt/cr_map.hpp"
#include "scatteropt/problem.hpp"

namespace scatteropt {

/// A catalog element: the block description in every available form plus
/// its derived transformed map (closed form, default convention).
struct CatalogElement {
    CrEntry entry;
    CRMap map;
};

/// Builds the catalog element of the given kind. Throws BadParamsError on
/// invalid parameters (negative curvature or weight, degenerate box, source
/// value count mismatch, equality blocks of dimension < 2).
///
/// Kinds and the parameters they read:
///   Quadratic   q >= 0          cost q/2 a^2 per coordinate
///   LinearCost  slope           cost slope * a per coordinate
///   ConstSource values          pins a to the given vector
///   AbsValue    weight >= 0     cost weight * |a| per coordinate
///   NonNeg      -               constraint a >= 0
///   Box         lo < hi         constraint lo <= a <= hi (+-inf allowed)
///   ZeroVar     -               constraint a = 0
///   Equal       -               constraint a_1 = ... = a_dim (dim >= 2)
CatalogElement catalog_cr(CrKind kind, const CrParams& params, int dim = 1);

enum class LiKind { EqualityChain, Replicator, Negator, General };

struct LiParams {
    int n = 1;          // chain/negator dimension, replicator fan-out
    Eigen::MatrixXd a;  // General matrix
};

/// Standard connective interconnections: equality chain (A = I),
/// replicator (A = ones(n, 1)), negator (A = -I), or a user matrix.
LIBlock catalog_li(LiKind kind, const LiParams& params);

} // namespace scatteropt
