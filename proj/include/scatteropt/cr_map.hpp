#pragma once

#include "scatteropt/problem.hpp"
#include "scatteropt/transform.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace scatteropt {

/// Map classes in the incremental-gain sense: norm-preserving, gain <= 1,
/// gain strictly < 1, affine with passive linear part, or undetermined.
enum class MapClass {
    Neutral,
    PassiveEverywhere,
    DissipativeEverywhere,
    Source,
    Unclassified,
};

const char* to_string(MapClass c);

struct SourceParams {
    Eigen::MatrixXd s;
    Eigen::VectorXd e;
};

enum class MapForm { ClosedForm, ImplicitParametric };

/// A constitutive-relation map in transformed coordinates: c = apply(d).
/// `param` recovers the block's internal parameter vector y from d where
/// the derivation provides it.
struct CRMap {
    int dim = 1;
    VecFn apply;
    VecFn param;
    MapForm form = MapForm::ClosedForm;
    MapClass classification = MapClass::Unclassified;
    std::optional<SourceParams> source_params;
    std::vector<double> knees; // d-space slope breaks, same per coordinate
};

/// Generic derivation for separable canonical blocks under an admissible
/// convention: per coordinate, solves the transformed parametrization
/// m10*f(y) + m11*g(y) = d by safeguarded bisection and returns
/// c = m00*f(y) + m01*g(y). Monotonicity of the parametrization is probed
/// up front; violations throw NonInvertibleParametrizationError naming the
/// coordinate and interval.
CRMap derive_cr(const CanonicalCR& cr, const TransformConvention& t,
                const std::vector<int>& indices);

/// Same, with the default convention on every coordinate.
CRMap derive_cr(const CanonicalCR& cr);

struct BatterySpec {
    int samples = 10000;
    double box_lo = -100.0;
    double box_hi = 100.0;
    std::uint64_t seed = 0x5ca77e20u;
    double neutral_tol = 1e-9;
    double passive_slack = 1e-9;
    double affine_tol = 1e-9;
    // Gain pairs closer than this are discarded; raise it for maps whose
    // values carry solver noise (implicit-parametric derivations).
    double min_pair_separation = 1e-13;
};

struct ClassifyReport {
    MapClass result = MapClass::Unclassified;
    double max_neutral_dev = 0.0; // max | ||m(x)|| - ||x|| | / max(1, ||x||)
    double max_gain = 0.0;        // sampled sup ||m(x')-m(x)|| / ||x'-x||
    double dissipation_margin = 0.0;
    double affine_residual = kInf;
    std::optional<SourceParams> fitted;
    double s_norm = 0.0;
};

/// Battery-based classification. Sampling cannot prove passivity; the
/// result reflects the battery plus exact affinity detection (three-point
/// collinearity per coordinate and random probes).
ClassifyReport classify_map(const CRMap& m, const BatterySpec& spec = {});

} // namespace scatteropt
