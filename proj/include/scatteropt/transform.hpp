#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>

namespace scatteropt {

/// Transformed port variables. `c` carries the CR outputs / LI inputs and
/// `d` the LI outputs / CR inputs; both are length-N in global index order.
struct StateVector {
    Eigen::VectorXd c;
    Eigen::VectorXd d;

    int size() const { return static_cast<int>(c.size()); }
};

/// Per-index 2x2 coordinate change (c_i, d_i) = M_i (a_i, b_i).
///
/// Admissible matrices map the pairing quadratic form 2*a*b onto
/// c^2 - d^2 up to one global sign shared by every index; that property is
/// what makes the derived interconnection maps orthonormal. The default is
///
///     M = (1/sqrt(2)) [ 1 -1 ]      c = (a - b)/sqrt(2)
///                     [ 1  1 ]      d = (a + b)/sqrt(2)
///
/// for which c^2 - d^2 = -2ab (sign -1). Per-index overrides are allowed as
/// long as every matrix carries the same sign.
class TransformConvention {
public:
    /// Uniform default convention over n indices.
    explicit TransformConvention(int n);

    /// Default convention with a per-index override set. Throws
    /// SingularTransformError / BadParamsError if an override is not in the
    /// admissible class or mixes quadratic-form signs.
    TransformConvention(int n, std::map<int, Eigen::Matrix2d> overrides);

    int size() const { return n_; }
    double scale() const { return scale_; }

    /// Sign s with c^2 - d^2 = s * 2ab, identical across indices.
    double quadratic_form_sign() const { return sign_; }

    const Eigen::Matrix2d& matrix(int i) const;
    const Eigen::Matrix2d& inverse(int i) const;
    bool is_default(int i) const;
    bool all_default() const { return overrides_.empty(); }

    static Eigen::Matrix2d default_matrix();

private:
    int n_ = 0;
    double scale_ = 0.0;
    double sign_ = -1.0;
    Eigen::Matrix2d default_m_;
    Eigen::Matrix2d default_inv_;
    std::map<int, Eigen::Matrix2d> overrides_;
    std::map<int, Eigen::Matrix2d> override_inv_;
};

/// Applies the per-index transform; throws LengthMismatchError when a, b,
/// and the convention disagree in length.
StateVector forward_transform(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                              const TransformConvention& t);

/// Exact inverse of forward_transform: (a, b) from (c, d).
std::pair<Eigen::VectorXd, Eigen::VectorXd>
inverse_transform(const StateVector& s, const TransformConvention& t);

} // namespace scatteropt
