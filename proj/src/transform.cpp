#include "scatteropt/transform.hpp"
#include "scatteropt/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace scatteropt {

namespace {

constexpr double kAdmissibleTol = 1e-12;

// The admissible class: |m00| == |m10|, |m01| == |m11|, and the cross term
// s = m00*m01 - m10*m11 has |s| == 1, so that c^2 - d^2 == s * 2ab identically.
double quadratic_form_sign_of(const Eigen::Matrix2d& m) {
    const double sq_a = m(0, 0) * m(0, 0) - m(1, 0) * m(1, 0);
    const double sq_b = m(0, 1) * m(0, 1) - m(1, 1) * m(1, 1);
    const double s = m(0, 0) * m(0, 1) - m(1, 0) * m(1, 1);
    if (std::abs(sq_a) > kAdmissibleTol || std::abs(sq_b) > kAdmissibleTol ||
        std::abs(std::abs(s) - 1.0) > kAdmissibleTol)
        throw BadParamsError("transform matrix does not map 2ab onto +/-(c^2 - d^2)");
    return s < 0 ? -1.0 : 1.0;
}

Eigen::Matrix2d checked_inverse(const Eigen::Matrix2d& m) {
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (std::abs(det) < 1e-14)
        throw SingularTransformError("2x2 transform matrix is singular");
    Eigen::Matrix2d inv;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return inv / det;
}

} // namespace

Eigen::Matrix2d TransformConvention::default_matrix() {
    const double s = 1.0 / std::numbers::sqrt2;
    Eigen::Matrix2d m;
    m << s, -s, s, s;
    return m;
}

TransformConvention::TransformConvention(int n) : TransformConvention(n, {}) {}

TransformConvention::TransformConvention(int n, std::map<int, Eigen::Matrix2d> overrides)
    : n_(n), scale_(1.0 / std::numbers::sqrt2), default_m_(default_matrix()),
      overrides_(std::move(overrides)) {
    if (n_ <= 0)
        throw BadParamsError("transform convention needs a positive index count");
    default_inv_ = checked_inverse(default_m_);
    sign_ = quadratic_form_sign_of(default_m_);
    for (auto& [i, m] : overrides_) {
        if (i < 0 || i >= n_)
            throw BadParamsError("transform override index " + std::to_string(i) +
                                 " out of range");
        if (quadratic_form_sign_of(m) != sign_)
            throw BadParamsError("transform override at index " + std::to_string(i) +
                                 " flips the global quadratic-form sign");
        override_inv_.emplace(i, checked_inverse(m));
    }
}

const Eigen::Matrix2d& TransformConvention::matrix(int i) const {
    auto it = overrides_.find(i);
    return it == overrides_.end() ? default_m_ : it->second;
}

const Eigen::Matrix2d& TransformConvention::inverse(int i) const {
    auto it = override_inv_.find(i);
    return it == override_inv_.end() ? default_inv_ : it->second;
}

bool TransformConvention::is_default(int i) const {
    return overrides_.find(i) == overrides_.end();
}

StateVector forward_transform(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                              const TransformConvention& t) {
    if (a.size() != b.size() || a.size() != t.size())
        throw LengthMismatchError("forward_transform: a has length " +
                                  std::to_string(a.size()) + ", b " +
                                  std::to_string(b.size()) + ", convention " +
                                  std::to_string(t.size()));
    StateVector s;
    s.c.resize(a.size());
    s.d.resize(a.size());
    for (int i = 0; i < a.size(); ++i) {
        const Eigen::Matrix2d& m = t.matrix(i);
        s.c[i] = m(0, 0) * a[i] + m(0, 1) * b[i];
        s.d[i] = m(1, 0) * a[i] + m(1, 1) * b[i];
    }
    return s;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd>
inverse_transform(const StateVector& s, const TransformConvention& t) {
    if (s.c.size() != s.d.size() || s.c.size() != t.size())
        throw LengthMismatchError("inverse_transform: state length " +
                                  std::to_string(s.c.size()) + " vs convention " +
                                  std::to_string(t.size()));
    Eigen::VectorXd a(s.c.size()), b(s.c.size());
    for (int i = 0; i < s.c.size(); ++i) {
        const Eigen::Matrix2d& m = t.inverse(i);
        a[i] = m(0, 0) * s.c[i] + m(0, 1) * s.d[i];
        b[i] = m(1, 0) * s.c[i] + m(1, 1) * s.d[i];
    }
    return {std::move(a), std::move(b)};
}

} // namespace scatteropt
