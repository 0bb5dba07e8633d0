#include "scatteropt/scattering.hpp"
#include "scatteropt/errors.hpp"

#include <random>

namespace scatteropt {

namespace {

std::vector<int> iota_indices(int n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        idx[static_cast<std::size_t>(i)] = i;
    return idx;
}

// Port behavior parameterized by u = (a_in, b_out):
//   a = [I 0; A 0] u,  b = [0 -A^T; 0 I] u.
void port_maps(const LIBlock& li, Eigen::MatrixXd& pa, Eigen::MatrixXd& pb) {
    const int ni = li.n_in(), no = li.n_out(), n = ni + no;
    pa = Eigen::MatrixXd::Zero(n, n);
    pb = Eigen::MatrixXd::Zero(n, n);
    pa.topLeftCorner(ni, ni).setIdentity();
    pa.bottomLeftCorner(no, ni) = li.a;
    pb.topRightCorner(ni, no) = -li.a.transpose();
    pb.bottomRightCorner(no, no).setIdentity();
}

} // namespace

ScatteringBlock build_scattering_generic(const LIBlock& li, const TransformConvention& t,
                                         const std::vector<int>& indices) {
    const int n = li.n_in() + li.n_out();
    if (static_cast<int>(indices.size()) != n)
        throw DimMismatchError("build_scattering: block has " + std::to_string(n) +
                               " ports but " + std::to_string(indices.size()) +
                               " indices were given");
    Eigen::MatrixXd pa, pb;
    port_maps(li, pa, pb);
    // c = Mc_a pa + Mc_b pb, d = Md_a pa + Md_b pb with per-port 2x2 entries
    Eigen::MatrixXd c_of_u(n, n), d_of_u(n, n);
    for (int r = 0; r < n; ++r) {
        const Eigen::Matrix2d& m = t.matrix(indices[static_cast<std::size_t>(r)]);
        c_of_u.row(r) = m(0, 0) * pa.row(r) + m(0, 1) * pb.row(r);
        d_of_u.row(r) = m(1, 0) * pa.row(r) + m(1, 1) * pb.row(r);
    }
    // G c(u) = d(u) for all u, so G = d_of_u * c_of_u^{-1}; factor the
    // transpose to solve for G row-wise.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(c_of_u.transpose());
    if (qr.rank() < n)
        throw DerivationError("scattering elimination: c(u) is rank-deficient under this "
                              "convention; no single-valued G exists");
    ScatteringBlock sb;
    sb.source_block = li;
    sb.g = qr.solve(d_of_u.transpose()).transpose();
    return sb;
}

ScatteringBlock build_scattering(const LIBlock& li, const TransformConvention& t,
                                 const std::vector<int>& indices) {
    bool all_default = true;
    for (int gi : indices)
        if (!t.is_default(gi)) {
            all_default = false;
            break;
        }
    if (!all_default)
        return build_scattering_generic(li, t, indices);

    const int ni = li.n_in(), no = li.n_out();
    const Eigen::MatrixXd& a = li.a;
    const Eigen::MatrixXd ata = a.transpose() * a;
    const Eigen::MatrixXd aat = a * a.transpose();
    const Eigen::MatrixXd id_i = Eigen::MatrixXd::Identity(ni, ni);
    const Eigen::MatrixXd id_o = Eigen::MatrixXd::Identity(no, no);
    Eigen::LLT<Eigen::MatrixXd> p_llt(id_i + ata); // SPD for any A
    Eigen::LLT<Eigen::MatrixXd> q_llt(id_o + aat);

    ScatteringBlock sb;
    sb.source_block = li;
    sb.g.resize(ni + no, ni + no);
    sb.g.topLeftCorner(ni, ni) = p_llt.solve(id_i - ata);
    sb.g.topRightCorner(ni, no) = 2.0 * p_llt.solve(a.transpose());
    sb.g.bottomLeftCorner(no, ni) = sb.g.topRightCorner(ni, no).transpose();
    sb.g.bottomRightCorner(no, no) = q_llt.solve(aat - id_o);
    return sb;
}

ScatteringBlock build_scattering(const LIBlock& li) {
    const int n = li.n_in() + li.n_out();
    return build_scattering(li, TransformConvention(n), iota_indices(n));
}

BehaviorReport verify_behavior(const ScatteringBlock& sb, const TransformConvention& t,
                               const std::vector<int>& indices, int trials,
                               std::uint64_t seed) {
    const int ni = sb.n_in(), no = sb.n_out(), n = ni + no;
    if (static_cast<int>(indices.size()) != n)
        throw DimMismatchError("verify_behavior: index list vs block ports");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    BehaviorReport rep;
    rep.trials = trials;
    Eigen::VectorXd a(n), b(n), c(n), d(n);
    for (int trial = 0; trial < trials; ++trial) {
        Eigen::VectorXd a_in(ni), b_out(no);
        for (int i = 0; i < ni; ++i)
            a_in[i] = gauss(rng);
        for (int i = 0; i < no; ++i)
            b_out[i] = gauss(rng);
        a.head(ni) = a_in;
        a.tail(no) = sb.source_block.a * a_in;
        b.head(ni) = -sb.source_block.a.transpose() * b_out;
        b.tail(no) = b_out;
        for (int r = 0; r < n; ++r) {
            const Eigen::Matrix2d& m = t.matrix(indices[static_cast<std::size_t>(r)]);
            c[r] = m(0, 0) * a[r] + m(0, 1) * b[r];
            d[r] = m(1, 0) * a[r] + m(1, 1) * b[r];
        }
        rep.max_deviation =
            std::max(rep.max_deviation, (sb.g * c - d).lpNorm<Eigen::Infinity>());
    }
    return rep;
}

BehaviorReport verify_behavior(const ScatteringBlock& sb, int trials, std::uint64_t seed) {
    return verify_behavior(sb, TransformConvention(sb.ports()), iota_indices(sb.ports()),
                           trials, seed);
}

} // namespace scatteropt
