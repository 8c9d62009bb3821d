#ifndef TDMH_VALIDATION_JACOBIAN_HPP
#define TDMH_VALIDATION_JACOBIAN_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace tdmh::validation {

using VectorMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct JacobianEstimate {
    Eigen::MatrixXd matrix;
    double determinant = 0.0;
    double condition = 0.0;      // ratio of extreme singular values
    bool ill_conditioned = false;
};

inline constexpr double default_jacobian_eps = 1e-5;
inline constexpr double max_jacobian_condition = 1e12;

/// Central-difference Jacobian of `f` at `x`. The step for coordinate i is
/// eps * max(1, |x_i|). Singular or badly conditioned estimates are flagged.
inline JacobianEstimate numeric_jacobian(const VectorMap& f, const Eigen::VectorXd& x,
                                         double eps = default_jacobian_eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("numeric_jacobian: eps must be positive");
    const Eigen::Index k = x.size();
    if (k == 0) throw std::invalid_argument("numeric_jacobian: empty point");
    JacobianEstimate out;
    out.matrix.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double h = eps * std::max(1.0, std::fabs(x(i)));
        Eigen::VectorXd up = x, dn = x;
        up(i) += h;
        dn(i) -= h;
        const Eigen::VectorXd fu = f(up), fd = f(dn);
        if (fu.size() != k || fd.size() != k) throw std::invalid_argument("numeric_jacobian: map must be R^k -> R^k");
        out.matrix.col(i) = (fu - fd) / (up(i) - dn(i));
    }
    out.determinant = out.matrix.determinant();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.matrix);
    const auto& sv = svd.singularValues();
    const double smax = sv(0), smin = sv(sv.size() - 1);
    out.condition = smin > 0.0 ? smax / smin : INFINITY;
    out.ill_conditioned = !std::isfinite(out.determinant) || out.determinant == 0.0 ||
                          !(out.condition <= max_jacobian_condition);
    return out;
}

}  // namespace tdmh::validation

#endif  // TDMH_VALIDATION_JACOBIAN_HPP
