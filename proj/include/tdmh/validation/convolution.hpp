#ifndef TDMH_VALIDATION_CONVOLUTION_HPP
#define TDMH_VALIDATION_CONVOLUTION_HPP

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

#include "tdmh/acceptance.hpp"

namespace tdmh::validation {

/// Post-hoc move on the real line with a two-dimensional auxiliary draw:
/// (s', u1, u2) -> (s, u) = (u1 + u2, (s' - u2, u2)). The map is its own
/// inverse and volume preserving, so the move is its own reverse with f = 1.
inline AuxImage<double> convolution_transform(double s, std::span<const double> u) {
    return AuxImage<double>{u[0] + u[1], {s - u[1], u[1]}};
}

/// The transform as a map R^3 -> R^3 on (s', u1, u2).
inline Eigen::VectorXd convolution_map(const Eigen::VectorXd& x) {
    const double u[2] = {x(1), x(2)};
    const AuxImage<double> img = convolution_transform(x(0), u);
    Eigen::VectorXd out(3);
    out << img.state, img.aux[0], img.aux[1];
    return out;
}

inline AuxMove<double> convolution_move(std::function<double(const double&, std::span<const double>)> log_aux_density) {
    AuxMove<double> m;
    m.reverse = MoveLabel{0};
    m.move_prob = [](const double&) { return 1.0; };
    m.log_aux_density = std::move(log_aux_density);
    m.transform = [](const double& s, std::span<const double> u) { return convolution_transform(s, u); };
    m.log_correction = [](const double&, std::span<const double>) { return 0.0; };
    return m;
}

}  // namespace tdmh::validation

#endif  // TDMH_VALIDATION_CONVOLUTION_HPP
