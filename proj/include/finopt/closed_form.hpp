#pragma once

#include <cmath>
#include <stdexcept>

namespace finopt {

/// gamma = [s sinh(s l) + beta_r cosh(s l)] / [s cosh(s l) + beta_r sinh(s l)], s = sqrt(beta / a0),
/// evaluated as (tanh z + r) / (1 + r tanh z) with z = s l, r = beta_r / s so it stays finite for large z.
template <typename Scalar>
Scalar compute_gamma(Scalar a0, Scalar length, Scalar beta, Scalar beta_r) {
    using std::sqrt;
    using std::tanh;
    if (!(a0 > Scalar(0) && length > Scalar(0) && beta > Scalar(0) && beta_r >= Scalar(0))) {
        throw std::invalid_argument("compute_gamma: need a0, l, beta > 0 and beta_r >= 0");
    }
    const Scalar s = sqrt(beta / a0);
    const Scalar z = s * length;
    const Scalar r = beta_r / s;
    const Scalar t = tanh(z);
    return (t + r) / (Scalar(1) + r * t);
}

/// theta(x) / (T_d - T_inf) = cosh(s x) - gamma sinh(s x) for the constant-radius fin,
/// rewritten as (1 + gamma)/2 e^{-u} + (1 - r)/(1 + r t) e^{u - 2z} / (1 + e^{-2z}) with u = s x,
/// which avoids the cancellation of two huge exponentials when z is large.
template <typename Scalar>
Scalar normalized_theta_constant(Scalar a0, Scalar length, Scalar beta, Scalar beta_r, Scalar x) {
    using std::exp;
    using std::sqrt;
    using std::tanh;
    if (!(x >= Scalar(0) && x <= length)) {
        throw std::invalid_argument("analytic_theta_constant: x outside [0, l]");
    }
    const Scalar gamma = compute_gamma(a0, length, beta, beta_r);
    const Scalar s = sqrt(beta / a0);
    const Scalar z = s * length;
    const Scalar r = beta_r / s;
    const Scalar t = tanh(z);
    const Scalar u = s * x;
    const Scalar e2z = exp(Scalar(-2) * z);
    return (Scalar(1) + gamma) / Scalar(2) * exp(-u) + (Scalar(1) - r) / (Scalar(1) + r * t) * exp(u - Scalar(2) * z) / (Scalar(1) + e2z);
}

}  // namespace finopt
