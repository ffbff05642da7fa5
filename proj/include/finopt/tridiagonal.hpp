#pragma once

#include <Eigen/Dense>

#include <optional>

namespace finopt {

/// Thomas algorithm for lower(i) x(i-1) + diag(i) x(i) + upper(i) x(i+1) = rhs(i).
/// lower(0) and upper(n-1) are ignored. Returns nullopt on a non-positive pivot:
/// every system assembled here is a symmetric M-matrix, so that only happens when
/// an input invariant was broken upstream.
template <typename Derived>
std::optional<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>> solve_tridiagonal(
    const Eigen::MatrixBase<Derived>& lower, const Eigen::MatrixBase<Derived>& diag,
    const Eigen::MatrixBase<Derived>& upper, const Eigen::MatrixBase<Derived>& rhs) {
    using Scalar = typename Derived::Scalar;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = diag.size();
    Vector c_star(n), d_star(n), x(n);
    Scalar pivot = diag(0);
    if (!(pivot > Scalar(0))) return std::nullopt;
    c_star(0) = n > 1 ? upper(0) / pivot : Scalar(0);
    d_star(0) = rhs(0) / pivot;
    for (Eigen::Index i = 1; i < n; ++i) {
        pivot = diag(i) - lower(i) * c_star(i - 1);
        if (!(pivot > Scalar(0))) return std::nullopt;
        c_star(i) = i + 1 < n ? upper(i) / pivot : Scalar(0);
        d_star(i) = (rhs(i) - lower(i) * d_star(i - 1)) / pivot;
    }
    x(n - 1) = d_star(n - 1);
    for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = d_star(i) - c_star(i) * x(i + 1);
    return x;
}

/// Chain of conductances with a grounded left end: unknown i (node i + 1) satisfies
/// -c(i) x(i-1) + (c(i) + c(i+1) + r(i)) x(i) - c(i+1) x(i+1) = rhs(i), with x(-1) = 0 and c(n) = 0.
/// Each pivot is carried as c(i+1) + e(i) with e(i) = r(i) + c(i) e(i-1) / pivot(i-1), so reactions
/// far smaller than the conductances survive elimination (no 2c + r - c^2 / pivot cancellation).
/// Returns nullopt unless c(0) > 0, c >= 0 and r >= 0 give positive pivots.
template <typename Scalar, typename Derived>
std::optional<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> solve_conduction_chain(const Eigen::MatrixBase<Derived>& c,
                                                                                const Eigen::MatrixBase<Derived>& r,
                                                                                const Eigen::MatrixBase<Derived>& rhs) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = r.size();
    auto cond = [&](Eigen::Index i) { return i < n ? Scalar(c(i)) : Scalar(0); };
    Vector pivot(n), d(n), x(n);
    Scalar e = cond(0) + Scalar(r(0));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i > 0) e = Scalar(r(i)) + cond(i) * (e / pivot(i - 1));
        pivot(i) = cond(i + 1) + e;
        if (!(pivot(i) > Scalar(0)) || !(e > Scalar(0))) return std::nullopt;
        d(i) = (Scalar(rhs(i)) + (i > 0 ? cond(i) * d(i - 1) : Scalar(0))) / pivot(i);
    }
    x(n - 1) = d(n - 1);
    for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = d(i) + cond(i + 1) / pivot(i) * x(i + 1);
    return x;
}

}  // namespace finopt
