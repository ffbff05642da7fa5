#pragma once

#include <vector>

namespace finopt {

/// Lateral convective coefficient h(x) in W m^-2 K^-1.
class ConvectionProfile {
public:
    enum class Kind { Constant, Affine, Step, Table };

    static ConvectionProfile constant(double h);
    /// Linear from h_start at x = 0 to h_end at x = length.
    static ConvectionProfile affine(double h_start, double h_end, double length);
    /// h_before for x < x_step, h_after beyond; the jump is spread linearly over `width` (0 = sharp).
    static ConvectionProfile step(double h_before, double h_after, double x_step, double width = 0.0);
    /// Piecewise-linear through (x_i, h_i); constant extrapolation outside the samples.
    static ConvectionProfile table(std::vector<double> x, std::vector<double> h);

    double operator()(double x) const;

    Kind kind() const { return kind_; }
    /// Centre of the jump of a step profile; throws for other kinds.
    double step_location() const;
    bool is_constant() const;
    /// Exact extrema over [0, length] (the profiles are piecewise linear).
    double min_on(double length) const;
    double max_on(double length) const;
    /// True when max over [0, length] equals h(0).
    bool attains_max_at_origin(double length) const;

private:
    ConvectionProfile() = default;
    std::vector<double> breakpoints(double length) const;

    Kind kind_ = Kind::Constant;
    double p0_ = 0.0, p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
    std::vector<double> xs_, hs_;
};

/// Material and boundary data. beta(x) = 2 h(x) / k, beta_r = h_r / k.
/// Note: k is a conductivity (W m^-1 K^-1).
struct PhysicalParams {
    double k = 1.0;
    ConvectionProfile h = ConvectionProfile::constant(1.0);
    double h_r = 0.0;
    double T_d = 1.0;
    double T_inf = 0.0;
    /// Lower bound required of beta(x); the effective requirement is beta > max(beta_floor, 0).
    double beta_floor = 0.0;

    double beta(double x) const { return 2.0 * h(x) / k; }
    double beta_r() const { return h_r / k; }
    double delta_T() const { return T_d - T_inf; }

    /// Throws std::invalid_argument naming the violated bound.
    void validate(double length) const;
};

}  // namespace finopt
