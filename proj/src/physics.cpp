#include "finopt/physics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace finopt {

namespace {

bool finite_all(std::initializer_list<double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

ConvectionProfile ConvectionProfile::constant(double h) {
    if (!std::isfinite(h)) throw std::invalid_argument("ConvectionProfile: h must be finite");
    ConvectionProfile p;
    p.kind_ = Kind::Constant;
    p.p0_ = h;
    return p;
}

ConvectionProfile ConvectionProfile::affine(double h_start, double h_end, double length) {
    if (!finite_all({h_start, h_end, length}) || length <= 0.0) {
        throw std::invalid_argument("ConvectionProfile::affine: finite values and positive length required");
    }
    ConvectionProfile p;
    p.kind_ = Kind::Affine;
    p.p0_ = h_start;
    p.p1_ = h_end;
    p.p2_ = length;
    return p;
}

ConvectionProfile ConvectionProfile::step(double h_before, double h_after, double x_step, double width) {
    if (!finite_all({h_before, h_after, x_step, width}) || width < 0.0) {
        throw std::invalid_argument("ConvectionProfile::step: finite values and width >= 0 required");
    }
    ConvectionProfile p;
    p.kind_ = Kind::Step;
    p.p0_ = h_before;
    p.p1_ = h_after;
    p.p2_ = x_step;
    p.p3_ = width;
    return p;
}

ConvectionProfile ConvectionProfile::table(std::vector<double> x, std::vector<double> h) {
    if (x.empty() || x.size() != h.size()) {
        throw std::invalid_argument("ConvectionProfile::table: need matching, non-empty samples");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!finite_all({x[i], h[i]})) throw std::invalid_argument("ConvectionProfile::table: non-finite sample");
        if (i > 0 && !(x[i] > x[i - 1])) {
            throw std::invalid_argument("ConvectionProfile::table: abscissae must be strictly increasing");
        }
    }
    ConvectionProfile p;
    p.kind_ = Kind::Table;
    p.xs_ = std::move(x);
    p.hs_ = std::move(h);
    return p;
}

double ConvectionProfile::operator()(double x) const {
    switch (kind_) {
    case Kind::Constant:
        return p0_;
    case Kind::Affine: {
        const double t = std::clamp(x / p2_, 0.0, 1.0);
        return p0_ + (p1_ - p0_) * t;
    }
    case Kind::Step: {
        if (p3_ == 0.0) return x < p2_ ? p0_ : p1_;
        const double t = std::clamp((x - (p2_ - 0.5 * p3_)) / p3_, 0.0, 1.0);
        return p0_ + (p1_ - p0_) * t;
    }
    case Kind::Table: {
        if (x <= xs_.front()) return hs_.front();
        if (x >= xs_.back()) return hs_.back();
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const auto i = static_cast<std::size_t>(it - xs_.begin());
        const double t = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
        return hs_[i - 1] + (hs_[i] - hs_[i - 1]) * t;
    }
    }
    return p0_;
}

bool ConvectionProfile::is_constant() const {
    switch (kind_) {
    case Kind::Constant:
        return true;
    case Kind::Affine:
    case Kind::Step:
        return p0_ == p1_;
    case Kind::Table:
        return std::all_of(hs_.begin(), hs_.end(), [&](double v) { return v == hs_.front(); });
    }
    return false;
}

std::vector<double> ConvectionProfile::breakpoints(double length) const {
    // Constant, affine and step profiles are monotone, so the domain ends suffice.
    std::vector<double> xs{0.0, length};
    if (kind_ == Kind::Table) {
        for (double x : xs_) {
            if (x > 0.0 && x < length) xs.push_back(x);
        }
    }
    return xs;
}

double ConvectionProfile::min_on(double length) const {
    double best = (*this)(0.0);
    for (double x : breakpoints(length)) best = std::min(best, (*this)(x));
    return best;
}

double ConvectionProfile::max_on(double length) const {
    double best = (*this)(0.0);
    for (double x : breakpoints(length)) best = std::max(best, (*this)(x));
    return best;
}

bool ConvectionProfile::attains_max_at_origin(double length) const {
    return max_on(length) <= (*this)(0.0);
}

double ConvectionProfile::step_location() const {
    if (kind_ != Kind::Step) throw std::invalid_argument("ConvectionProfile::step_location: not a step profile");
    return p2_;
}

void PhysicalParams::validate(double length) const {
    if (!finite_all({k, h_r, T_d, T_inf, beta_floor})) {
        throw std::invalid_argument("PhysicalParams: non-finite parameter");
    }
    if (!(k > 0.0)) throw std::invalid_argument("PhysicalParams: k must be > 0");
    if (!(h_r >= 0.0)) throw std::invalid_argument("PhysicalParams: h_r must be >= 0");
    if (!(T_d >= T_inf)) throw std::invalid_argument("PhysicalParams: T_d must be >= T_inf");
    const double beta_min = 2.0 * h.min_on(length) / k;
    if (!(beta_min > 0.0) || beta_min < beta_floor) {
        throw std::invalid_argument("PhysicalParams: beta(x) = 2h/k must stay >= beta_floor > 0 (min beta = " +
                                    std::to_string(beta_min) + ")");
    }
}

}  // namespace finopt
