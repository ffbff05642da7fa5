#include "finopt/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "finopt/closed_form.hpp"
#include "finopt/functionals.hpp"

namespace finopt {

namespace {

/// Density a0 + (level - a0) on [0, width], a0 beyond, averaged exactly over each cell.
VectorXd front_loaded_cells(const Grid& grid, double a0, double level, double width) {
    const Index n = grid.n_cells();
    const double h = grid.spacing();
    VectorXd density = VectorXd::Constant(n, a0);
    for (Index j = 0; j < n; ++j) {
        const double lo = grid.node(j);
        if (lo >= width) break;
        const double overlap = std::min(grid.node(j + 1), width) - lo;
        density[j] = a0 + (level - a0) * (overlap / h);
    }
    return density;
}

}  // namespace

void ArcSequence::validate() const {
    if (!(a0 > 0.0 && length > 0.0 && std::isfinite(S))) {
        throw std::invalid_argument("ArcSequence: need a0 > 0, l > 0 and finite S");
    }
    if (S < a0 * length) throw std::invalid_argument("ArcSequence: S must be >= a0 * l");
    if (m < 1) throw std::invalid_argument("ArcSequence: m must be >= 1");
    if (degenerate()) return;
    if (!(support() < length)) {
        throw std::invalid_argument("ArcSequence: m too small, need 1/m < l (m = " + std::to_string(m) + ")");
    }
    if (half_period() > apex_offset()) {
        throw std::invalid_argument("ArcSequence: half period 1/(2m^2) exceeds the rising arc sqrt(M_m^2 - a0^2)");
    }
}

double ArcSequence::plateau() const { return a0 + (S - a0 * length) * m; }

double ArcSequence::apex_offset() const {
    const double M = plateau();
    return std::sqrt((M - a0) * (M + a0));
}

double ArcSequence::value(double x) const {
    if (degenerate() || x >= support()) return a0;
    const double P = period();
    double local = x - std::floor(x / P) * P;
    if (local > 0.5 * P) local = P - local;
    const double c = apex_offset();
    return std::sqrt(a0 * a0 + local * (2.0 * c - local));
}

double ArcSequence::slope(double x) const {
    if (degenerate() || x >= support()) return 0.0;
    const double P = period();
    double local = x - std::floor(x / P) * P;
    double sign = 1.0;
    if (local > 0.5 * P) {
        local = P - local;
        sign = -1.0;
    }
    const double c = apex_offset();
    return sign * (c - local) / value(x);
}

double ArcSequence::density(double x) const { return (!degenerate() && x <= support()) ? plateau() : a0; }

SurfaceMeasure build_bsm(double S, int m, double a0, const Grid& grid) {
    const ArcSequence seq{S, m, a0, grid.length()};
    if (!(a0 > 0.0) || S < a0 * grid.length() || m < 1) {
        throw std::invalid_argument("build_bsm: need a0 > 0, S >= a0 l and m >= 1");
    }
    if (seq.degenerate()) return SurfaceMeasure::constant(grid, a0, a0);
    if (!(seq.support() < grid.length())) throw std::invalid_argument("build_bsm: m too small, need 1/m < l");
    return SurfaceMeasure{grid, front_loaded_cells(grid, a0, seq.plateau(), seq.support()), {}, a0};
}

RadiusProfile build_asm(double S, int m, double a0, const Grid& grid, int min_cells_per_half_period) {
    const ArcSequence seq{S, m, a0, grid.length()};
    seq.validate();
    if (seq.degenerate()) return RadiusProfile::constant(grid, a0);
    if (seq.half_period() < min_cells_per_half_period * grid.spacing()) {
        throw std::invalid_argument("build_asm: grid too coarse, need " + std::to_string(min_cells_per_half_period) +
                                    " cells per half period 1/(2m^2) (m = " + std::to_string(m) + ")");
    }
    VectorXd values(grid.n_nodes());
    for (Index i = 0; i < grid.n_nodes(); ++i) values[i] = std::max(a0, seq.value(grid.node(i)));
    return RadiusProfile{grid, std::move(values), a0};
}

double bang_switch(double M, double S0, double a0, double length) {
    if (!(M > a0)) throw std::invalid_argument("build_bang_b: cap M must exceed a0");
    if (S0 < a0 * length) throw std::invalid_argument("build_bang_b: S0 must be >= a0 l");
    return (S0 - a0 * length) / (M - a0);
}

SurfaceMeasure build_bang_b(double M, double S0, double a0, const Grid& grid) {
    if (S0 == a0 * grid.length()) return SurfaceMeasure::constant(grid, a0, a0);
    const double x_M = bang_switch(M, S0, a0, grid.length());
    if (x_M > grid.length()) {
        throw std::invalid_argument("build_bang_b: x_M = " + std::to_string(x_M) + " exceeds l; M too small for S0");
    }
    return SurfaceMeasure{grid, front_loaded_cells(grid, a0, M, x_M), {}, a0};
}

int default_oscillations(double width) {
    if (!(width > 0.0)) throw std::invalid_argument("default_oscillations: width must be > 0");
    return static_cast<int>(std::floor(1.0 / width)) + 1;
}

namespace {

/// One branch a' = sign sqrt(b^2 - a^2) / a of the oscillation construction, with b piecewise
/// constant per cell. Integrated by classical RK4 on a mesh that includes every cell face.
class BranchIntegrator {
public:
    BranchIntegrator(const SurfaceMeasure& b, double max_step) : b_(b), max_step_(max_step) {}

    double rate(double x_cell, double a, double sign) const {
        const double bx = b_.density[b_.grid.cell_containing(x_cell)];
        // Stages may overshoot the apex a = b slightly; the branch is flat there.
        const double d = std::max(0.0, (bx - a) * (bx + a));
        return sign * std::sqrt(d) / a;
    }

    /// Integrates from (x_from, a_from) to x_to; both ends must lie in one cell (closure).
    double step_within_cell(double x_from, double a_from, double x_to, double sign) const {
        const double span = x_to - x_from;
        if (span == 0.0) return a_from;
        const double x_cell = x_from + 0.5 * span;  // evaluation point identifying the cell
        const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / max_step_)));
        const double dx = span / steps;
        double a = a_from;
        for (int s = 0; s < steps; ++s) {
            const double k1 = rate(x_cell, a, sign);
            const double k2 = rate(x_cell, a + 0.5 * dx * k1, sign);
            const double k3 = rate(x_cell, a + 0.5 * dx * k2, sign);
            const double k4 = rate(x_cell, a + dx * k3, sign);
            a += dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return a;
    }

private:
    const SurfaceMeasure& b_;
    double max_step_;
};

}  // namespace

RadiusProfile reconstruct_radius(const SurfaceMeasure& b, const std::vector<OscillationSpec>& specs,
                                 double a_boundary) {
    b.validate();
    if (!b.atoms.empty()) throw std::invalid_argument("reconstruct_radius: density must be atom-free");
    if (!(a_boundary >= b.floor)) throw std::invalid_argument("reconstruct_radius: a_boundary below floor a0");
    const Grid& grid = b.grid;
    VectorXd values = VectorXd::Constant(grid.n_nodes(), a_boundary);

    for (const auto& spec : specs) {
        if (!(spec.x_start >= 0.0 && spec.x_end <= grid.length() && spec.x_end > spec.x_start)) {
            throw std::invalid_argument("reconstruct_radius: oscillation interval outside [0, l] or empty");
        }
        if (spec.n_oscillations < 1) throw std::invalid_argument("reconstruct_radius: n_oscillations must be >= 1");
        const double eta = (spec.x_end - spec.x_start) / spec.n_oscillations;
        for (Index j = grid.cell_containing(spec.x_start); j < grid.n_cells() && grid.node(j) < spec.x_end; ++j) {
            if (b.density[j] < a_boundary * (1.0 - 1e-12)) {
                throw std::domain_error("reconstruct_radius: density below a_boundary at x = " +
                                        std::to_string(grid.midpoint(j)) + ", sqrt(b^2 - a^2) undefined");
            }
        }
        BranchIntegrator branch(b, std::min(eta / 64.0, grid.spacing() / 4.0));

        for (int k = 0; k < spec.n_oscillations; ++k) {
            const double lo = spec.x_start + k * eta;
            const double hi = k + 1 == spec.n_oscillations ? spec.x_end : lo + eta;

            // Mesh: sub-interval ends plus every cell face inside.
            std::vector<double> mesh{lo};
            for (Index i = grid.cell_containing(lo) + 1; i <= grid.n_cells() && grid.node(i) < hi; ++i) {
                if (grid.node(i) > lo) mesh.push_back(grid.node(i));
            }
            mesh.push_back(hi);
            const std::size_t N = mesh.size();

            std::vector<double> rising(N), falling(N);
            rising[0] = a_boundary;
            for (std::size_t q = 1; q < N; ++q) {
                rising[q] = branch.step_within_cell(mesh[q - 1], rising[q - 1], mesh[q], 1.0);
            }
            falling[N - 1] = a_boundary;
            for (std::size_t q = N - 1; q > 0; --q) {
                falling[q - 1] = branch.step_within_cell(mesh[q], falling[q], mesh[q - 1], -1.0);
            }

            const double tol = 1e-12 * b.floor;
            double xi;
            std::size_t bracket = 0;  // crossing lies in [mesh[bracket], mesh[bracket + 1]]
            if (rising[N - 1] - falling[N - 1] <= tol && falling[0] - rising[0] <= tol) {
                // Branches coincide (b equals a_boundary here): no oscillation to build.
                xi = 0.5 * (lo + hi);
                bracket = std::upper_bound(mesh.begin(), mesh.end(), xi) - mesh.begin() - 1;
                bracket = std::min(bracket, N - 2);
            } else {
                if (!(rising[N - 1] > falling[N - 1] && falling[0] > rising[0])) {
                    throw std::domain_error("reconstruct_radius: rising and falling branches do not cross on [" +
                                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
                }
                while (bracket + 1 < N - 1 && rising[bracket + 1] - falling[bracket + 1] < 0.0) ++bracket;
                double left = mesh[bracket], right = mesh[bracket + 1];
                xi = 0.5 * (left + right);
                for (int it = 0; it < 200; ++it) {
                    xi = 0.5 * (left + right);
                    const double up = branch.step_within_cell(mesh[bracket], rising[bracket], xi, 1.0);
                    const double down = branch.step_within_cell(mesh[bracket + 1], falling[bracket + 1], xi, -1.0);
                    const double f = up - down;
                    if (std::abs(f) <= tol || right - left <= 1e-15 * grid.length()) break;
                    (f < 0.0 ? left : right) = xi;
                }
            }

            // Nodes are mesh points (cell faces), so their values are read from the tables.
            for (std::size_t q = 0; q < N; ++q) {
                const double s = mesh[q] / grid.spacing();
                const auto i = static_cast<Index>(std::llround(s));
                if (std::abs(s - static_cast<double>(i)) > 1e-9 || i < 0 || i > grid.n_cells()) continue;
                values[i] = std::max(b.floor, mesh[q] <= xi ? rising[q] : falling[q]);
            }
        }
    }
    RadiusProfile a{grid, std::move(values), b.floor};
    a.validate();
    return a;
}

std::vector<OscillationSpec> excess_intervals(const SurfaceMeasure& b, double rel_tol, int max_oscillations) {
    std::vector<OscillationSpec> specs;
    const Grid& g = b.grid;
    const double threshold = b.floor * (1.0 + rel_tol);
    Index j = 0;
    while (j < g.n_cells()) {
        if (b.density[j] <= threshold) {
            ++j;
            continue;
        }
        Index end = j;
        while (end < g.n_cells() && b.density[end] > threshold) ++end;
        const double lo = g.node(j), hi = g.node(end);
        specs.push_back({lo, hi, std::min(default_oscillations(hi - lo), max_oscillations)});
        j = end;
    }
    return specs;
}

VolumeSequenceMember build_volume_sequence(int n, double V0, double a0, const Grid& grid,
                                           const VolumeSequenceOptions& options) {
    const double length = grid.length();
    if (!(a0 > 0.0)) throw std::invalid_argument("build_volume_sequence: a0 must be > 0");
    if (!(V0 > a0 * a0 * length)) throw std::invalid_argument("build_volume_sequence: V0 must exceed a0^2 l");
    if (n < static_cast<int>(std::floor(a0 * length)) + 1) {
        throw std::invalid_argument("build_volume_sequence: n must be >= floor(a0 l) + 1");
    }
    const double S = n;
    const double target_volume = V0 - 1.0 / n;

    std::optional<double> flux_target;
    if (options.params) {
        const auto& p = *options.params;
        if (!p.h.is_constant()) {
            throw std::invalid_argument("build_volume_sequence: flux bound needs a constant convective coefficient");
        }
        const double beta = p.beta(0.0);
        const double gamma = compute_gamma(a0, length, beta, p.beta_r());
        flux_target = p.k * std::numbers::pi * beta * p.delta_T() *
                      (std::pow(a0, 1.5) * gamma / std::sqrt(beta) + S - a0 * length - 1.0 / n);
    }

    struct Trial {
        bool ok;
        std::optional<VolumeSequenceMember> member;
    };
    auto attempt = [&](int m) -> Trial {
        ArcSequence seq{S, m, a0, length};
        try {
            seq.validate();
        } catch (const std::invalid_argument&) {
            return {false, std::nullopt};  // m too small for the construction
        }
        if (seq.half_period() < options.min_cells_per_half_period * grid.spacing()) {
            throw std::invalid_argument("build_volume_sequence: grid resolution insufficient for m = " +
                                        std::to_string(m));
        }
        VolumeSequenceMember member{build_asm(S, m, a0, grid, options.min_cells_per_half_period),
                                    build_bsm(S, m, a0, grid), n, m, 0.0, std::nullopt};
        member.volume = volume(member.profile);
        bool ok = member.volume <= target_volume;
        if (ok && flux_target) {
            member.flux = solve_flux(member.profile, member.density, *options.params);
            ok = *member.flux >= *flux_target;
        }
        return {ok, std::move(member)};
    };

    // The conditions need not be monotone in m, so scan upward for the first admissible one.
    for (int m = 1; m <= options.max_m; ++m) {
        Trial t = attempt(m);
        if (t.ok) return std::move(*t.member);
    }
    throw std::invalid_argument("build_volume_sequence: no admissible m up to max_m = " +
                                std::to_string(options.max_m));
}

std::vector<OscillationSpec> resolved_intervals(const SurfaceMeasure& b) {
    auto specs = excess_intervals(b);
    const double h = b.grid.spacing();
    for (auto& s : specs) {
        const int resolvable = std::max(1, static_cast<int>(std::floor((s.x_end - s.x_start) / (8.0 * h))));
        s.n_oscillations = std::min(s.n_oscillations, resolvable);
    }
    return specs;
}

}  // namespace finopt
