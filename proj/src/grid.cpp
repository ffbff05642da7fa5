#include "finopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace finopt {

Grid::Grid(double length, Index n_cells) : length_(length), n_cells_(n_cells) {
    if (!(std::isfinite(length) && length > 0.0)) {
        throw std::invalid_argument("Grid: length must be positive and finite");
    }
    if (n_cells < 1) {
        throw std::invalid_argument("Grid: n_cells must be >= 1");
    }
    spacing_ = length_ / static_cast<double>(n_cells_);
}

VectorXd Grid::nodes() const {
    VectorXd x(n_nodes());
    for (Index i = 0; i < n_nodes(); ++i) x[i] = node(i);
    return x;
}

VectorXd Grid::midpoints() const {
    VectorXd x(n_cells_);
    for (Index j = 0; j < n_cells_; ++j) x[j] = midpoint(j);
    return x;
}

Index Grid::cell_containing(double x) const {
    if (!(x >= 0.0 && x <= length_)) {
        throw std::invalid_argument("Grid::cell_containing: position outside [0, length]");
    }
    auto j = static_cast<Index>(std::floor(x / spacing_));
    return std::clamp<Index>(j, 0, n_cells_ - 1);
}

void require_same_grid(const Grid& lhs, const Grid& rhs, const char* what) {
    if (!(lhs == rhs)) {
        throw std::invalid_argument(std::string(what) + ": mismatched grid");
    }
}

}  // namespace finopt
