#pragma once

#include <Eigen/Dense>

namespace finopt {

using Eigen::Index;
using Eigen::VectorXd;

/// Uniform 1D grid on [0, length]. Temperatures live on the n_cells + 1 nodes,
/// coefficients (a^2, b, beta) on the n_cells cell midpoints.
class Grid {
public:
    Grid(double length, Index n_cells);

    double length() const { return length_; }
    Index n_cells() const { return n_cells_; }
    Index n_nodes() const { return n_cells_ + 1; }
    double spacing() const { return spacing_; }

    double node(Index i) const { return i == n_cells_ ? length_ : static_cast<double>(i) * spacing_; }
    double midpoint(Index j) const { return (static_cast<double>(j) + 0.5) * spacing_; }

    VectorXd nodes() const;
    VectorXd midpoints() const;

    /// Index of the cell [x_j, x_{j+1}) holding x; x = length maps to the last cell.
    Index cell_containing(double x) const;

    friend bool operator==(const Grid& lhs, const Grid& rhs) {
        return lhs.length_ == rhs.length_ && lhs.n_cells_ == rhs.n_cells_;
    }

private:
    double length_;
    Index n_cells_;
    double spacing_;
};

/// Throws std::invalid_argument naming `what` when the grids differ.
void require_same_grid(const Grid& lhs, const Grid& rhs, const char* what);

}  // namespace finopt
