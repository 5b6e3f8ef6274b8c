#include <cmath>

#include "steersman/error.hpp"
#include "steersman/info.hpp"

namespace steersman::info {

double psi_weight(const Eigen::MatrixXd& phi, int i, int j) {
    const int modes = static_cast<int>(phi.cols());
    double sum = 0.0;
    for (int k = 0; k < modes; ++k) {
        const double a = std::abs(phi(i, k));
        const double b = std::abs(phi(j, k));
        const double top = std::max(a, b);
        // Both components zero: fully correlated.
        sum += top > 0.0 ? (a / top) * (b / top) : 1.0;
    }
    return sum / modes;
}

CovarianceCache build_covariance(const modal::ModalBasis& basis, const modal::CandidateGrid& grid, double delta,
                                 double c2) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw InvalidArgument("correlation length must be positive, got " + std::to_string(delta));
    if (!(c2 >= 0.0) || !std::isfinite(c2))
        throw InvalidArgument("measurement variance must be non-negative, got " + std::to_string(c2));
    const int n = basis.node_count();
    if (grid.size() != n)
        throw InvalidArgument("grid has " + std::to_string(grid.size()) + " nodes but the basis has " +
                              std::to_string(n) + " rows");

    CovarianceCache cov;
    cov.c2 = c2;
    cov.delta = delta;
    cov.mode_count = basis.mode_count();
    cov.sigma.resize(n, n);
    cov.distances.resize(n, n);
    for (int i = 0; i < n; ++i) {
        cov.distances(i, i) = 0.0;
        cov.sigma(i, i) = 1.0 + c2;
        for (int j = i + 1; j < n; ++j) {
            const double d = (grid.node_coords[i] - grid.node_coords[j]).norm();
            const double s = std::exp(-d / delta) * psi_weight(basis.phi, i, j);
            cov.distances(i, j) = cov.distances(j, i) = d;
            cov.sigma(i, j) = cov.sigma(j, i) = s;
        }
    }
    return cov;
}

}  // namespace steersman::info
