#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "steersman/error.hpp"
#include "steersman/modal.hpp"

namespace steersman::modal {

namespace {

// Evaluated with extended-precision accumulation: for the lowest modes of a
// fine mesh, ||K v|| is many orders below ||K|| ||v|| and a plain double
// product cannot resolve residuals near 1e-8.
std::vector<long double> spmv_extended(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& v) {
    std::vector<long double> out(static_cast<std::size_t>(a.rows()), 0.0L);
    for (int col = 0; col < a.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
            out[it.row()] += static_cast<long double>(it.value()) * v(col);
    return out;
}

}  // namespace

double relative_residual(const Eigen::SparseMatrix<double>& k, const Eigen::SparseMatrix<double>& m,
                         const Eigen::VectorXd& v, double lambda) {
    const auto kv = spmv_extended(k, v);
    const auto mv = spmv_extended(m, v);
    long double num = 0.0L;
    long double den = 0.0L;
    for (std::size_t i = 0; i < kv.size(); ++i) {
        const long double r = kv[i] - static_cast<long double>(lambda) * mv[i];
        num += r * r;
        den += kv[i] * kv[i];
    }
    return static_cast<double>(std::sqrt(num / den));
}

namespace {

Eigen::MatrixXd dense_start(const DiscreteModel& model, int q) {
    const Eigen::MatrixXd k = Eigen::MatrixXd(model.stiffness);
    const Eigen::MatrixXd m = Eigen::MatrixXd(model.mass);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, m, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("dense generalized eigen-solve failed (mass matrix not positive definite?)");
    return solver.eigenvectors().leftCols(q);
}

// K^-1 b with one step of iterative refinement against an extended-precision
// residual, so the inverse-iteration step is accurate to working precision.
Eigen::MatrixXd refined_solve(const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& factor,
                              const Eigen::SparseMatrix<double>& k, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd x = factor.solve(b);
    Eigen::MatrixXd r(b.rows(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
        const auto kx = spmv_extended(k, x.col(j));
        for (Eigen::Index i = 0; i < b.rows(); ++i)
            r(i, j) = static_cast<double>(static_cast<long double>(b(i, j)) - kx[static_cast<std::size_t>(i)]);
    }
    x += factor.solve(r);
    return x;
}

// Block inverse iteration with Rayleigh-Ritz projection on the subspace.
// Small models start from the dense solution and only get polished here.
EigenPairs subspace_iteration(const DiscreteModel& model, int mode_count, const EigenSolveOptions& options) {
    const auto& k = model.stiffness;
    const auto& m = model.mass;
    const int n = model.free_dof_count();
    const int q = std::min(n, std::max(2 * mode_count, mode_count + 8));

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(k);
    if (factor.info() != Eigen::Success) throw ConvergenceError("stiffness factorization failed (mechanism in model?)");

    Eigen::MatrixXd x;
    if (n <= options.dense_limit) {
        x = dense_start(model, q);
    } else {
        std::mt19937_64 rng(0x5eedULL);
        std::uniform_real_distribution<double> uniform(-1.0, 1.0);
        x.resize(n, q);
        for (int j = 0; j < q; ++j)
            for (int i = 0; i < n; ++i) x(i, j) = uniform(rng);
    }

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(q);
    std::vector<double> residuals(mode_count, 1.0);
    double best_worst = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const Eigen::MatrixXd y = m * x;
        const Eigen::MatrixXd xb = refined_solve(factor, k, y);
        Eigen::MatrixXd kr = xb.transpose() * y;
        Eigen::MatrixXd mr = xb.transpose() * (m * xb);
        kr = 0.5 * (kr + kr.transpose()).eval();
        mr = 0.5 * (mr + mr.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(kr, mr, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
        if (ritz.info() != Eigen::Success)
            throw ConvergenceError("Rayleigh-Ritz projection failed at iteration " + std::to_string(it));
        x = xb * ritz.eigenvectors();
        const Eigen::VectorXd previous = lambda;
        lambda = ritz.eigenvalues();

        bool settled = true;
        double worst = 0.0;
        for (int i = 0; i < mode_count; ++i) {
            const double change = std::abs(lambda(i) - previous(i)) / std::abs(lambda(i));
            residuals[i] = relative_residual(k, m, x.col(i), lambda(i));
            worst = std::max(worst, residuals[i]);
            if (change > options.tolerance) settled = false;
        }
        if (worst < 0.9 * best_worst) {
            best_worst = worst;
            stalled = 0;
        } else {
            ++stalled;
        }
        if (settled && (worst < options.residual_target || stalled >= 3)) {
            if (worst >= options.residual_limit) break;
            EigenPairs out;
            out.eigenvalues = lambda.head(mode_count);
            out.vectors = x.leftCols(mode_count);
            out.iterations = it;
            return out;
        }
    }
    std::ostringstream msg;
    msg << "subspace iteration did not converge after " << options.max_iterations << " iterations (subspace " << q
        << ", free DOFs " << n << "); residuals:";
    for (double r : residuals) msg << ' ' << r;
    throw ConvergenceError(msg.str());
}

}  // namespace

EigenPairs solve_eigenpairs(const DiscreteModel& model, int mode_count, const EigenSolveOptions& options) {
    const int n = model.free_dof_count();
    if (mode_count < 1 || mode_count > n)
        throw InvalidArgument("mode count " + std::to_string(mode_count) + " outside [1, " + std::to_string(n) + "]");
    EigenPairs pairs = subspace_iteration(model, mode_count, options);
    for (int j = 0; j < mode_count; ++j) {
        const double norm = std::sqrt(pairs.vectors.col(j).dot(model.mass * pairs.vectors.col(j)));
        pairs.vectors.col(j) /= norm;
    }
    return pairs;
}

ModalBasis solve_modes(const DiscreteModel& model, int mode_count, const EigenSolveOptions& options) {
    EigenPairs pairs = solve_eigenpairs(model, mode_count, options);
    ModalBasis basis;
    basis.condition_label = model.condition_label;
    basis.grid = model.grid;
    basis.frequencies.resize(mode_count);
    basis.phi.resize(model.grid.size(), mode_count);
    for (int j = 0; j < mode_count; ++j) {
        if (!(pairs.eigenvalues(j) > 0.0))
            throw ConvergenceError("non-positive eigenvalue " + std::to_string(pairs.eigenvalues(j)) + " for mode " +
                                   std::to_string(j + 1));
        basis.frequencies(j) = std::sqrt(pairs.eigenvalues(j)) / (2.0 * std::numbers::pi);
        for (int i = 0; i < model.grid.size(); ++i) basis.phi(i, j) = pairs.vectors(model.translational_free_dof(i), j);
        Eigen::Index pivot = 0;
        basis.phi.col(j).cwiseAbs().maxCoeff(&pivot);
        if (basis.phi(pivot, j) < 0.0) basis.phi.col(j) *= -1.0;
    }
    if (!basis.phi.allFinite()) throw ConvergenceError("mode shapes contain non-finite entries");
    return basis;
}

Eigen::MatrixXd mac(const Eigen::MatrixXd& phi_a, const Eigen::MatrixXd& phi_b) {
    if (phi_a.rows() != phi_b.rows())
        throw InvalidArgument("MAC requires equal row counts (" + std::to_string(phi_a.rows()) + " vs " +
                              std::to_string(phi_b.rows()) + ")");
    const Eigen::VectorXd na = phi_a.colwise().squaredNorm();
    const Eigen::VectorXd nb = phi_b.colwise().squaredNorm();
    for (Eigen::Index j = 0; j < na.size(); ++j)
        if (na(j) == 0.0) throw InvalidArgument("MAC: zero-norm column " + std::to_string(j) + " in first basis");
    for (Eigen::Index j = 0; j < nb.size(); ++j)
        if (nb(j) == 0.0) throw InvalidArgument("MAC: zero-norm column " + std::to_string(j) + " in second basis");
    const Eigen::MatrixXd cross = phi_a.transpose() * phi_b;
    Eigen::MatrixXd out(cross.rows(), cross.cols());
    for (Eigen::Index i = 0; i < cross.rows(); ++i)
        for (Eigen::Index j = 0; j < cross.cols(); ++j)
            out(i, j) = std::min(1.0, cross(i, j) * cross(i, j) / (na(i) * nb(j)));
    return out;
}

}  // namespace steersman::modal
