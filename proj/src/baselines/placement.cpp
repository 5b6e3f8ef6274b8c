#include <algorithm>
#include <cmath>
#include <numeric>

#include "steersman/baselines.hpp"
#include "steersman/error.hpp"

namespace steersman::baselines {

namespace {

void check_count(int p, int n) {
    if (p < 1 || p > n) throw InvalidArgument("sensor count " + std::to_string(p) + " outside [1, " + std::to_string(n) + "]");
}

PlacementResult finish(std::vector<int> selected, const Eigen::MatrixXd& phi, const info::CovarianceCache& cov,
                       double normalizer, std::string method) {
    std::sort(selected.begin(), selected.end());
    PlacementResult out;
    out.det = info::evaluate(selected, phi, cov).det;
    out.score = out.det / normalizer;
    out.selected = std::move(selected);
    out.method = std::move(method);
    return out;
}

// Removes row/column r from the lower Cholesky factor l of A, giving the
// factor of A with that row and column deleted.
Eigen::MatrixXd delete_from_factor(const Eigen::MatrixXd& l, Eigen::Index r) {
    const Eigen::Index k = l.rows();
    const Eigen::Index tail = k - r - 1;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k - 1, k - 1);
    out.topLeftCorner(r, r) = l.topLeftCorner(r, r);
    out.bottomLeftCorner(tail, r) = l.bottomLeftCorner(tail, r);
    Eigen::MatrixXd l33 = l.bottomRightCorner(tail, tail);
    Eigen::VectorXd x = l.col(r).tail(tail);
    for (Eigen::Index j = 0; j < tail; ++j) {
        const double ljj = l33(j, j);
        const double rr = std::hypot(ljj, x(j));
        const double c = rr / ljj;
        const double s = x(j) / ljj;
        l33(j, j) = rr;
        const Eigen::Index below = tail - j - 1;
        if (below > 0) {
            l33.col(j).tail(below) = (l33.col(j).tail(below) + s * x.tail(below)) / c;
            x.tail(below) = c * x.tail(below) - s * l33.col(j).tail(below);
        }
    }
    out.bottomRightCorner(tail, tail) = l33.triangularView<Eigen::Lower>();
    return out;
}

Eigen::MatrixXd factor_with_jitter(Eigen::MatrixXd a) {
    const double scale = a.trace() / static_cast<double>(a.rows());
    for (int attempt = 0; attempt <= 3; ++attempt) {
        if (attempt > 0) a.diagonal().array() += scale * 1e-12 * std::pow(100.0, attempt - 1);
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw SingularityError("covariance over all candidate nodes is not positive definite");
}

}  // namespace

PlacementResult efi_select(const Eigen::MatrixXd& phi, const info::CovarianceCache& cov, int p, double normalizer,
                           std::vector<EfiRound>* rounds) {
    const int n = static_cast<int>(phi.rows());
    const int m = static_cast<int>(phi.cols());
    check_count(p, n);
    if (p < m) throw InvalidArgument("EFI needs at least as many sensors (" + std::to_string(p) + ") as modes (" +
                                     std::to_string(m) + ")");
    if (cov.node_count() != n) throw InvalidArgument("covariance and modal basis disagree on the node count");

    std::vector<int> retained(n);
    std::iota(retained.begin(), retained.end(), 0);
    Eigen::MatrixXd l = factor_with_jitter(cov.sigma);
    Eigen::MatrixXd phi_s = phi;
    int round = 0;
    while (static_cast<int>(retained.size()) > p) {
        const Eigen::MatrixXd w = l.triangularView<Eigen::Lower>().solve(phi_s);
        const Eigen::MatrixXd g = w.transpose() * w;
        Eigen::LLT<Eigen::MatrixXd> gllt(g);
        const double floor = 1e-12 * std::max(g.trace(), 1e-300);
        if (gllt.info() != Eigen::Success || gllt.matrixLLT().diagonal().minCoeff() <= std::sqrt(floor))
            throw SingularityError("EFI rank collapse in round " + std::to_string(round) + " with " +
                                   std::to_string(retained.size()) + " nodes retained");
        const Eigen::MatrixXd r = gllt.matrixL().solve(w.transpose());
        const Eigen::VectorXd ed = r.colwise().squaredNorm().transpose();
        Eigen::Index worst = 0;
        for (Eigen::Index i = 1; i < ed.size(); ++i)
            if (ed(i) < ed(worst)) worst = i;
        if (rounds) {
            EfiRound info;
            info.retained = retained;
            info.ed.assign(ed.data(), ed.data() + ed.size());
            info.removed = retained[static_cast<std::size_t>(worst)];
            rounds->push_back(std::move(info));
        }
        l = delete_from_factor(l, worst);
        const Eigen::Index k = phi_s.rows();
        Eigen::MatrixXd next(k - 1, m);
        next.topRows(worst) = phi_s.topRows(worst);
        next.bottomRows(k - worst - 1) = phi_s.bottomRows(k - worst - 1);
        phi_s = std::move(next);
        retained.erase(retained.begin() + worst);
        ++round;
    }
    return finish(std::move(retained), phi, cov, normalizer, "efi");
}

PlacementResult fssp_select(const Eigen::MatrixXd& phi, const info::CovarianceCache& cov, int p, double normalizer,
                            std::vector<double>* history) {
    check_count(p, static_cast<int>(phi.rows()));
    auto r = info::forward_greedy(phi, cov, p, history);
    return finish(std::move(r.selected), phi, cov, normalizer, "fssp");
}

PlacementResult brute_force_optimum(const Eigen::MatrixXd& phi, const info::CovarianceCache& cov, int p,
                                    double normalizer) {
    check_count(p, static_cast<int>(phi.rows()));
    auto r = info::exhaustive_search(phi, cov, p);
    return finish(std::move(r.selected), phi, cov, normalizer, "oracle");
}

PlacementResult efi_select(const info::ConditionScorer& scorer, int p) {
    return efi_select(scorer.basis().phi, scorer.covariance(), p, scorer.normalizer());
}

PlacementResult fssp_select(const info::ConditionScorer& scorer, int p) {
    return fssp_select(scorer.basis().phi, scorer.covariance(), p, scorer.normalizer());
}

PlacementResult brute_force_optimum(const info::ConditionScorer& scorer, int p) {
    return brute_force_optimum(scorer.basis().phi, scorer.covariance(), p, scorer.normalizer());
}

}  // namespace steersman::baselines
