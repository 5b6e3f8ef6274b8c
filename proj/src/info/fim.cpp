#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "steersman/error.hpp"
#include "steersman/info.hpp"

namespace steersman::info {

namespace {

std::string describe(std::span<const int> selected) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < selected.size(); ++i) out << (i ? ", " : "") << selected[i];
    out << ']';
    return out.str();
}

bool has_duplicates(std::span<const int> selected) {
    for (std::size_t a = 0; a < selected.size(); ++a)
        for (std::size_t b = a + 1; b < selected.size(); ++b)
            if (selected[a] == selected[b]) return true;
    return false;
}

struct Whitened {
    Eigen::MatrixXd q;
    bool ok = false;
};

// q = W^T W with W = C^-1 (L Phi) and C the Cholesky factor of L Sigma L^T.
// Rows are taken in ascending node order so any permutation gives identical bits.
Whitened whitened_information(std::span<const int> unordered, const Eigen::MatrixXd& phi, const CovarianceCache& cov) {
    std::vector<int> selected(unordered.begin(), unordered.end());
    std::sort(selected.begin(), selected.end());
    const int p = static_cast<int>(selected.size());
    const int m = static_cast<int>(phi.cols());
    Eigen::MatrixXd s(p, p);
    Eigen::MatrixXd lphi(p, m);
    for (int a = 0; a < p; ++a) {
        lphi.row(a) = phi.row(selected[a]);
        for (int b = 0; b < p; ++b) s(a, b) = cov.sigma(selected[a], selected[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    Whitened out;
    if (llt.info() != Eigen::Success) return out;
    const Eigen::MatrixXd w = llt.matrixL().solve(lphi);
    out.q = w.transpose() * w;
    out.ok = out.q.allFinite();
    return out;
}

}  // namespace

DetResult det_via_cholesky(const Eigen::MatrixXd& q) {
    if (q.rows() != q.cols()) throw InvalidArgument("det_via_cholesky requires a square matrix");
    DetResult out;
    if (q.rows() == 0) {
        out.det = 1.0;
        return out;
    }
    const double jitter = 1e-12 * std::max(q.trace(), std::numeric_limits<double>::min());
    Eigen::MatrixXd work = q;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        if (attempt > 0) work.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(work);
        if (llt.info() == Eigen::Success) {
            const Eigen::MatrixXd factor = llt.matrixL();
            const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(factor).singularValues();
            double det = 1.0;
            for (Eigen::Index i = 0; i < sv.size(); ++i) det *= sv(i) * sv(i);
            out.det = det;
            out.rank_deficient = !(det > 0.0);
            out.jitter_attempts = attempt;
            return out;
        }
    }
    out.det = 0.0;
    out.rank_deficient = true;
    out.jitter_attempts = 3;
    return out;
}

FimResult fim(std::span<const int> selected, const Eigen::MatrixXd& phi, const CovarianceCache& cov, double normalizer) {
    if (selected.empty()) throw InvalidArgument("fim requires at least one selected node");
    for (int idx : selected)
        if (idx < 0 || idx >= phi.rows())
            throw InvalidArgument("selected node " + std::to_string(idx) + " outside [0, " +
                                  std::to_string(phi.rows()) + ")");
    if (has_duplicates(selected))
        throw SingularityError("L Sigma L^T is singular: duplicate sensor indices in selection " + describe(selected));
    auto w = whitened_information(selected, phi, cov);
    if (!w.ok) throw SingularityError("L Sigma L^T is not positive definite for selection " + describe(selected));

    FimResult out;
    out.q = std::move(w.q);
    if (static_cast<Eigen::Index>(selected.size()) < phi.cols()) {
        out.rank_deficient = true;
        out.det = 0.0;
    } else {
        const auto d = det_via_cholesky(out.q);
        out.det = d.det;
        out.rank_deficient = d.rank_deficient;
    }
    out.score = out.det / normalizer;
    return out;
}

double entropy(double det, int n_theta) {
    if (!(det > 0.0)) throw InvalidArgument("entropy undefined for non-positive determinant " + std::to_string(det));
    return 0.5 * n_theta * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det);
}

InformationRank information_rank(const Eigen::MatrixXd& q) {
    InformationRank out;
    if (q.rows() == 0) return out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd values = eig.eigenvalues();
    const double cutoff = 1e-10 * std::max(values.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    out.pseudo_det = 1.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values(i) > cutoff) {
            ++out.rank;
            out.pseudo_det *= values(i);
        }
    }
    if (out.rank == 0) out.pseudo_det = 0.0;
    return out;
}

std::uint64_t combinations(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 acc = 1;
    for (int i = 1; i <= k; ++i) {
        acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(acc);
}

Evaluation evaluate(std::span<const int> selected, const Eigen::MatrixXd& phi, const CovarianceCache& cov,
                    bool with_rank) {
    Evaluation out;
    if (selected.empty()) {
        out.rank_deficient = true;
        return out;
    }
    if (has_duplicates(selected)) {
        out.singular_covariance = true;
        out.rank_deficient = true;
        return out;
    }
    auto w = whitened_information(selected, phi, cov);
    if (!w.ok) {
        out.singular_covariance = true;
        out.rank_deficient = true;
        return out;
    }
    if (with_rank) out.rank = information_rank(w.q);
    if (static_cast<Eigen::Index>(selected.size()) < phi.cols()) {
        out.rank_deficient = true;
        return out;
    }
    const auto d = det_via_cholesky(w.q);
    out.det = d.det;
    out.rank_deficient = d.rank_deficient;
    return out;
}

ConditionScorer::ConditionScorer(modal::ModalBasis basis, CovarianceCache cov, double normalizer)
    : basis_(std::move(basis)), cov_(std::move(cov)), normalizer_(normalizer) {
    if (!(normalizer_ > 0.0) || !std::isfinite(normalizer_))
        throw InvalidArgument("score normalizer must be positive, got " + std::to_string(normalizer_));
    if (cov_.node_count() != basis_.node_count())
        throw InvalidArgument("covariance and basis disagree on the candidate count");
}

Evaluation ConditionScorer::evaluate(std::span<const int> selected) const {
    return info::evaluate(selected, basis_.phi, cov_);
}

}  // namespace steersman::info
