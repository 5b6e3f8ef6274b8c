#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "steersman/modal.hpp"

namespace steersman::info {

/// Default correlation length: diagonal of the 423 mm x 76.2 mm placement region.
inline constexpr double kDefaultCorrelationLength = 0.42981;

/// Prediction-error covariance over all candidate nodes: spatially
/// correlated model error plus independent measurement noise c2 * I.
struct CovarianceCache {
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd distances;
    double c2 = 0.0;
    double delta = kDefaultCorrelationLength;
    int mode_count = 0;

    int node_count() const { return static_cast<int>(sigma.rows()); }
};

/// Mode-shape weighting psi_i . psi_j / K between two candidate nodes, in [0, 1].
double psi_weight(const Eigen::MatrixXd& phi, int i, int j);

CovarianceCache build_covariance(const modal::ModalBasis& basis, const modal::CandidateGrid& grid, double delta,
                                 double c2 = 0.0);

struct DetResult {
    double det = 0.0;
    bool rank_deficient = false;
    int jitter_attempts = 0;
};

/// det(q) as the product of squared singular values of its Cholesky factor.
/// Up to three jittered retries (1e-12 * trace on the diagonal) before the
/// matrix is declared rank deficient with det = 0.
DetResult det_via_cholesky(const Eigen::MatrixXd& q);

struct FimResult {
    Eigen::MatrixXd q;
    double det = 0.0;
    double score = 0.0;
    bool rank_deficient = false;
};

/// Fisher information (L Phi)^T (L Sigma L^T)^-1 (L Phi) for the selected nodes.
/// Throws SingularityError when L Sigma L^T cannot be factored (including
/// duplicate indices). `normalizer` divides det into the score.
FimResult fim(std::span<const int> selected, const Eigen::MatrixXd& phi, const CovarianceCache& cov,
              double normalizer = 1.0);

/// Asymptotic information entropy 0.5 n ln(2 pi) - 0.5 ln det.
double entropy(double det, int n_theta);

/// Numerical rank and pseudo-determinant (product of retained eigenvalues).
struct InformationRank {
    int rank = 0;
    double pseudo_det = 0.0;
};
InformationRank information_rank(const Eigen::MatrixXd& q);

inline double reward(double previous_score, double current_score) { return current_score - previous_score; }

/// Binomial coefficient saturated at UINT64_MAX.
std::uint64_t combinations(int n, int k);

inline constexpr std::uint64_t kExhaustiveBudget = 1'000'000;

/// Non-throwing determinant evaluation used by searches and the environment:
/// configurations whose L Sigma L^T cannot be factored score zero.
struct Evaluation {
    double det = 0.0;
    bool rank_deficient = false;
    bool singular_covariance = false;
    InformationRank rank;
};
Evaluation evaluate(std::span<const int> selected, const Eigen::MatrixXd& phi, const CovarianceCache& cov,
                    bool with_rank = false);

struct SearchResult {
    std::vector<int> selected;
    double det = 0.0;
};

/// Exact maximizer of det over all p-subsets (lexicographically first on ties).
SearchResult exhaustive_search(const Eigen::MatrixXd& phi, const CovarianceCache& cov, int p);
/// Greedy forward placement comparing (rank, pseudo-det); lowest index on ties.
/// `history` receives the det after each addition when non-null.
SearchResult forward_greedy(const Eigen::MatrixXd& phi, const CovarianceCache& cov, int p,
                            std::vector<double>* history = nullptr);

/// Per-condition score normalizer: best det found by exhaustive search when
/// C(n, p) <= 1e6, greedy forward placement otherwise.
double normalizer(const Eigen::MatrixXd& phi, const CovarianceCache& cov, int p);

/// Scores sensor configurations for one structural condition.
class ConditionScorer {
public:
    ConditionScorer(modal::ModalBasis basis, CovarianceCache cov, double normalizer);

    const modal::ModalBasis& basis() const { return basis_; }
    const CovarianceCache& covariance() const { return cov_; }
    double normalizer() const { return normalizer_; }

    Evaluation evaluate(std::span<const int> selected) const;
    double score(std::span<const int> selected) const { return evaluate(selected).det / normalizer_; }

private:
    modal::ModalBasis basis_;
    CovarianceCache cov_;
    double normalizer_;
};

}  // namespace steersman::info
