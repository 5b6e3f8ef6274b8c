#include <algorithm>
#include <numeric>
#include <sstream>

#include "steersman/error.hpp"
#include "steersman/info.hpp"

namespace steersman::info {

SearchResult exhaustive_search(const Eigen::MatrixXd& phi, const CovarianceCache& cov, int p) {
    const int n = static_cast<int>(phi.rows());
    if (p < 1 || p > n) throw InvalidArgument("sensor count " + std::to_string(p) + " outside [1, " + std::to_string(n) + "]");
    const auto count = combinations(n, p);
    if (count > kExhaustiveBudget) {
        std::ostringstream msg;
        msg << "C(" << n << ", " << p << ") = " << count << " exceeds the exhaustive budget of " << kExhaustiveBudget
            << "; use forward greedy placement (fssp) instead";
        throw InvalidArgument(msg.str());
    }

    std::vector<int> current(p);
    std::iota(current.begin(), current.end(), 0);
    SearchResult best;
    best.det = -1.0;
    while (true) {
        const double det = evaluate(current, phi, cov).det;
        if (det > best.det) {
            best.det = det;
            best.selected = current;
        }
        // Next combination in lexicographic order.
        int i = p - 1;
        while (i >= 0 && current[i] == n - p + i) --i;
        if (i < 0) break;
        ++current[i];
        for (int j = i + 1; j < p; ++j) current[j] = current[j - 1] + 1;
    }
    return best;
}

SearchResult forward_greedy(const Eigen::MatrixXd& phi, const CovarianceCache& cov, int p, std::vector<double>* history) {
    const int n = static_cast<int>(phi.rows());
    if (p < 1 || p > n) throw InvalidArgument("sensor count " + std::to_string(p) + " outside [1, " + std::to_string(n) + "]");
    std::vector<int> chosen;
    std::vector<char> used(n, 0);
    SearchResult out;
    for (int round = 0; round < p; ++round) {
        int best_node = -1;
        int best_rank = -1;
        double best_value = -1.0;
        double best_det = 0.0;
        std::vector<int> trial = chosen;
        trial.push_back(0);
        for (int node = 0; node < n; ++node) {
            if (used[node]) continue;
            trial.back() = node;
            const auto e = evaluate(trial, phi, cov, true);
            if (e.singular_covariance) continue;
            const int rank = e.rank.rank;
            const double value = rank == phi.cols() ? e.det : e.rank.pseudo_det;
            if (rank > best_rank || (rank == best_rank && value > best_value)) {
                best_rank = rank;
                best_value = value;
                best_node = node;
                best_det = e.det;
            }
        }
        if (best_node < 0) throw SingularityError("forward placement found no admissible node in round " + std::to_string(round));
        chosen.push_back(best_node);
        used[best_node] = 1;
        if (history) history->push_back(best_det);
        out.det = best_det;
    }
    std::sort(chosen.begin(), chosen.end());
    out.selected = std::move(chosen);
    return out;
}

double normalizer(const Eigen::MatrixXd& phi, const CovarianceCache& cov, int p) {
    if (p < 1) throw InvalidArgument("sensor count must be at least 1");
    const int n = static_cast<int>(phi.rows());
    const SearchResult best =
        combinations(n, p) <= kExhaustiveBudget ? exhaustive_search(phi, cov, p) : forward_greedy(phi, cov, p);
    if (!(best.det > 0.0))
        throw SingularityError("every configuration of " + std::to_string(p) + " sensors is singular; cannot normalize scores");
    return best.det;
}

}  // namespace steersman::info
