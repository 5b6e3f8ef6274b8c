#include "steersman/modal.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "steersman/error.hpp"

namespace steersman::modal {

namespace {

constexpr int kTerms = 12;
using Row12 = Eigen::Matrix<double, 1, kTerms>;
using Mat12 = Eigen::Matrix<double, kTerms, kTerms>;

// Polynomial field w = sum c_k m_k(xi, eta) on the unit square, with
// m = {1, xi, eta, xi^2, xi eta, eta^2, xi^3, xi^2 eta, xi eta^2, eta^3, xi^3 eta, xi eta^3}.
Row12 monomials(double s, double t) {
    Row12 m;
    m << 1, s, t, s * s, s * t, t * t, s * s * s, s * s * t, s * t * t, t * t * t, s * s * s * t, s * t * t * t;
    return m;
}

Row12 d_xi(double s, double t) {
    Row12 m;
    m << 0, 1, 0, 2 * s, t, 0, 3 * s * s, 2 * s * t, t * t, 0, 3 * s * s * t, t * t * t;
    return m;
}

Row12 d_eta(double s, double t) {
    Row12 m;
    m << 0, 0, 1, 0, s, 2 * t, 0, s * s, 2 * s * t, 3 * t * t, s * s * s, 3 * s * t * t;
    return m;
}

Row12 d_xixi(double s, double t) {
    Row12 m;
    m << 0, 0, 0, 2, 0, 0, 6 * s, 2 * t, 0, 0, 6 * s * t, 0;
    return m;
}

Row12 d_etaeta(double s, double t) {
    Row12 m;
    m << 0, 0, 0, 0, 0, 2, 0, 0, 2 * s, 6 * t, 0, 6 * s * t;
    return m;
}

Row12 d_xieta(double s, double t) {
    Row12 m;
    m << 0, 0, 0, 0, 1, 0, 0, 2 * s, 2 * t, 0, 3 * s * s, 3 * t * t;
    return m;
}

// Maps nodal DOFs (w, theta_x = dw/dy, theta_y = -dw/dx) at the four corners
// to polynomial coefficients.
Mat12 coefficient_map(double ax, double by) {
    static constexpr std::array<std::array<double, 2>, 4> corners{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    Mat12 a;
    for (int n = 0; n < 4; ++n) {
        const double s = corners[n][0];
        const double t = corners[n][1];
        a.row(3 * n) = monomials(s, t);
        a.row(3 * n + 1) = d_eta(s, t) / by;
        a.row(3 * n + 2) = -d_xi(s, t) / ax;
    }
    return a.inverse();
}

void check_geometry(double ax, double by) {
    if (!(ax > 0.0) || !(by > 0.0) || !std::isfinite(ax * by)) {
        std::ostringstream msg;
        msg << "singular element geometry: side lengths " << ax << " x " << by;
        throw GeometryError(msg.str());
    }
}

constexpr std::array<double, 4> kGaussPoints{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                             0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                              0.3478548451374538};

}  // namespace

void PlateSpec::validate() const {
    std::vector<std::string> problems;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) problems.push_back(std::string(name) + " must be positive");
    };
    positive(length, "length");
    positive(width, "width");
    positive(thickness, "thickness");
    positive(clamp_depth, "clamp_depth");
    positive(density, "density");
    positive(youngs_modulus, "youngs_modulus");
    if (!(poisson_ratio > 0.0 && poisson_ratio < 0.5)) problems.emplace_back("poisson_ratio must lie in (0, 0.5)");
    if (!(clamp_depth < length)) problems.emplace_back("clamp_depth must be smaller than length");
    if (grid_cols < 2) problems.emplace_back("grid_cols must be at least 2");
    if (grid_rows < 2) problems.emplace_back("grid_rows must be at least 2");
    if (!problems.empty()) {
        std::string msg = "invalid plate spec:";
        for (const auto& p : problems) msg += " " + p + ";";
        throw InvalidArgument(msg);
    }
}

int CandidateGrid::neighbor(int node, Direction dir) const {
    const int c = col_of(node);
    const int r = row_of(node);
    switch (dir) {
        case Direction::Left: return c > 0 ? id(c - 1, r) : kNoNeighbor;
        case Direction::Right: return c + 1 < cols ? id(c + 1, r) : kNoNeighbor;
        case Direction::Up: return r + 1 < rows ? id(c, r + 1) : kNoNeighbor;
        case Direction::Down: return r > 0 ? id(c, r - 1) : kNoNeighbor;
    }
    return kNoNeighbor;
}

std::array<int, 4> CandidateGrid::adjacency(int node) const {
    return {neighbor(node, Direction::Left), neighbor(node, Direction::Right), neighbor(node, Direction::Up),
            neighbor(node, Direction::Down)};
}

CandidateGrid CandidateGrid::regular(int cols, int rows, double x0, double dx, double dy) {
    CandidateGrid grid;
    grid.cols = cols;
    grid.rows = rows;
    grid.node_coords.reserve(static_cast<std::size_t>(cols) * rows);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) grid.node_coords.emplace_back(x0 + c * dx, r * dy, 0.0);
    return grid;
}

int DiscreteModel::translational_free_dof(int candidate) const {
    return free_index.at(static_cast<std::size_t>(candidate_mesh_node.at(candidate)) * kDofsPerNode);
}

Eigen::Matrix<double, 12, 12> element_stiffness(double ax, double by, double thickness, double youngs,
                                                double poisson) {
    check_geometry(ax, by);
    const Mat12 coeff = coefficient_map(ax, by);
    const double rigidity = youngs * thickness * thickness * thickness / (12.0 * (1.0 - poisson * poisson));
    Eigen::Matrix3d d;
    d << 1, poisson, 0, poisson, 1, 0, 0, 0, (1 - poisson) / 2;
    d *= rigidity;

    Mat12 k = Mat12::Zero();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double s = 0.5 * (kGaussPoints[i] + 1);
            const double t = 0.5 * (kGaussPoints[j] + 1);
            Eigen::Matrix<double, 3, kTerms> b;
            b.row(0) = -d_xixi(s, t) / (ax * ax);
            b.row(1) = -d_etaeta(s, t) / (by * by);
            b.row(2) = -2.0 * d_xieta(s, t) / (ax * by);
            const Eigen::Matrix<double, 3, kTerms> bn = b * coeff;
            k += kGaussWeights[i] * kGaussWeights[j] * 0.25 * ax * by * bn.transpose() * d * bn;
        }
    }
    return 0.5 * (k + k.transpose());
}

Eigen::Matrix<double, 12, 12> element_mass(double ax, double by, double thickness, double density) {
    check_geometry(ax, by);
    const Mat12 coeff = coefficient_map(ax, by);
    Mat12 m = Mat12::Zero();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double s = 0.5 * (kGaussPoints[i] + 1);
            const double t = 0.5 * (kGaussPoints[j] + 1);
            const Row12 n = monomials(s, t) * coeff;
            m += kGaussWeights[i] * kGaussWeights[j] * 0.25 * ax * by * n.transpose() * n;
        }
    }
    m *= density * thickness;
    return 0.5 * (m + m.transpose());
}

DiscreteModel build_plate(const PlateSpec& spec) {
    spec.validate();
    DiscreteModel model;
    model.spec = spec;
    model.mesh_cols = spec.grid_cols + 1;
    model.mesh_rows = spec.grid_rows;
    const double dx = spec.placement_length() / spec.grid_cols;
    const double dy = spec.width / (spec.grid_rows - 1);

    const int node_count = model.mesh_cols * model.mesh_rows;
    model.nodes.reserve(node_count);
    for (int r = 0; r < model.mesh_rows; ++r)
        for (int c = 0; c < model.mesh_cols; ++c) model.nodes.emplace_back(spec.clamp_depth + c * dx, r * dy);

    const int dof_count = node_count * kDofsPerNode;
    model.free_index.assign(dof_count, -1);
    int next_free = 0;
    const double clamp_tol = 1e-9 * spec.length;
    for (int n = 0; n < node_count; ++n) {
        const bool clamped = model.nodes[n].x() <= spec.clamp_depth + clamp_tol;
        for (int d = 0; d < kDofsPerNode; ++d) {
            const int g = n * kDofsPerNode + d;
            if (clamped)
                model.clamped_dofs.push_back(g);
            else
                model.free_index[g] = next_free++;
        }
    }

    const auto ke = element_stiffness(dx, dy, spec.thickness, spec.youngs_modulus, spec.poisson_ratio);
    const auto me = element_mass(dx, dy, spec.thickness, spec.density);

    std::vector<Eigen::Triplet<double>> k_trip;
    std::vector<Eigen::Triplet<double>> m_trip;
    const std::size_t elements = static_cast<std::size_t>(model.mesh_cols - 1) * (model.mesh_rows - 1);
    k_trip.reserve(elements * 144);
    m_trip.reserve(elements * 144);
    for (int r = 0; r + 1 < model.mesh_rows; ++r) {
        for (int c = 0; c + 1 < model.mesh_cols; ++c) {
            const std::array<int, 4> en{r * model.mesh_cols + c, r * model.mesh_cols + c + 1,
                                        (r + 1) * model.mesh_cols + c + 1, (r + 1) * model.mesh_cols + c};
            std::array<int, 12> dofs{};
            for (int a = 0; a < 4; ++a)
                for (int d = 0; d < kDofsPerNode; ++d)
                    dofs[a * kDofsPerNode + d] = model.free_index[en[a] * kDofsPerNode + d];
            for (int i = 0; i < 12; ++i) {
                if (dofs[i] < 0) continue;
                for (int j = 0; j < 12; ++j) {
                    if (dofs[j] < 0) continue;
                    k_trip.emplace_back(dofs[i], dofs[j], ke(i, j));
                    m_trip.emplace_back(dofs[i], dofs[j], me(i, j));
                }
            }
        }
    }
    model.stiffness.resize(next_free, next_free);
    model.mass.resize(next_free, next_free);
    model.stiffness.setFromTriplets(k_trip.begin(), k_trip.end());
    model.mass.setFromTriplets(m_trip.begin(), m_trip.end());

    model.grid = CandidateGrid::regular(spec.grid_cols, spec.grid_rows, spec.clamp_depth + dx, dx, dy);
    model.candidate_mesh_node.resize(model.grid.size());
    for (int r = 0; r < spec.grid_rows; ++r)
        for (int c = 0; c < spec.grid_cols; ++c) model.candidate_mesh_node[model.grid.id(c, r)] = r * model.mesh_cols + c + 1;
    return model;
}

int nearest_candidate(const CandidateGrid& grid, double x, double y) {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.size(); ++i) {
        const double ddx = grid.node_coords[i].x() - x;
        const double ddy = grid.node_coords[i].y() - y;
        const double d2 = ddx * ddx + ddy * ddy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

DiscreteModel apply_condition(const DiscreteModel& model, const ConditionSpec& condition) {
    DiscreteModel out = model;
    out.condition_label = condition.label;
    const auto& spec = model.spec;
    const double tol = 1e-9 * spec.length;
    for (const auto& pm : condition.masses) {
        std::ostringstream where;
        where << "point mass " << pm.mass << " kg at (" << pm.x << ", " << pm.y << ") in condition '"
              << condition.label << "'";
        if (!(pm.mass > 0.0) || !std::isfinite(pm.mass)) throw InvalidArgument(where.str() + ": mass must be positive");
        if (pm.x < -tol || pm.x > spec.length + tol || pm.y < -tol || pm.y > spec.width + tol)
            throw GeometryError(where.str() + " lies outside the plate footprint");
        if (pm.x <= spec.clamp_depth + tol) throw GeometryError(where.str() + " lies inside the clamped region");
        const int node = nearest_candidate(model.grid, pm.x, pm.y);
        const int dof = model.translational_free_dof(node);
        out.mass.coeffRef(dof, dof) += pm.mass;
    }
    return out;
}

}  // namespace steersman::modal
