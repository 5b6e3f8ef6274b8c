#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace steersman::modal {

/// Geometry, material and discretization of a rectangular cantilever plate.
/// The plate is clamped over `clamp_depth` from the x = 0 end; the remaining
/// `length - clamp_depth` is the placement region, tiled by
/// `grid_cols x grid_rows` candidate nodes.
struct PlateSpec {
    double length = 0.447;
    double width = 0.0762;
    double thickness = 0.003;
    double clamp_depth = 0.024;
    double density = 7850.0;
    double youngs_modulus = 200e9;
    double poisson_ratio = 0.3;
    int grid_cols = 86;
    int grid_rows = 17;

    void validate() const;
    double placement_length() const { return length - clamp_depth; }
};

struct PointMass {
    double mass = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct ConditionSpec {
    std::string label;
    std::vector<PointMass> masses;

    bool healthy() const { return masses.empty(); }
};

enum class Direction : int { Left = 0, Right = 1, Up = 2, Down = 3 };

inline constexpr int kNoNeighbor = -1;

/// Structured candidate grid over the placement region. Node id is
/// `row * cols + col`; columns run along the plate length, rows across it.
struct CandidateGrid {
    int cols = 0;
    int rows = 0;
    std::vector<Eigen::Vector3d> node_coords;

    int size() const { return cols * rows; }
    int id(int col, int row) const { return row * cols + col; }
    int col_of(int node) const { return node % cols; }
    int row_of(int node) const { return node / cols; }

    /// Neighbor of `node` in `dir`, or kNoNeighbor at the grid boundary.
    int neighbor(int node, Direction dir) const;
    std::array<int, 4> adjacency(int node) const;

    static CandidateGrid regular(int cols, int rows, double x0, double dx, double dy);
};

/// Mode shapes sampled at the candidate nodes (out-of-plane displacement),
/// one column per mode, mass-normalized over the full model.
struct ModalBasis {
    Eigen::MatrixXd phi;
    Eigen::VectorXd frequencies;
    std::string condition_label;
    CandidateGrid grid;

    int node_count() const { return static_cast<int>(phi.rows()); }
    int mode_count() const { return static_cast<int>(phi.cols()); }
};

/// Assembled plate-bending model restricted to the free DOFs.
/// DOF layout per mesh node is (w, theta_x, theta_y).
struct DiscreteModel {
    PlateSpec spec;
    Eigen::SparseMatrix<double> stiffness;
    Eigen::SparseMatrix<double> mass;
    /// Mesh nodes (all, including the clamped column), id = row * mesh_cols + col.
    std::vector<Eigen::Vector2d> nodes;
    int mesh_cols = 0;
    int mesh_rows = 0;
    /// Global DOF -> free DOF index, or -1 when clamped.
    std::vector<int> free_index;
    std::vector<int> clamped_dofs;
    CandidateGrid grid;
    /// Candidate node id -> mesh node id.
    std::vector<int> candidate_mesh_node;
    std::string condition_label = "healthy";

    int free_dof_count() const { return static_cast<int>(stiffness.rows()); }
    int translational_free_dof(int candidate) const;
};

inline constexpr int kDofsPerNode = 3;

/// Element stiffness (12x12) of the rectangular non-conforming Kirchhoff
/// element with side lengths `ax` by `by`.
Eigen::Matrix<double, 12, 12> element_stiffness(double ax, double by, double thickness, double youngs,
                                                double poisson);
/// Consistent element mass (12x12), translational inertia only.
Eigen::Matrix<double, 12, 12> element_mass(double ax, double by, double thickness, double density);

DiscreteModel build_plate(const PlateSpec& spec);
DiscreteModel apply_condition(const DiscreteModel& model, const ConditionSpec& condition);

/// Candidate node nearest to (x, y); ties go to the lowest id.
int nearest_candidate(const CandidateGrid& grid, double x, double y);

struct EigenSolveOptions {
    /// Models up to this many free DOFs seed the iteration with a dense solve.
    int dense_limit = 1500;
    int max_iterations = 300;
    /// Relative eigenvalue change treated as settled.
    double tolerance = 1e-13;
    double residual_target = 1e-11;
    /// Residual above which a stalled iteration is reported as non-converged.
    double residual_limit = 1e-7;
};

ModalBasis solve_modes(const DiscreteModel& model, int mode_count, const EigenSolveOptions& options = {});

/// Full free-DOF eigenvectors, used where residual checks need them.
struct EigenPairs {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd vectors;
    int iterations = 0;
};
/// ||K v - lambda M v|| / ||K v||, accumulated in extended precision.
double relative_residual(const Eigen::SparseMatrix<double>& k, const Eigen::SparseMatrix<double>& m,
                         const Eigen::VectorXd& v, double lambda);

EigenPairs solve_eigenpairs(const DiscreteModel& model, int mode_count, const EigenSolveOptions& options = {});

Eigen::MatrixXd mac(const Eigen::MatrixXd& phi_a, const Eigen::MatrixXd& phi_b);

inline constexpr int kBasisFormatVersion = 1;

void save_basis(const std::filesystem::path& path, const ModalBasis& basis);
ModalBasis load_basis(const std::filesystem::path& path);

}  // namespace steersman::modal
