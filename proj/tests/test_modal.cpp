#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "steersman/error.hpp"
#include "steersman/modal.hpp"

using namespace steersman;
using namespace steersman::modal;

namespace {

PlateSpec grid_spec(int cols, int rows) {
    PlateSpec s;
    s.grid_cols = cols;
    s.grid_rows = rows;
    return s;
}

ConditionSpec severity1() { return {"severity1", {{0.7, 0.3355, 0.0}}}; }
ConditionSpec severity2() { return {"severity2", {{0.7, 0.3355, 0.0}, {0.7, 0.447, 0.0}}}; }
ConditionSpec vertex() { return {"vertex", {{0.2, 0.447, 0.0}}}; }

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("steersman_test_" + name);
}

}  // namespace

TEST(PlateSpec, RejectsInvalidGeometryWithAllProblems) {
    PlateSpec s;
    s.thickness = -1.0;
    s.poisson_ratio = 0.6;
    s.grid_rows = 1;
    try {
        s.validate();
        FAIL() << "expected InvalidArgument";
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("thickness"), std::string::npos);
        EXPECT_NE(msg.find("poisson"), std::string::npos);
        EXPECT_NE(msg.find("grid_rows"), std::string::npos);
    }
    PlateSpec clamp;
    clamp.clamp_depth = clamp.length;
    EXPECT_THROW(clamp.validate(), InvalidArgument);
}

TEST(CandidateGrid, FullScaleHas1462Candidates) {
    const auto model = build_plate(PlateSpec{});
    EXPECT_EQ(model.grid.size(), 1462);
    EXPECT_EQ(model.grid.cols, 86);
    EXPECT_EQ(model.grid.rows, 17);
}

TEST(CandidateGrid, AdjacencyIsSymmetricAndOutsideClamp) {
    const PlateSpec spec = grid_spec(6, 4);
    const auto model = build_plate(spec);
    const auto& g = model.grid;
    for (int node = 0; node < g.size(); ++node) {
        EXPECT_GT(g.node_coords[node].x(), spec.clamp_depth);
        int count = 0;
        for (int d = 0; d < 4; ++d) {
            const int nb = g.neighbor(node, static_cast<Direction>(d));
            if (nb == kNoNeighbor) continue;
            ++count;
            const Direction back = static_cast<Direction>(d ^ 1);
            EXPECT_EQ(g.neighbor(nb, back), node);
        }
        EXPECT_LE(count, 4);
    }
    EXPECT_EQ(g.neighbor(g.id(0, 0), Direction::Left), kNoNeighbor);
    EXPECT_EQ(g.neighbor(g.id(5, 3), Direction::Right), kNoNeighbor);
    EXPECT_EQ(g.neighbor(g.id(2, 3), Direction::Up), kNoNeighbor);
    EXPECT_EQ(g.neighbor(g.id(2, 0), Direction::Down), kNoNeighbor);
    EXPECT_EQ(g.neighbor(g.id(2, 1), Direction::Right), g.id(3, 1));
    EXPECT_EQ(g.neighbor(g.id(2, 1), Direction::Up), g.id(2, 2));
}

TEST(Element, StiffnessSymmetricWithThreeRigidModes) {
    const auto k = element_stiffness(0.01, 0.02, 0.003, 200e9, 0.3);
    EXPECT_EQ((k - k.transpose()).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 12, 12>> es(k);
    const double top = es.eigenvalues().maxCoeff();
    int zero = 0;
    for (int i = 0; i < 12; ++i) {
        EXPECT_GT(es.eigenvalues()(i), -1e-10 * top);
        if (std::abs(es.eigenvalues()(i)) < 1e-10 * top) ++zero;
    }
    EXPECT_EQ(zero, 3);
}

TEST(Element, MassCarriesElementMass) {
    const double a = 0.01, b = 0.02, t = 0.003, rho = 7850.0;
    const auto m = element_mass(a, b, t, rho);
    // A unit translation of all four nodes: w = 1, rotations 0.
    Eigen::Matrix<double, 12, 1> u = Eigen::Matrix<double, 12, 1>::Zero();
    for (int n = 0; n < 4; ++n) u(3 * n) = 1.0;
    EXPECT_NEAR(u.dot(m * u), rho * t * a * b, 1e-12 * rho * t * a * b);
}

TEST(BuildPlate, StiffnessSymmetricAndThicknessCubeLaw) {
    PlateSpec s = grid_spec(2, 2);
    const auto thin = build_plate(s);
    const Eigen::SparseMatrix<double> diff = thin.stiffness - Eigen::SparseMatrix<double>(thin.stiffness.transpose());
    EXPECT_EQ(diff.norm(), 0.0);
    s.thickness *= 2.0;
    const auto thick = build_plate(s);
    const Eigen::MatrixXd kt = Eigen::MatrixXd(thin.stiffness);
    const Eigen::MatrixXd kk = Eigen::MatrixXd(thick.stiffness);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < kt.size(); ++i)
        if (kt.data()[i] != 0.0) worst = std::max(worst, std::abs(kk.data()[i] / kt.data()[i] - 8.0));
    EXPECT_LT(worst, 1e-9);
}

TEST(ApplyCondition, HealthyLeavesModelUnchanged) {
    const auto base = build_plate(grid_spec(8, 3));
    const auto same = apply_condition(base, {"healthy", {}});
    EXPECT_EQ(Eigen::MatrixXd(same.mass - base.mass).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(Eigen::MatrixXd(same.stiffness - base.stiffness).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ApplyCondition, RejectsOutOfFootprintAndNonPositiveMass) {
    const auto base = build_plate(grid_spec(8, 3));
    EXPECT_THROW(apply_condition(base, {"bad", {{0.7, 0.5, 0.0}}}), GeometryError);
    EXPECT_THROW(apply_condition(base, {"bad", {{0.7, 0.01, 0.0}}}), GeometryError);
    EXPECT_THROW(apply_condition(base, {"bad", {{-1.0, 0.3, 0.0}}}), InvalidArgument);
}

TEST(SolveModes, MassNormalizedSortedAndSmallResidual) {
    const auto model = build_plate(grid_spec(15, 5));
    const auto pairs = solve_eigenpairs(model, 4);
    for (int j = 0; j < 4; ++j) {
        const Eigen::VectorXd v = pairs.vectors.col(j);
        EXPECT_NEAR(v.dot(model.mass * v), 1.0, 1e-10);
        EXPECT_LT(relative_residual(model.stiffness, model.mass, v, pairs.eigenvalues(j)), 1e-8);
        if (j > 0) {
            EXPECT_GT(pairs.eigenvalues(j), pairs.eigenvalues(j - 1));
        }
    }
    const auto basis = solve_modes(model, 4);
    EXPECT_TRUE(basis.phi.allFinite());
    for (int j = 0; j < 4; ++j) EXPECT_GT(basis.frequencies(j), 0.0);
}

TEST(SolveModes, FirstBendingMatchesBeamOracle) {
    const PlateSpec spec;
    const auto basis = solve_modes(build_plate(grid_spec(43, 9)), 1);
    const double f1 = oracle::cantilever_f1(spec.placement_length(), spec.width, spec.thickness, spec.density,
                                            spec.youngs_modulus);
    EXPECT_NEAR(basis.frequencies(0) / f1, 1.0, 0.05);
}

TEST(SolveModes, MassLoadingNeverRaisesFrequencies) {
    const auto base = build_plate(grid_spec(22, 5));
    const auto healthy = solve_modes(base, 3);
    const auto s1 = solve_modes(apply_condition(base, severity1()), 3);
    const auto s2 = solve_modes(apply_condition(base, severity2()), 3);
    const auto v = solve_modes(apply_condition(base, vertex()), 3);
    for (int j = 0; j < 3; ++j) {
        EXPECT_LE(s1.frequencies(j), healthy.frequencies(j));
        EXPECT_LE(s2.frequencies(j), s1.frequencies(j));
        EXPECT_LE(v.frequencies(j), healthy.frequencies(j));
    }
}

TEST(Mac, IdentityAndScaleInvariance) {
    const auto basis = solve_modes(build_plate(grid_spec(10, 4)), 3);
    const Eigen::MatrixXd self = mac(basis.phi, basis.phi);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(self(j, j), 1.0, 1e-12);
    Eigen::MatrixXd scaled = basis.phi;
    scaled.col(1) *= -3.0;
    EXPECT_NEAR((mac(basis.phi, scaled) - self).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_THROW(mac(basis.phi, basis.phi.topRows(5)), InvalidArgument);
}

TEST(Mac, CoarseAgreesWithFineAtSharedNodes) {
    const auto coarse = solve_modes(build_plate(grid_spec(43, 9)), 3);
    const auto fine = solve_modes(build_plate(grid_spec(86, 17)), 3);
    // Match nodes by coordinates.
    std::vector<int> shared_coarse;
    std::vector<int> shared_fine;
    for (int i = 0; i < coarse.grid.size(); ++i)
        for (int j = 0; j < fine.grid.size(); ++j)
            if ((coarse.grid.node_coords[i] - fine.grid.node_coords[j]).norm() < 1e-9) {
                shared_coarse.push_back(i);
                shared_fine.push_back(j);
            }
    ASSERT_GE(shared_coarse.size(), 100u);
    Eigen::MatrixXd a(shared_coarse.size(), 3), b(shared_fine.size(), 3);
    for (std::size_t k = 0; k < shared_coarse.size(); ++k) {
        a.row(k) = coarse.phi.row(shared_coarse[k]);
        b.row(k) = fine.phi.row(shared_fine[k]);
    }
    const Eigen::MatrixXd m = mac(a, b);
    for (int j = 0; j < 3; ++j) EXPECT_GE(m(j, j), 0.95);
}

TEST(BasisIo, RoundTrip) {
    const auto basis = solve_modes(build_plate(grid_spec(6, 3)), 2);
    const auto path = temp_file("basis.json");
    save_basis(path, basis);
    const auto back = load_basis(path);
    EXPECT_EQ(back.condition_label, basis.condition_label);
    EXPECT_EQ(back.phi, basis.phi);
    EXPECT_EQ(back.frequencies, basis.frequencies);
    EXPECT_EQ(back.grid.cols, basis.grid.cols);
    EXPECT_EQ(back.grid.rows, basis.grid.rows);
    std::filesystem::remove(path);
}

TEST(BasisIo, RejectsWrongVersionAndWrongNodeCount) {
    const auto basis = solve_modes(build_plate(grid_spec(6, 3)), 2);
    const auto path = temp_file("basis_bad.json");
    save_basis(path, basis);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    auto replace = [&](const std::string& from, const std::string& to) {
        std::string out = text;
        const auto pos = out.find(from);
        EXPECT_NE(pos, std::string::npos) << from;
        out.replace(pos, from.size(), to);
        std::ofstream(path) << out;
    };
    replace("\"version\": 1", "\"version\": 7");
    try {
        load_basis(path);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("version 1"), std::string::npos) << e.what();
    }
    replace("\"cols\": 6", "\"cols\": 7");
    EXPECT_THROW(load_basis(path), FormatError);
    std::filesystem::remove(path);
}
