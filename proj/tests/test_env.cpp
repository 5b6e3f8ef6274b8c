#include <map>
#include <random>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "steersman/env.hpp"
#include "steersman/error.hpp"

using namespace steersman;
using namespace steersman::env;
using modal::Direction;

namespace {

std::shared_ptr<const ModelLibrary> small_library(int sensors = 2, int cols = 10, int rows = 4) {
    LibraryOptions o;
    o.plate.grid_cols = cols;
    o.plate.grid_rows = rows;
    o.conditions = {{"healthy", {}}, {"vertex", {{0.2, 0.447, 0.0}}}};
    o.modes = 2;
    o.sensors = sensors;
    static std::map<std::tuple<int, int, int>, std::shared_ptr<const ModelLibrary>> cache;
    auto& slot = cache[{sensors, cols, rows}];
    if (!slot) slot = std::make_shared<const ModelLibrary>(ModelLibrary::build(o));
    return slot;
}

EnvConfig config_for(int sensors, int length = 1000) {
    EnvConfig c;
    c.sensors = sensors;
    c.modes = 2;
    c.episode_length = length;
    return c;
}

}  // namespace

TEST(InitialLayout, SpreadAlongMiddleRow) {
    const auto g = modal::CandidateGrid::regular(86, 17, 0.0, 0.01, 0.01);
    EXPECT_EQ(initial_layout(g, 1), std::vector<int>{g.id(42, 8)});
    EXPECT_EQ(initial_layout(g, 3), (std::vector<int>{g.id(21, 8), g.id(42, 8), g.id(64, 8)}));
    const auto even = modal::CandidateGrid::regular(10, 4, 0.0, 0.01, 0.01);
    EXPECT_EQ(initial_layout(even, 1), std::vector<int>{even.id(4, 1)});
    EXPECT_THROW(initial_layout(even, 11), InvalidArgument);
    EXPECT_THROW(initial_layout(even, 0), InvalidArgument);
}

TEST(SteerEnv, ActionCodeOneMovesFirstSensorRight) {
    SteerEnv env(small_library(), config_for(2));
    env.reset(1, "healthy");
    const auto& g = env.library().grid();
    const int before = env.state().positions[0];
    const auto r = env.step({1});
    EXPECT_FALSE(r.info.null_action);
    EXPECT_EQ(r.state.positions[0], g.neighbor(before, Direction::Right));
    EXPECT_EQ(r.state.positions[1], env.library().grid().id(6, 1));
    EXPECT_EQ(ActionCode::of(1, Direction::Down).code, 7);
    EXPECT_EQ(ActionCode{6}.sensor(), 1);
    EXPECT_EQ(ActionCode{6}.direction(), Direction::Up);
}

TEST(SteerEnv, NullActionAtBoundaryAndOntoOccupiedNode) {
    SteerEnv env(small_library(), config_for(2));
    env.reset(1, "healthy");
    const auto& g = env.library().grid();
    // Drive sensor 0 to the bottom edge, then push once more.
    for (int i = 0; i < 5; ++i) env.step(ActionCode::of(0, Direction::Down));
    EXPECT_EQ(g.row_of(env.state().positions[0]), 0);
    const auto edge = env.state();
    const auto r = env.step(ActionCode::of(0, Direction::Down));
    EXPECT_TRUE(r.info.null_action);
    EXPECT_EQ(r.reward, 0.0);
    EXPECT_EQ(r.state.positions, edge.positions);
    EXPECT_EQ(r.state.step_count, edge.step_count + 1);

    const auto adjacent = env.make_state({g.id(3, 2), g.id(4, 2)}, 0);
    const auto blocked = env.transition(adjacent, ActionCode::of(0, Direction::Right));
    EXPECT_TRUE(blocked.info.null_action);
    EXPECT_EQ(blocked.state.positions, adjacent.positions);
    EXPECT_EQ(blocked.state.occupancy, adjacent.occupancy);
}

TEST(SteerEnv, OccupancyConservedUnderRandomActions) {
    SteerEnv env(small_library(3), config_for(3, 100000));
    env.reset(5);
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> pick(0, env.action_count() - 1);
    for (int t = 0; t < 100000; ++t) {
        const auto r = env.step({pick(rng)});
        const auto& s = r.state;
        ASSERT_EQ(std::count(s.occupancy.begin(), s.occupancy.end(), 1), 3);
        ASSERT_EQ(std::set<int>(s.positions.begin(), s.positions.end()).size(), 3u);
        for (int p : s.positions) ASSERT_EQ(s.occupancy[p], 1);
    }
}

TEST(SteerEnv, TruncatesAtEpisodeLength) {
    SteerEnv env(small_library(), config_for(2));
    env.reset(2);
    StepResult r;
    for (int t = 0; t < 1000; ++t) {
        r = env.step({t % 8});
        ASSERT_EQ(r.truncated, t == 999);
    }
    EXPECT_EQ(r.state.step_count, 1000);
    EXPECT_THROW(env.step({0}), InvalidArgument);
    env.reset();
    EXPECT_EQ(env.state().step_count, 0);
}

TEST(SteerEnv, RejectsOutOfRangeActions) {
    SteerEnv env(small_library(), config_for(2));
    EXPECT_THROW(env.step({8}), InvalidArgument);
    EXPECT_THROW(env.step({-1}), InvalidArgument);
}

TEST(SteerEnv, SeededResetIsDeterministic) {
    SteerEnv a(small_library(), config_for(2));
    SteerEnv b(small_library(), config_for(2));
    std::vector<std::string> la, lb;
    a.reset(77);
    b.reset(77);
    for (int i = 0; i < 30; ++i) {
        la.push_back(a.reset().condition_label);
        lb.push_back(b.reset().condition_label);
    }
    EXPECT_EQ(la, lb);
    EXPECT_EQ(std::set<std::string>(la.begin(), la.end()).size(), 2u);
}

TEST(SteerEnv, TransitionIsPure) {
    SteerEnv env(small_library(), config_for(2));
    env.reset(3, "vertex");
    const auto s = env.state();
    const auto r1 = env.transition(s, {2});
    env.step({0});
    env.step({5});
    const auto r2 = env.transition(s, {2});
    EXPECT_EQ(r1.state, r2.state);
    EXPECT_EQ(r1.reward, r2.reward);
}

TEST(SteerEnv, ExplicitConditionAndScore) {
    SteerEnv env(small_library(), config_for(2));
    const auto& s = env.reset(1, "vertex");
    EXPECT_EQ(s.condition_label, "vertex");
    EXPECT_EQ(s.last_score, env.library().scorer(1).score(s.positions));
    EXPECT_THROW(env.reset(1, "missing"), InvalidArgument);
}

TEST(SteerEnv, RewardsTelescopeToScoreChange) {
    SteerEnv env(small_library(), config_for(2, 500));
    env.reset(4, "healthy");
    const double start = env.state().last_score;
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> pick(0, 7);
    double sum = 0.0;
    for (int t = 0; t < 500; ++t) sum += env.step({pick(rng)}).reward;
    EXPECT_NEAR(sum, env.state().last_score - start, 1e-12);
}

TEST(SteerEnv, ObservationEncodesOccupancyAndCondition) {
    auto c = config_for(2);
    c.observe_condition = true;
    SteerEnv env(small_library(), c);
    env.reset(1, "vertex");
    const auto obs = env.observation();
    ASSERT_EQ(static_cast<int>(obs.size()), env.library().grid().size() + 2);
    double occupied = 0.0;
    for (int i = 0; i < env.library().grid().size(); ++i) occupied += obs[i];
    EXPECT_EQ(occupied, 2.0);
    EXPECT_EQ(obs[obs.size() - 2], 0.0);
    EXPECT_EQ(obs[obs.size() - 1], 1.0);
}
