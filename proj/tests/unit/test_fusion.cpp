
/* test_fusion.cpp */

#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "tileloc/errors.hpp"
#include "tileloc/fusion.hpp"
#include "oracles.hpp"

using namespace tileloc;

namespace {

constexpr double kPi = std::numbers::pi;

FilterState start(Pose2D pose = {}, double var = 1.0)
{
    FilterState s;
    s.pose = pose;
    s.cov = PoseCovariance::Identity() * var;
    return s;
}

double min_eigenvalue(const PoseCovariance& m)
{
    const Eigen::SelfAdjointEigenSolver<PoseCovariance> es(m);
    return es.eigenvalues().minCoeff();
}

} /* namespace */

TEST(Fusion, PredictStraight)
{
    const FilterState s = predict(start(), { 1.0, 0.0 }, 1.0);
    EXPECT_NEAR(s.pose.x, 1.0, 1e-12);
    EXPECT_NEAR(s.pose.y, 0.0, 1e-12);
    EXPECT_NEAR(s.stamp, 1.0, 1e-12);
}

TEST(Fusion, PredictTurnInPlace)
{
    const FilterState s = predict(start(), { 0.0, kPi }, 1.0);
    EXPECT_NEAR(std::abs(wrap_angle(s.pose.theta - kPi)), 0.0, 1e-12);
    EXPECT_NEAR(s.pose.x, 0.0, 1e-12);
    EXPECT_NEAR(s.pose.y, 0.0, 1e-12);
}

TEST(Fusion, PredictArcMatchesClosedForm)
{
    FilterState s = start();
    for (int k = 0; k < 50; ++k)
        s = predict(s, { 1.0, kPi / 2 }, 0.02);
    const Pose2D want = oracle::arc(1.0, kPi / 2, 1.0);
    EXPECT_NEAR(want.x, 2.0 / kPi, 1e-12);
    EXPECT_NEAR(want.y, 2.0 / kPi, 1e-12);
    const double scale = std::hypot(want.x, want.y);
    EXPECT_LT(std::hypot(s.pose.x - want.x, s.pose.y - want.y), 0.01 * scale);
}

TEST(Fusion, PredictGrowsCovariance)
{
    const FilterState s = predict(start({}, 0.0), { 1.0, 0.1 }, 0.1);
    EXPECT_GT(s.cov.trace(), 0.0);
    EXPECT_GE(min_eigenvalue(s.cov), -1e-15);
}

TEST(Fusion, PositionZeroInnovation)
{
    const FilterState prior = start({ 2, 3, 0.4 }, 0.5);
    const FilterState post = update_position(prior, { 2, 3 }, Eigen::Matrix2d::Identity() * 0.1);
    EXPECT_NEAR(post.pose.x, 2.0, 1e-12);
    EXPECT_NEAR(post.pose.y, 3.0, 1e-12);
    EXPECT_LT(post.cov(0, 0), prior.cov(0, 0));
    EXPECT_LT(post.cov(1, 1), prior.cov(1, 1));
}

TEST(Fusion, PositionUninformative)
{
    const FilterState prior = start({ 2, 3, 0.4 }, 0.5);
    const FilterState post = update_position(prior, { 50, -50 }, Eigen::Matrix2d::Identity() * 1e12);
    EXPECT_NEAR(post.pose.x, 2.0, 1e-9);
    EXPECT_NEAR(post.pose.y, 3.0, 1e-9);
}

TEST(Fusion, PositionScalarGainHalf)
{
    const FilterState post = update_position(start(), { 1, 0 }, Eigen::Matrix2d::Identity());
    /* One-dimensional gain P / (P + R) = 1 / 2 */
    EXPECT_NEAR(post.pose.x, 0.5, 1e-12);
    EXPECT_NEAR(post.pose.y, 0.0, 1e-12);
    EXPECT_NEAR(post.cov(0, 0), 0.5, 1e-12);
}

TEST(Fusion, PositionRejectsBadNoise)
{
    EXPECT_THROW(update_position(start(), { 0, 0 }, Eigen::Matrix2d::Zero()), ContractError);
}

TEST(Fusion, PoseZeroInnovation)
{
    const FilterState prior = start({ 1, 1, 1 }, 0.1);
    const PoseUpdate u = update_pose(prior, prior.pose, Eigen::Matrix3d::Identity() * 0.01);
    EXPECT_TRUE(u.applied);
    EXPECT_NEAR(u.state.pose.x, 1.0, 1e-12);
    EXPECT_NEAR(u.state.pose.theta, 1.0, 1e-12);
    EXPECT_NEAR(u.mahalanobis2, 0.0, 1e-12);
}

TEST(Fusion, GatedOutlierLeavesStateIdentical)
{
    const FilterState prior = start({ 1, 1, 1 }, 0.1);
    const PoseUpdate u = update_pose(prior, { 101, 1, 1 }, Eigen::Matrix3d::Identity() * 0.01, 9.0);
    EXPECT_FALSE(u.applied);
    EXPECT_EQ(u.state.pose, prior.pose);
    EXPECT_EQ(u.state.cov, prior.cov);
    EXPECT_GT(u.mahalanobis2, 9.0);
}

TEST(Fusion, HeadingInnovationWraps)
{
    const Eigen::Vector3d nu = pose_innovation({ 0, 0, 3.1 }, { 0, 0, -3.1 });
    EXPECT_NEAR(std::abs(nu(2)), 2 * kPi - 6.2, 1e-12);
    const FilterState prior = start({ 0, 0, 3.1 }, 0.01);
    const PoseUpdate u = update_pose(prior, { 0, 0, -3.1 }, Eigen::Matrix3d::Identity() * 0.01);
    EXPECT_TRUE(u.applied);
    EXPECT_NEAR(std::abs(wrap_angle(u.state.pose.theta - kPi)), 0.0, 1e-9);
}

TEST(Fusion, CovarianceStaysPsdUnderRandomSteps)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 2);
    FilterState s = start({}, 0.1);
    for (int k = 0; k < 20000; ++k) {
        switch (pick(rng)) {
            case 0: s = predict(s, { 3 * u(rng), u(rng) }, 0.02); break;
            case 1: s = update_position(s, { s.pose.x + u(rng), s.pose.y + u(rng) },
                                        Eigen::Matrix2d::Identity() * 1e-4); break;
            default: s = update_pose(s, { s.pose.x + 0.1 * u(rng), s.pose.y, s.pose.theta },
                                     Eigen::Matrix3d::Identity() * 1e-6).state; break;
        }
        ASSERT_LE((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        ASSERT_GE(min_eigenvalue(s.cov), -1e-12) << k;
    }
}
