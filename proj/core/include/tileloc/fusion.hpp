
/* fusion.hpp */

#ifndef TILELOC_FUSION_HPP
#define TILELOC_FUSION_HPP

#include <Eigen/Core>

#include "tileloc/geometry.hpp"

namespace tileloc {

struct FilterState
{
    Pose2D         pose;
    PoseCovariance cov = PoseCovariance::Zero();
    double         stamp = 0.0;
};

/* Forward speed and yaw rate from the odometry generator */
struct MotionInput
{
    double v = 0.0;
    double omega = 0.0;
};

/* Continuous process-noise rates, added as q * dt per prediction */
struct ProcessNoise
{
    double x = 0.02 * 0.02;
    double y = 0.02 * 0.02;
    double theta = 0.005 * 0.005;
};

/* Chi-square gate on the squared Mahalanobis distance of pose updates */
inline constexpr double kDefaultPoseGate = 9.21;

FilterState predict(const FilterState& state, const MotionInput& u,
                    double dt, const ProcessNoise& q = {});

/* Position fix update; throws ContractError if R is not positive definite */
FilterState update_position(const FilterState& state, const Point2& z,
                            const Eigen::Matrix2d& R);

struct PoseUpdate
{
    FilterState state;
    bool        applied = false;
    /* Squared Mahalanobis distance of the innovation */
    double      mahalanobis2 = 0.0;
};

/* Full pose update with wrapped heading innovation and gating */
PoseUpdate update_pose(const FilterState& state, const Pose2D& z,
                       const Eigen::Matrix3d& R,
                       double gate = kDefaultPoseGate);

/* Heading-wrapped innovation z - state.pose */
Eigen::Vector3d pose_innovation(const Pose2D& state, const Pose2D& z);

} /* namespace tileloc */

#endif /* TILELOC_FUSION_HPP */
