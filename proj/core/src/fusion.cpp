
/* fusion.cpp */

#include "tileloc/fusion.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "tileloc/errors.hpp"

namespace tileloc {

namespace {

PoseCovariance symmetrize(const PoseCovariance& cov)
{
    return 0.5 * (cov + cov.transpose());
}

template <int N>
bool is_positive_definite(const Eigen::Matrix<double, N, N>& m)
{
    if (!m.allFinite() || !m.isApprox(m.transpose(), 1e-9))
        return false;
    Eigen::LLT<Eigen::Matrix<double, N, N>> llt(m);
    return llt.info() == Eigen::Success;
}

} /* namespace */

FilterState predict(const FilterState& state, const MotionInput& u,
                    double dt, const ProcessNoise& q)
{
    if (!(dt > 0.0))
        throw ContractError("predict: dt must be positive");

    const double heading = state.pose.theta + 0.5 * u.omega * dt;
    const double c = std::cos(heading);
    const double s = std::sin(heading);

    Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
    F(0, 2) = -u.v * s * dt;
    F(1, 2) = u.v * c * dt;

    const Eigen::Vector3d qdiag(q.x, q.y, q.theta);

    FilterState next;
    next.pose = integrate_unicycle(state.pose, u.v, u.omega, dt);
    next.cov = symmetrize(F * state.cov * F.transpose() +
                          Eigen::Matrix3d(qdiag.asDiagonal()) * dt);
    next.stamp = state.stamp + dt;
    return next;
}

FilterState update_position(const FilterState& state, const Point2& z,
                            const Eigen::Matrix2d& R)
{
    if (!is_positive_definite<2>(R))
        throw ContractError("update_position: R must be positive definite");

    Eigen::Matrix<double, 2, 3> H = Eigen::Matrix<double, 2, 3>::Zero();
    H(0, 0) = 1.0;
    H(1, 1) = 1.0;

    const Eigen::Vector2d innovation(z.x - state.pose.x, z.y - state.pose.y);
    const Eigen::Matrix2d S = H * state.cov * H.transpose() + R;
    const Eigen::Matrix<double, 3, 2> K =
        state.cov * H.transpose() * S.inverse();

    const Eigen::Vector3d correction = K * innovation;
    const Eigen::Matrix3d IKH = Eigen::Matrix3d::Identity() - K * H;

    FilterState next;
    next.pose = Pose2D { state.pose.x + correction(0),
                         state.pose.y + correction(1),
                         state.pose.theta + correction(2) };
    /* Joseph form keeps the covariance PSD */
    next.cov = symmetrize(IKH * state.cov * IKH.transpose() +
                          K * R * K.transpose());
    next.stamp = state.stamp;
    return next;
}

Eigen::Vector3d pose_innovation(const Pose2D& state, const Pose2D& z)
{
    return Eigen::Vector3d(z.x - state.x, z.y - state.y,
                           wrap_angle(z.theta - state.theta));
}

PoseUpdate update_pose(const FilterState& state, const Pose2D& z,
                       const Eigen::Matrix3d& R, double gate)
{
    if (!is_positive_definite<3>(R))
        throw ContractError("update_pose: R must be positive definite");

    const Eigen::Vector3d innovation = pose_innovation(state.pose, z);
    const Eigen::Matrix3d S = state.cov + R;
    const Eigen::Matrix3d Sinv = S.inverse();

    PoseUpdate result;
    result.mahalanobis2 = innovation.dot(Sinv * innovation);
    if (!(result.mahalanobis2 <= gate)) {
        result.state = state;
        result.applied = false;
        return result;
    }

    const Eigen::Matrix3d K = state.cov * Sinv;
    const Eigen::Vector3d correction = K * innovation;
    const Eigen::Matrix3d IK = Eigen::Matrix3d::Identity() - K;

    result.state.pose = Pose2D { state.pose.x + correction(0),
                                 state.pose.y + correction(1),
                                 state.pose.theta + correction(2) };
    result.state.cov = symmetrize(IK * state.cov * IK.transpose() +
                                  K * R * K.transpose());
    result.state.stamp = state.stamp;
    result.applied = true;
    return result;
}

} /* namespace tileloc */
