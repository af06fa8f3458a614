
/* geometry.cpp */

#include "tileloc/geometry.hpp"

#include <stdexcept>

namespace tileloc {

double wrap_angle(double angle)
{
    constexpr double kPi = std::numbers::pi;
    constexpr double kTwoPi = 2.0 * std::numbers::pi;

    if (angle > -kPi && angle <= kPi)
        return angle;

    double wrapped = std::fmod(angle + kPi, kTwoPi);
    if (wrapped <= 0.0)
        wrapped += kTwoPi;
    wrapped -= kPi;

    /* fmod rounding can land exactly on -pi */
    if (wrapped <= -kPi)
        wrapped = kPi;
    return wrapped;
}

Pose2D compose(const Pose2D& parent, const Pose2D& child)
{
    const double c = std::cos(parent.theta);
    const double s = std::sin(parent.theta);
    return Pose2D { parent.x + c * child.x - s * child.y,
                    parent.y + s * child.x + c * child.y,
                    parent.theta + child.theta };
}

Pose2D inverse(const Pose2D& pose)
{
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    return Pose2D { -c * pose.x - s * pose.y,
                    s * pose.x - c * pose.y,
                    -pose.theta };
}

Pose2D between(const Pose2D& from, const Pose2D& to)
{
    return compose(inverse(from), to);
}

Point2 transform_point(const Pose2D& pose, const Point2& point)
{
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    return Point2 { pose.x + c * point.x - s * point.y,
                    pose.y + s * point.x + c * point.y };
}

Pose2D interpolate(const Stamped<Pose2D>& a, const Stamped<Pose2D>& b,
                   double t)
{
    if (!(a.stamp < b.stamp))
        throw std::out_of_range("interpolate: stamps must be increasing");
    if (t < a.stamp || t > b.stamp)
        throw std::out_of_range("interpolate: time outside [a, b]");

    if (t == a.stamp)
        return a.value;
    if (t == b.stamp)
        return b.value;

    const double ratio = (t - a.stamp) / (b.stamp - a.stamp);
    const double dtheta = wrap_angle(b.value.theta - a.value.theta);
    return Pose2D { a.value.x + ratio * (b.value.x - a.value.x),
                    a.value.y + ratio * (b.value.y - a.value.y),
                    a.value.theta + ratio * dtheta };
}

VehicleFrameError vehicle_frame_error(const Pose2D& truth,
                                      const Pose2D& estimate)
{
    const double dx = estimate.x - truth.x;
    const double dy = estimate.y - truth.y;
    const double c = std::cos(truth.theta);
    const double s = std::sin(truth.theta);
    return VehicleFrameError { -s * dx + c * dy, c * dx + s * dy };
}

Pose2D integrate_unicycle(const Pose2D& pose, double v, double omega,
                          double dt)
{
    const double heading = pose.theta + 0.5 * omega * dt;
    return Pose2D { pose.x + v * std::cos(heading) * dt,
                    pose.y + v * std::sin(heading) * dt,
                    pose.theta + omega * dt };
}

} /* namespace tileloc */
