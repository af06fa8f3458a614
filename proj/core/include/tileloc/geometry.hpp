
/* geometry.hpp */

#ifndef TILELOC_GEOMETRY_HPP
#define TILELOC_GEOMETRY_HPP

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace tileloc {

/* Wrap an angle into (-pi, pi] */
double wrap_angle(double angle);

/*
 * Pose2D holds a planar rigid-body pose (x, y in meters, theta in radians).
 * Heading is kept wrapped into (-pi, pi] by every operation in this module.
 */
struct Pose2D
{
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    constexpr Pose2D() = default;
    Pose2D(double x_, double y_, double theta_) :
        x(x_), y(y_), theta(wrap_angle(theta_)) { }

    static Pose2D identity() { return Pose2D{}; }

    friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/* 3x3 covariance over (x, y, theta) */
using PoseCovariance = Eigen::Matrix3d;

struct Point2
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct Point3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Point3&, const Point3&) = default;
};

/* Value paired with a time stamp in seconds (simulation clock) */
template <typename T>
struct Stamped
{
    double stamp = 0.0;
    T value {};
};

/* Pose of `child` (expressed in `parent`) in the parent's own parent frame */
Pose2D compose(const Pose2D& parent, const Pose2D& child);

Pose2D inverse(const Pose2D& pose);

/* Relative pose of `to` seen from `from`, i.e. compose(inverse(from), to) */
Pose2D between(const Pose2D& from, const Pose2D& to);

/* Map a point given in the pose's frame into the parent frame */
Point2 transform_point(const Pose2D& pose, const Point2& point);

/*
 * Interpolate linearly in x, y and along the shortest arc in theta.
 * Throws std::out_of_range when t lies outside [a.stamp, b.stamp] or
 * the stamps are not strictly increasing.
 */
Pose2D interpolate(const Stamped<Pose2D>& a, const Stamped<Pose2D>& b,
                   double t);

/* Position error of `estimate` decomposed in the heading frame of `truth` */
struct VehicleFrameError
{
    double lateral = 0.0;
    double longitudinal = 0.0;
};

VehicleFrameError vehicle_frame_error(const Pose2D& truth,
                                      const Pose2D& estimate);

/*
 * One step of the unicycle model, advancing along the mid-step heading.
 * Shared by the simulator (ground-truth integration) and the filter
 * prediction so that noiseless odometry reproduces the truth exactly.
 */
Pose2D integrate_unicycle(const Pose2D& pose, double v, double omega,
                          double dt);

} /* namespace tileloc */

#endif /* TILELOC_GEOMETRY_HPP */
