
/* scan_pipeline.hpp */

#ifndef TILELOC_SCAN_PIPELINE_HPP
#define TILELOC_SCAN_PIPELINE_HPP

#include <filesystem>
#include <vector>

#include "tileloc/geometry.hpp"

namespace tileloc {

/*
 * OccupancyVector holds the height-filtered laser hits projected onto the
 * horizontal plane, in the vehicle frame, together with the pose
 * covariance at scan time. Duplicated XY points are kept.
 */
struct OccupancyVector
{
    double              stamp = 0.0;
    std::vector<Point2> points;
    PoseCovariance      pose_cov = PoseCovariance::Zero();
};

/* Vehicle-frame height interval kept in the occupancy vector */
struct HeightBand
{
    double z_min = 0.5;
    double z_max = 1.7;

    /* Throws ContractError unless z_min < z_max */
    void validate() const;
    bool contains(double z) const { return z >= this->z_min && z <= this->z_max; }
};

/* Sensor mounting: planar pose in the vehicle frame plus height above
 * ground. No roll or pitch. */
struct SensorExtrinsic
{
    Pose2D mount;
    double height = 0.0;
};

OccupancyVector build_occupancy_vector(
    const Stamped<std::vector<Point3>>& cloud,
    const SensorExtrinsic& extrinsic,
    const HeightBand& band,
    const PoseCovariance& pose_cov);

/* Plain-text cloud fixture: one "x y z" triple per line */
std::vector<Point3> load_point_cloud(const std::filesystem::path& path);
void save_point_cloud(const std::vector<Point3>& cloud,
                      const std::filesystem::path& path);

} /* namespace tileloc */

#endif /* TILELOC_SCAN_PIPELINE_HPP */
