
/* scan_pipeline.cpp */

#include "tileloc/scan_pipeline.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "tileloc/errors.hpp"

namespace tileloc {

void HeightBand::validate() const
{
    if (!(this->z_min < this->z_max))
        throw ContractError("height band requires z_min < z_max");
}

OccupancyVector build_occupancy_vector(
    const Stamped<std::vector<Point3>>& cloud,
    const SensorExtrinsic& extrinsic,
    const HeightBand& band,
    const PoseCovariance& pose_cov)
{
    band.validate();

    OccupancyVector vec;
    vec.stamp = cloud.stamp;
    vec.pose_cov = pose_cov;
    vec.points.reserve(cloud.value.size());

    const double c = std::cos(extrinsic.mount.theta);
    const double s = std::sin(extrinsic.mount.theta);

    for (const auto& p : cloud.value) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            continue;
        const double z = p.z + extrinsic.height;
        if (!band.contains(z))
            continue;
        vec.points.push_back(Point2 { extrinsic.mount.x + c * p.x - s * p.y,
                                      extrinsic.mount.y + s * p.x + c * p.y });
    }
    return vec;
}

std::vector<Point3> load_point_cloud(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open point cloud " + path.string());

    std::vector<Point3> cloud;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream fields(line);
        Point3 p;
        if (!(fields >> p.x >> p.y >> p.z) ||
            !std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw FormatError(path.string() + ":" + std::to_string(lineNo) +
                              ": expected three finite numbers");
        cloud.push_back(p);
    }
    return cloud;
}

void save_point_cloud(const std::vector<Point3>& cloud,
                      const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write point cloud " + path.string());
    out.precision(17);
    for (const auto& p : cloud)
        out << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

} /* namespace tileloc */
