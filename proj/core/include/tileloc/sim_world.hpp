
/* sim_world.hpp */

#ifndef TILELOC_SIM_WORLD_HPP
#define TILELOC_SIM_WORLD_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "tileloc/fusion.hpp"
#include "tileloc/geometry.hpp"
#include "tileloc/grid_map.hpp"
#include "tileloc/scan_pipeline.hpp"

namespace tileloc {

enum class ShapeKind
{
    Rectangle,
    Circle,
};

/*
 * Obstacle is an extruded plan shape: a rotated rectangle (length along
 * the yaw axis, width across) or a circle, occupying [z_lo, z_hi].
 */
struct Obstacle
{
    ShapeKind   kind = ShapeKind::Rectangle;
    Point2      center;
    double      length = 1.0;
    double      width = 1.0;
    double      yaw = 0.0;
    double      radius = 0.5;
    double      z_lo = 0.0;
    double      z_hi = 1.0;
    bool        fixed = false;
    std::string label;

    /* Radius of the circle enclosing the plan shape */
    double bounding_radius() const;
    bool contains(const Point2& p) const;
};

/* Parking stall: length runs along yaw (the car's long axis) */
struct Stall
{
    Point2 center;
    double yaw = 0.0;
    double length = 5.0;
    double width = 2.5;
};

struct Route
{
    std::vector<Point2> waypoints;
    double              speed = 3.0;
    double              lookahead = 2.0;

    double length() const;
};

struct SensorSpec
{
    std::vector<double> elevations_deg;
    double              azimuth_step_deg = 0.25;
    double              max_range = 100.0;
    double              range_sigma = 0.03;
    SensorExtrinsic     extrinsic { Pose2D {}, 1.8 };

    /* 16 planes spread uniformly over [-15, +15] degrees */
    static std::vector<double> default_elevations();
    void validate() const;
};

struct CarModel
{
    double length = 4.2;
    double width = 1.8;
    double length_jitter = 0.3;
    double width_jitter = 0.1;
    double offset_jitter = 0.15;
    double yaw_jitter_deg = 3.0;
    double z_lo = 0.3;
    double z_hi = 1.5;
};

struct Bounds
{
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    bool contains(const Point2& p) const
    { return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y; }
};

struct WorldModel
{
    Bounds                bounds;
    std::vector<Obstacle> obstacles;
    std::vector<Stall>    stalls;
    Route                 route;
    CarModel              car;

    /* Throws ConfigError when the route crosses a fixed obstacle, stalls
     * overlap obstacles, or the route has fewer than two waypoints */
    void validate() const;
};

struct DayScenario
{
    int                   day_index = 0;
    double                fill_ratio = 0.0;
    std::vector<int>      occupied;
    std::vector<Obstacle> cars;
};

/* Mix several integers into one 64-bit seed (splitmix64 chain) */
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

DayScenario generate_day(const WorldModel& world, int day_index,
                         double fill_ratio, std::uint64_t seed);

/*
 * Cast every (elevation, azimuth) beam of the sensor mounted on the
 * vehicle. Hits are the nearest entry into an obstacle volume; ranges get
 * Gaussian noise along the beam. Returned in the sensor frame, with z
 * relative to the sensor origin.
 */
std::vector<Point3> raycast_scan(const WorldModel& world,
                                 const DayScenario& scenario,
                                 const SensorSpec& sensor,
                                 const Pose2D& vehicle_pose,
                                 std::mt19937_64& rng);

/* Simulation rates and noise */
struct SimulationConfig
{
    double odom_rate = 50.0;
    double gps_rate = 1.0;
    double lidar_rate = 10.0;
    double sigma_v = 0.05;
    double sigma_omega = 0.01;
    double sigma_gps = 0.02;

    void validate() const;
};

struct ScanEvent
{
    double        stamp = 0.0;
    /* Index into the truth pose stream */
    std::size_t   pose_index = 0;
    std::uint64_t noise_seed = 0;
};

/*
 * Timeline of one simulated run. truth[k] is the pose at k * dt; motion[k]
 * is the noisy odometry applied between truth[k] and truth[k + 1]. Scans
 * are rendered on demand from their events.
 */
struct Timeline
{
    double                        dt = 0.02;
    std::vector<Stamped<Pose2D>>  truth;
    std::vector<MotionInput>      motion;
    std::vector<Stamped<Point2>>  gps;
    std::vector<ScanEvent>        scans;

    double path_length() const;
};

Timeline simulate_run(const WorldModel& world, const SimulationConfig& config,
                      std::uint64_t seed);

/* Raycast the scan of an event at its truth pose */
std::vector<Point3> render_scan(const WorldModel& world,
                                const DayScenario& scenario,
                                const SensorSpec& sensor,
                                const Timeline& timeline,
                                const ScanEvent& event);

/* Mask of every cell whose square intersects a fixed obstacle footprint */
MapMask mask_from_world(const WorldModel& world, const GridGeometry& geometry);

/* True when the cell square [x0, x0+res] x [y0, y0+res] meets the shape */
bool cell_intersects(const Obstacle& obstacle, double x0, double y0,
                     double resolution);

} /* namespace tileloc */

#endif /* TILELOC_SIM_WORLD_HPP */
