
/* sim_world.cpp */

#include "tileloc/sim_world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "tileloc/errors.hpp"

namespace tileloc {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

/* Plan-view interval [enter, exit] of a ray (unit direction) in a shape */
struct PlanInterval
{
    double enter = 0.0;
    double exit = 0.0;
};

bool ray_rectangle(const Obstacle& rect, const Point2& origin,
                   const Point2& dir, PlanInterval& out)
{
    const double c = std::cos(rect.yaw);
    const double s = std::sin(rect.yaw);
    const double ox = c * (origin.x - rect.center.x) + s * (origin.y - rect.center.y);
    const double oy = -s * (origin.x - rect.center.x) + c * (origin.y - rect.center.y);
    const double dx = c * dir.x + s * dir.y;
    const double dy = -s * dir.x + c * dir.y;
    const double hx = 0.5 * rect.length;
    const double hy = 0.5 * rect.width;

    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    const auto slab = [&](double o, double d, double h) {
        if (std::abs(d) < 1e-15)
            return std::abs(o) <= h;
        double t1 = (-h - o) / d;
        double t2 = (h - o) / d;
        if (t1 > t2)
            std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
        return tmin <= tmax;
    };
    if (!slab(ox, dx, hx) || !slab(oy, dy, hy))
        return false;
    /* Behind the sensor, or the sensor sits inside the footprint */
    if (tmax < 0.0 || tmin < 0.0)
        return false;
    out.enter = tmin;
    out.exit = tmax;
    return true;
}

bool ray_circle(const Obstacle& circle, const Point2& origin,
                const Point2& dir, PlanInterval& out)
{
    const double ox = origin.x - circle.center.x;
    const double oy = origin.y - circle.center.y;
    const double b = ox * dir.x + oy * dir.y;
    const double cc = ox * ox + oy * oy - circle.radius * circle.radius;
    const double disc = b * b - cc;
    if (disc < 0.0)
        return false;
    const double root = std::sqrt(disc);
    const double t1 = -b - root;
    const double t2 = -b + root;
    if (t2 < 0.0 || t1 < 0.0)
        return false;
    out.enter = t1;
    out.exit = t2;
    return true;
}

/* Corners of a rectangle obstacle in world coordinates */
std::array<Point2, 4> corners(const Obstacle& rect)
{
    const double c = std::cos(rect.yaw);
    const double s = std::sin(rect.yaw);
    const double hx = 0.5 * rect.length;
    const double hy = 0.5 * rect.width;
    std::array<Point2, 4> out;
    const double signs[4][2] = { { 1, 1 }, { -1, 1 }, { -1, -1 }, { 1, -1 } };
    for (int k = 0; k < 4; ++k) {
        const double lx = signs[k][0] * hx;
        const double ly = signs[k][1] * hy;
        out[k] = Point2 { rect.center.x + c * lx - s * ly,
                          rect.center.y + s * lx + c * ly };
    }
    return out;
}

/* Separating-axis test between two convex polygons, strict overlap */
bool polygons_overlap(std::span<const Point2> a, std::span<const Point2> b)
{
    const auto separated = [](std::span<const Point2> p,
                              std::span<const Point2> q) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            const Point2& p0 = p[k];
            const Point2& p1 = p[(k + 1) % p.size()];
            const double nx = -(p1.y - p0.y);
            const double ny = p1.x - p0.x;
            double pmin = std::numeric_limits<double>::infinity();
            double pmax = -pmin;
            double qmin = pmin;
            double qmax = -pmin;
            for (const auto& v : p) {
                const double d = nx * v.x + ny * v.y;
                pmin = std::min(pmin, d);
                pmax = std::max(pmax, d);
            }
            for (const auto& v : q) {
                const double d = nx * v.x + ny * v.y;
                qmin = std::min(qmin, d);
                qmax = std::max(qmax, d);
            }
            if (pmax <= qmin || qmax <= pmin)
                return true;
        }
        return false;
    };
    return !separated(a, b) && !separated(b, a);
}

/* Squared distance from a point to a convex polygon (0 when inside) */
double distance2_to_polygon(std::span<const Point2> poly, const Point2& p)
{
    bool inside = true;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Point2& a = poly[k];
        const Point2& b = poly[(k + 1) % poly.size()];
        const double ex = b.x - a.x;
        const double ey = b.y - a.y;
        if (ex * (p.y - a.y) - ey * (p.x - a.x) < 0.0)
            inside = false;
        const double len2 = ex * ex + ey * ey;
        double t = len2 > 0.0 ? ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double dx = a.x + t * ex - p.x;
        const double dy = a.y + t * ey - p.y;
        best = std::min(best, dx * dx + dy * dy);
    }
    return inside ? 0.0 : best;
}

std::vector<Point2> footprint_polygon(const Obstacle& o)
{
    const auto c = corners(o);
    return std::vector<Point2>(c.begin(), c.end());
}

bool shapes_overlap(const Obstacle& a, const Obstacle& b)
{
    if (a.kind == ShapeKind::Circle && b.kind == ShapeKind::Circle) {
        const double dx = a.center.x - b.center.x;
        const double dy = a.center.y - b.center.y;
        const double r = a.radius + b.radius;
        return dx * dx + dy * dy < r * r;
    }
    if (a.kind == ShapeKind::Circle)
        return shapes_overlap(b, a);
    const auto pa = footprint_polygon(a);
    if (b.kind == ShapeKind::Circle)
        return distance2_to_polygon(pa, b.center) < b.radius * b.radius;
    return polygons_overlap(pa, footprint_polygon(b));
}

Obstacle stall_shape(const Stall& stall)
{
    Obstacle shape;
    shape.kind = ShapeKind::Rectangle;
    shape.center = stall.center;
    shape.length = stall.length;
    shape.width = stall.width;
    shape.yaw = stall.yaw;
    return shape;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/* Point at arc length s along a polyline */
Point2 point_at(const std::vector<Point2>& poly,
                const std::vector<double>& cumulative, double s)
{
    if (s <= 0.0)
        return poly.front();
    if (s >= cumulative.back())
        return poly.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - cumulative.begin()) - 1;
    const double segment = cumulative[k + 1] - cumulative[k];
    const double t = segment > 0.0 ? (s - cumulative[k]) / segment : 0.0;
    return Point2 { poly[k].x + t * (poly[k + 1].x - poly[k].x),
                    poly[k].y + t * (poly[k + 1].y - poly[k].y) };
}

/* Closest arc length to p within [s_lo, s_hi] */
double project_window(const std::vector<Point2>& poly,
                      const std::vector<double>& cumulative,
                      const Point2& p, double s_lo, double s_hi)
{
    s_lo = std::max(s_lo, 0.0);
    s_hi = std::min(s_hi, cumulative.back());
    double bestS = s_lo;
    double bestD = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
        const double a = cumulative[k];
        const double b = cumulative[k + 1];
        if (b < s_lo || a > s_hi || b <= a)
            continue;
        const double ex = poly[k + 1].x - poly[k].x;
        const double ey = poly[k + 1].y - poly[k].y;
        double t = ((p.x - poly[k].x) * ex + (p.y - poly[k].y) * ey) /
                   (ex * ex + ey * ey);
        const double tlo = (std::max(a, s_lo) - a) / (b - a);
        const double thi = (std::min(b, s_hi) - a) / (b - a);
        t = std::clamp(t, tlo, thi);
        const double dx = poly[k].x + t * ex - p.x;
        const double dy = poly[k].y + t * ey - p.y;
        const double d = dx * dx + dy * dy;
        if (d < bestD) {
            bestD = d;
            bestS = a + t * (b - a);
        }
    }
    return bestS;
}

} /* namespace */

/*
 * Obstacle
 */

double Obstacle::bounding_radius() const
{
    if (this->kind == ShapeKind::Circle)
        return this->radius;
    return 0.5 * std::hypot(this->length, this->width);
}

bool Obstacle::contains(const Point2& p) const
{
    if (this->kind == ShapeKind::Circle) {
        const double dx = p.x - this->center.x;
        const double dy = p.y - this->center.y;
        return dx * dx + dy * dy <= this->radius * this->radius;
    }
    const double c = std::cos(this->yaw);
    const double s = std::sin(this->yaw);
    const double lx = c * (p.x - this->center.x) + s * (p.y - this->center.y);
    const double ly = -s * (p.x - this->center.x) + c * (p.y - this->center.y);
    return std::abs(lx) <= 0.5 * this->length && std::abs(ly) <= 0.5 * this->width;
}

double Route::length() const
{
    double total = 0.0;
    for (std::size_t k = 1; k < this->waypoints.size(); ++k)
        total += std::hypot(this->waypoints[k].x - this->waypoints[k - 1].x,
                            this->waypoints[k].y - this->waypoints[k - 1].y);
    return total;
}

std::vector<double> SensorSpec::default_elevations()
{
    std::vector<double> elevations;
    for (int k = 0; k < 16; ++k)
        elevations.push_back(-15.0 + 2.0 * k);
    return elevations;
}

void SensorSpec::validate() const
{
    if (this->elevations_deg.empty())
        throw ConfigError("sensor needs at least one elevation angle");
    for (const double e : this->elevations_deg)
        if (!std::isfinite(e) || std::abs(e) >= 90.0)
            throw ConfigError("sensor elevation angles must be finite and "
                              "within (-90, 90) degrees");
    if (!(this->azimuth_step_deg > 0.0) || this->azimuth_step_deg > 360.0)
        throw ConfigError("sensor azimuth step must lie in (0, 360]");
    if (!(this->max_range > 0.0))
        throw ConfigError("sensor max range must be positive");
    if (!(this->range_sigma >= 0.0))
        throw ConfigError("sensor range sigma must be non-negative");
}

void WorldModel::validate() const
{
    if (this->route.waypoints.size() < 2)
        throw ConfigError("route needs at least two waypoints");
    if (!(this->route.speed > 0.0) || !(this->route.lookahead > 0.0))
        throw ConfigError("route speed and lookahead must be positive");

    for (const auto& o : this->obstacles) {
        if (!(o.z_lo < o.z_hi))
            throw ConfigError("obstacle '" + o.label + "' has an empty "
                              "height interval");
        if (o.kind == ShapeKind::Circle ? !(o.radius > 0.0)
                                        : !(o.length > 0.0 && o.width > 0.0))
            throw ConfigError("obstacle '" + o.label + "' has no area");
    }

    /* Sample the route every 0.25 m */
    const auto& w = this->route.waypoints;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        const double len = std::hypot(w[k + 1].x - w[k].x, w[k + 1].y - w[k].y);
        const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
        for (int n = 0; n <= steps; ++n) {
            const double t = static_cast<double>(n) / steps;
            const Point2 p { w[k].x + t * (w[k + 1].x - w[k].x),
                             w[k].y + t * (w[k + 1].y - w[k].y) };
            if (!this->bounds.contains(p))
                throw ConfigError("route leaves the world bounds");
            for (const auto& o : this->obstacles)
                if (o.contains(p))
                    throw ConfigError("route crosses obstacle '" + o.label + "'");
        }
    }

    for (const auto& stall : this->stalls) {
        const Obstacle shape = stall_shape(stall);
        for (const auto& o : this->obstacles)
            if (shapes_overlap(shape, o))
                throw ConfigError("stall overlaps obstacle '" + o.label + "'");
    }
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts)
{
    std::uint64_t state = 0x243f6a8885a308d3ULL;
    for (const auto part : parts)
        state = splitmix64(state ^ splitmix64(part));
    return state;
}

DayScenario generate_day(const WorldModel& world, int day_index,
                         double fill_ratio, std::uint64_t seed)
{
    if (!(fill_ratio >= 0.0 && fill_ratio <= 1.0))
        throw ContractError("generate_day: fill ratio must lie in [0, 1]");

    std::mt19937_64 rng(derive_seed({ seed, static_cast<std::uint64_t>(day_index) }));

    DayScenario scenario;
    scenario.day_index = day_index;
    scenario.fill_ratio = fill_ratio;

    const int stalls = static_cast<int>(world.stalls.size());
    const int count = static_cast<int>(std::lround(fill_ratio * stalls));

    /* Partial Fisher-Yates draw of `count` distinct stalls */
    std::vector<int> order(static_cast<std::size_t>(stalls));
    for (int k = 0; k < stalls; ++k)
        order[static_cast<std::size_t>(k)] = k;
    for (int k = 0; k < count; ++k) {
        std::uniform_int_distribution<int> pick(k, stalls - 1);
        std::swap(order[static_cast<std::size_t>(k)],
                  order[static_cast<std::size_t>(pick(rng))]);
    }
    scenario.occupied.assign(order.begin(), order.begin() + count);
    std::sort(scenario.occupied.begin(), scenario.occupied.end());

    const CarModel& car = world.car;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (const int index : scenario.occupied) {
        const Stall& stall = world.stalls[static_cast<std::size_t>(index)];

        const double length = std::min(car.length + car.length_jitter * unit(rng),
                                       stall.length - 0.1);
        const double width = std::min(car.width + car.width_jitter * unit(rng),
                                      stall.width - 0.1);
        double yaw = car.yaw_jitter_deg * kDegToRad * unit(rng);

        /* Rotated half extents along the stall axes */
        auto extents = [&](double a) {
            return std::pair {
                0.5 * length * std::abs(std::cos(a)) + 0.5 * width * std::abs(std::sin(a)),
                0.5 * length * std::abs(std::sin(a)) + 0.5 * width * std::abs(std::cos(a)) };
        };
        auto [hx, hy] = extents(yaw);
        if (hx > 0.5 * stall.length || hy > 0.5 * stall.width) {
            yaw = 0.0;
            std::tie(hx, hy) = extents(yaw);
        }
        const double slackX = std::max(0.0, 0.5 * stall.length - hx);
        const double slackY = std::max(0.0, 0.5 * stall.width - hy);
        const double offX = std::min(car.offset_jitter, slackX) * unit(rng);
        const double offY = std::min(car.offset_jitter, slackY) * unit(rng);

        const double c = std::cos(stall.yaw);
        const double s = std::sin(stall.yaw);
        Obstacle shape;
        shape.kind = ShapeKind::Rectangle;
        shape.center = Point2 { stall.center.x + c * offX - s * offY,
                                stall.center.y + s * offX + c * offY };
        shape.length = length;
        shape.width = width;
        shape.yaw = wrap_angle(stall.yaw + yaw);
        shape.z_lo = car.z_lo;
        shape.z_hi = car.z_hi;
        shape.fixed = false;
        shape.label = "car";
        scenario.cars.push_back(shape);
    }
    return scenario;
}

std::vector<Point3> raycast_scan(const WorldModel& world,
                                 const DayScenario& scenario,
                                 const SensorSpec& sensor,
                                 const Pose2D& vehicle_pose,
                                 std::mt19937_64& rng)
{
    const Pose2D sensorPose = compose(vehicle_pose, sensor.extrinsic.mount);
    const Point2 origin { sensorPose.x, sensorPose.y };
    const double height = sensor.extrinsic.height;

    /* Shapes within reach of the sensor */
    std::vector<const Obstacle*> shapes;
    const auto consider = [&](const Obstacle& o) {
        const double d = std::hypot(o.center.x - origin.x, o.center.y - origin.y);
        if (d - o.bounding_radius() <= sensor.max_range)
            shapes.push_back(&o);
    };
    for (const auto& o : world.obstacles)
        consider(o);
    for (const auto& o : scenario.cars)
        consider(o);

    std::vector<Point3> points;
    if (shapes.empty())
        return points;

    struct Beam
    {
        double tan_e;
        double cos_e;
        double sin_e;
    };
    std::vector<Beam> beams;
    for (const double e : sensor.elevations_deg)
        beams.push_back(Beam { std::tan(e * kDegToRad), std::cos(e * kDegToRad),
                               std::sin(e * kDegToRad) });

    const int azimuths = std::max(
        1, static_cast<int>(std::lround(360.0 / sensor.azimuth_step_deg)));
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<PlanInterval> intervals;
    std::vector<const Obstacle*> hitShapes;
    intervals.reserve(shapes.size());
    hitShapes.reserve(shapes.size());

    for (int a = 0; a < azimuths; ++a) {
        const double azimuth = a * sensor.azimuth_step_deg * kDegToRad;
        const double heading = sensorPose.theta + azimuth;
        const Point2 dir { std::cos(heading), std::sin(heading) };

        intervals.clear();
        hitShapes.clear();
        for (const Obstacle* o : shapes) {
            PlanInterval iv;
            const bool hit = o->kind == ShapeKind::Circle
                ? ray_circle(*o, origin, dir, iv)
                : ray_rectangle(*o, origin, dir, iv);
            if (hit && iv.enter <= sensor.max_range) {
                intervals.push_back(iv);
                hitShapes.push_back(o);
            }
        }
        if (intervals.empty())
            continue;

        const double ca = std::cos(azimuth);
        const double sa = std::sin(azimuth);
        for (const Beam& beam : beams) {
            const double planLimit = sensor.max_range * beam.cos_e;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < intervals.size(); ++k) {
                const Obstacle& o = *hitShapes[k];
                double lo = intervals[k].enter;
                double hi = intervals[k].exit;
                if (beam.tan_e == 0.0) {
                    if (height < o.z_lo || height > o.z_hi)
                        continue;
                } else {
                    double d1 = (o.z_lo - height) / beam.tan_e;
                    double d2 = (o.z_hi - height) / beam.tan_e;
                    if (d1 > d2)
                        std::swap(d1, d2);
                    lo = std::max(lo, d1);
                    hi = std::min(hi, d2);
                }
                if (lo <= hi && lo >= 0.0 && lo < best)
                    best = lo;
            }
            if (!(best <= planLimit))
                continue;

            double range = best / beam.cos_e;
            if (sensor.range_sigma > 0.0)
                range += sensor.range_sigma * noise(rng);
            if (range < 0.0 || range > sensor.max_range)
                continue;
            const double planar = range * beam.cos_e;
            points.push_back(Point3 { planar * ca, planar * sa, range * beam.sin_e });
        }
    }
    return points;
}

void SimulationConfig::validate() const
{
    if (!(this->odom_rate > 0.0) || !(this->gps_rate > 0.0) ||
        !(this->lidar_rate > 0.0))
        throw ConfigError("simulation rates must be positive");
    if (this->gps_rate > this->odom_rate || this->lidar_rate > this->odom_rate)
        throw ConfigError("GPS and LiDAR rates cannot exceed the odometry rate");
    if (!(this->sigma_v >= 0.0) || !(this->sigma_omega >= 0.0) ||
        !(this->sigma_gps >= 0.0))
        throw ConfigError("noise sigmas must be non-negative");
}

double Timeline::path_length() const
{
    double total = 0.0;
    for (std::size_t k = 1; k < this->truth.size(); ++k)
        total += std::hypot(this->truth[k].value.x - this->truth[k - 1].value.x,
                            this->truth[k].value.y - this->truth[k - 1].value.y);
    return total;
}

Timeline simulate_run(const WorldModel& world, const SimulationConfig& config,
                      std::uint64_t seed)
{
    config.validate();
    const auto& waypoints = world.route.waypoints;
    if (waypoints.size() < 2)
        throw ConfigError("route needs at least two waypoints");

    std::vector<double> cumulative { 0.0 };
    for (std::size_t k = 1; k < waypoints.size(); ++k)
        cumulative.push_back(cumulative.back() +
                             std::hypot(waypoints[k].x - waypoints[k - 1].x,
                                        waypoints[k].y - waypoints[k - 1].y));
    const double total = cumulative.back();
    if (!(total > 0.0))
        throw ConfigError("route has zero length");

    Timeline timeline;
    timeline.dt = 1.0 / config.odom_rate;
    const double dt = timeline.dt;
    const double speed = world.route.speed;
    const double lookahead = world.route.lookahead;

    const auto gpsEvery = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(config.odom_rate / config.gps_rate)));
    const auto scanEvery = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(config.odom_rate / config.lidar_rate)));

    std::mt19937_64 odomRng(derive_seed({ seed, 1 }));
    std::mt19937_64 gpsRng(derive_seed({ seed, 2 }));
    std::normal_distribution<double> unit(0.0, 1.0);

    Pose2D pose { waypoints[0].x, waypoints[0].y,
                  std::atan2(waypoints[1].y - waypoints[0].y,
                             waypoints[1].x - waypoints[0].x) };
    double progress = 0.0;
    const auto maxSteps = static_cast<std::size_t>(
        10.0 * total / (speed * dt)) + 1000;

    for (std::size_t k = 0; ; ++k) {
        const double stamp = static_cast<double>(k) * dt;
        timeline.truth.push_back(Stamped<Pose2D> { stamp, pose });

        if (k % gpsEvery == 0) {
            const double nx = unit(gpsRng) * config.sigma_gps;
            const double ny = unit(gpsRng) * config.sigma_gps;
            timeline.gps.push_back(Stamped<Point2> { stamp,
                                                     Point2 { pose.x + nx, pose.y + ny } });
        }
        if (k % scanEvery == 0)
            timeline.scans.push_back(ScanEvent { stamp, k,
                                                 derive_seed({ seed, 3, k }) });

        progress = project_window(waypoints, cumulative, Point2 { pose.x, pose.y },
                                  progress - 1.0, progress + 3.0 * lookahead);
        const double remaining = total - progress;
        if (remaining <= speed * dt || k >= maxSteps)
            break;

        /* Pure pursuit towards the look-ahead point */
        const Point2 target = point_at(waypoints, cumulative, progress + lookahead);
        const double tx = target.x - pose.x;
        const double ty = target.y - pose.y;
        const double distance = std::max(std::hypot(tx, ty), 1e-6);
        const double alpha = wrap_angle(std::atan2(ty, tx) - pose.theta);
        const double v = std::min(speed, remaining / dt);
        const double omega = v * 2.0 * std::sin(alpha) / distance;

        timeline.motion.push_back(MotionInput { v + unit(odomRng) * config.sigma_v,
                                                omega + unit(odomRng) * config.sigma_omega });
        pose = integrate_unicycle(pose, v, omega, dt);
    }
    return timeline;
}

std::vector<Point3> render_scan(const WorldModel& world,
                                const DayScenario& scenario,
                                const SensorSpec& sensor,
                                const Timeline& timeline,
                                const ScanEvent& event)
{
    std::mt19937_64 rng(event.noise_seed);
    return raycast_scan(world, scenario, sensor,
                        timeline.truth.at(event.pose_index).value, rng);
}

bool cell_intersects(const Obstacle& obstacle, double x0, double y0,
                     double resolution)
{
    const std::array<Point2, 4> cell { Point2 { x0, y0 },
                                       Point2 { x0 + resolution, y0 },
                                       Point2 { x0 + resolution, y0 + resolution },
                                       Point2 { x0, y0 + resolution } };
    if (obstacle.kind == ShapeKind::Circle) {
        const double cx = std::clamp(obstacle.center.x, x0, x0 + resolution);
        const double cy = std::clamp(obstacle.center.y, y0, y0 + resolution);
        const double dx = obstacle.center.x - cx;
        const double dy = obstacle.center.y - cy;
        return dx * dx + dy * dy < obstacle.radius * obstacle.radius;
    }
    const auto rect = corners(obstacle);
    return polygons_overlap(cell, rect);
}

MapMask mask_from_world(const WorldModel& world, const GridGeometry& geometry)
{
    MapMask mask(geometry);
    const double res = geometry.resolution;
    for (const auto& o : world.obstacles) {
        if (!o.fixed)
            continue;
        const double r = o.bounding_radius();
        const CellIndex lo = world_to_cell(o.center.x - r, o.center.y - r, res);
        const CellIndex hi = world_to_cell(o.center.x + r, o.center.y + r, res);
        for (std::int64_t y = lo.y; y <= hi.y; ++y)
            for (std::int64_t x = lo.x; x <= hi.x; ++x)
                if (cell_intersects(o, static_cast<double>(x) * res,
                                    static_cast<double>(y) * res, res))
                    mask.set_fixed(CellIndex { x, y }, true);
    }
    return mask;
}

} /* namespace tileloc */
