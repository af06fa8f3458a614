
/* config.cpp */

#include "tileloc/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#include "tileloc/errors.hpp"

namespace tileloc {

namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/* Reject keys outside the schema so typos do not pass silently */
void check_keys(const json& object, const std::string& where,
                std::initializer_list<const char*> allowed)
{
    if (!object.is_object())
        throw ConfigError(where + ": expected an object");
    const std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, value] : object.items())
        if (names.count(key) == 0)
            throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read(const json& object, const char* key, T& out, const std::string& where)
{
    const auto it = object.find(key);
    if (it == object.end())
        return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

Point2 read_point(const json& value, const std::string& where)
{
    if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
        !value[1].is_number())
        throw ConfigError(where + ": expected [x, y]");
    return Point2 { value[0].get<double>(), value[1].get<double>() };
}

void read_point(const json& object, const char* key, Point2& out,
                const std::string& where)
{
    const auto it = object.find(key);
    if (it != object.end())
        out = read_point(*it, where + "." + key);
}

void read_interval(const json& object, const char* key, double& lo, double& hi,
                   const std::string& where)
{
    const auto it = object.find(key);
    if (it == object.end())
        return;
    const Point2 p = read_point(*it, where + "." + key);
    lo = p.x;
    hi = p.y;
}

Obstacle read_obstacle(const json& o, const std::string& where)
{
    check_keys(o, where, { "label", "shape", "center", "length", "width",
                           "yaw_deg", "radius", "z", "fixed" });
    Obstacle obstacle;
    std::string shape = "rect";
    read(o, "shape", shape, where);
    if (shape == "rect")
        obstacle.kind = ShapeKind::Rectangle;
    else if (shape == "circle")
        obstacle.kind = ShapeKind::Circle;
    else
        throw ConfigError(where + ".shape: expected 'rect' or 'circle'");

    if (o.find("center") == o.end())
        throw ConfigError(where + ": missing center");
    read(o, "label", obstacle.label, where);
    read_point(o, "center", obstacle.center, where);
    read(o, "length", obstacle.length, where);
    read(o, "width", obstacle.width, where);
    read(o, "radius", obstacle.radius, where);
    double yawDeg = 0.0;
    read(o, "yaw_deg", yawDeg, where);
    obstacle.yaw = wrap_angle(yawDeg * kDegToRad);
    read_interval(o, "z", obstacle.z_lo, obstacle.z_hi, where);
    read(o, "fixed", obstacle.fixed, where);
    return obstacle;
}

Stall read_stall(const json& s, const std::string& where)
{
    check_keys(s, where, { "center", "yaw_deg", "length", "width" });
    Stall stall;
    read_point(s, "center", stall.center, where);
    double yawDeg = 0.0;
    read(s, "yaw_deg", yawDeg, where);
    stall.yaw = wrap_angle(yawDeg * kDegToRad);
    read(s, "length", stall.length, where);
    read(s, "width", stall.width, where);
    return stall;
}

void read_stall_row(const json& r, const std::string& where,
                    std::vector<Stall>& stalls)
{
    check_keys(r, where, { "first_center", "step", "count", "yaw_deg",
                           "length", "width" });
    Point2 first;
    Point2 step { 2.5, 0.0 };
    int count = 0;
    Stall proto;
    double yawDeg = 0.0;
    read_point(r, "first_center", first, where);
    read_point(r, "step", step, where);
    read(r, "count", count, where);
    read(r, "yaw_deg", yawDeg, where);
    read(r, "length", proto.length, where);
    read(r, "width", proto.width, where);
    if (count < 0)
        throw ConfigError(where + ".count: must be non-negative");
    proto.yaw = wrap_angle(yawDeg * kDegToRad);
    for (int k = 0; k < count; ++k) {
        Stall stall = proto;
        stall.center = Point2 { first.x + k * step.x, first.y + k * step.y };
        stalls.push_back(stall);
    }
}

void read_match(const json& m, const std::string& where, MatchParams& params)
{
    check_keys(m, where, { "alpha", "n_samples", "sigma_xy", "sigma_theta",
                           "match_threshold", "rng_seed" });
    read(m, "alpha", params.alpha, where);
    read(m, "n_samples", params.n_samples, where);
    read(m, "sigma_xy", params.sigma_xy, where);
    read(m, "sigma_theta", params.sigma_theta, where);
    read(m, "match_threshold", params.match_threshold, where);
    read(m, "rng_seed", params.rng_seed, where);
}

json match_to_json(const MatchParams& p)
{
    return json { { "alpha", p.alpha }, { "n_samples", p.n_samples },
                  { "sigma_xy", p.sigma_xy }, { "sigma_theta", p.sigma_theta },
                  { "match_threshold", p.match_threshold },
                  { "rng_seed", p.rng_seed } };
}

json obstacle_to_json(const Obstacle& o)
{
    json j { { "label", o.label },
             { "shape", o.kind == ShapeKind::Circle ? "circle" : "rect" },
             { "center", { o.center.x, o.center.y } },
             { "z", { o.z_lo, o.z_hi } },
             { "fixed", o.fixed } };
    if (o.kind == ShapeKind::Circle) {
        j["radius"] = o.radius;
    } else {
        j["length"] = o.length;
        j["width"] = o.width;
        j["yaw_deg"] = o.yaw * kRadToDeg;
    }
    return j;
}

} /* namespace */

double ExperimentConfig::submap_radius() const
{
    return this->localization.submap_radius > 0.0
        ? this->localization.submap_radius : this->sensor.max_range;
}

double ExperimentConfig::fill_ratio_for_day(int day) const
{
    if (day <= 0)
        return this->day0_fill;
    return this->fill_cycle[static_cast<std::size_t>(day - 1) % this->fill_cycle.size()];
}

void ExperimentConfig::validate() const
{
    try {
        this->geometry.validate();
        this->localization.match.validate();
        this->localization.frame_match.validate();
        this->localization.policy.validate();
        this->localization.band.validate();
    } catch (const ContractError& e) {
        throw ConfigError(e.what());
    }
    this->world.validate();
    this->sensor.validate();
    this->sim.validate();

    const auto& loc = this->localization;
    if (!(loc.meas_sigma_xy > 0.0) || !(loc.meas_sigma_theta > 0.0))
        throw ConfigError("measurement sigmas must be positive");
    if (!(loc.gate > 0.0))
        throw ConfigError("pose gate must be positive");
    if (!(loc.process_noise.x >= 0.0) || !(loc.process_noise.y >= 0.0) ||
        !(loc.process_noise.theta >= 0.0))
        throw ConfigError("process noise rates must be non-negative");
    if (!(loc.divergence_bound > 0.0))
        throw ConfigError("divergence bound must be positive");
    if (!(loc.initial_sigma_xy >= 0.0) || !(loc.initial_sigma_theta >= 0.0))
        throw ConfigError("initial sigmas must be non-negative");
    if (loc.retention.min_scans < 0)
        throw ConfigError("retention min_scans must be non-negative");
    if (loc.match.alpha != 0.0 && !(loc.match.alpha > 1.0))
        throw ConfigError("fixed-structure weight alpha must exceed 1");

    if (!(this->day0_fill >= 0.0 && this->day0_fill <= 1.0))
        throw ConfigError("day0_fill must lie in [0, 1]");
    if (this->fill_cycle.empty())
        throw ConfigError("fill_cycle must not be empty");
    for (const double f : this->fill_cycle)
        if (!(f >= 0.0 && f <= 1.0))
            throw ConfigError("fill_cycle values must lie in [0, 1]");
    if (this->days < 1)
        throw ConfigError("days must be at least 1");
    if (this->build_passes < 1)
        throw ConfigError("build_passes must be at least 1");
}

ExperimentConfig parse_config(const std::string& text)
{
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("world file is not valid JSON: ") + e.what());
    }

    check_keys(root, "world", { "seed", "days", "day0_fill", "fill_cycle",
                                "build_passes", "map", "bounds", "obstacles",
                                "stalls", "stall_rows", "car", "route",
                                "sensor", "simulation", "localization" });

    ExperimentConfig config;
    config.sensor.elevations_deg = SensorSpec::default_elevations();

    read(root, "seed", config.seed, "world");
    read(root, "days", config.days, "world");
    read(root, "day0_fill", config.day0_fill, "world");
    read(root, "fill_cycle", config.fill_cycle, "world");
    read(root, "build_passes", config.build_passes, "world");

    if (const auto it = root.find("map"); it != root.end()) {
        check_keys(*it, "map", { "tile_size", "resolution", "anchor" });
        read(*it, "tile_size", config.geometry.tile_size, "map");
        read(*it, "resolution", config.geometry.resolution, "map");
        if (const auto a = it->find("anchor"); a != it->end()) {
            check_keys(*a, "map.anchor", { "latitude", "longitude", "altitude" });
            GeodeticAnchor anchor;
            read(*a, "latitude", anchor.latitude_deg, "map.anchor");
            read(*a, "longitude", anchor.longitude_deg, "map.anchor");
            read(*a, "altitude", anchor.altitude_m, "map.anchor");
            config.anchor = anchor;
        }
    }

    if (const auto it = root.find("bounds"); it != root.end()) {
        if (!it->is_array() || it->size() != 4)
            throw ConfigError("bounds: expected [min_x, min_y, max_x, max_y]");
        const auto b = it->get<std::vector<double>>();
        config.world.bounds = Bounds { b[0], b[1], b[2], b[3] };
    }

    if (const auto it = root.find("obstacles"); it != root.end()) {
        if (!it->is_array())
            throw ConfigError("obstacles: expected a list");
        for (std::size_t k = 0; k < it->size(); ++k)
            config.world.obstacles.push_back(
                read_obstacle((*it)[k], "obstacles[" + std::to_string(k) + "]"));
    }
    if (const auto it = root.find("stalls"); it != root.end()) {
        if (!it->is_array())
            throw ConfigError("stalls: expected a list");
        for (std::size_t k = 0; k < it->size(); ++k)
            config.world.stalls.push_back(
                read_stall((*it)[k], "stalls[" + std::to_string(k) + "]"));
    }
    if (const auto it = root.find("stall_rows"); it != root.end()) {
        if (!it->is_array())
            throw ConfigError("stall_rows: expected a list");
        for (std::size_t k = 0; k < it->size(); ++k)
            read_stall_row((*it)[k], "stall_rows[" + std::to_string(k) + "]",
                           config.world.stalls);
    }

    if (const auto it = root.find("car"); it != root.end()) {
        check_keys(*it, "car", { "length", "width", "length_jitter",
                                 "width_jitter", "offset_jitter",
                                 "yaw_jitter_deg", "z" });
        auto& car = config.world.car;
        read(*it, "length", car.length, "car");
        read(*it, "width", car.width, "car");
        read(*it, "length_jitter", car.length_jitter, "car");
        read(*it, "width_jitter", car.width_jitter, "car");
        read(*it, "offset_jitter", car.offset_jitter, "car");
        read(*it, "yaw_jitter_deg", car.yaw_jitter_deg, "car");
        read_interval(*it, "z", car.z_lo, car.z_hi, "car");
    }

    if (const auto it = root.find("route"); it != root.end()) {
        check_keys(*it, "route", { "waypoints", "speed", "lookahead" });
        auto& route = config.world.route;
        if (const auto w = it->find("waypoints"); w != it->end()) {
            if (!w->is_array())
                throw ConfigError("route.waypoints: expected a list");
            for (const auto& p : *w)
                route.waypoints.push_back(read_point(p, "route.waypoints"));
        }
        read(*it, "speed", route.speed, "route");
        read(*it, "lookahead", route.lookahead, "route");
    }

    if (const auto it = root.find("sensor"); it != root.end()) {
        check_keys(*it, "sensor", { "elevations_deg", "azimuth_step_deg",
                                    "max_range", "range_sigma", "mount",
                                    "height" });
        auto& sensor = config.sensor;
        read(*it, "elevations_deg", sensor.elevations_deg, "sensor");
        read(*it, "azimuth_step_deg", sensor.azimuth_step_deg, "sensor");
        read(*it, "max_range", sensor.max_range, "sensor");
        read(*it, "range_sigma", sensor.range_sigma, "sensor");
        read(*it, "height", sensor.extrinsic.height, "sensor");
        if (const auto m = it->find("mount"); m != it->end()) {
            if (!m->is_array() || m->size() != 3)
                throw ConfigError("sensor.mount: expected [x, y, yaw_deg]");
            const auto v = m->get<std::vector<double>>();
            sensor.extrinsic.mount = Pose2D { v[0], v[1], v[2] * kDegToRad };
        }
    }

    if (const auto it = root.find("simulation"); it != root.end()) {
        check_keys(*it, "simulation", { "odom_rate", "gps_rate", "lidar_rate",
                                        "sigma_v", "sigma_omega", "sigma_gps" });
        auto& sim = config.sim;
        read(*it, "odom_rate", sim.odom_rate, "simulation");
        read(*it, "gps_rate", sim.gps_rate, "simulation");
        read(*it, "lidar_rate", sim.lidar_rate, "simulation");
        read(*it, "sigma_v", sim.sigma_v, "simulation");
        read(*it, "sigma_omega", sim.sigma_omega, "simulation");
        read(*it, "sigma_gps", sim.sigma_gps, "simulation");
    }

    if (const auto it = root.find("localization"); it != root.end()) {
        const std::string where = "localization";
        check_keys(*it, where, { "match", "frame_match", "delta",
                                 "trigger_distance", "trigger_time",
                                 "process_noise", "meas_sigma_xy",
                                 "meas_sigma_theta", "gate", "submap_radius",
                                 "height_band", "retention_min_scans",
                                 "retention_margin", "divergence_bound",
                                 "initial_sigma_xy", "initial_sigma_theta" });
        auto& loc = config.localization;
        if (const auto m = it->find("match"); m != it->end())
            read_match(*m, where + ".match", loc.match);
        if (const auto m = it->find("frame_match"); m != it->end())
            read_match(*m, where + ".frame_match", loc.frame_match);
        read(*it, "delta", loc.policy.delta, where);
        read(*it, "trigger_distance", loc.policy.trigger_distance, where);
        read(*it, "trigger_time", loc.policy.trigger_time, where);
        if (const auto q = it->find("process_noise"); q != it->end()) {
            if (!q->is_array() || q->size() != 3)
                throw ConfigError(where + ".process_noise: expected [qx, qy, qtheta]");
            const auto v = q->get<std::vector<double>>();
            loc.process_noise = ProcessNoise { v[0], v[1], v[2] };
        }
        read(*it, "meas_sigma_xy", loc.meas_sigma_xy, where);
        read(*it, "meas_sigma_theta", loc.meas_sigma_theta, where);
        read(*it, "gate", loc.gate, where);
        read(*it, "submap_radius", loc.submap_radius, where);
        read_interval(*it, "height_band", loc.band.z_min, loc.band.z_max, where);
        read(*it, "retention_min_scans", loc.retention.min_scans, where);
        read(*it, "retention_margin", loc.retention.margin, where);
        read(*it, "divergence_bound", loc.divergence_bound, where);
        read(*it, "initial_sigma_xy", loc.initial_sigma_xy, where);
        read(*it, "initial_sigma_theta", loc.initial_sigma_theta, where);
    }

    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open world file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string dump_config(const ExperimentConfig& config)
{
    json root;
    root["seed"] = config.seed;
    root["days"] = config.days;
    root["day0_fill"] = config.day0_fill;
    root["fill_cycle"] = config.fill_cycle;
    root["build_passes"] = config.build_passes;

    json map { { "tile_size", config.geometry.tile_size },
               { "resolution", config.geometry.resolution } };
    if (config.anchor)
        map["anchor"] = json { { "latitude", config.anchor->latitude_deg },
                               { "longitude", config.anchor->longitude_deg },
                               { "altitude", config.anchor->altitude_m } };
    root["map"] = map;

    const auto& b = config.world.bounds;
    root["bounds"] = { b.min_x, b.min_y, b.max_x, b.max_y };

    root["obstacles"] = json::array();
    for (const auto& o : config.world.obstacles)
        root["obstacles"].push_back(obstacle_to_json(o));

    root["stalls"] = json::array();
    for (const auto& s : config.world.stalls)
        root["stalls"].push_back(json { { "center", { s.center.x, s.center.y } },
                                        { "yaw_deg", s.yaw * kRadToDeg },
                                        { "length", s.length },
                                        { "width", s.width } });

    const auto& car = config.world.car;
    root["car"] = json { { "length", car.length }, { "width", car.width },
                         { "length_jitter", car.length_jitter },
                         { "width_jitter", car.width_jitter },
                         { "offset_jitter", car.offset_jitter },
                         { "yaw_jitter_deg", car.yaw_jitter_deg },
                         { "z", { car.z_lo, car.z_hi } } };

    json waypoints = json::array();
    for (const auto& p : config.world.route.waypoints)
        waypoints.push_back({ p.x, p.y });
    root["route"] = json { { "waypoints", waypoints },
                           { "speed", config.world.route.speed },
                           { "lookahead", config.world.route.lookahead } };

    const auto& sensor = config.sensor;
    root["sensor"] = json {
        { "elevations_deg", sensor.elevations_deg },
        { "azimuth_step_deg", sensor.azimuth_step_deg },
        { "max_range", sensor.max_range },
        { "range_sigma", sensor.range_sigma },
        { "mount", { sensor.extrinsic.mount.x, sensor.extrinsic.mount.y,
                     sensor.extrinsic.mount.theta * kRadToDeg } },
        { "height", sensor.extrinsic.height } };

    const auto& sim = config.sim;
    root["simulation"] = json { { "odom_rate", sim.odom_rate },
                                { "gps_rate", sim.gps_rate },
                                { "lidar_rate", sim.lidar_rate },
                                { "sigma_v", sim.sigma_v },
                                { "sigma_omega", sim.sigma_omega },
                                { "sigma_gps", sim.sigma_gps } };

    const auto& loc = config.localization;
    root["localization"] = json {
        { "match", match_to_json(loc.match) },
        { "frame_match", match_to_json(loc.frame_match) },
        { "delta", loc.policy.delta },
        { "trigger_distance", loc.policy.trigger_distance },
        { "trigger_time", loc.policy.trigger_time },
        { "process_noise", { loc.process_noise.x, loc.process_noise.y,
                             loc.process_noise.theta } },
        { "meas_sigma_xy", loc.meas_sigma_xy },
        { "meas_sigma_theta", loc.meas_sigma_theta },
        { "gate", loc.gate },
        { "submap_radius", loc.submap_radius },
        { "height_band", { loc.band.z_min, loc.band.z_max } },
        { "retention_min_scans", loc.retention.min_scans },
        { "retention_margin", loc.retention.margin },
        { "divergence_bound", loc.divergence_bound },
        { "initial_sigma_xy", loc.initial_sigma_xy },
        { "initial_sigma_theta", loc.initial_sigma_theta } };

    return root.dump(2) + "\n";
}

} /* namespace tileloc */
