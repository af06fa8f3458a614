
/* config.hpp */

#ifndef TILELOC_CONFIG_HPP
#define TILELOC_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tileloc/fusion.hpp"
#include "tileloc/grid_map.hpp"
#include "tileloc/map_updater.hpp"
#include "tileloc/matcher.hpp"
#include "tileloc/scan_pipeline.hpp"
#include "tileloc/sim_world.hpp"

namespace tileloc {

/* Parameters of the map-based localizer and map maintenance */
struct LocalizationConfig
{
    MatchParams     match;
    /* Frame-to-frame matching during map building; the fused prior is
     * already accurate, so the search is narrow */
    MatchParams     frame_match { 0.0, 200, 0.05, 0.005, 0.0, 0 };
    UpdatePolicy    policy;
    ProcessNoise    process_noise;
    double          meas_sigma_xy = 0.05;
    double          meas_sigma_theta = 0.01;
    double          gate = kDefaultPoseGate;
    /* Sub-map radius around the vehicle; negative means sensor max range */
    double          submap_radius = -1.0;
    HeightBand      band;
    RetentionPolicy retention;
    double          divergence_bound = 1.0;
    /* Initial pose standard deviations of every run */
    double          initial_sigma_xy = 0.05;
    double          initial_sigma_theta = 0.01;
};

/* Everything a build or run needs, as read from one world file */
struct ExperimentConfig
{
    WorldModel                    world;
    SensorSpec                    sensor;
    SimulationConfig              sim;
    GridGeometry                  geometry;
    std::optional<GeodeticAnchor> anchor;
    LocalizationConfig            localization;

    double              day0_fill = 0.1;
    std::vector<double> fill_cycle { 0.3, 0.6, 0.9 };
    int                 days = 23;
    int                 build_passes = 9;
    std::uint64_t       seed = 42;

    double submap_radius() const;
    /* Day 0 uses day0_fill; day d >= 1 cycles through fill_cycle */
    double fill_ratio_for_day(int day) const;

    /* Throws ConfigError on any invalid value */
    void validate() const;
};

/*
 * Load a world file (JSON with comments). Missing keys keep their
 * defaults; unknown keys are rejected. Throws ConfigError.
 */
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

/* Serialize every setting back to the world file format */
std::string dump_config(const ExperimentConfig& config);

} /* namespace tileloc */

#endif /* TILELOC_CONFIG_HPP */
