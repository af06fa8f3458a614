
/* experiment.cpp */

#include "tileloc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "tileloc/errors.hpp"
#include "tileloc/fusion.hpp"
#include "tileloc/map_builder.hpp"
#include "tileloc/matcher.hpp"
#include "tileloc/scan_pipeline.hpp"

namespace tileloc {

namespace fs = std::filesystem;

namespace {

/* Stream tags separating the seed families of the harness */
constexpr std::uint64_t kDayTimelineTag = 100;
constexpr std::uint64_t kDayMatchTag = 200;
constexpr std::uint64_t kBuildTimelineTag = 300;
constexpr std::uint64_t kBuildMatchTag = 301;

AxisStats axis_stats(const std::vector<double>& all,
                     const std::vector<double>& kept)
{
    AxisStats stats;
    if (all.empty())
        return stats;
    const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
    stats.min = *lo;
    stats.max = *hi;

    const std::vector<double>& used = kept.empty() ? all : kept;
    double sum = 0.0;
    for (const double e : used)
        sum += e;
    stats.mean = sum / static_cast<double>(used.size());
    double squares = 0.0;
    for (const double e : used)
        squares += (e - stats.mean) * (e - stats.mean);
    stats.std = std::sqrt(squares / static_cast<double>(used.size()));
    return stats;
}

Eigen::Matrix3d initial_covariance(const LocalizationConfig& loc)
{
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    cov(0, 0) = loc.initial_sigma_xy * loc.initial_sigma_xy;
    cov(1, 1) = cov(0, 0);
    cov(2, 2) = loc.initial_sigma_theta * loc.initial_sigma_theta;
    return cov;
}

bool directory_has_entries(const fs::path& dir)
{
    return fs::exists(dir) && fs::is_directory(dir) &&
        fs::directory_iterator(dir) != fs::directory_iterator();
}

std::string fixed6(double value)
{
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", value);
    return buffer;
}

} /* namespace */

UpdateMode mode_for_case(int case_id)
{
    switch (case_id) {
    case 1:
        return UpdateMode::Frozen;
    case 2:
        return UpdateMode::UpdateAll;
    case 3:
        return UpdateMode::UpdateMasked;
    default:
        throw ContractError("case id must be 1, 2 or 3");
    }
}

UpdateMode CaseSpec::mode() const
{
    return mode_for_case(this->case_id);
}

DayStats aggregate_errors(const std::vector<VehicleFrameError>& errors,
                          double divergence_bound)
{
    DayStats stats;
    stats.samples = errors.size();

    std::vector<double> lateral;
    std::vector<double> longitudinal;
    std::vector<double> keptLateral;
    std::vector<double> keptLongitudinal;
    lateral.reserve(errors.size());
    longitudinal.reserve(errors.size());
    for (const auto& e : errors) {
        lateral.push_back(e.lateral);
        longitudinal.push_back(e.longitudinal);
        if (std::abs(e.lateral) > divergence_bound ||
            std::abs(e.longitudinal) > divergence_bound) {
            ++stats.divergent_samples;
            continue;
        }
        keptLateral.push_back(e.lateral);
        keptLongitudinal.push_back(e.longitudinal);
    }
    stats.diverged = stats.divergent_samples > 0;
    stats.lateral = axis_stats(lateral, keptLateral);
    stats.longitudinal = axis_stats(longitudinal, keptLongitudinal);
    return stats;
}

std::uint64_t day_timeline_seed(std::uint64_t seed, int day)
{
    return derive_seed({ seed, kDayTimelineTag, static_cast<std::uint64_t>(day) });
}

std::uint64_t day_match_seed(std::uint64_t seed, int day, std::uint64_t attempt)
{
    return derive_seed({ seed, kDayMatchTag, static_cast<std::uint64_t>(day),
                         attempt });
}

std::uint64_t build_timeline_seed(std::uint64_t seed, int pass)
{
    return derive_seed({ seed, kBuildTimelineTag, static_cast<std::uint64_t>(pass) });
}

TileRect map_extent(const ExperimentConfig& config)
{
    const auto& waypoints = config.world.route.waypoints;
    if (waypoints.empty())
        throw ConfigError("route has no waypoints");
    double minX = waypoints[0].x;
    double maxX = waypoints[0].x;
    double minY = waypoints[0].y;
    double maxY = waypoints[0].y;
    for (const auto& p : waypoints) {
        minX = std::min(minX, p.x);
        maxX = std::max(maxX, p.x);
        minY = std::min(minY, p.y);
        maxY = std::max(maxY, p.y);
    }
    const double range = config.sensor.max_range;
    const double size = config.geometry.tile_size;
    return TileRect {
        static_cast<std::int32_t>(std::floor((minX - range) / size)),
        static_cast<std::int32_t>(std::floor((minY - range) / size)),
        static_cast<std::int32_t>(std::floor((maxX + range) / size)),
        static_cast<std::int32_t>(std::floor((maxY + range) / size)) };
}

BuildSummary build_initial_map(const ExperimentConfig& config,
                               const fs::path& out, bool force)
{
    config.validate();
    if (directory_has_entries(out)) {
        if (!force)
            throw ConfigError("output directory " + out.string() +
                              " is not empty; pass --force to replace it");
        fs::remove_all(out);
    }
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec)
        throw IoError("cannot create map directory " + out.string() + ": " +
                      ec.message());

    const auto& loc = config.localization;
    const DayScenario scenario =
        generate_day(config.world, 0, config.day0_fill, config.seed);
    TileStore store(out, config.geometry);

    UpdatePolicy buildPolicy = loc.policy;
    buildPolicy.mode = UpdateMode::UpdateAll;

    Eigen::Matrix2d gpsR = Eigen::Matrix2d::Identity() *
        (config.sim.sigma_gps * config.sim.sigma_gps);
    if (config.sim.sigma_gps == 0.0)
        gpsR = Eigen::Matrix2d::Identity() * 1e-12;

    BuildSummary summary;
    for (int pass = 0; pass < config.build_passes; ++pass) {
        const Timeline timeline = simulate_run(
            config.world, config.sim, build_timeline_seed(config.seed, pass));

        MatchParams frameMatch = loc.frame_match;
        frameMatch.rng_seed = derive_seed({ config.seed, kBuildMatchTag,
                                            static_cast<std::uint64_t>(pass) });
        MapBuilder builder(store, frameMatch, buildPolicy);

        FilterState state { timeline.truth.front().value,
                            initial_covariance(loc), timeline.truth.front().stamp };
        std::size_t gpsIndex = 0;
        std::size_t scanIndex = 0;
        double odometer = 0.0;
        double lastFrameStamp = state.stamp;
        bool haveFrame = false;

        for (std::size_t k = 0; k < timeline.truth.size(); ++k) {
            if (k > 0) {
                const MotionInput& u = timeline.motion[k - 1];
                state = predict(state, u, timeline.dt, loc.process_noise);
                state.stamp = timeline.truth[k].stamp;
                odometer += std::abs(u.v) * timeline.dt;
            }
            while (gpsIndex < timeline.gps.size() &&
                   timeline.gps[gpsIndex].stamp <= timeline.truth[k].stamp + 1e-9) {
                state = update_position(state, timeline.gps[gpsIndex].value, gpsR);
                ++gpsIndex;
            }
            if (scanIndex >= timeline.scans.size() ||
                timeline.scans[scanIndex].pose_index != k)
                continue;
            const ScanEvent& event = timeline.scans[scanIndex++];
            if (haveFrame &&
                !should_update(odometer, state.stamp - lastFrameStamp, loc.policy))
                continue;

            haveFrame = true;
            odometer = 0.0;
            lastFrameStamp = state.stamp;
            const auto cloud = render_scan(config.world, scenario, config.sensor,
                                           timeline, event);
            const OccupancyVector vec = build_occupancy_vector(
                Stamped<std::vector<Point3>> { event.stamp, cloud },
                config.sensor.extrinsic, loc.band, state.cov);
            const double variance = std::max(
                0.5 * (state.cov(0, 0) + state.cov(1, 1)), 1e-12);
            builder.add_frame(vec, Stamped<Pose2D> { event.stamp, state.pose },
                              Point2 { state.pose.x, state.pose.y }, variance);
        }
        builder.finish();
        summary.frames += builder.frames_added();
        ++summary.passes;
    }

    /* Every tile within sensor range of the route exists on disk */
    const TileRect extent = map_extent(config);
    for (std::int32_t j = extent.j_min; j <= extent.j_max; ++j)
        for (std::int32_t i = extent.i_min; i <= extent.i_max; ++i)
            store.tile(TileIndex { i, j }).mark_dirty();
    summary.tiles_written = store.flush();

    const MapMask mask = mask_from_world(config.world, config.geometry);
    mask.save(out / "mask");
    summary.masked_cells = mask.count();

    save_metadata(MapMetadata { config.geometry, config.anchor }, out);
    return summary;
}

DayStats localize_day(const ExperimentConfig& config, TileStore& store,
                      const MapMask* mask, UpdateMode mode, int day,
                      std::vector<MatchTrace>* trace)
{
    const auto& loc = config.localization;
    if (mode == UpdateMode::UpdateMasked && mask == nullptr)
        throw ContractError("masked update needs a mask");

    const double fill = config.fill_ratio_for_day(day);
    const DayScenario scenario = generate_day(config.world, day, fill, config.seed);
    const Timeline timeline = simulate_run(config.world, config.sim,
                                           day_timeline_seed(config.seed, day));
    const double radius = config.submap_radius();
    const double resolution = config.geometry.resolution;

    UpdatePolicy policy = loc.policy;
    policy.mode = mode;

    /* The fixed-structure weight applies only where a mask is in use */
    MatchParams match = loc.match;
    if (mode != UpdateMode::UpdateMasked)
        match.alpha = 0.0;

    Eigen::Matrix3d R = Eigen::Matrix3d::Zero();
    R(0, 0) = loc.meas_sigma_xy * loc.meas_sigma_xy;
    R(1, 1) = R(0, 0);
    R(2, 2) = loc.meas_sigma_theta * loc.meas_sigma_theta;

    FilterState state { timeline.truth.front().value, initial_covariance(loc),
                        timeline.truth.front().stamp };
    std::vector<VehicleFrameError> errors;
    errors.reserve(timeline.truth.size());

    std::size_t scanIndex = 0;
    std::uint64_t attempt = 0;
    double odometer = 0.0;
    double lastMatchStamp = state.stamp;
    int rejections = 0;
    std::size_t matches = 0;
    std::size_t updates = 0;
    double scoreSum = 0.0;
    double minScore = 1.0;

    for (std::size_t k = 0; k < timeline.truth.size(); ++k) {
        if (k > 0) {
            const MotionInput& u = timeline.motion[k - 1];
            state = predict(state, u, timeline.dt, loc.process_noise);
            state.stamp = timeline.truth[k].stamp;
            odometer += std::abs(u.v) * timeline.dt;
        }

        if (scanIndex < timeline.scans.size() &&
            timeline.scans[scanIndex].pose_index == k) {
            const ScanEvent& event = timeline.scans[scanIndex++];
            if (should_update(odometer, state.stamp - lastMatchStamp, policy)) {
                odometer = 0.0;
                lastMatchStamp = state.stamp;

                const auto cloud = render_scan(config.world, scenario,
                                               config.sensor, timeline, event);
                const OccupancyVector vec = build_occupancy_vector(
                    Stamped<std::vector<Point3>> { event.stamp, cloud },
                    config.sensor.extrinsic, loc.band, state.cov);

                const Pose2D prior = state.pose;
                MatchResult result;
                {
                    const SubMap submap = assemble_submap(store, state.pose, radius);
                    MaskView view;
                    if (mask != nullptr && match.alpha > 0.0)
                        view = MaskView(*mask, submap.rect());
                    match.rng_seed = day_match_seed(config.seed, day, attempt++);
                    result = search_pose(vec, state.pose, submap,
                                         match.alpha > 0.0 ? &view : nullptr, match);
                }
                ++matches;
                scoreSum += result.score;
                minScore = std::min(minScore, result.score);

                bool applied = false;
                if (result.accepted) {
                    const PoseUpdate update =
                        update_pose(state, result.pose, R, loc.gate);
                    applied = update.applied;
                    if (applied)
                        state = update.state;
                }
                if (trace != nullptr)
                    trace->push_back(MatchTrace { event.stamp,
                                                  timeline.truth[k].value,
                                                  prior, result.pose, state.pose,
                                                  result.score, result.accepted,
                                                  applied });
                if (!applied) {
                    ++rejections;
                } else if (mode != UpdateMode::Frozen) {
                    const FrameRaster raster =
                        rasterize_frame(vec, state.pose, resolution);
                    apply_update(raster, store,
                                 mode == UpdateMode::UpdateMasked ? mask : nullptr,
                                 policy);
                    ++updates;
                }
                store.evict(Point2 { state.pose.x, state.pose.y }, radius);
            }
        }

        errors.push_back(vehicle_frame_error(timeline.truth[k].value, state.pose));
    }

    DayStats stats = aggregate_errors(errors, loc.divergence_bound);
    stats.day = day;
    stats.rejections = rejections;
    stats.matches = matches;
    stats.updates = updates;
    stats.fill_ratio = fill;
    if (matches > 0)
        stats.mean_score = scoreSum / static_cast<double>(matches);
    stats.min_score = minScore;
    return stats;
}

std::vector<DayStats> run_case(const ExperimentConfig& config,
                               const CaseSpec& spec,
                               const fs::path& map_dir,
                               const fs::path& work_dir,
                               std::optional<fs::path> mask_dir,
                               const DayCallback& on_day)
{
    const UpdateMode mode = spec.mode();
    if (spec.days < 1)
        throw ContractError("run_case needs at least one day");
    if (!fs::exists(map_dir / kMetadataFileName))
        throw MissingMapError("no initial map in " + map_dir.string() +
                              "; run build-map first");

    const MapMetadata metadata = load_metadata(map_dir);
    if (!(metadata.geometry == config.geometry))
        throw ConfigError("map geometry in " + map_dir.string() +
                          " does not match the world file");

    std::optional<MapMask> mask;
    if (mode == UpdateMode::UpdateMasked) {
        const fs::path dir = mask_dir.value_or(map_dir / "mask");
        if (!fs::is_directory(dir))
            throw MissingMapError("no mask directory " + dir.string());
        mask = MapMask::load(dir, config.geometry);
    }

    fs::path storeDir = map_dir;
    if (mode != UpdateMode::Frozen) {
        if (fs::exists(work_dir))
            fs::remove_all(work_dir);
        fs::create_directories(work_dir);
        for (const auto& entry : fs::directory_iterator(map_dir))
            if (entry.is_regular_file())
                fs::copy_file(entry.path(), work_dir / entry.path().filename());
        storeDir = work_dir;
    }

    std::vector<DayStats> results;
    TileStore store(storeDir, config.geometry, config.localization.retention);
    for (int day = 1; day <= spec.days; ++day) {
        if (mode == UpdateMode::Frozen)
            store.discard();
        DayStats stats = localize_day(config, store, mask ? &*mask : nullptr,
                                      mode, day);
        if (mode != UpdateMode::Frozen)
            store.flush();
        if (on_day)
            on_day(stats);
        results.push_back(stats);
    }
    return results;
}

std::string format_csv_row(int case_id, const DayStats& s)
{
    std::ostringstream row;
    row << case_id << ',' << s.day << ','
        << fixed6(s.lateral.min) << ',' << fixed6(s.lateral.max) << ','
        << fixed6(s.lateral.mean) << ',' << fixed6(s.lateral.std) << ','
        << fixed6(s.longitudinal.min) << ',' << fixed6(s.longitudinal.max) << ','
        << fixed6(s.longitudinal.mean) << ',' << fixed6(s.longitudinal.std) << ','
        << s.rejections << ',' << (s.diverged ? 1 : 0);
    return row.str();
}

void append_csv(const fs::path& path, int case_id,
                const std::vector<DayStats>& stats)
{
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    if (fresh)
        out << kCsvHeader << '\n';
    for (const auto& s : stats)
        out << format_csv_row(case_id, s) << '\n';
    if (!out)
        throw IoError("write failed for " + path.string());
}

std::vector<CsvRow> read_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());

    std::vector<CsvRow> rows;
    std::string line;
    std::size_t lineNumber = 0;
    while (std::getline(in, line)) {
        ++lineNumber;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (lineNumber == 1) {
            if (line != kCsvHeader)
                throw FormatError(path.string() + ": unexpected CSV header");
            continue;
        }

        std::vector<std::string> fields;
        std::stringstream split(line);
        std::string field;
        while (std::getline(split, field, ','))
            fields.push_back(field);
        if (fields.size() != 12)
            throw FormatError(path.string() + ":" + std::to_string(lineNumber) +
                              ": expected 12 fields");
        try {
            CsvRow row;
            row.case_id = std::stoi(fields[0]);
            row.stats.day = std::stoi(fields[1]);
            row.stats.lateral = AxisStats { std::stod(fields[2]), std::stod(fields[3]),
                                            std::stod(fields[4]), std::stod(fields[5]) };
            row.stats.longitudinal = AxisStats { std::stod(fields[6]), std::stod(fields[7]),
                                                 std::stod(fields[8]), std::stod(fields[9]) };
            row.stats.rejections = std::stoi(fields[10]);
            row.stats.diverged = std::stoi(fields[11]) != 0;
            rows.push_back(row);
        } catch (const std::logic_error&) {
            throw FormatError(path.string() + ":" + std::to_string(lineNumber) +
                              ": malformed number");
        }
    }
    return rows;
}

AxisTrend fit_trend(const std::vector<double>& days,
                    const std::vector<double>& values)
{
    if (days.size() != values.size())
        throw ContractError("fit_trend: size mismatch");
    const std::size_t n = days.size();
    if (n < 3)
        throw ContractError("trend analysis needs at least three days");

    double meanX = 0.0;
    double meanY = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        meanX += days[k];
        meanY += values[k];
    }
    meanX /= static_cast<double>(n);
    meanY /= static_cast<double>(n);

    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (days[k] - meanX) * (days[k] - meanX);
        sxy += (days[k] - meanX) * (values[k] - meanY);
    }
    if (!(sxx > 0.0))
        throw ContractError("fit_trend: day indices must not all coincide");

    AxisTrend trend;
    trend.slope = sxy / sxx;
    trend.intercept = meanY - trend.slope * meanX;

    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = values[k] - (trend.intercept + trend.slope * days[k]);
        sse += r * r;
    }
    const double dof = static_cast<double>(n - 2);
    trend.slope_stderr = std::sqrt(sse / dof / sxx);
    if (trend.slope_stderr > 0.0)
        trend.t_stat = trend.slope / trend.slope_stderr;
    else if (trend.slope > 0.0)
        trend.t_stat = std::numeric_limits<double>::infinity();
    else if (trend.slope < 0.0)
        trend.t_stat = -std::numeric_limits<double>::infinity();

    const boost::math::students_t distribution(dof);
    trend.t_critical = boost::math::quantile(distribution, 0.95);

    trend.first = values.front();
    trend.last = values.back();
    trend.increasing = trend.slope > 0.0 && trend.t_stat > trend.t_critical;
    trend.bounded = !trend.increasing && trend.last <= 1.5 * trend.first;
    return trend;
}

TrendReport trend_report(const std::vector<DayStats>& stats)
{
    if (stats.size() < 3)
        throw ContractError("trend analysis needs at least three days");
    std::vector<double> days;
    std::vector<double> lateral;
    std::vector<double> longitudinal;
    for (const auto& s : stats) {
        days.push_back(static_cast<double>(s.day));
        lateral.push_back(s.lateral.std);
        longitudinal.push_back(s.longitudinal.std);
    }
    TrendReport report;
    report.days = stats.size();
    report.lateral = fit_trend(days, lateral);
    report.longitudinal = fit_trend(days, longitudinal);
    return report;
}

} /* namespace tileloc */
