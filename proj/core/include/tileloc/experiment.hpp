
/* experiment.hpp */

#ifndef TILELOC_EXPERIMENT_HPP
#define TILELOC_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tileloc/config.hpp"
#include "tileloc/grid_map.hpp"
#include "tileloc/map_updater.hpp"
#include "tileloc/sim_world.hpp"

namespace tileloc {

/* The initial map directory is absent or incomplete */
class MissingMapError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/* One experimental case: 1 frozen map, 2 full update, 3 masked update */
struct CaseSpec
{
    int case_id = 1;
    int days = 1;

    /* Throws ContractError unless case_id is 1, 2 or 3 */
    UpdateMode mode() const;
};

UpdateMode mode_for_case(int case_id);

struct AxisStats
{
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;
};

struct DayStats
{
    int       day = 0;
    AxisStats lateral;
    AxisStats longitudinal;
    int       rejections = 0;
    bool      diverged = false;

    /* Diagnostics, not part of the CSV */
    std::size_t samples = 0;
    std::size_t divergent_samples = 0;
    std::size_t matches = 0;
    std::size_t updates = 0;
    double      fill_ratio = 0.0;
    double      mean_score = 0.0;
    double      min_score = 1.0;
};

/*
 * Aggregate signed errors. Samples with |error| above the bound on either
 * axis are excluded from mean and std (population) but still set the
 * divergence flag; min and max cover every sample. If every sample
 * diverged, mean and std fall back to all samples.
 */
DayStats aggregate_errors(const std::vector<VehicleFrameError>& errors,
                          double divergence_bound);

/* Seeds shared by every case, so cases see identical sensor timelines */
std::uint64_t day_timeline_seed(std::uint64_t seed, int day);
std::uint64_t day_match_seed(std::uint64_t seed, int day, std::uint64_t attempt);
std::uint64_t build_timeline_seed(std::uint64_t seed, int pass);

struct BuildSummary
{
    int         passes = 0;
    std::size_t frames = 0;
    std::size_t tiles_written = 0;
    std::size_t masked_cells = 0;
};

/*
 * Build the day-0 map into `out`: several passes of the day-0 run through
 * the map builder, then tiles, the fixed-structure mask (out/mask) and the
 * metadata file. Tiles covering the route bounding box inflated by the
 * sensor range are always written. A non-empty `out` is refused with
 * ConfigError unless `force` is set, in which case it is replaced.
 */
BuildSummary build_initial_map(const ExperimentConfig& config,
                               const std::filesystem::path& out, bool force);

/* Tile rectangle covering the route bounding box inflated by the range */
TileRect map_extent(const ExperimentConfig& config);

/* One scan-matching attempt, recorded on request */
struct MatchTrace
{
    double stamp = 0.0;
    Pose2D truth;
    Pose2D prior;
    Pose2D matched;
    Pose2D fused;
    double score = 0.0;
    bool   accepted = false;
    bool   applied = false;
};

/*
 * Localize one simulated day against the store. The filter starts at the
 * true initial pose; odometry predicts at the timeline rate and scan
 * matching runs on the update trigger. Accepted, ungated matches update
 * the map in non-frozen modes at the fused pose.
 */
DayStats localize_day(const ExperimentConfig& config, TileStore& store,
                      const MapMask* mask, UpdateMode mode, int day,
                      std::vector<MatchTrace>* trace = nullptr);

/* Optional per-day progress callback */
using DayCallback = std::function<void(const DayStats&)>;

/*
 * Run days 1..spec.days. Case 1 reads `map_dir` and never writes it; cases
 * 2 and 3 start from a fresh copy of it in `work_dir` and carry changes
 * forward, flushing after every day. Case 3 reads its mask from `mask_dir`
 * (default map_dir/mask). Throws MissingMapError without a map.
 */
std::vector<DayStats> run_case(const ExperimentConfig& config,
                               const CaseSpec& spec,
                               const std::filesystem::path& map_dir,
                               const std::filesystem::path& work_dir,
                               std::optional<std::filesystem::path> mask_dir = {},
                               const DayCallback& on_day = {});

/* CSV emission */
struct CsvRow
{
    int      case_id = 0;
    DayStats stats;
};

inline constexpr const char* kCsvHeader =
    "case,day,lat_min,lat_max,lat_mean,lat_std,lon_min,lon_max,lon_mean,"
    "lon_std,rejections,diverged";

std::string format_csv_row(int case_id, const DayStats& stats);

/* Append rows; the header is written only when the file is new or empty */
void append_csv(const std::filesystem::path& path, int case_id,
                const std::vector<DayStats>& stats);
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

/* Least-squares trend of one std-dev series against the day index */
struct AxisTrend
{
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double t_stat = 0.0;
    /* One-sided 95% critical value of Student's t with n - 2 dof */
    double t_critical = 0.0;
    double first = 0.0;
    double last = 0.0;
    /* Slope significantly positive */
    bool increasing = false;
    /* Not increasing and final value within 1.5x of the first */
    bool bounded = false;
};

struct TrendReport
{
    std::size_t days = 0;
    AxisTrend   lateral;
    AxisTrend   longitudinal;
};

/* Throws ContractError with fewer than three days */
TrendReport trend_report(const std::vector<DayStats>& stats);
AxisTrend fit_trend(const std::vector<double>& days,
                    const std::vector<double>& values);

} /* namespace tileloc */

#endif /* TILELOC_EXPERIMENT_HPP */
