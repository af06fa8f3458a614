
/* tileloc_main.cpp */

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tileloc/config.hpp"
#include "tileloc/errors.hpp"
#include "tileloc/experiment.hpp"

namespace fs = std::filesystem;
using namespace tileloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitMissingMap = 3;

struct BuildArgs
{
    std::string                  world;
    std::string                  out;
    std::optional<std::uint64_t> seed;
    bool                         force = false;
};

struct RunArgs
{
    std::string                  world;
    std::string                  map;
    int                          case_id = 0;
    int                          days = 0;
    std::string                  out;
    std::optional<std::uint64_t> seed;
    std::string                  mask;
    std::string                  work;
};

struct ReportArgs
{
    std::string in;
};

int cmd_build(const BuildArgs& args)
{
    ExperimentConfig config = load_config(args.world);
    if (args.seed)
        config.seed = *args.seed;

    const BuildSummary summary = build_initial_map(config, args.out, args.force);
    std::printf("built %s: %d passes, %zu frames, %zu tiles, %zu masked cells\n",
                args.out.c_str(), summary.passes, summary.frames,
                summary.tiles_written, summary.masked_cells);
    return kExitOk;
}

int cmd_run(const RunArgs& args)
{
    ExperimentConfig config = load_config(args.world);
    if (args.seed)
        config.seed = *args.seed;

    CaseSpec spec { args.case_id, args.days };
    const fs::path work = args.work.empty()
        ? fs::path(args.out + ".case" + std::to_string(args.case_id) + ".work")
        : fs::path(args.work);
    std::optional<fs::path> mask;
    if (!args.mask.empty())
        mask = fs::path(args.mask);

    const auto stats = run_case(config, spec, args.map, work, mask,
        [&](const DayStats& s) {
            std::fprintf(stderr,
                         "case %d day %d fill %.2f: lat std %.4f lon std %.4f "
                         "rejections %d score mean %.3f min %.3f%s\n",
                         spec.case_id, s.day, s.fill_ratio, s.lateral.std,
                         s.longitudinal.std, s.rejections, s.mean_score, s.min_score,
                         s.diverged ? " diverged" : "");
        });
    append_csv(args.out, spec.case_id, stats);
    return kExitOk;
}

void print_trend(const char* axis, const AxisTrend& t)
{
    std::printf("  %-12s slope %+.6f m/day  t %+.3f (crit %.3f)  first %.4f  "
                "last %.4f  %s\n",
                axis, t.slope, t.t_stat, t.t_critical, t.first, t.last,
                t.increasing ? "increasing" : (t.bounded ? "bounded" : "unbounded"));
}

int cmd_report(const ReportArgs& args)
{
    const auto rows = read_csv(args.in);
    std::map<int, std::vector<DayStats>> byCase;
    for (const auto& row : rows)
        byCase[row.case_id].push_back(row.stats);

    for (const auto& [caseId, days] : byCase) {
        int rejections = 0;
        int diverged = 0;
        double lateral = 0.0;
        double longitudinal = 0.0;
        for (const auto& d : days) {
            rejections += d.rejections;
            diverged += d.diverged ? 1 : 0;
            lateral += d.lateral.std;
            longitudinal += d.longitudinal.std;
        }
        const double n = static_cast<double>(days.size());
        std::printf("case %d (%s): %zu days, mean std lat %.4f m lon %.4f m, "
                    "%d rejections, %d diverged days\n",
                    caseId, std::string(to_string(mode_for_case(caseId))).c_str(),
                    days.size(), lateral / n, longitudinal / n, rejections, diverged);
        if (days.size() >= 3) {
            const TrendReport report = trend_report(days);
            print_trend("lateral", report.lateral);
            print_trend("longitudinal", report.longitudinal);
        } else {
            std::printf("  trend needs at least three days\n");
        }
    }
    return kExitOk;
}

} /* namespace */

int main(int argc, char** argv)
{
    CLI::App app { "Tiled occupancy-grid localization experiments" };
    app.require_subcommand(1);

    BuildArgs build;
    auto* buildCmd = app.add_subcommand("build-map", "Build the initial day-0 map");
    buildCmd->add_option("--world", build.world, "World file")->required()
        ->check(CLI::ExistingFile);
    buildCmd->add_option("--out", build.out, "Map directory")->required();
    buildCmd->add_option("--seed", build.seed, "Override the world seed");
    buildCmd->add_flag("--force", build.force, "Replace a non-empty directory");

    RunArgs run;
    auto* runCmd = app.add_subcommand("run", "Localize over several days under one case");
    runCmd->add_option("--world", run.world, "World file")->required()
        ->check(CLI::ExistingFile);
    runCmd->add_option("--map", run.map, "Initial map directory")->required();
    runCmd->add_option("--case", run.case_id, "1 frozen, 2 update all, 3 masked update")
        ->required()->check(CLI::IsMember({ 1, 2, 3 }));
    runCmd->add_option("--days", run.days, "Number of days")->required()
        ->check(CLI::PositiveNumber);
    runCmd->add_option("--out", run.out, "Statistics CSV (appended)")->required();
    runCmd->add_option("--seed", run.seed, "Override the world seed");
    runCmd->add_option("--mask", run.mask, "Mask directory (default <map>/mask)");
    runCmd->add_option("--work", run.work,
                       "Working map copy for cases 2 and 3 (default <out>.case<N>.work)");

    ReportArgs report;
    auto* reportCmd = app.add_subcommand("report", "Summarize a statistics CSV");
    reportCmd->add_option("--in", report.in, "Statistics CSV")->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*buildCmd)
            return cmd_build(build);
        if (*runCmd)
            return cmd_run(run);
        return cmd_report(report);
    } catch (const MissingMapError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitMissingMap;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
