
/* bench_main.cpp */

#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "tileloc/experiment.hpp"
#include "tileloc/map_updater.hpp"
#include "tileloc/matcher.hpp"
#include "tileloc/scan_pipeline.hpp"
#include "tileloc/sim_world.hpp"

using namespace tileloc;

namespace {

/* One scan of the parking lot at the start of the route, on the day-0 scenario */
struct Scene
{
    ExperimentConfig config;
    DayScenario      scenario;
    Pose2D           pose;
    OccupancyVector  vec;

    Scene()
        : config(load_config(TILELOC_DATA_DIR "/parking_lot.json"))
        , scenario(generate_day(config.world, 0, config.day0_fill, config.seed))
    {
        const auto& w = config.world.route.waypoints;
        pose = Pose2D { w[0].x, w[0].y, std::atan2(w[1].y - w[0].y, w[1].x - w[0].x) };
        std::mt19937_64 rng(1);
        const auto cloud = raycast_scan(config.world, scenario, config.sensor, pose, rng);
        vec = build_occupancy_vector(Stamped<std::vector<Point3>> { 0.0, cloud },
                                     config.sensor.extrinsic, config.localization.band,
                                     PoseCovariance::Identity() * 1e-4);
    }
};

const Scene& scene()
{
    static const Scene s;
    return s;
}

void BM_RaycastScan(benchmark::State& state)
{
    const Scene& s = scene();
    std::mt19937_64 rng(2);
    for (auto _ : state)
        benchmark::DoNotOptimize(raycast_scan(s.config.world, s.scenario, s.config.sensor, s.pose, rng));
}
BENCHMARK(BM_RaycastScan)->Unit(benchmark::kMillisecond);

void BM_RasterizeFrame(benchmark::State& state)
{
    const Scene& s = scene();
    for (auto _ : state)
        benchmark::DoNotOptimize(rasterize_frame(s.vec, s.pose, s.config.geometry.resolution));
}
BENCHMARK(BM_RasterizeFrame)->Unit(benchmark::kMicrosecond);

void BM_ApplyUpdate(benchmark::State& state)
{
    const Scene& s = scene();
    TileStore store({}, s.config.geometry);
    const FrameRaster raster = rasterize_frame(s.vec, s.pose, s.config.geometry.resolution);
    for (auto _ : state)
        benchmark::DoNotOptimize(apply_update(raster, store, nullptr, UpdatePolicy {}));
}
BENCHMARK(BM_ApplyUpdate)->Unit(benchmark::kMicrosecond);

void BM_SearchPose(benchmark::State& state)
{
    const Scene& s = scene();
    TileStore store({}, s.config.geometry);
    const FrameRaster raster = rasterize_frame(s.vec, s.pose, s.config.geometry.resolution);
    for (int k = 0; k < 9; ++k)
        apply_update(raster, store, nullptr, UpdatePolicy {});
    const SubMap submap = assemble_submap(store, s.pose, s.config.submap_radius());
    MatchParams params = s.config.localization.match;
    params.n_samples = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(search_pose(s.vec, s.pose, submap, nullptr, params));
    state.SetItemsProcessed(state.iterations() * (state.range(0) + 1));
}
BENCHMARK(BM_SearchPose)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

} /* namespace */

BENCHMARK_MAIN();
