
/* map_builder.hpp */

#ifndef TILELOC_MAP_BUILDER_HPP
#define TILELOC_MAP_BUILDER_HPP

#include <optional>
#include <span>
#include <vector>

#include "tileloc/geometry.hpp"
#include "tileloc/grid_map.hpp"
#include "tileloc/map_updater.hpp"
#include "tileloc/matcher.hpp"
#include "tileloc/scan_pipeline.hpp"

namespace tileloc {

/*
 * FrameEntry is one buffered map frame: the scan, its raster at the
 * matched pose, and the paired fused (odometry + GPS) position with its
 * isotropic variance.
 */
struct FrameEntry
{
    OccupancyVector vec;
    FrameRaster     raster;
    Pose2D          matched_pose;
    Pose2D          fused_pose;
    Point2          gps_position;
    double          gps_variance = 1.0;
    double          stamp = 0.0;
};

/*
 * FrameBuffer holds up to kCapacity chronological frames. After a flush
 * the last flushed frame is kept as the anchor that the next frame is
 * matched against; the anchor itself is not re-applied to the tiles.
 */
class FrameBuffer
{
public:
    static constexpr std::size_t kCapacity = 20;

    std::size_t size() const { return mEntries.size(); }
    bool empty() const { return mEntries.empty(); }
    bool full() const { return mEntries.size() >= kCapacity; }

    const std::vector<FrameEntry>& entries() const { return mEntries; }
    const std::optional<FrameEntry>& anchor() const { return mAnchor; }

    /* Frame the next scan is matched against: the last entry or the anchor */
    const FrameEntry* previous() const;

    void push(FrameEntry entry);

    /* Empty the buffer, keeping `last` as the anchor */
    void reset(std::optional<FrameEntry> last);

private:
    std::vector<FrameEntry>   mEntries;
    std::optional<FrameEntry> mAnchor;
};

/*
 * Append a frame. The first frame of a chain takes the fused pose; later
 * frames are matched against the previous frame raster starting from the
 * previous matched pose moved by the fused-pose increment. Throws
 * ContractError when the buffer is full.
 */
void integrate_frame(FrameBuffer& buffer, const OccupancyVector& vec,
                     const Stamped<Pose2D>& fused_pose,
                     const Point2& gps_position, double gps_variance,
                     const MatchParams& params, double resolution);

/* Planar rigid transform: rotate about the origin, then translate */
struct RigidTransform2D
{
    double rotation = 0.0;
    Point2 translation;

    Point2 apply(const Point2& p) const;
    Pose2D apply(const Pose2D& p) const;
};

/*
 * Closed-form weighted least-squares rigid fit minimizing
 * sum_j w_j * |T(source_j) - target_j|^2. When all source points coincide
 * the rotation is zero and only the weighted centroids are aligned.
 */
RigidTransform2D fit_rigid_weighted(std::span<const Point2> source,
                                    std::span<const Point2> target,
                                    std::span<const double> weights);

double registration_energy(const RigidTransform2D& transform,
                           std::span<const Point2> source,
                           std::span<const Point2> target,
                           std::span<const double> weights);

/* Fit the matched-pose chain onto the GPS path with weights 1/variance and
 * return the transformed frame poses; requires at least two frames */
std::vector<Pose2D> geo_position_buffer(const FrameBuffer& buffer);

/* Transform found by geo_position_buffer */
RigidTransform2D geo_position_transform(const FrameBuffer& buffer);

/*
 * Re-rasterize every buffered frame at its optimized pose and apply it to
 * the tiles without a mask. Returns the number of distinct tiles whose
 * cells changed. The buffer is emptied; its last frame becomes the anchor.
 */
std::size_t flush_buffer_to_tiles(FrameBuffer& buffer,
                                  const std::vector<Pose2D>& optimized,
                                  TileStore& store,
                                  const UpdatePolicy& policy);

/*
 * MapBuilder drives the buffer: frames are added until the buffer is full,
 * then geo-positioned and flushed onto the tiles.
 */
class MapBuilder
{
public:
    MapBuilder(TileStore& store, MatchParams frame_match,
               UpdatePolicy policy);

    void add_frame(const OccupancyVector& vec,
                   const Stamped<Pose2D>& fused_pose,
                   const Point2& gps_position, double gps_variance);

    /* Flush whatever remains in the buffer */
    void finish();

    const FrameBuffer& buffer() const { return mBuffer; }
    std::size_t frames_added() const { return mFramesAdded; }
    std::size_t flushes() const { return mFlushes; }

private:
    void flush();

    TileStore&   mStore;
    MatchParams  mFrameMatch;
    UpdatePolicy mPolicy;
    FrameBuffer  mBuffer;
    std::size_t  mFramesAdded = 0;
    std::size_t  mFlushes = 0;
};

} /* namespace tileloc */

#endif /* TILELOC_MAP_BUILDER_HPP */
