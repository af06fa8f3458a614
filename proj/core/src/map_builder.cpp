
/* map_builder.cpp */

#include "tileloc/map_builder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tileloc/errors.hpp"

namespace tileloc {

/*
 * FrameBuffer
 */

const FrameEntry* FrameBuffer::previous() const
{
    if (!this->mEntries.empty())
        return &this->mEntries.back();
    if (this->mAnchor)
        return &*this->mAnchor;
    return nullptr;
}

void FrameBuffer::push(FrameEntry entry)
{
    if (this->full())
        throw ContractError("frame buffer is at capacity; flush it first");
    if (!this->mEntries.empty() && entry.stamp < this->mEntries.back().stamp)
        throw ContractError("frames must be added in chronological order");
    this->mEntries.push_back(std::move(entry));
}

void FrameBuffer::reset(std::optional<FrameEntry> last)
{
    this->mEntries.clear();
    this->mAnchor = std::move(last);
}

void integrate_frame(FrameBuffer& buffer, const OccupancyVector& vec,
                     const Stamped<Pose2D>& fused_pose,
                     const Point2& gps_position, double gps_variance,
                     const MatchParams& params, double resolution)
{
    if (buffer.full())
        throw ContractError("integrate_frame: frame buffer is at capacity");
    if (!(gps_variance > 0.0))
        throw ContractError("integrate_frame: GPS variance must be positive");

    FrameEntry entry;
    entry.vec = vec;
    entry.fused_pose = fused_pose.value;
    entry.gps_position = gps_position;
    entry.gps_variance = gps_variance;
    entry.stamp = fused_pose.stamp;

    const FrameEntry* previous = buffer.previous();
    if (previous == nullptr) {
        entry.matched_pose = fused_pose.value;
    } else {
        const Pose2D increment = between(previous->fused_pose, fused_pose.value);
        const Pose2D prior = compose(previous->matched_pose, increment);
        entry.matched_pose =
            search_pose(vec, prior, previous->raster, nullptr, params).pose;
    }
    entry.raster = rasterize_frame(vec, entry.matched_pose, resolution);
    buffer.push(std::move(entry));
}

/*
 * RigidTransform2D
 */

Point2 RigidTransform2D::apply(const Point2& p) const
{
    const double c = std::cos(this->rotation);
    const double s = std::sin(this->rotation);
    return Point2 { c * p.x - s * p.y + this->translation.x,
                    s * p.x + c * p.y + this->translation.y };
}

Pose2D RigidTransform2D::apply(const Pose2D& p) const
{
    const Point2 position = this->apply(Point2 { p.x, p.y });
    return Pose2D { position.x, position.y, p.theta + this->rotation };
}

RigidTransform2D fit_rigid_weighted(std::span<const Point2> source,
                                    std::span<const Point2> target,
                                    std::span<const double> weights)
{
    if (source.size() != target.size() || source.size() != weights.size())
        throw ContractError("fit_rigid_weighted: size mismatch");
    if (source.empty())
        throw ContractError("fit_rigid_weighted: no points");

    double weightSum = 0.0;
    Point2 sourceMean;
    Point2 targetMean;
    for (std::size_t k = 0; k < source.size(); ++k) {
        if (!(weights[k] > 0.0) || !std::isfinite(weights[k]))
            throw ContractError("fit_rigid_weighted: weights must be positive");
        weightSum += weights[k];
        sourceMean.x += weights[k] * source[k].x;
        sourceMean.y += weights[k] * source[k].y;
        targetMean.x += weights[k] * target[k].x;
        targetMean.y += weights[k] * target[k].y;
    }
    sourceMean.x /= weightSum;
    sourceMean.y /= weightSum;
    targetMean.x /= weightSum;
    targetMean.y /= weightSum;

    /* Weighted cross-covariance reduced to its rotation-relevant parts */
    double dotSum = 0.0;
    double crossSum = 0.0;
    double spread = 0.0;
    for (std::size_t k = 0; k < source.size(); ++k) {
        const double sx = source[k].x - sourceMean.x;
        const double sy = source[k].y - sourceMean.y;
        const double tx = target[k].x - targetMean.x;
        const double ty = target[k].y - targetMean.y;
        dotSum += weights[k] * (sx * tx + sy * ty);
        crossSum += weights[k] * (sx * ty - sy * tx);
        spread += weights[k] * (sx * sx + sy * sy);
    }

    RigidTransform2D transform;
    const double scale = std::max({ std::abs(sourceMean.x),
                                    std::abs(sourceMean.y), 1.0 });
    if (spread > 1e-18 * scale * scale * weightSum &&
        (dotSum != 0.0 || crossSum != 0.0))
        transform.rotation = std::atan2(crossSum, dotSum);

    const double c = std::cos(transform.rotation);
    const double s = std::sin(transform.rotation);
    transform.translation = Point2 {
        targetMean.x - (c * sourceMean.x - s * sourceMean.y),
        targetMean.y - (s * sourceMean.x + c * sourceMean.y) };
    return transform;
}

double registration_energy(const RigidTransform2D& transform,
                           std::span<const Point2> source,
                           std::span<const Point2> target,
                           std::span<const double> weights)
{
    double energy = 0.0;
    for (std::size_t k = 0; k < source.size(); ++k) {
        const Point2 moved = transform.apply(source[k]);
        const double dx = moved.x - target[k].x;
        const double dy = moved.y - target[k].y;
        energy += weights[k] * (dx * dx + dy * dy);
    }
    return energy;
}

RigidTransform2D geo_position_transform(const FrameBuffer& buffer)
{
    if (buffer.size() < 2)
        throw ContractError("geo_position_buffer needs at least two frames");

    std::vector<Point2> source;
    std::vector<Point2> target;
    std::vector<double> weights;
    for (const auto& entry : buffer.entries()) {
        source.push_back(Point2 { entry.matched_pose.x, entry.matched_pose.y });
        target.push_back(entry.gps_position);
        weights.push_back(1.0 / entry.gps_variance);
    }
    return fit_rigid_weighted(source, target, weights);
}

std::vector<Pose2D> geo_position_buffer(const FrameBuffer& buffer)
{
    const RigidTransform2D transform = geo_position_transform(buffer);
    std::vector<Pose2D> optimized;
    optimized.reserve(buffer.size());
    for (const auto& entry : buffer.entries())
        optimized.push_back(transform.apply(entry.matched_pose));
    return optimized;
}

std::size_t flush_buffer_to_tiles(FrameBuffer& buffer,
                                  const std::vector<Pose2D>& optimized,
                                  TileStore& store,
                                  const UpdatePolicy& policy)
{
    if (optimized.size() != buffer.size())
        throw ContractError("flush_buffer_to_tiles: pose count mismatch");
    if (buffer.empty())
        return 0;

    UpdatePolicy unmasked = policy;
    unmasked.mode = UpdateMode::UpdateAll;
    const double resolution = store.geometry().resolution;

    std::vector<TileIndex> changed;
    FrameEntry last;
    for (std::size_t k = 0; k < buffer.size(); ++k) {
        const FrameEntry& entry = buffer.entries()[k];
        FrameRaster raster = rasterize_frame(entry.vec, optimized[k], resolution);
        apply_update(raster, store, nullptr, unmasked, &changed);
        if (k + 1 == buffer.size()) {
            last = entry;
            last.matched_pose = optimized[k];
            last.raster = std::move(raster);
        }
    }
    buffer.reset(std::move(last));

    const std::set<TileIndex> distinct(changed.begin(), changed.end());
    return distinct.size();
}

/*
 * MapBuilder
 */

MapBuilder::MapBuilder(TileStore& store, MatchParams frame_match,
                       UpdatePolicy policy) :
    mStore(store),
    mFrameMatch(frame_match),
    mPolicy(policy)
{
    this->mFrameMatch.alpha = 0.0;
    this->mFrameMatch.validate();
    this->mPolicy.validate();
}

void MapBuilder::add_frame(const OccupancyVector& vec,
                           const Stamped<Pose2D>& fused_pose,
                           const Point2& gps_position, double gps_variance)
{
    if (this->mBuffer.full())
        this->flush();

    MatchParams params = this->mFrameMatch;
    params.rng_seed = this->mFrameMatch.rng_seed + this->mFramesAdded;
    integrate_frame(this->mBuffer, vec, fused_pose, gps_position,
                    gps_variance, params, this->mStore.geometry().resolution);
    ++this->mFramesAdded;
}

void MapBuilder::finish()
{
    if (!this->mBuffer.empty())
        this->flush();
}

void MapBuilder::flush()
{
    std::vector<Pose2D> optimized;
    if (this->mBuffer.size() >= 2) {
        optimized = geo_position_buffer(this->mBuffer);
    } else {
        /* A single frame cannot be fitted; it keeps its matched pose */
        optimized.push_back(this->mBuffer.entries().front().matched_pose);
    }
    flush_buffer_to_tiles(this->mBuffer, optimized, this->mStore, this->mPolicy);
    ++this->mFlushes;
}

} /* namespace tileloc */
