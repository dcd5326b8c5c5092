#include "mcsim/road.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mcsim {

RoadNetwork::RoadNetwork(std::vector<RoadSegment> segments, int lane_count,
                         double max_curvature)
    : segments_(std::move(segments)), lane_count_(lane_count) {
    if (segments_.empty())
        throw std::invalid_argument("road needs at least one segment");
    if (lane_count_ < 1)
        throw std::invalid_argument("road needs at least one lane");
    starts_.reserve(segments_.size() + 1);
    starts_.push_back(0.0);
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const RoadSegment& seg = segments_[i];
        const std::string at = "segment " + std::to_string(i) + ": ";
        if (!(seg.length > 0.0))
            throw std::invalid_argument(at + "length must be positive");
        if (!(seg.speed_limit > 0.0))
            throw std::invalid_argument(at + "speed limit must be positive");
        if (!(std::abs(seg.grade) < 0.2))
            throw std::invalid_argument(at + "|grade| must be below 0.2");
        if (!(std::abs(seg.curvature) <= max_curvature))
            throw std::invalid_argument(at + "|curvature| exceeds the bound");
        starts_.push_back(starts_.back() + seg.length);
    }
}

int RoadNetwork::segment_index(double s) const {
    if (std::isnan(s) || s < 0.0 || s > total_length())
        throw std::out_of_range("arclength outside the road");
    // boundary positions belong to the downstream segment; the route end
    // keeps the final one
    auto it = std::upper_bound(starts_.begin(), starts_.end(), s);
    int idx = static_cast<int>(it - starts_.begin()) - 1;
    return std::min(idx, static_cast<int>(segments_.size()) - 1);
}

RoadAttributes RoadNetwork::query(double s) const {
    const RoadSegment& seg = segments_[static_cast<std::size_t>(segment_index(s))];
    return {seg.speed_limit, seg.grade, seg.curvature, lane_count_};
}

double RoadNetwork::distance_to_navigation_end(double s) const {
    if (std::isnan(s) || s < 0.0 || s > total_length())
        throw std::out_of_range("arclength outside the road");
    return total_length() - s;
}

std::pair<std::optional<int>, std::optional<int>>
RoadNetwork::neighbor_lanes(const LanePosition& p) const {
    int lanes = query(p.arclength).lane_count;
    if (p.lane < 0 || p.lane >= lanes)
        throw std::out_of_range("lane index outside the road");
    std::optional<int> left, right;
    if (p.lane + 1 < lanes) left = p.lane + 1;
    if (p.lane - 1 >= 0) right = p.lane - 1;
    return {left, right};
}

} // namespace mcsim
