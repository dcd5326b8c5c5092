#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace mcsim {

// One homogeneous stretch of highway. Attributes are constant over the
// segment; the segment after it starts where this one ends.
struct RoadSegment {
    double length = 0.0;      // m, > 0
    double speed_limit = 0.0; // m/s, > 0
    double grade = 0.0;       // dimensionless slope, |grade| < 0.2
    double curvature = 0.0;   // 1/m, |curvature| <= max_curvature
};

// Attributes of the road at one arclength position.
struct RoadAttributes {
    double speed_limit = 0.0;
    double grade = 0.0;
    double curvature = 0.0;
    int lane_count = 0;
};

// Position on the road: arclength along it plus a lane index.
// Lane 0 is the rightmost lane; indices increase to the left.
struct LanePosition {
    double arclength = 0.0;
    int lane = 0;
};

// Piecewise-constant road description built from an ordered segment list.
// Queries at a segment boundary return the downstream segment; the route end
// itself reports the final segment.
class RoadNetwork {
  public:
    RoadNetwork(std::vector<RoadSegment> segments, int lane_count,
                double max_curvature = 0.1);

    double total_length() const { return starts_.back(); }
    int lane_count() const { return lane_count_; }
    const std::vector<RoadSegment>& segments() const { return segments_; }

    // Road attributes at arclength s, 0 <= s <= total_length().
    RoadAttributes query(double s) const;

    // Remaining distance to the route end (total_length - s).
    double distance_to_navigation_end(double s) const;

    // Indices of the (left, right) neighbor lanes at a position, empty where
    // the road has no lane on that side.
    std::pair<std::optional<int>, std::optional<int>>
    neighbor_lanes(const LanePosition& p) const;

  private:
    int segment_index(double s) const;

    std::vector<RoadSegment> segments_;
    std::vector<double> starts_; // size() == segments_.size() + 1
    int lane_count_ = 0;
};

} // namespace mcsim
