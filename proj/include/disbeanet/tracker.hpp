#pragma once

#include <utility>
#include <vector>

#include "disbeanet/dataset.hpp"

namespace disbeanet::tracker {

// Intersection-over-union of two axis-aligned boxes; both need w, h > 0.
double iou(const dataset::Detection& a, const dataset::Detection& b);

struct TrackerParams {
    double iou_threshold = 0.3;
    int max_misses = 10;
};

struct TrackState {
    int track_id = 0;
    dataset::Detection last;
    int age = 0;     // frames since creation
    int misses = 0;  // consecutive unmatched frames
    std::vector<std::pair<double, dataset::Detection>> history;
};

// Greedy IoU association. Matches are taken in descending IoU order with
// ties broken by lower track_id, then detection input order. Unmatched
// detections spawn new tracks; a track dies once its consecutive misses
// exceed max_misses. Track IDs are never reused within a run.
class Tracker {
public:
    explicit Tracker(TrackerParams params = {}) : params_(params) {}

    // Processes one frame; returns the track id assigned to each detection,
    // in detection input order.
    std::vector<int> step(const std::vector<dataset::Detection>& frame_dets);

    const std::vector<TrackState>& tracks() const { return tracks_; }
    int next_id() const { return next_id_; }

private:
    TrackerParams params_;
    std::vector<TrackState> tracks_;
    int next_id_ = 0;
};

}  // namespace disbeanet::tracker
