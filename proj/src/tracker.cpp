#include "disbeanet/tracker.hpp"

#include <algorithm>
#include <tuple>

#include "disbeanet/errors.hpp"

namespace disbeanet::tracker {

double iou(const dataset::Detection& a, const dataset::Detection& b) {
    if (!(a.w > 0.0) || !(a.h > 0.0) || !(b.w > 0.0) || !(b.h > 0.0)) {
        throw ValidationError("iou requires positive box dimensions");
    }
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return inter / uni;
}

std::vector<int> Tracker::step(const std::vector<dataset::Detection>& frame_dets) {
    // (negated iou, track_id, detection index): sorting ascending gives
    // descending IoU with the documented tie-breaks.
    std::vector<std::tuple<double, int, std::size_t>> candidates;
    for (const TrackState& tr : tracks_) {
        for (std::size_t d = 0; d < frame_dets.size(); ++d) {
            const double score = iou(tr.last, frame_dets[d]);
            if (score >= params_.iou_threshold) {
                candidates.emplace_back(-score, tr.track_id, d);
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<int> assignment(frame_dets.size(), -1);
    std::vector<bool> track_used(tracks_.size(), false);
    std::vector<bool> det_used(frame_dets.size(), false);
    for (const auto& [neg_iou, track_id, d] : candidates) {
        if (det_used[d]) continue;
        std::size_t ti = 0;
        while (tracks_[ti].track_id != track_id) ++ti;
        if (track_used[ti]) continue;
        track_used[ti] = true;
        det_used[d] = true;
        TrackState& tr = tracks_[ti];
        tr.last = frame_dets[d];
        tr.misses = 0;
        tr.history.emplace_back(frame_dets[d].t, frame_dets[d]);
        assignment[d] = tr.track_id;
    }

    for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
        ++tracks_[ti].age;
        if (!track_used[ti]) ++tracks_[ti].misses;
    }
    std::erase_if(tracks_, [this](const TrackState& tr) {
        return tr.misses > params_.max_misses;
    });

    for (std::size_t d = 0; d < frame_dets.size(); ++d) {
        if (det_used[d]) continue;
        TrackState tr;
        tr.track_id = next_id_++;
        tr.last = frame_dets[d];
        tr.history.emplace_back(frame_dets[d].t, frame_dets[d]);
        tracks_.push_back(std::move(tr));
        assignment[d] = tracks_.back().track_id;
    }
    return assignment;
}

}  // namespace disbeanet::tracker
