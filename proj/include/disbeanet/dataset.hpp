#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "disbeanet/geodesy.hpp"

namespace disbeanet::dataset {

// One bounding-box observation in a video frame. x, y are the top-left
// corner in pixels. Confidence is carried through but never used as a
// network input.
struct Detection {
    long frame = 0;
    double t = 0.0;
    int class_id = 0;
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    double confidence = 0.0;
};

// A detection stream plus the frame geometry from its header line.
struct DetectionLog {
    int frame_w = 0;
    int frame_h = 0;
    std::string source;
    std::vector<Detection> detections;
};

// The 7 network inputs, in this order:
//   (cx_n, cy_n, w_n, h_n, area_n, aspect, class_id)
using FeatureVector = std::array<double, 7>;
inline constexpr int kNumFeatures = 7;

struct GroundTruthRecord {
    double t = 0.0;
    double distance_nm = 0.0;
    double bearing_deg = 0.0;
    geodesy::GeoPoint vessel;
    geodesy::GeoPoint camera;
};

struct LabeledSample {
    double t = 0.0;
    FeatureVector features{};
    double target_distance_nm = 0.0;
    double target_bearing_deg = 0.0;
};

enum class BearingEncoding {
    kDegrees,  // regress bearing in degrees directly (default)
    kSinCos,   // regress (sin, cos) and decode with atan2
};

// Z-score statistics fitted on a training split. Targets are
// (distance, bearing) for kDegrees and (distance, sin, cos) for kSinCos.
struct NormStats {
    std::array<double, kNumFeatures> feature_mean{};
    std::array<double, kNumFeatures> feature_sd{};
    std::vector<double> target_mean;
    std::vector<double> target_sd;
    BearingEncoding encoding = BearingEncoding::kDegrees;

    int target_dim() const { return static_cast<int>(target_mean.size()); }
};

struct NormalizedSample {
    std::array<double, kNumFeatures> x{};
    std::vector<double> y;
};

void validate(const Detection& d, int frame_w, int frame_h);

DetectionLog load_detections(const std::string& path);
void save_detections(const std::string& path, const DetectionLog& log);

std::vector<GroundTruthRecord> load_ground_truth(const std::string& path);
void save_ground_truth(const std::string& path,
                       const std::vector<GroundTruthRecord>& records);

FeatureVector extract_features(const Detection& d, int frame_w, int frame_h);

// Ground truth linearly interpolated at time t (bearing on the shortest
// arc). Returns nullopt when the nearest record is further than max_dt.
std::optional<GroundTruthRecord> interpolate_truth(
    const std::vector<GroundTruthRecord>& gts, double t, double max_dt);

struct PairResult {
    std::vector<LabeledSample> samples;
    std::size_t dropped = 0;  // detections with no truth within max_dt
};

PairResult pair_samples(const DetectionLog& dets,
                        const std::vector<GroundTruthRecord>& gts,
                        double max_dt);

struct FitOptions {
    // Constant columns get sd = 1 (they normalize to 0 and carry no signal)
    // instead of raising. The training pipeline enables this: single-class
    // scenes make class_id, and often cy/aspect, exactly constant.
    bool allow_constant = false;
    BearingEncoding encoding = BearingEncoding::kDegrees;
};

NormStats fit_norm_stats(const std::vector<LabeledSample>& samples,
                         const FitOptions& options = {});

NormalizedSample apply_norm(const NormStats& stats, const LabeledSample& sample);

std::array<double, kNumFeatures> apply_feature_norm(const NormStats& stats,
                                                    const FeatureVector& features);

// Maps raw network outputs back to (distance_nm, bearing_deg). The bearing
// is returned unwrapped in kDegrees mode; callers wrap as needed.
std::pair<double, double> invert_norm(const NormStats& stats,
                                      const std::vector<double>& outputs);

struct SplitResult {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> val;
};

SplitResult split(const std::vector<LabeledSample>& samples,
                  double train_fraction, std::uint64_t seed);

}  // namespace disbeanet::dataset
