#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "disbeanet/dataset.hpp"
#include "disbeanet/geodesy.hpp"
#include "disbeanet/mlp.hpp"
#include "disbeanet/tracker.hpp"

namespace disbeanet::cli {

// Exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericError = 3;

struct TrainSettings {
    mlp::TrainConfig config;
    int hidden_width = 16;
    int depth = 3;  // hidden layers; the published architecture uses 3
    double train_fraction = 0.8;
    double max_dt_s = 0.5;
    dataset::BearingEncoding bearing_encoding = dataset::BearingEncoding::kDegrees;
    mlp::Activation activation = mlp::Activation::kTanh;
};

struct PipelineConfig {
    std::optional<std::uint64_t> seed;  // overrides scenario/train seeds when set
    double earth_radius_nm = geodesy::kEarthRadiusNm;

    std::string out_dir = "out";
    std::string scenario_path;

    // Filled from "paths" or defaulted under out_dir.
    std::string detections_path;
    std::string truth_path;
    std::string model_path;
    std::string predictions_path;
    std::string tracks_geojson_path;
    std::string tracks_csv_path;
    std::string report_json_path;
    std::string report_csv_path;
    std::string sweep_csv_path;
    std::string summary_path;

    tracker::TrackerParams tracker;
    TrainSettings train;
    std::optional<geodesy::GeoPoint> fixed_camera;  // georef fallback camera
    double join_max_dt_s = 0.5;
};

// Loads a config JSON (all keys optional), resolves path defaults and
// applies the DISBEANET_SEED environment override.
PipelineConfig load_config(const std::string& path);
PipelineConfig default_config();
void resolve_paths(PipelineConfig& cfg);
void apply_env_seed(PipelineConfig& cfg);

int cmd_synth(const PipelineConfig& cfg);
int cmd_train(const PipelineConfig& cfg,
              const std::optional<std::vector<int>>& sweep_depths = std::nullopt);
int cmd_track_predict(const PipelineConfig& cfg);
int cmd_georef(const PipelineConfig& cfg);
int cmd_eval(const PipelineConfig& cfg);

// Full argv-style entry point used by main(); returns the process exit code.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace disbeanet::cli
