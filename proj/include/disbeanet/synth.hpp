#pragma once

#include <cstdint>
#include <string>

#include "disbeanet/dataset.hpp"
#include "disbeanet/geodesy.hpp"
#include "disbeanet/rng.hpp"

namespace disbeanet::synth {

// Single-vessel open-sea scene: a fixed camera watching a vessel on a
// constant-speed great-circle course, projected with a pinhole model whose
// horizon sits at mid-frame.
struct Scenario {
    geodesy::GeoPoint camera;
    double camera_heading_deg = 0.0;
    double camera_height_m = 10.0;

    double focal_px = 1000.0;
    int frame_w = 1920;
    int frame_h = 1080;

    geodesy::GeoPoint vessel_start;
    double vessel_speed_kn = 0.0;
    double vessel_course_deg = 0.0;
    double vessel_length_m = 20.0;
    double vessel_height_m = 6.0;

    double duration_s = 0.0;
    double fps = 0.0;

    double pixel_jitter_sd = 0.0;
    double dropout_prob = 0.0;

    std::uint64_t seed = 0;
};

void validate(const Scenario& sc);

Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& sc);

// Vessel position at time t by great-circle dead reckoning.
geodesy::GeoPoint propagate(const Scenario& sc, double t,
                            const geodesy::EarthModel& earth = {});

struct Observation {
    geodesy::RangeBearing truth;
    bool in_fov = false;   // box projected fully inside the frame
    bool dropped = false;  // lost to the dropout coin flip
    dataset::Detection det;  // valid when in_fov && !dropped
};

// Projects a vessel position into the camera. Box center x comes from the
// relative bearing via focal * tan(beta); box size from the pinhole ratio
// focal * size_m / range_m; center y sits on the horizon. Jitter and
// dropout draw from rng only when enabled.
Observation observe(const Scenario& sc, const geodesy::GeoPoint& vessel_pos,
                    Rng& rng, const geodesy::EarthModel& earth = {});

struct GenerateSummary {
    long frames = 0;
    long detections = 0;
    long dropouts = 0;
    long out_of_fov = 0;
};

// Emits one frame per 1/fps step: a truth row always, a detection when the
// vessel projects into frame and survives dropout. Output files follow the
// dataset JSONL/CSV formats and are byte-identical for a given seed.
GenerateSummary generate(const Scenario& sc, const std::string& detections_path,
                         const std::string& truth_path,
                         const geodesy::EarthModel& earth = {});

}  // namespace disbeanet::synth
