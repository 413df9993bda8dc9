#include "disbeanet/synth.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

#include "disbeanet/errors.hpp"
#include "disbeanet/io_util.hpp"

namespace disbeanet::synth {

using nlohmann::json;

void validate(const Scenario& sc) {
    geodesy::validate(sc.camera);
    geodesy::validate(sc.vessel_start);
    if (!std::isfinite(sc.camera_heading_deg)) {
        throw ValidationError("camera heading must be finite");
    }
    if (!(sc.focal_px > 0.0)) throw ValidationError("focal length must be > 0 px");
    if (sc.frame_w <= 0 || sc.frame_h <= 0) {
        throw ValidationError("frame dimensions must be > 0");
    }
    if (!(sc.vessel_speed_kn >= 0.0)) throw ValidationError("speed must be >= 0 kn");
    if (!std::isfinite(sc.vessel_course_deg)) {
        throw ValidationError("course must be finite");
    }
    if (!(sc.vessel_length_m > 0.0) || !(sc.vessel_height_m > 0.0)) {
        throw ValidationError("vessel dimensions must be > 0 m");
    }
    if (!(sc.duration_s > 0.0)) throw ValidationError("duration must be > 0 s");
    if (!(sc.fps > 0.0)) throw ValidationError("fps must be > 0");
    if (!(sc.pixel_jitter_sd >= 0.0)) throw ValidationError("jitter sd must be >= 0");
    if (!(sc.dropout_prob >= 0.0) || sc.dropout_prob >= 1.0) {
        throw ValidationError("dropout must be in [0, 1)");
    }
}

Scenario load_scenario(const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        Scenario sc;
        const json& cam = j.at("camera");
        sc.camera.lat_deg = cam.at("lat_deg").get<double>();
        sc.camera.lon_deg = cam.at("lon_deg").get<double>();
        sc.camera_heading_deg = cam.at("heading_deg").get<double>();
        sc.camera_height_m = cam.at("height_m").get<double>();

        const json& intr = j.at("intrinsics");
        sc.focal_px = intr.at("focal_px").get<double>();
        sc.frame_w = intr.at("frame_w").get<int>();
        sc.frame_h = intr.at("frame_h").get<int>();

        const json& ves = j.at("vessel");
        sc.vessel_start.lat_deg = ves.at("lat_deg").get<double>();
        sc.vessel_start.lon_deg = ves.at("lon_deg").get<double>();
        sc.vessel_speed_kn = ves.at("speed_kn").get<double>();
        sc.vessel_course_deg = ves.at("course_deg").get<double>();
        sc.vessel_length_m = ves.at("length_m").get<double>();
        sc.vessel_height_m = ves.at("height_m").get<double>();

        sc.duration_s = j.at("duration_s").get<double>();
        sc.fps = j.at("fps").get<double>();

        const json& noise = j.at("noise");
        sc.pixel_jitter_sd = noise.at("pixel_jitter_sd").get<double>();
        sc.dropout_prob = noise.at("dropout_prob").get<double>();

        sc.seed = j.at("seed").get<std::uint64_t>();
        validate(sc);
        return sc;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_scenario(const std::string& path, const Scenario& sc) {
    json j = {
        {"camera",
         {{"lat_deg", sc.camera.lat_deg},
          {"lon_deg", sc.camera.lon_deg},
          {"heading_deg", sc.camera_heading_deg},
          {"height_m", sc.camera_height_m}}},
        {"intrinsics",
         {{"focal_px", sc.focal_px},
          {"frame_w", sc.frame_w},
          {"frame_h", sc.frame_h}}},
        {"vessel",
         {{"lat_deg", sc.vessel_start.lat_deg},
          {"lon_deg", sc.vessel_start.lon_deg},
          {"speed_kn", sc.vessel_speed_kn},
          {"course_deg", sc.vessel_course_deg},
          {"length_m", sc.vessel_length_m},
          {"height_m", sc.vessel_height_m}}},
        {"duration_s", sc.duration_s},
        {"fps", sc.fps},
        {"noise",
         {{"pixel_jitter_sd", sc.pixel_jitter_sd},
          {"dropout_prob", sc.dropout_prob}}},
        {"seed", sc.seed},
    };
    io::atomic_write(path, j.dump(2) + "\n");
}

geodesy::GeoPoint propagate(const Scenario& sc, double t,
                            const geodesy::EarthModel& earth) {
    if (!(t >= 0.0) || t > sc.duration_s) {
        throw ValidationError("time outside scenario duration: " + std::to_string(t));
    }
    const geodesy::RangeBearing leg{sc.vessel_speed_kn * t / 3600.0,
                                    geodesy::wrap_deg_360(sc.vessel_course_deg)};
    return geodesy::destination_point(sc.vessel_start, leg, earth);
}

Observation observe(const Scenario& sc, const geodesy::GeoPoint& vessel_pos,
                    Rng& rng, const geodesy::EarthModel& earth) {
    Observation obs;
    obs.truth = geodesy::inverse_problem(sc.camera, vessel_pos, earth);

    const double range_m = obs.truth.distance_nm * geodesy::kMetersPerNm;
    if (range_m <= 0.0) {
        throw DomainError("vessel coincides with the camera");
    }

    const double beta_deg =
        geodesy::wrap_deg_signed(obs.truth.bearing_deg - sc.camera_heading_deg);
    const double half_fov_deg =
        std::atan2(sc.frame_w / 2.0, sc.focal_px) * geodesy::kDegPerRad;
    if (std::abs(beta_deg) >= half_fov_deg) {
        return obs;  // outside the horizontal field of view
    }

    double cx = sc.frame_w / 2.0 +
                sc.focal_px * std::tan(beta_deg * geodesy::kRadPerDeg);
    double cy = sc.frame_h / 2.0;  // horizon line
    double w = sc.focal_px * sc.vessel_length_m / range_m;
    double h = sc.focal_px * sc.vessel_height_m / range_m;
    if (sc.pixel_jitter_sd > 0.0) {
        cx += rng.normal(0.0, sc.pixel_jitter_sd);
        cy += rng.normal(0.0, sc.pixel_jitter_sd);
        w += rng.normal(0.0, sc.pixel_jitter_sd);
        h += rng.normal(0.0, sc.pixel_jitter_sd);
    }

    const double x = cx - w / 2.0;
    const double y = cy - h / 2.0;
    if (!(w > 0.0) || !(h > 0.0) || x < 0.0 || y < 0.0 ||
        x + w > sc.frame_w || y + h > sc.frame_h) {
        return obs;  // box clipped by the frame counts as out of view
    }
    obs.in_fov = true;

    if (sc.dropout_prob > 0.0 && rng.unit() < sc.dropout_prob) {
        obs.dropped = true;
        return obs;
    }

    obs.det.class_id = 0;
    obs.det.x = x;
    obs.det.y = y;
    obs.det.w = w;
    obs.det.h = h;
    obs.det.confidence = 1.0;
    return obs;
}

GenerateSummary generate(const Scenario& sc, const std::string& detections_path,
                         const std::string& truth_path,
                         const geodesy::EarthModel& earth) {
    validate(sc);

    const long n_frames = std::llround(sc.duration_s * sc.fps);
    Rng rng(sc.seed);

    GenerateSummary summary;
    summary.frames = n_frames;

    dataset::DetectionLog log;
    log.frame_w = sc.frame_w;
    log.frame_h = sc.frame_h;
    log.source = "synth";
    std::vector<dataset::GroundTruthRecord> truth;
    truth.reserve(static_cast<std::size_t>(n_frames));

    for (long i = 0; i < n_frames; ++i) {
        const double t = static_cast<double>(i) / sc.fps;
        const geodesy::GeoPoint vessel = propagate(sc, t, earth);
        Observation obs = observe(sc, vessel, rng, earth);

        dataset::GroundTruthRecord rec;
        rec.t = t;
        rec.distance_nm = obs.truth.distance_nm;
        rec.bearing_deg = obs.truth.bearing_deg;
        rec.vessel = vessel;
        rec.camera = sc.camera;
        truth.push_back(rec);

        if (!obs.in_fov) {
            ++summary.out_of_fov;
        } else if (obs.dropped) {
            ++summary.dropouts;
        } else {
            obs.det.frame = i;
            obs.det.t = t;
            log.detections.push_back(obs.det);
            ++summary.detections;
        }
    }

    dataset::save_detections(detections_path, log);
    dataset::save_ground_truth(truth_path, truth);
    return summary;
}

}  // namespace disbeanet::synth
