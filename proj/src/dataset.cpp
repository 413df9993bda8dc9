#include "disbeanet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "disbeanet/errors.hpp"
#include "disbeanet/io_util.hpp"
#include "disbeanet/rng.hpp"

namespace disbeanet::dataset {

using nlohmann::json;

namespace {

const char* const kTruthHeader =
    "t,distance_nm,bearing_deg,lat_deg,lon_deg,cam_lat_deg,cam_lon_deg";

std::string at_line(const std::string& path, std::size_t line) {
    return path + ":" + std::to_string(line);
}

// Columns with spread below this relative floor are treated as constant;
// an exact-zero test would miss constants whose running mean rounds.
bool is_degenerate(double sd, double mean) {
    return sd <= 1e-12 * (std::abs(mean) + 1.0);
}

void mean_and_sd(const std::vector<double>& values, double& mean, double& sd) {
    double sum = 0.0;
    for (double v : values) sum += v;
    mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    sd = std::sqrt(sq / static_cast<double>(values.size()));  // population sd
}

}  // namespace

void validate(const Detection& d, int frame_w, int frame_h) {
    if (d.frame < 0) throw ValidationError("frame index must be >= 0");
    if (!std::isfinite(d.t)) throw ValidationError("detection time must be finite");
    if (d.class_id < 0) throw ValidationError("class id must be >= 0");
    if (!(d.w > 0.0) || !(d.h > 0.0)) {
        throw ValidationError("box width/height must be > 0");
    }
    if (d.x < 0.0 || d.y < 0.0 || d.x + d.w > frame_w || d.y + d.h > frame_h) {
        throw ValidationError("box outside frame bounds");
    }
    if (!(d.confidence >= 0.0) || !(d.confidence <= 1.0)) {
        throw ValidationError("confidence must be in [0, 1]");
    }
}

DetectionLog load_detections(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);

    DetectionLog log;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    double prev_t = -std::numeric_limits<double>::infinity();
    long prev_frame = -1;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(at_line(path, line_no) + ": " + e.what());
        }

        try {
            if (!have_header) {
                if (j.value("type", "") != "header") {
                    throw ParseError(at_line(path, line_no) +
                                     ": first line must be the header object");
                }
                log.frame_w = j.at("frame_w").get<int>();
                log.frame_h = j.at("frame_h").get<int>();
                log.source = j.at("source").get<std::string>();
                if (log.frame_w <= 0 || log.frame_h <= 0) {
                    throw ValidationError(at_line(path, line_no) +
                                          ": frame dimensions must be > 0");
                }
                have_header = true;
                continue;
            }
            Detection d;
            d.frame = j.at("frame").get<long>();
            d.t = j.at("t").get<double>();
            d.class_id = j.at("class").get<int>();
            d.x = j.at("x").get<double>();
            d.y = j.at("y").get<double>();
            d.w = j.at("w").get<double>();
            d.h = j.at("h").get<double>();
            d.confidence = j.at("conf").get<double>();

            try {
                validate(d, log.frame_w, log.frame_h);
            } catch (const ValidationError& e) {
                throw ValidationError(at_line(path, line_no) + ": " + e.what());
            }
            if (d.t < prev_t || d.frame < prev_frame) {
                throw ValidationError(at_line(path, line_no) +
                                      ": detections must be time-ordered");
            }
            prev_t = d.t;
            prev_frame = d.frame;
            log.detections.push_back(d);
        } catch (const json::exception& e) {
            throw ParseError(at_line(path, line_no) + ": " + e.what());
        }
    }
    if (!have_header) {
        throw ParseError(path + ": missing header line");
    }
    return log;
}

void save_detections(const std::string& path, const DetectionLog& log) {
    std::string out;
    json header = {{"type", "header"},
                   {"frame_w", log.frame_w},
                   {"frame_h", log.frame_h},
                   {"source", log.source}};
    out += header.dump();
    out += '\n';
    for (const Detection& d : log.detections) {
        json j = {{"frame", d.frame}, {"t", d.t},  {"class", d.class_id},
                  {"x", d.x},         {"y", d.y},  {"w", d.w},
                  {"h", d.h},         {"conf", d.confidence}};
        out += j.dump();
        out += '\n';
    }
    io::atomic_write(path, out);
}

std::vector<GroundTruthRecord> load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);

    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path + ": empty file, expected CSV header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTruthHeader) {
        throw ParseError(path + ":1: bad header, expected '" +
                         std::string(kTruthHeader) + "'");
    }

    std::vector<GroundTruthRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const auto fields = io::split_csv_line(line);
        if (fields.size() != 7) {
            throw ParseError(at_line(path, line_no) + ": expected 7 columns, got " +
                             std::to_string(fields.size()));
        }
        const std::string where = at_line(path, line_no);
        GroundTruthRecord r;
        r.t = io::parse_double(fields[0], where);
        r.distance_nm = io::parse_double(fields[1], where);
        r.bearing_deg = io::parse_double(fields[2], where);
        r.vessel.lat_deg = io::parse_double(fields[3], where);
        r.vessel.lon_deg = io::parse_double(fields[4], where);
        r.camera.lat_deg = io::parse_double(fields[5], where);
        r.camera.lon_deg = io::parse_double(fields[6], where);

        if (!std::isfinite(r.t)) {
            throw ValidationError(where + ": timestamp must be finite");
        }
        if (r.distance_nm < 0.0) {
            throw ValidationError(where + ": distance must be >= 0");
        }
        if (r.bearing_deg < 0.0 || r.bearing_deg >= 360.0) {
            throw ValidationError(where + ": bearing out of range [0, 360)");
        }
        try {
            geodesy::validate(r.vessel);
            geodesy::validate(r.camera);
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        if (!records.empty() && r.t <= records.back().t) {
            throw ValidationError(where + ": timestamps must be strictly increasing");
        }
        records.push_back(r);
    }
    return records;
}

void save_ground_truth(const std::string& path,
                       const std::vector<GroundTruthRecord>& records) {
    std::string out = kTruthHeader;
    out += '\n';
    for (const GroundTruthRecord& r : records) {
        out += io::format_double(r.t);
        out += ',';
        out += io::format_double(r.distance_nm);
        out += ',';
        out += io::format_double(r.bearing_deg);
        out += ',';
        out += io::format_double(r.vessel.lat_deg);
        out += ',';
        out += io::format_double(r.vessel.lon_deg);
        out += ',';
        out += io::format_double(r.camera.lat_deg);
        out += ',';
        out += io::format_double(r.camera.lon_deg);
        out += '\n';
    }
    io::atomic_write(path, out);
}

FeatureVector extract_features(const Detection& d, int frame_w, int frame_h) {
    if (frame_w <= 0 || frame_h <= 0) {
        throw ValidationError("frame dimensions must be > 0");
    }
    validate(d, frame_w, frame_h);

    const double W = frame_w;
    const double H = frame_h;
    const double w_n = d.w / W;
    const double h_n = d.h / H;
    return FeatureVector{(d.x + d.w / 2.0) / W,
                         (d.y + d.h / 2.0) / H,
                         w_n,
                         h_n,
                         w_n * h_n,
                         d.w / d.h,
                         static_cast<double>(d.class_id)};
}

std::optional<GroundTruthRecord> interpolate_truth(
    const std::vector<GroundTruthRecord>& gts, double t, double max_dt) {
    if (gts.empty()) return std::nullopt;

    const auto it = std::lower_bound(
        gts.begin(), gts.end(), t,
        [](const GroundTruthRecord& r, double value) { return r.t < value; });

    if (it != gts.end() && it->t == t) return *it;  // exact hit, no blending

    if (it == gts.begin()) {
        if (gts.front().t - t > max_dt) return std::nullopt;
        GroundTruthRecord r = gts.front();
        r.t = t;
        return r;
    }
    if (it == gts.end()) {
        if (t - gts.back().t > max_dt) return std::nullopt;
        GroundTruthRecord r = gts.back();
        r.t = t;
        return r;
    }

    const GroundTruthRecord& lo = *(it - 1);
    const GroundTruthRecord& hi = *it;
    if (std::min(t - lo.t, hi.t - t) > max_dt) return std::nullopt;

    const double alpha = (t - lo.t) / (hi.t - lo.t);
    GroundTruthRecord r;
    r.t = t;
    r.distance_nm = lo.distance_nm + alpha * (hi.distance_nm - lo.distance_nm);
    r.bearing_deg = geodesy::circular_lerp_deg(lo.bearing_deg, hi.bearing_deg, alpha);
    r.vessel.lat_deg = lo.vessel.lat_deg + alpha * (hi.vessel.lat_deg - lo.vessel.lat_deg);
    r.vessel.lon_deg = lo.vessel.lon_deg + alpha * (hi.vessel.lon_deg - lo.vessel.lon_deg);
    r.camera.lat_deg = lo.camera.lat_deg + alpha * (hi.camera.lat_deg - lo.camera.lat_deg);
    r.camera.lon_deg = lo.camera.lon_deg + alpha * (hi.camera.lon_deg - lo.camera.lon_deg);
    return r;
}

PairResult pair_samples(const DetectionLog& dets,
                        const std::vector<GroundTruthRecord>& gts,
                        double max_dt) {
    if (!(max_dt >= 0.0)) throw ValidationError("max_dt must be >= 0");

    PairResult result;
    result.samples.reserve(dets.detections.size());
    for (const Detection& d : dets.detections) {
        const auto truth = interpolate_truth(gts, d.t, max_dt);
        if (!truth) {
            ++result.dropped;
            continue;
        }
        LabeledSample s;
        s.t = d.t;
        s.features = extract_features(d, dets.frame_w, dets.frame_h);
        s.target_distance_nm = truth->distance_nm;
        s.target_bearing_deg = truth->bearing_deg;
        result.samples.push_back(s);
    }
    return result;
}

NormStats fit_norm_stats(const std::vector<LabeledSample>& samples,
                         const FitOptions& options) {
    if (samples.size() < 2) {
        throw ValidationError("need at least 2 samples to fit normalization");
    }

    NormStats stats;
    stats.encoding = options.encoding;

    std::vector<double> column(samples.size());
    for (int f = 0; f < kNumFeatures; ++f) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            column[i] = samples[i].features[static_cast<std::size_t>(f)];
        }
        double mean = 0.0, sd = 0.0;
        mean_and_sd(column, mean, sd);
        if (is_degenerate(sd, mean)) {
            if (!options.allow_constant) {
                throw ValidationError("feature " + std::to_string(f) +
                                      " has zero variance");
            }
            sd = 1.0;
        }
        stats.feature_mean[static_cast<std::size_t>(f)] = mean;
        stats.feature_sd[static_cast<std::size_t>(f)] = sd;
    }

    const int n_targets = options.encoding == BearingEncoding::kDegrees ? 2 : 3;
    stats.target_mean.resize(static_cast<std::size_t>(n_targets));
    stats.target_sd.resize(static_cast<std::size_t>(n_targets));
    for (int tcol = 0; tcol < n_targets; ++tcol) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const LabeledSample& s = samples[i];
            double v = 0.0;
            if (tcol == 0) {
                v = s.target_distance_nm;
            } else if (options.encoding == BearingEncoding::kDegrees) {
                v = s.target_bearing_deg;
            } else {
                const double rad = s.target_bearing_deg * geodesy::kRadPerDeg;
                v = tcol == 1 ? std::sin(rad) : std::cos(rad);
            }
            column[i] = v;
        }
        double mean = 0.0, sd = 0.0;
        mean_and_sd(column, mean, sd);
        if (is_degenerate(sd, mean)) {
            if (!options.allow_constant) {
                throw ValidationError("target " + std::to_string(tcol) +
                                      " has zero variance");
            }
            sd = 1.0;
        }
        stats.target_mean[static_cast<std::size_t>(tcol)] = mean;
        stats.target_sd[static_cast<std::size_t>(tcol)] = sd;
    }
    return stats;
}

std::array<double, kNumFeatures> apply_feature_norm(const NormStats& stats,
                                                    const FeatureVector& features) {
    std::array<double, kNumFeatures> x{};
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
        x[f] = (features[f] - stats.feature_mean[f]) / stats.feature_sd[f];
    }
    return x;
}

NormalizedSample apply_norm(const NormStats& stats, const LabeledSample& sample) {
    NormalizedSample out;
    out.x = apply_feature_norm(stats, sample.features);
    out.y.resize(stats.target_mean.size());
    out.y[0] = (sample.target_distance_nm - stats.target_mean[0]) / stats.target_sd[0];
    if (stats.encoding == BearingEncoding::kDegrees) {
        out.y[1] = (sample.target_bearing_deg - stats.target_mean[1]) / stats.target_sd[1];
    } else {
        const double rad = sample.target_bearing_deg * geodesy::kRadPerDeg;
        out.y[1] = (std::sin(rad) - stats.target_mean[1]) / stats.target_sd[1];
        out.y[2] = (std::cos(rad) - stats.target_mean[2]) / stats.target_sd[2];
    }
    return out;
}

std::pair<double, double> invert_norm(const NormStats& stats,
                                      const std::vector<double>& outputs) {
    if (outputs.size() != stats.target_mean.size()) {
        throw ValidationError("output size does not match normalization stats");
    }
    const double distance = outputs[0] * stats.target_sd[0] + stats.target_mean[0];
    double bearing = 0.0;
    if (stats.encoding == BearingEncoding::kDegrees) {
        bearing = outputs[1] * stats.target_sd[1] + stats.target_mean[1];
    } else {
        const double s = outputs[1] * stats.target_sd[1] + stats.target_mean[1];
        const double c = outputs[2] * stats.target_sd[2] + stats.target_mean[2];
        bearing = geodesy::wrap_deg_360(std::atan2(s, c) * geodesy::kDegPerRad);
    }
    return {distance, bearing};
}

SplitResult split(const std::vector<LabeledSample>& samples,
                  double train_fraction, std::uint64_t seed) {
    if (samples.size() < 2) {
        throw ValidationError("need at least 2 samples to split");
    }
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw ValidationError("train fraction must be in (0, 1)");
    }

    std::vector<std::size_t> idx(samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);

    const auto n = static_cast<double>(samples.size());
    auto n_train = static_cast<std::size_t>(std::llround(n * train_fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, samples.size() - 1);

    SplitResult out;
    out.train.reserve(n_train);
    out.val.reserve(samples.size() - n_train);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        (i < n_train ? out.train : out.val).push_back(samples[idx[i]]);
    }
    return out;
}

}  // namespace disbeanet::dataset
