#include "disbeanet/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "disbeanet/errors.hpp"
#include "disbeanet/eval.hpp"
#include "disbeanet/io_util.hpp"
#include "disbeanet/synth.hpp"

namespace disbeanet::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* const kPredictionsHeader = "t,track_id,distance_nm,bearing_deg";

void require_input(const std::string& path, const char* what) {
    if (path.empty()) {
        throw ValidationError(std::string(what) + " path is not configured");
    }
    if (!fs::exists(path)) {
        throw ValidationError(std::string(what) + " file not found: " + path);
    }
}

struct PredictionRow {
    double t = 0.0;
    int track_id = 0;
    geodesy::RangeBearing rb;
};

std::vector<PredictionRow> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path + ": empty file, expected CSV header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kPredictionsHeader) {
        throw ParseError(path + ":1: bad header, expected '" +
                         std::string(kPredictionsHeader) + "'");
    }
    std::vector<PredictionRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = io::split_csv_line(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (fields.size() != 4) {
            throw ParseError(where + ": expected 4 columns");
        }
        PredictionRow r;
        r.t = io::parse_double(fields[0], where);
        r.track_id = static_cast<int>(io::parse_long(fields[1], where));
        r.rb.distance_nm = io::parse_double(fields[2], where);
        r.rb.bearing_deg = io::parse_double(fields[3], where);
        rows.push_back(r);
    }
    return rows;
}

void save_predictions(const std::string& path, const std::vector<PredictionRow>& rows) {
    std::string out = kPredictionsHeader;
    out += '\n';
    for (const PredictionRow& r : rows) {
        out += io::format_double(r.t);
        out += ',';
        out += std::to_string(r.track_id);
        out += ',';
        out += io::format_double(r.rb.distance_nm);
        out += ',';
        out += io::format_double(r.rb.bearing_deg);
        out += '\n';
    }
    io::atomic_write(path, out);
}

// Physical-unit error of a trained net on normalized samples.
std::pair<double, double> physical_rmse(const mlp::Network& net,
                                        const dataset::NormStats& stats,
                                        const std::vector<mlp::TrainSample>& samples) {
    std::vector<double> dp, dt, bp, bt;
    dp.reserve(samples.size());
    for (const mlp::TrainSample& s : samples) {
        const std::vector<double> out = mlp::forward(net, s.x);
        const auto [d_pred, b_pred] = dataset::invert_norm(stats, out);
        const auto [d_true, b_true] = dataset::invert_norm(stats, s.y);
        dp.push_back(d_pred);
        dt.push_back(d_true);
        bp.push_back(geodesy::wrap_deg_360(b_pred));
        bt.push_back(geodesy::wrap_deg_360(b_true));
    }
    return {eval::rmse(dp, dt), eval::circular_rmse_deg(bp, bt)};
}

mlp::Optimizer optimizer_from_name(const std::string& name) {
    if (name == "sgd") return mlp::Optimizer::kSgdMomentum;
    if (name == "adam") return mlp::Optimizer::kAdam;
    throw ValidationError("unknown optimizer: " + name + " (expected sgd or adam)");
}

int dispatch(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const TrainingDiverged& e) {
        std::cerr << "disbeanet: " << e.what() << "\n";
        return kExitNumericError;
    } catch (const std::exception& e) {
        std::cerr << "disbeanet: " << e.what() << "\n";
        return kExitInputError;
    }
}

}  // namespace

PipelineConfig default_config() {
    PipelineConfig cfg;
    resolve_paths(cfg);
    return cfg;
}

void resolve_paths(PipelineConfig& cfg) {
    const fs::path out(cfg.out_dir);
    auto fill = [&](std::string& field, const char* name) {
        if (field.empty()) field = (out / name).string();
    };
    fill(cfg.detections_path, "detections.jsonl");
    fill(cfg.truth_path, "truth.csv");
    fill(cfg.model_path, "model.json");
    fill(cfg.predictions_path, "predictions.csv");
    fill(cfg.tracks_geojson_path, "tracks.geojson");
    fill(cfg.tracks_csv_path, "tracks.csv");
    fill(cfg.report_json_path, "report.json");
    fill(cfg.report_csv_path, "report.csv");
    fill(cfg.sweep_csv_path, "sweep.csv");
    fill(cfg.summary_path, "summary.json");
}

void apply_env_seed(PipelineConfig& cfg) {
    const char* env = std::getenv("DISBEANET_SEED");
    if (!env || !*env) return;
    cfg.seed = static_cast<std::uint64_t>(
        io::parse_long(env, "DISBEANET_SEED environment variable"));
}

PipelineConfig load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }

    PipelineConfig cfg;
    try {
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.earth_radius_nm = j.value("earth_radius_nm", cfg.earth_radius_nm);
        cfg.out_dir = j.value("out_dir", cfg.out_dir);
        cfg.scenario_path = j.value("scenario", cfg.scenario_path);
        cfg.join_max_dt_s = j.value("join_max_dt_s", cfg.join_max_dt_s);

        if (j.contains("paths")) {
            const json& p = j.at("paths");
            cfg.detections_path = p.value("detections", "");
            cfg.truth_path = p.value("truth", "");
            cfg.model_path = p.value("model", "");
            cfg.predictions_path = p.value("predictions", "");
            cfg.tracks_geojson_path = p.value("tracks_geojson", "");
            cfg.tracks_csv_path = p.value("tracks_csv", "");
            cfg.report_json_path = p.value("report_json", "");
            cfg.report_csv_path = p.value("report_csv", "");
            cfg.sweep_csv_path = p.value("sweep_csv", "");
            cfg.summary_path = p.value("summary", "");
        }

        if (j.contains("tracker")) {
            const json& t = j.at("tracker");
            cfg.tracker.iou_threshold = t.value("iou_threshold", cfg.tracker.iou_threshold);
            cfg.tracker.max_misses = t.value("max_misses", cfg.tracker.max_misses);
        }

        if (j.contains("train")) {
            const json& t = j.at("train");
            mlp::TrainConfig& tc = cfg.train.config;
            tc.epochs = t.value("epochs", tc.epochs);
            tc.batch_size = t.value("batch_size", tc.batch_size);
            tc.learning_rate = t.value("learning_rate", tc.learning_rate);
            if (t.contains("optimizer")) {
                tc.optimizer = optimizer_from_name(t.at("optimizer").get<std::string>());
            }
            tc.momentum = t.value("momentum", tc.momentum);
            tc.seed = t.value("seed", tc.seed);
            tc.patience = t.value("patience", tc.patience);
            cfg.train.hidden_width = t.value("hidden_width", cfg.train.hidden_width);
            cfg.train.depth = t.value("depth", cfg.train.depth);
            cfg.train.train_fraction = t.value("train_fraction", cfg.train.train_fraction);
            cfg.train.max_dt_s = t.value("max_dt_s", cfg.train.max_dt_s);
            if (t.contains("bearing_encoding")) {
                const auto enc = t.at("bearing_encoding").get<std::string>();
                if (enc == "degrees") {
                    cfg.train.bearing_encoding = dataset::BearingEncoding::kDegrees;
                } else if (enc == "sincos") {
                    cfg.train.bearing_encoding = dataset::BearingEncoding::kSinCos;
                } else {
                    throw ValidationError("unknown bearing_encoding: " + enc);
                }
            }
            if (t.contains("activation")) {
                const auto act = t.at("activation").get<std::string>();
                if (act == "tanh") {
                    cfg.train.activation = mlp::Activation::kTanh;
                } else if (act == "relu") {
                    cfg.train.activation = mlp::Activation::kRelu;
                } else {
                    throw ValidationError("unknown activation: " + act);
                }
            }
        }

        if (j.contains("camera")) {
            const json& c = j.at("camera");
            cfg.fixed_camera = geodesy::GeoPoint{c.at("lat_deg").get<double>(),
                                                 c.at("lon_deg").get<double>()};
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }

    resolve_paths(cfg);
    apply_env_seed(cfg);
    return cfg;
}

int cmd_synth(const PipelineConfig& cfg) {
    return dispatch([&]() {
        require_input(cfg.scenario_path, "scenario");
        synth::Scenario sc = synth::load_scenario(cfg.scenario_path);
        if (cfg.seed) sc.seed = *cfg.seed;

        const geodesy::EarthModel earth{cfg.earth_radius_nm};
        const synth::GenerateSummary summary =
            synth::generate(sc, cfg.detections_path, cfg.truth_path, earth);

        json j = {{"frames", summary.frames},
                  {"detections", summary.detections},
                  {"dropouts", summary.dropouts},
                  {"out_of_fov", summary.out_of_fov},
                  {"seed", sc.seed}};
        io::atomic_write(cfg.summary_path, j.dump(2) + "\n");

        std::cout << "synth: " << summary.frames << " frames, "
                  << summary.detections << " detections, " << summary.dropouts
                  << " dropouts, " << summary.out_of_fov << " out of view\n";
        return kExitOk;
    });
}

int cmd_train(const PipelineConfig& cfg,
              const std::optional<std::vector<int>>& sweep_depths) {
    return dispatch([&]() {
        require_input(cfg.detections_path, "detections");
        require_input(cfg.truth_path, "truth");

        const dataset::DetectionLog log = dataset::load_detections(cfg.detections_path);
        const auto truth = dataset::load_ground_truth(cfg.truth_path);
        const dataset::PairResult paired =
            dataset::pair_samples(log, truth, cfg.train.max_dt_s);
        std::cout << "paired " << paired.samples.size() << " samples ("
                  << paired.dropped << " dropped)\n";

        const std::uint64_t seed = cfg.seed.value_or(cfg.train.config.seed);
        mlp::TrainConfig train_cfg = cfg.train.config;
        train_cfg.seed = seed;

        const dataset::SplitResult splits =
            dataset::split(paired.samples, cfg.train.train_fraction, seed);
        const dataset::NormStats stats = dataset::fit_norm_stats(
            splits.train, {.allow_constant = true, .encoding = cfg.train.bearing_encoding});
        const auto train_set = mlp::to_train_samples(stats, splits.train);
        const auto val_set = mlp::to_train_samples(stats, splits.val);

        if (sweep_depths) {
            const auto rows = mlp::hidden_layer_sweep(
                train_set, val_set, stats, cfg.train.hidden_width, *sweep_depths,
                train_cfg);
            std::string csv = "depth,val_rmse_norm,val_rmse_distance_nm,val_rmse_bearing_deg\n";
            for (const mlp::SweepRow& r : rows) {
                csv += std::to_string(r.depth);
                csv += ',';
                csv += io::format_double(r.val_rmse_norm);
                csv += ',';
                csv += io::format_double(r.val_rmse_distance_nm);
                csv += ',';
                csv += io::format_double(r.val_rmse_bearing_deg);
                csv += '\n';
                std::cout << "depth " << r.depth << ": val rmse distance "
                          << r.val_rmse_distance_nm << " NM, bearing "
                          << r.val_rmse_bearing_deg << " deg\n";
            }
            io::atomic_write(cfg.sweep_csv_path, csv);
            std::cout << "sweep table written: " << cfg.sweep_csv_path << "\n";
            return kExitOk;
        }

        mlp::Network net = mlp::init(
            mlp::make_spec(cfg.train.hidden_width, cfg.train.depth,
                           cfg.train.activation, stats.target_dim()),
            seed);
        net.norm = stats;
        const mlp::TrainResult result = mlp::train(net, train_set, val_set, train_cfg);
        net.norm = stats;  // train() keeps best params; stats unchanged

        const auto [train_d, train_b] = physical_rmse(net, stats, train_set);
        const auto [val_d, val_b] = physical_rmse(net, stats, val_set);
        std::cout << "trained " << result.epochs_run << " epochs (best epoch "
                  << result.best_epoch << ")\n"
                  << "rmse train: distance " << train_d << " NM, bearing "
                  << train_b << " deg\n"
                  << "rmse val:   distance " << val_d << " NM, bearing "
                  << val_b << " deg\n";

        mlp::save_model(net, cfg.model_path);
        std::cout << "model saved: " << cfg.model_path << "\n";
        return kExitOk;
    });
}

int cmd_track_predict(const PipelineConfig& cfg) {
    return dispatch([&]() {
        require_input(cfg.model_path, "model");
        require_input(cfg.detections_path, "detections");

        const mlp::Network net = mlp::load_model(cfg.model_path);
        const dataset::DetectionLog log = dataset::load_detections(cfg.detections_path);

        tracker::Tracker trk(cfg.tracker);
        std::vector<PredictionRow> rows;
        rows.reserve(log.detections.size());

        std::vector<dataset::Detection> frame;
        std::size_t i = 0;
        while (i < log.detections.size()) {
            frame.clear();
            const long frame_no = log.detections[i].frame;
            while (i < log.detections.size() && log.detections[i].frame == frame_no) {
                frame.push_back(log.detections[i]);
                ++i;
            }
            const std::vector<int> ids = trk.step(frame);
            for (std::size_t d = 0; d < frame.size(); ++d) {
                const mlp::Prediction p =
                    mlp::predict(net, frame[d], log.frame_w, log.frame_h);
                rows.push_back(PredictionRow{frame[d].t, ids[d], p.rb});
            }
        }

        save_predictions(cfg.predictions_path, rows);
        std::cout << "predictions written: " << cfg.predictions_path << " ("
                  << rows.size() << " rows)\n";
        return kExitOk;
    });
}

int cmd_georef(const PipelineConfig& cfg) {
    return dispatch([&]() {
        require_input(cfg.predictions_path, "predictions");
        const auto preds = load_predictions(cfg.predictions_path);

        std::vector<dataset::GroundTruthRecord> truth;
        const bool have_truth = fs::exists(cfg.truth_path);
        if (have_truth) {
            truth = dataset::load_ground_truth(cfg.truth_path);
        } else if (!cfg.fixed_camera) {
            throw ValidationError(
                "no camera source: truth file missing and no fixed camera configured");
        }

        const geodesy::EarthModel earth{cfg.earth_radius_nm};
        // track_id -> (t, point) in file order
        std::map<int, std::vector<std::pair<double, geodesy::GeoPoint>>> tracks;
        for (const PredictionRow& p : preds) {
            geodesy::GeoPoint camera;
            if (have_truth) {
                const auto rec = dataset::interpolate_truth(truth, p.t, cfg.join_max_dt_s);
                if (!rec) {
                    throw ValidationError("no camera position within " +
                                          io::format_double(cfg.join_max_dt_s) +
                                          " s of t=" + io::format_double(p.t));
                }
                camera = rec->camera;
            } else {
                camera = *cfg.fixed_camera;
            }
            tracks[p.track_id].emplace_back(
                p.t, geodesy::destination_point(camera, p.rb, earth));
        }

        std::string csv = "t,track_id,lat_deg,lon_deg\n";
        json features = json::array();
        for (const auto& [track_id, points] : tracks) {
            json coords = json::array();
            for (const auto& [t, pt] : points) {
                coords.push_back({pt.lon_deg, pt.lat_deg});  // GeoJSON order
                csv += io::format_double(t);
                csv += ',';
                csv += std::to_string(track_id);
                csv += ',';
                csv += io::format_double(pt.lat_deg);
                csv += ',';
                csv += io::format_double(pt.lon_deg);
                csv += '\n';
            }
            features.push_back({{"type", "Feature"},
                                {"properties", {{"track_id", track_id}}},
                                {"geometry",
                                 {{"type", "LineString"},
                                  {"coordinates", coords}}}});
        }
        json geo = {{"type", "FeatureCollection"}, {"features", features}};

        io::atomic_write(cfg.tracks_geojson_path, geo.dump(2) + "\n");
        io::atomic_write(cfg.tracks_csv_path, csv);
        std::cout << "tracks written: " << cfg.tracks_geojson_path << ", "
                  << cfg.tracks_csv_path << " (" << tracks.size() << " tracks)\n";
        return kExitOk;
    });
}

int cmd_eval(const PipelineConfig& cfg) {
    return dispatch([&]() {
        require_input(cfg.predictions_path, "predictions");
        require_input(cfg.truth_path, "truth");

        const auto preds = load_predictions(cfg.predictions_path);
        const auto truth = dataset::load_ground_truth(cfg.truth_path);

        std::vector<eval::PredSample> samples;
        std::vector<dataset::GroundTruthRecord> aligned;
        std::vector<geodesy::GeoPoint> cameras;
        samples.reserve(preds.size());
        for (const PredictionRow& p : preds) {
            const auto rec = dataset::interpolate_truth(truth, p.t, cfg.join_max_dt_s);
            if (!rec) {
                throw ValidationError("no ground truth within " +
                                      io::format_double(cfg.join_max_dt_s) +
                                      " s of t=" + io::format_double(p.t));
            }
            samples.push_back(eval::PredSample{p.t, p.rb});
            aligned.push_back(*rec);
            cameras.push_back(rec->camera);
        }

        const geodesy::EarthModel earth{cfg.earth_radius_nm};
        const eval::EvalReport report = eval::evaluate(samples, aligned, cameras, earth);
        eval::emit_report(report, cfg.report_json_path, cfg.report_csv_path);

        std::cout << "rmse distance: " << report.rmse_distance_nm << " NM\n"
                  << "rmse bearing (circular): " << report.rmse_bearing_deg << " deg\n"
                  << "rmse lat: " << report.rmse_lat_deg << " deg\n"
                  << "rmse lon: " << report.rmse_lon_deg << " deg\n"
                  << "mean position error: " << report.mean_position_error_m << " m\n"
                  << "report written: " << cfg.report_json_path << "\n";
        return kExitOk;
    });
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"DisBeaNet maritime geolocation pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string scenario_override;
    std::string out_dir_override;
    std::optional<std::uint64_t> seed_override;
    int depth_override = -1;
    long epochs_override = -1;
    std::string sweep_arg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "pipeline config JSON");
        sub->add_option("--seed", seed_override, "override every component seed");
        sub->add_option("--out-dir", out_dir_override, "output directory");
    };

    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic scenario");
    add_common(synth_cmd);
    synth_cmd->add_option("--scenario", scenario_override, "scenario JSON path");

    CLI::App* train_cmd = app.add_subcommand("train", "train the range/bearing network");
    add_common(train_cmd);
    train_cmd->add_option("--depth", depth_override, "hidden layer count");
    train_cmd->add_option("--epochs", epochs_override, "training epochs");
    train_cmd->add_option("--sweep", sweep_arg,
                          "comma-separated hidden depths to compare");

    CLI::App* track_cmd =
        app.add_subcommand("track-predict", "associate tracks and predict range/bearing");
    add_common(track_cmd);

    CLI::App* georef_cmd =
        app.add_subcommand("georef", "convert predictions to geographic tracks");
    add_common(georef_cmd);

    CLI::App* eval_cmd = app.add_subcommand("eval", "score predictions against truth");
    add_common(eval_cmd);

    // CLI11 wants argv reversed, without the program name.
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInputError;
    }

    PipelineConfig cfg;
    try {
        if (!config_path.empty()) {
            cfg = load_config(config_path);
        } else {
            cfg = default_config();
            apply_env_seed(cfg);
        }
        if (!out_dir_override.empty()) {
            cfg.out_dir = out_dir_override;
            cfg.detections_path.clear();
            cfg.truth_path.clear();
            cfg.model_path.clear();
            cfg.predictions_path.clear();
            cfg.tracks_geojson_path.clear();
            cfg.tracks_csv_path.clear();
            cfg.report_json_path.clear();
            cfg.report_csv_path.clear();
            cfg.sweep_csv_path.clear();
            cfg.summary_path.clear();
            resolve_paths(cfg);
        }
        if (!scenario_override.empty()) cfg.scenario_path = scenario_override;
        if (seed_override) cfg.seed = seed_override;
        if (depth_override > 0) cfg.train.depth = depth_override;
        if (epochs_override > 0) cfg.train.config.epochs = epochs_override;
    } catch (const std::exception& e) {
        std::cerr << "disbeanet: " << e.what() << "\n";
        return kExitInputError;
    }

    if (synth_cmd->parsed()) return cmd_synth(cfg);
    if (train_cmd->parsed()) {
        std::optional<std::vector<int>> sweep;
        if (!sweep_arg.empty()) {
            std::vector<int> depths;
            std::stringstream ss(sweep_arg);
            std::string item;
            while (std::getline(ss, item, ',')) {
                try {
                    depths.push_back(static_cast<int>(
                        io::parse_long(item, "--sweep")));
                } catch (const std::exception& e) {
                    std::cerr << "disbeanet: " << e.what() << "\n";
                    return kExitInputError;
                }
            }
            sweep = depths;
        }
        return cmd_train(cfg, sweep);
    }
    if (track_cmd->parsed()) return cmd_track_predict(cfg);
    if (georef_cmd->parsed()) return cmd_georef(cfg);
    if (eval_cmd->parsed()) return cmd_eval(cfg);
    return kExitInputError;
}

int run(int argc, const char* const* argv) {
    return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace disbeanet::cli
