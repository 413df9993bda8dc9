#include "disbeanet/eval.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

#include "disbeanet/errors.hpp"
#include "disbeanet/io_util.hpp"

namespace disbeanet::eval {

using nlohmann::json;

double rmse(const std::vector<double>& predicted, const std::vector<double>& actual) {
    if (predicted.empty() || predicted.size() != actual.size()) {
        throw ValidationError("rmse requires equal nonempty series");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double e = predicted[i] - actual[i];
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(predicted.size()));
}

double circular_rmse_deg(const std::vector<double>& predicted_deg,
                         const std::vector<double>& actual_deg) {
    if (predicted_deg.empty() || predicted_deg.size() != actual_deg.size()) {
        throw ValidationError("rmse requires equal nonempty series");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted_deg.size(); ++i) {
        const double e = geodesy::wrap_deg_signed(predicted_deg[i] - actual_deg[i]);
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(predicted_deg.size()));
}

EvalReport evaluate(const std::vector<PredSample>& predictions,
                    const std::vector<dataset::GroundTruthRecord>& truth,
                    const std::vector<geodesy::GeoPoint>& cameras,
                    const geodesy::EarthModel& earth) {
    if (predictions.empty()) {
        throw ValidationError("evaluate needs at least one sample");
    }
    if (truth.size() != predictions.size() || cameras.size() != predictions.size()) {
        throw ValidationError("predictions, truth and cameras must have equal length");
    }

    EvalReport report;
    report.n_samples = predictions.size();
    EvalSeries& s = report.series;
    const auto n = predictions.size();
    s.t.reserve(n);

    double position_error_sum_m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const PredSample& p = predictions[i];
        const dataset::GroundTruthRecord& g = truth[i];
        const geodesy::GeoPoint pred_pt =
            geodesy::destination_point(cameras[i], p.rb, earth);

        s.t.push_back(p.t);
        s.dist_pred.push_back(p.rb.distance_nm);
        s.dist_true.push_back(g.distance_nm);
        s.brg_pred.push_back(p.rb.bearing_deg);
        s.brg_true.push_back(g.bearing_deg);
        s.lat_pred.push_back(pred_pt.lat_deg);
        s.lat_true.push_back(g.vessel.lat_deg);
        s.lon_pred.push_back(pred_pt.lon_deg);
        s.lon_true.push_back(g.vessel.lon_deg);

        position_error_sum_m +=
            geodesy::inverse_problem(g.vessel, pred_pt, earth).distance_nm *
            geodesy::kMetersPerNm;
    }

    report.rmse_distance_nm = rmse(s.dist_pred, s.dist_true);
    report.rmse_bearing_deg = circular_rmse_deg(s.brg_pred, s.brg_true);
    report.rmse_bearing_linear_deg = rmse(s.brg_pred, s.brg_true);
    report.rmse_lat_deg = rmse(s.lat_pred, s.lat_true);
    report.rmse_lon_deg = rmse(s.lon_pred, s.lon_true);
    report.mean_position_error_m =
        position_error_sum_m / static_cast<double>(n);
    return report;
}

void emit_report(const EvalReport& report, const std::string& json_path,
                 const std::string& csv_path) {
    json j = {
        {"n_samples", report.n_samples},
        {"rmse_distance_nm", report.rmse_distance_nm},
        {"rmse_bearing_deg", report.rmse_bearing_deg},
        {"rmse_bearing_linear_deg", report.rmse_bearing_linear_deg},
        {"rmse_lat_deg", report.rmse_lat_deg},
        {"rmse_lon_deg", report.rmse_lon_deg},
        {"mean_position_error_m", report.mean_position_error_m},
    };
    io::atomic_write(json_path, j.dump(2) + "\n");

    std::string csv =
        "t,dist_pred,dist_true,brg_pred,brg_true,lat_pred,lat_true,lon_pred,lon_true\n";
    const EvalSeries& s = report.series;
    for (std::size_t i = 0; i < report.n_samples; ++i) {
        csv += io::format_double(s.t[i]);
        csv += ',';
        csv += io::format_double(s.dist_pred[i]);
        csv += ',';
        csv += io::format_double(s.dist_true[i]);
        csv += ',';
        csv += io::format_double(s.brg_pred[i]);
        csv += ',';
        csv += io::format_double(s.brg_true[i]);
        csv += ',';
        csv += io::format_double(s.lat_pred[i]);
        csv += ',';
        csv += io::format_double(s.lat_true[i]);
        csv += ',';
        csv += io::format_double(s.lon_pred[i]);
        csv += ',';
        csv += io::format_double(s.lon_true[i]);
        csv += '\n';
    }
    io::atomic_write(csv_path, csv);
}

}  // namespace disbeanet::eval
