#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "disbeanet/dataset.hpp"
#include "disbeanet/geodesy.hpp"

namespace disbeanet::eval {

// rmse = sqrt(sum((predicted_i - actual_i)^2) / N)
double rmse(const std::vector<double>& predicted, const std::vector<double>& actual);

// RMSE of angular residuals, each wrapped into (-180, +180] first.
double circular_rmse_deg(const std::vector<double>& predicted_deg,
                         const std::vector<double>& actual_deg);

struct PredSample {
    double t = 0.0;
    geodesy::RangeBearing rb;
};

struct EvalSeries {
    std::vector<double> t;
    std::vector<double> dist_pred, dist_true;
    std::vector<double> brg_pred, brg_true;
    std::vector<double> lat_pred, lat_true;
    std::vector<double> lon_pred, lon_true;
};

struct EvalReport {
    std::size_t n_samples = 0;
    double rmse_distance_nm = 0.0;
    double rmse_bearing_deg = 0.0;         // circular residuals
    double rmse_bearing_linear_deg = 0.0;  // raw residuals, as plotted
    double rmse_lat_deg = 0.0;
    double rmse_lon_deg = 0.0;
    double mean_position_error_m = 0.0;
    EvalSeries series;
};

// Predictions, truth and camera positions must already be time-aligned,
// one entry per sample. Predicted positions come from the great-circle
// destination of each camera along the predicted range/bearing.
EvalReport evaluate(const std::vector<PredSample>& predictions,
                    const std::vector<dataset::GroundTruthRecord>& truth,
                    const std::vector<geodesy::GeoPoint>& cameras,
                    const geodesy::EarthModel& earth = {});

// JSON report carries the scalars; the CSV carries the per-sample series
// with columns t,dist_pred,dist_true,brg_pred,brg_true,lat_pred,lat_true,
// lon_pred,lon_true for external plotting.
void emit_report(const EvalReport& report, const std::string& json_path,
                 const std::string& csv_path);

}  // namespace disbeanet::eval
