#include "disbeanet/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "disbeanet/errors.hpp"

namespace disbeanet::geodesy {

double normalize_lon(double lon_deg) {
    if (!std::isfinite(lon_deg)) {
        throw ValidationError("longitude must be finite");
    }
    double x = std::fmod(lon_deg, 360.0);  // (-360, 360)
    if (x <= -180.0) {
        x += 360.0;
    } else if (x > 180.0) {
        x -= 360.0;
    }
    return x;
}

double wrap_deg_360(double deg) {
    double x = std::fmod(deg, 360.0);
    if (x < 0.0) x += 360.0;
    if (x >= 360.0) x = 0.0;  // fmod rounding can land exactly on 360
    return x;
}

double wrap_deg_signed(double deg) {
    double x = std::fmod(deg, 360.0);
    if (x <= -180.0) {
        x += 360.0;
    } else if (x > 180.0) {
        x -= 360.0;
    }
    return x;
}

double circular_lerp_deg(double a_deg, double b_deg, double alpha) {
    const double delta = wrap_deg_signed(b_deg - a_deg);
    return wrap_deg_360(a_deg + alpha * delta);
}

void validate(const GeoPoint& p) {
    if (!std::isfinite(p.lat_deg) || p.lat_deg < -90.0 || p.lat_deg > 90.0) {
        throw ValidationError("latitude out of range [-90, 90]: " +
                              std::to_string(p.lat_deg));
    }
    if (!std::isfinite(p.lon_deg) || p.lon_deg <= -180.0 || p.lon_deg > 180.0) {
        throw ValidationError("longitude out of range (-180, 180]: " +
                              std::to_string(p.lon_deg));
    }
}

void validate(const RangeBearing& rb) {
    if (!std::isfinite(rb.distance_nm) || rb.distance_nm < 0.0) {
        throw ValidationError("distance must be >= 0 NM: " +
                              std::to_string(rb.distance_nm));
    }
    if (!std::isfinite(rb.bearing_deg) || rb.bearing_deg < 0.0 ||
        rb.bearing_deg >= 360.0) {
        throw ValidationError("bearing out of range [0, 360): " +
                              std::to_string(rb.bearing_deg));
    }
}

void validate(const EarthModel& e) {
    if (!std::isfinite(e.radius_nm) || e.radius_nm <= 0.0) {
        throw ValidationError("earth radius must be > 0 NM");
    }
}

GeoPoint destination_point(const GeoPoint& origin, const RangeBearing& obs,
                           const EarthModel& earth) {
    validate(origin);
    validate(obs);
    validate(earth);
    if (obs.distance_nm >= kPi * earth.radius_nm) {
        throw DomainError("distance reaches the antipode: " +
                          std::to_string(obs.distance_nm) + " NM");
    }

    const double delta = obs.distance_nm / earth.radius_nm;  // angular distance
    const double theta = obs.bearing_deg * kRadPerDeg;
    const double phi1 = origin.lat_deg * kRadPerDeg;
    const double lam1 = origin.lon_deg * kRadPerDeg;

    const double sin_phi2 = std::clamp(
        std::sin(phi1) * std::cos(delta) +
            std::cos(phi1) * std::sin(delta) * std::cos(theta),
        -1.0, 1.0);
    const double phi2 = std::asin(sin_phi2);
    const double lam2 =
        lam1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                          std::cos(delta) - std::sin(phi1) * sin_phi2);

    return GeoPoint{phi2 * kDegPerRad, normalize_lon(lam2 * kDegPerRad)};
}

RangeBearing inverse_problem(const GeoPoint& origin, const GeoPoint& target,
                             const EarthModel& earth) {
    validate(origin);
    validate(target);
    validate(earth);

    const double phi1 = origin.lat_deg * kRadPerDeg;
    const double phi2 = target.lat_deg * kRadPerDeg;
    const double dphi = (target.lat_deg - origin.lat_deg) * kRadPerDeg;
    const double dlam = (target.lon_deg - origin.lon_deg) * kRadPerDeg;

    const double sin_dphi2 = std::sin(0.5 * dphi);
    const double sin_dlam2 = std::sin(0.5 * dlam);
    const double a = std::clamp(sin_dphi2 * sin_dphi2 +
                                    std::cos(phi1) * std::cos(phi2) *
                                        sin_dlam2 * sin_dlam2,
                                0.0, 1.0);
    const double c = 2.0 * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));

    if (c >= kPi - 1e-9) {
        throw DomainError("antipodal points: initial bearing is undefined");
    }
    if (a == 0.0) {
        return RangeBearing{0.0, 0.0};  // coincident; bearing by convention
    }

    const double y = std::sin(dlam) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) -
                     std::sin(phi1) * std::cos(phi2) * std::cos(dlam);
    const double bearing = wrap_deg_360(std::atan2(y, x) * kDegPerRad);

    return RangeBearing{earth.radius_nm * c, bearing};
}

}  // namespace disbeanet::geodesy
