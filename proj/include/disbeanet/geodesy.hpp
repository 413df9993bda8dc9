#pragma once

namespace disbeanet::geodesy {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegPerRad = 180.0 / kPi;
inline constexpr double kRadPerDeg = kPi / 180.0;

// Mean-sphere earth radius (6371 km) in nautical miles.
inline constexpr double kEarthRadiusNm = 3440.065;

// Meters per nautical mile, exact by definition.
inline constexpr double kMetersPerNm = 1852.0;

struct GeoPoint {
    double lat_deg = 0.0;  // [-90, +90]
    double lon_deg = 0.0;  // (-180, +180]
};

struct RangeBearing {
    double distance_nm = 0.0;  // >= 0
    double bearing_deg = 0.0;  // [0, 360), clockwise from true north
};

struct EarthModel {
    double radius_nm = kEarthRadiusNm;
};

// Wrap into (-180, +180]; throws ValidationError on non-finite input.
double normalize_lon(double lon_deg);

// Wrap into [0, 360).
double wrap_deg_360(double deg);

// Wrap into (-180, +180]; the signed residual used for circular errors.
double wrap_deg_signed(double deg);

// Shortest-arc interpolation between two bearings, alpha in [0, 1].
double circular_lerp_deg(double a_deg, double b_deg, double alpha);

void validate(const GeoPoint& p);
void validate(const RangeBearing& rb);
void validate(const EarthModel& e);

// Great-circle destination from origin along an initial bearing:
//   phi2 = asin(sin phi1 cos d + cos phi1 sin d cos brg)
//   lam2 = lam1 + atan2(sin brg sin d cos phi1, cos d - sin phi1 sin phi2)
// with d the angular distance. See
// http://www.movable-type.co.uk/scripts/latlong.html#destPoint
GeoPoint destination_point(const GeoPoint& origin, const RangeBearing& obs,
                           const EarthModel& earth = {});

// Haversine distance + initial bearing from origin to target. Bearing of a
// coincident pair is 0 by convention; antipodal pairs are rejected.
RangeBearing inverse_problem(const GeoPoint& origin, const GeoPoint& target,
                             const EarthModel& earth = {});

}  // namespace disbeanet::geodesy
