#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace biomlab {

// Thrown for bad user input (malformed files, impossible configs).
// The CLI maps it to exit code 2; everything else is an internal error (1).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

inline double round_half_up(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::floor(value * scale + 0.5) / scale;
}

inline double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return kMissing;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Population variance (divides by n).
inline double population_variance(const std::vector<double>& xs) {
    if (xs.empty()) return kMissing;
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size());
}

inline double population_stddev(const std::vector<double>& xs) {
    const double v = population_variance(xs);
    return is_missing(v) ? kMissing : std::sqrt(v);
}

// Sample variance (divides by n-1); requires n >= 2.
inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return kMissing;
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

// Linear-interpolation quantile over a sorted copy, q in [0,1].
// Matches the "position (n-1)*q between order statistics" convention.
double quantile(std::vector<double> xs, double q);

// Civil-date arithmetic on days since 1970-01-01 (proleptic Gregorian).
struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    bool operator==(const CivilDate&) const = default;
    auto operator<=>(const CivilDate&) const = default;
    std::string to_string() const;  // YYYY-MM-DD
};

std::int64_t days_from_civil(const CivilDate& d);
CivilDate civil_from_days(std::int64_t days);

}  // namespace biomlab
