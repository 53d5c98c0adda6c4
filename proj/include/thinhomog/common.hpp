#ifndef THINHOMOG_COMMON_HPP
#define THINHOMOG_COMMON_HPP

#include <cmath>
#include <cstdio>
#include <ctime>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace thinhomog {

inline constexpr const char *kVersion = "0.1.0";
inline constexpr double kPi = std::numbers::pi;

/*! Configuration / input errors: malformed JSON, inadmissible geometry,
    out-of-range parameters. Distinguished from solver failures so the CLI
    can map them to different exit codes. */
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

/*! Numerical failures: iteration limits, singular systems, NaNs. */
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string &msg) : std::runtime_error(msg) {}
};

/*! Fixed-width float formatting shared by every CSV/plot writer so that
    reruns are byte-identical. */
inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string timestamp_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

/*! Index-parallel map: results must be written to per-index slots by fn,
    which keeps the output independent of the thread count. */
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn &&fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t nt = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += nt) fn(i);
        });
    }
    for (auto &th : pool) th.join();
}

/*! Least-squares slope of log(y) against log(x); requires >= 3 points.
    Values are clamped away from zero so a vanishing entry cannot poison
    the fit with -inf. */
inline double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("loglog_slope: need >= 3 points");
    const double floor_v = 1e-300;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lx = std::log(std::max(std::abs(x[i]), floor_v));
        double ly = std::log(std::max(std::abs(y[i]), floor_v));
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace thinhomog

#endif
