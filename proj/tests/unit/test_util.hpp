#ifndef CROPCAST_TEST_UTIL_HPP
#define CROPCAST_TEST_UTIL_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Core>

#include "cropcast/rng.hpp"
#include "cropcast/series.hpp"
#include "cropcast/synthetic.hpp"

namespace cropcast::test {

/// x_t = frac(sin(12.9898 t) * 43758.5453) - 0.5 for t = 1..n.
inline Eigen::VectorXd hash_series(Eigen::Index n) {
    Eigen::VectorXd x(n);
    for (Eigen::Index t = 1; t <= n; ++t) {
        const double v = std::sin(12.9898 * static_cast<double>(t)) * 43758.5453;
        x[t - 1] = v - std::floor(v) - 0.5;
    }
    return x;
}

inline Eigen::VectorXd gaussian(Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.normal();
    return x;
}

inline Eigen::VectorXd random_walk(Eigen::Index n, std::uint64_t seed) {
    Eigen::VectorXd x = gaussian(n, seed);
    for (Eigen::Index i = 1; i < n; ++i) x[i] += x[i - 1];
    return x;
}

/// Clean seasonal series with weather, no corruption.
inline AlignedSeries clean_series(std::size_t n, std::uint64_t seed, double slope = 0.0) {
    SyntheticSpec s;
    s.n_days = n;
    s.trend_slope = slope;
    s.seasonal_amplitude = 200.0;
    s.seasonal_period = 60.0;
    s.noise_std = 20.0;
    s.ar1_coeff = 0.5;
    s.weather_coupling = 100.0;
    s.weather_persistence = 0.5;
    s.seed = seed;
    return generate_synthetic(s).series;
}

class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() / ("cropcast_test_" + name)) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace cropcast::test

#endif  // CROPCAST_TEST_UTIL_HPP
