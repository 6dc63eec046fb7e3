#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "limbmap/mapping.hpp"
#include "limbmap/types.hpp"

namespace testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Published least-squares estimates of the upper-to-lower map.
inline limbmap::LinearMap paper_map() {
    limbmap::LinearMap m;
    m.T << 0.0946, -0.1917, 1.6623, -0.0483,
          -0.0151, -0.1066, 1.3587, 0.0959,
           0.2514, -0.1003, -1.5821, 0.2368,
           0.0907, -0.1945, -1.0221, -0.0946;
    m.b << 3.0487, 40.2068, -3.3855, -89.9575;
    return m;
}

// Published representative lower-limb vectors.
inline std::array<limbmap::Vec4, 4> paper_reference_vectors() {
    return {limbmap::Vec4(-4.0344, 39.8672, -8.0813, -102.6813),
            limbmap::Vec4(-0.9446, 43.0250, -5.5536, -99.4214),
            limbmap::Vec4(-3.3208, 42.1188, -7.9562, -105.1646),
            limbmap::Vec4(3.1625, 45.8825, -8.2300, -102.1600)};
}

inline std::vector<double> sampled(std::size_t n, auto&& f) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(static_cast<double>(i) / static_cast<double>(n));
    return v;
}

inline std::vector<double> circular_shift(const std::vector<double>& v, long shift) {
    const long n = static_cast<long>(v.size());
    std::vector<double> out(v.size());
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(((i - shift) % n + n) % n)];
    return out;
}

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("limbmap_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testing
