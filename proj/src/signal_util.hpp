#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace limbmap::detail {

/// Running median of three; endpoints are copied.
std::vector<double> median3(std::span<const double> x);

/// Centered moving average with an odd window, shrinking at the edges.
std::vector<double> moving_average(std::span<const double> x, std::size_t window);

double mean(std::span<const double> x);
/// Population standard deviation.
double stddev(std::span<const double> x);

/// Linear-interpolated percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

}  // namespace limbmap::detail
