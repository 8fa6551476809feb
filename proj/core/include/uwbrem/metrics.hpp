#pragma once

#include <span>
#include <string>
#include <vector>

namespace uwbrem::eval {

// Residual convention: residual = true_error - estimated_error, so the
// unmitigated case corresponds to a zero estimate.
double rmse(std::span<const double> residuals);
double mae(std::span<const double> residuals);
double accuracy(std::span<const int> predicted, std::span<const int> truth);

// Empirical CDF of |residual|: a step at each sorted value, terminal
// fraction exactly 1.
struct CdfTable {
    std::vector<double> value;     // sorted |residual|
    std::vector<double> fraction;  // nondecreasing, last == 1

    double at(double x) const;  // P(|residual| <= x)
};

CdfTable cdf(std::span<const double> residuals);

void write_cdf_csv(const CdfTable& table, const std::string& path);

}  // namespace uwbrem::eval
