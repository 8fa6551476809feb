#include "uwbrem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace uwbrem::eval {

double rmse(std::span<const double> residuals) {
    if (residuals.empty()) throw std::invalid_argument("rmse: empty input");
    double acc = 0.0;
    for (double r : residuals) acc += r * r;
    return std::sqrt(acc / static_cast<double>(residuals.size()));
}

double mae(std::span<const double> residuals) {
    if (residuals.empty()) throw std::invalid_argument("mae: empty input");
    double acc = 0.0;
    for (double r : residuals) acc += std::abs(r);
    return acc / static_cast<double>(residuals.size());
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.empty() || predicted.size() != truth.size())
        throw std::invalid_argument("accuracy: empty or mismatched inputs");
    size_t hits = 0;
    for (size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double CdfTable::at(double x) const {
    // Count of values <= x over n, as a right-continuous step function.
    const auto it = std::upper_bound(value.begin(), value.end(), x);
    if (it == value.begin()) return 0.0;
    return fraction[static_cast<size_t>(it - value.begin()) - 1];
}

CdfTable cdf(std::span<const double> residuals) {
    if (residuals.empty()) throw std::invalid_argument("cdf: empty input");
    CdfTable t;
    t.value.reserve(residuals.size());
    for (double r : residuals) t.value.push_back(std::abs(r));
    std::sort(t.value.begin(), t.value.end());
    const double n = static_cast<double>(t.value.size());
    t.fraction.reserve(t.value.size());
    for (size_t i = 0; i < t.value.size(); ++i)
        t.fraction.push_back(static_cast<double>(i + 1) / n);
    return t;
}

void write_cdf_csv(const CdfTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CDF table: " + path);
    out << "value,fraction\n";
    char buf[40];
    for (size_t i = 0; i < table.value.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", table.value[i]);
        out << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", table.fraction[i]);
        out << ',' << buf << "\n";
    }
}

}  // namespace uwbrem::eval
