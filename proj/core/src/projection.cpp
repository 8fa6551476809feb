#include "uwbrem/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace uwbrem::eval {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Good enough for
// code widths in the tens; deterministic.
void jacobi_eigen(std::vector<std::vector<double>>& a, std::vector<std::vector<double>>& v) {
    const size_t n = a.size();
    v.assign(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) v[i][i] = 1.0;

    double scale = 0.0;
    for (size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[i][i]));
    scale = std::max(scale, 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (std::sqrt(off) < 1e-14 * scale) break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (size_t i = 0; i < n; ++i) {
                    const double aip = a[i][p], aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (size_t i = 0; i < n; ++i) {
                    const double api = a[p][i], aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for (size_t i = 0; i < n; ++i) {
                    const double vip = v[i][p], viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
}

}  // namespace

Projection2D project_latent(const std::vector<std::vector<double>>& codes, const std::vector<int>& labels) {
    if (codes.size() < 3) throw std::invalid_argument("project_latent: need at least 3 codes");
    if (codes.size() != labels.size()) throw std::invalid_argument("project_latent: labels size mismatch");
    const size_t n = codes.size();
    const size_t d = codes[0].size();
    if (d < 2) throw std::invalid_argument("project_latent: code dimension must be >= 2");
    for (const auto& c : codes)
        if (c.size() != d) throw std::invalid_argument("project_latent: ragged codes");

    std::vector<double> mean(d, 0.0);
    for (const auto& c : codes)
        for (size_t j = 0; j < d; ++j) mean[j] += c[j];
    for (double& m : mean) m /= static_cast<double>(n);

    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (const auto& c : codes)
        for (size_t i = 0; i < d; ++i)
            for (size_t j = i; j < d; ++j) cov[i][j] += (c[i] - mean[i]) * (c[j] - mean[j]);
    for (size_t i = 0; i < d; ++i)
        for (size_t j = i; j < d; ++j) {
            cov[i][j] /= static_cast<double>(n);
            cov[j][i] = cov[i][j];
        }

    double total = 0.0;
    for (size_t i = 0; i < d; ++i) total += cov[i][i];
    if (total <= 0.0) throw std::invalid_argument("project_latent: codes have zero variance");

    std::vector<std::vector<double>> vecs;
    jacobi_eigen(cov, vecs);

    std::vector<size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return cov[a][a] > cov[b][b]; });

    Projection2D out;
    std::array<std::vector<double>, 2> axes;
    double clamped_total = 0.0;
    for (size_t i = 0; i < d; ++i) clamped_total += std::max(0.0, cov[i][i]);
    for (int k = 0; k < 2; ++k) {
        const size_t col = order[static_cast<size_t>(k)];
        axes[static_cast<size_t>(k)].resize(d);
        for (size_t i = 0; i < d; ++i) axes[static_cast<size_t>(k)][i] = vecs[i][col];
        // Sign convention: largest-magnitude loading positive.
        size_t arg = 0;
        for (size_t i = 1; i < d; ++i)
            if (std::abs(axes[static_cast<size_t>(k)][i]) > std::abs(axes[static_cast<size_t>(k)][arg])) arg = i;
        if (axes[static_cast<size_t>(k)][arg] < 0)
            for (double& x : axes[static_cast<size_t>(k)]) x = -x;
        out.explained[static_cast<size_t>(k)] = std::max(0.0, cov[col][col]) / clamped_total;
    }

    out.points.reserve(n);
    out.labels = labels;
    for (const auto& c : codes) {
        std::array<double, 2> p{0.0, 0.0};
        for (size_t j = 0; j < d; ++j) {
            const double centered = c[j] - mean[j];
            p[0] += centered * axes[0][j];
            p[1] += centered * axes[1][j];
        }
        out.points.push_back(p);
    }
    return out;
}

void write_projection_csv(const Projection2D& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write projection: " + path);
    out << "u,v,label\n";
    char buf[40];
    for (size_t i = 0; i < p.points.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", p.points[i][0]);
        out << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", p.points[i][1]);
        out << ',' << buf << ',' << p.labels[i] << "\n";
    }
}

}  // namespace uwbrem::eval
