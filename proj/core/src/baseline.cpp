#include "uwbrem/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace uwbrem::baseline {

const char* FeatureVector::name(int i) {
    static const char* names[kCount] = {"energy",            "max_amplitude",    "rise_time",
                                        "mean_excess_delay", "rms_delay_spread", "kurtosis"};
    if (i < 0 || i >= kCount) throw std::out_of_range("feature index");
    return names[i];
}

FeatureVector extract_features(const Waveform& x) {
    const size_t n = x.samples.size();
    if (n == 0) throw std::invalid_argument("extract_features: empty waveform");

    FeatureVector f;
    size_t peak_idx = 0;
    for (size_t t = 0; t < n; ++t) {
        const double v = x.samples[t];
        f.energy += v * v;
        if (std::abs(v) > f.max_amplitude) {
            f.max_amplitude = std::abs(v);
            peak_idx = t;
        }
    }
    if (f.energy == 0.0) throw std::invalid_argument("extract_features: all-zero waveform");

    const double threshold = 0.1 * f.max_amplitude;
    size_t first = peak_idx;
    for (size_t t = 0; t < n; ++t)
        if (std::abs(x.samples[t]) >= threshold) {
            first = t;
            break;
        }
    f.rise_time = static_cast<double>(peak_idx) - static_cast<double>(first);

    // x^2/energy as a delay distribution over sample indices.
    double mean = 0.0;
    for (size_t t = 0; t < n; ++t) mean += static_cast<double>(t) * x.samples[t] * x.samples[t];
    mean /= f.energy;
    f.mean_excess_delay = mean;
    double var = 0.0;
    for (size_t t = 0; t < n; ++t) {
        const double d = static_cast<double>(t) - mean;
        var += d * d * x.samples[t] * x.samples[t];
    }
    f.rms_delay_spread = std::sqrt(var / f.energy);

    // Sample kurtosis of the amplitude values.
    double amp_mean = 0.0;
    for (double v : x.samples) amp_mean += v;
    amp_mean /= static_cast<double>(n);
    double m2 = 0.0, m4 = 0.0;
    for (double v : x.samples) {
        const double d = v - amp_mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    f.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
    return f;
}

void export_features_csv(const std::vector<FeatureVector>& features, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write feature dump: " + path);
    for (int i = 0; i < FeatureVector::kCount; ++i) out << (i ? "," : "") << FeatureVector::name(i);
    out << "\n";
    char buf[40];
    for (const FeatureVector& f : features) {
        const auto a = f.as_array();
        for (int i = 0; i < FeatureVector::kCount; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", a[static_cast<size_t>(i)]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
}

namespace {

struct Standardized {
    std::vector<std::vector<double>> rows;  // n x kept
    std::vector<double> mean, stddev;
    std::vector<int> kept;
};

Standardized standardize(const std::vector<FeatureVector>& features) {
    if (features.empty()) throw std::invalid_argument("baseline: empty feature set");
    const size_t n = features.size();
    const int d = FeatureVector::kCount;
    Standardized s;
    s.mean.assign(static_cast<size_t>(d), 0.0);
    s.stddev.assign(static_cast<size_t>(d), 0.0);
    for (const FeatureVector& f : features) {
        const auto a = f.as_array();
        for (int j = 0; j < d; ++j) s.mean[static_cast<size_t>(j)] += a[static_cast<size_t>(j)];
    }
    for (double& m : s.mean) m /= static_cast<double>(n);
    for (const FeatureVector& f : features) {
        const auto a = f.as_array();
        for (int j = 0; j < d; ++j) {
            const double diff = a[static_cast<size_t>(j)] - s.mean[static_cast<size_t>(j)];
            s.stddev[static_cast<size_t>(j)] += diff * diff;
        }
    }
    for (double& v : s.stddev) v = std::sqrt(v / static_cast<double>(n));
    for (int j = 0; j < d; ++j) {
        if (s.stddev[static_cast<size_t>(j)] > 0.0) {
            s.kept.push_back(j);
        } else {
            std::cerr << "warning: dropping constant feature column '" << FeatureVector::name(j) << "'\n";
        }
    }
    if (s.kept.empty()) throw std::invalid_argument("baseline: every feature column is constant");
    s.rows.reserve(n);
    for (const FeatureVector& f : features) {
        const auto a = f.as_array();
        std::vector<double> row;
        row.reserve(s.kept.size());
        for (int j : s.kept)
            row.push_back((a[static_cast<size_t>(j)] - s.mean[static_cast<size_t>(j)]) / s.stddev[static_cast<size_t>(j)]);
        s.rows.push_back(std::move(row));
    }
    return s;
}

std::vector<double> standardized_row(const LinearModel& m, const FeatureVector& f) {
    const auto a = f.as_array();
    std::vector<double> row;
    row.reserve(m.kept.size());
    for (int j : m.kept)
        row.push_back((a[static_cast<size_t>(j)] - m.feat_mean[static_cast<size_t>(j)]) / m.feat_std[static_cast<size_t>(j)]);
    return row;
}

}  // namespace

std::vector<double> LinearModel::scores(const FeatureVector& f) const {
    const std::vector<double> row = standardized_row(*this, f);
    std::vector<double> out(bias);
    for (size_t o = 0; o < weights.size(); ++o)
        for (size_t j = 0; j < row.size(); ++j) out[o] += weights[o][j] * row[j];
    return out;
}

double LinearModel::predict_scalar(const FeatureVector& f) const {
    return scores(f)[0];
}

int LinearModel::predict_class(const FeatureVector& f) const {
    const std::vector<double> s = scores(f);
    int best = 0;
    for (size_t i = 1; i < s.size(); ++i)
        if (s[i] > s[static_cast<size_t>(best)]) best = static_cast<int>(i);
    return best;
}

LinearModel train_svr(const std::vector<FeatureVector>& features, const std::vector<double>& targets,
                      const TrainConfig& cfg) {
    if (features.size() != targets.size()) throw std::invalid_argument("train_svr: size mismatch");
    Standardized s = standardize(features);
    const size_t n = s.rows.size();
    const size_t d = s.kept.size();

    std::vector<double> w(d, 0.0), vw(d, 0.0);
    double b = 0.0, vb = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<double> gw(d, 0.0);
        double gb = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double pred = b;
            for (size_t j = 0; j < d; ++j) pred += w[j] * s.rows[i][j];
            const double r = pred - targets[i];
            for (size_t j = 0; j < d; ++j) gw[j] += r * s.rows[i][j];
            gb += r;
        }
        for (size_t j = 0; j < d; ++j) {
            gw[j] = gw[j] / static_cast<double>(n) + cfg.l2 * w[j];
            vw[j] = cfg.momentum * vw[j] + gw[j];
            w[j] -= cfg.learning_rate * vw[j];
        }
        gb /= static_cast<double>(n);
        vb = cfg.momentum * vb + gb;
        b -= cfg.learning_rate * vb;
    }

    LinearModel m;
    m.weights = {std::move(w)};
    m.bias = {b};
    m.feat_mean = std::move(s.mean);
    m.feat_std = std::move(s.stddev);
    m.kept = std::move(s.kept);
    return m;
}

LinearModel train_svc(const std::vector<FeatureVector>& features, const std::vector<int>& labels,
                      int n_classes, const TrainConfig& cfg) {
    if (features.size() != labels.size()) throw std::invalid_argument("train_svc: size mismatch");
    if (n_classes < 2) throw std::invalid_argument("train_svc: need at least 2 classes");
    {
        bool multi = false;
        for (int l : labels) {
            if (l < 0 || l >= n_classes) throw std::invalid_argument("train_svc: label out of range");
            if (l != labels[0]) multi = true;
        }
        if (!multi) throw std::invalid_argument("train_svc: training set has a single class");
    }
    Standardized s = standardize(features);
    const size_t n = s.rows.size();
    const size_t d = s.kept.size();
    const size_t k = static_cast<size_t>(n_classes);

    std::vector<std::vector<double>> w(k, std::vector<double>(d, 0.0)), vw = w;
    std::vector<double> b(k, 0.0), vb(k, 0.0);

    std::vector<double> sc(k), gb(k);
    std::vector<std::vector<double>> gw(k, std::vector<double>(d, 0.0));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (auto& row : gw) std::fill(row.begin(), row.end(), 0.0);
        std::fill(gb.begin(), gb.end(), 0.0);
        for (size_t i = 0; i < n; ++i) {
            for (size_t c = 0; c < k; ++c) {
                sc[c] = b[c];
                for (size_t j = 0; j < d; ++j) sc[c] += w[c][j] * s.rows[i][j];
            }
            const size_t yi = static_cast<size_t>(labels[i]);
            if (cfg.cls_loss == TrainConfig::ClsLoss::kLogistic) {
                double mx = sc[0];
                for (double v : sc) mx = std::max(mx, v);
                double denom = 0.0;
                for (size_t c = 0; c < k; ++c) denom += std::exp(sc[c] - mx);
                for (size_t c = 0; c < k; ++c) {
                    const double p = std::exp(sc[c] - mx) / denom;
                    const double delta = p - (c == yi ? 1.0 : 0.0);
                    for (size_t j = 0; j < d; ++j) gw[c][j] += delta * s.rows[i][j];
                    gb[c] += delta;
                }
            } else {  // one-vs-rest hinge
                for (size_t c = 0; c < k; ++c) {
                    const double target = c == yi ? 1.0 : -1.0;
                    if (target * sc[c] < 1.0) {
                        for (size_t j = 0; j < d; ++j) gw[c][j] -= target * s.rows[i][j];
                        gb[c] -= target;
                    }
                }
            }
        }
        for (size_t c = 0; c < k; ++c) {
            for (size_t j = 0; j < d; ++j) {
                const double g = gw[c][j] / static_cast<double>(n) + cfg.l2 * w[c][j];
                vw[c][j] = cfg.momentum * vw[c][j] + g;
                w[c][j] -= cfg.learning_rate * vw[c][j];
            }
            const double g = gb[c] / static_cast<double>(n);
            vb[c] = cfg.momentum * vb[c] + g;
            b[c] -= cfg.learning_rate * vb[c];
        }
    }

    LinearModel m;
    m.weights = std::move(w);
    m.bias = std::move(b);
    m.feat_mean = std::move(s.mean);
    m.feat_std = std::move(s.stddev);
    m.kept = std::move(s.kept);
    return m;
}

}  // namespace uwbrem::baseline
