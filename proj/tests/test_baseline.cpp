#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "uwbrem/baseline.hpp"

using namespace uwbrem;
using baseline::extract_features;
using baseline::FeatureVector;
using baseline::LinearModel;
using baseline::TrainConfig;

namespace {

Waveform make_waveform(std::vector<double> samples) { return Waveform{std::move(samples), 1e-9}; }

FeatureVector random_features(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    FeatureVector f;
    f.energy = 1.0 + std::abs(u(rng));
    f.max_amplitude = std::abs(u(rng));
    f.rise_time = 5.0 * u(rng);
    f.mean_excess_delay = 10.0 + 4.0 * u(rng);
    f.rms_delay_spread = 2.0 + u(rng);
    f.kurtosis = 3.0 + u(rng);
    return f;
}

}  // namespace

TEST_CASE("unit impulse features") {
    const FeatureVector f = extract_features(make_waveform({1.0, 0.0, 0.0, 0.0}));
    CHECK(f.energy == 1.0);
    CHECK(f.max_amplitude == 1.0);
    CHECK(f.rise_time == 0.0);
    CHECK(f.mean_excess_delay == 0.0);
    CHECK(f.rms_delay_spread == 0.0);
}

TEST_CASE("two equal impulses give the symmetric two-point delay stats") {
    const FeatureVector f = extract_features(make_waveform({1.0, 0.0, 0.0, 0.0, 1.0, 0.0}));
    CHECK(f.mean_excess_delay == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.rms_delay_spread == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("features match an independent recomputation") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> w(64);
        for (double& v : w) v = amp(rng);
        const FeatureVector f = extract_features(make_waveform(w));

        double energy = 0.0, maxamp = 0.0;
        size_t peak = 0;
        for (size_t t = 0; t < w.size(); ++t) {
            energy += w[t] * w[t];
            if (std::abs(w[t]) > maxamp) {
                maxamp = std::abs(w[t]);
                peak = t;
            }
        }
        size_t first = 0;
        while (std::abs(w[first]) < 0.1 * maxamp) ++first;
        double med = 0.0;
        for (size_t t = 0; t < w.size(); ++t) med += static_cast<double>(t) * w[t] * w[t] / energy;
        double var = 0.0;
        for (size_t t = 0; t < w.size(); ++t)
            var += (static_cast<double>(t) - med) * (static_cast<double>(t) - med) * w[t] * w[t] / energy;
        double mean = 0.0;
        for (double v : w) mean += v;
        mean /= static_cast<double>(w.size());
        double m2 = 0.0, m4 = 0.0;
        for (double v : w) {
            m2 += (v - mean) * (v - mean);
            m4 += (v - mean) * (v - mean) * (v - mean) * (v - mean);
        }
        m2 /= static_cast<double>(w.size());
        m4 /= static_cast<double>(w.size());

        CHECK(std::abs(f.energy - energy) < 1e-12);
        CHECK(f.max_amplitude == maxamp);
        CHECK(f.rise_time == static_cast<double>(peak) - static_cast<double>(first));
        CHECK(std::abs(f.mean_excess_delay - med) < 1e-12);
        CHECK(std::abs(f.rms_delay_spread - std::sqrt(var)) < 1e-12);
        CHECK(std::abs(f.kurtosis - m4 / (m2 * m2)) < 1e-12);
    }
}

TEST_CASE("feature extraction rejects degenerate waveforms") {
    CHECK_THROWS_AS(extract_features(make_waveform({})), std::invalid_argument);
    CHECK_THROWS_AS(extract_features(make_waveform({0.0, 0.0})), std::invalid_argument);
}

TEST_CASE("shifting the waveform moves delay features and nothing else") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::vector<double> w(64, 0.0);
    for (size_t t = 4; t < 32; ++t) w[t] = amp(rng);
    std::vector<double> shifted(64, 0.0);
    const int s = 10;
    for (size_t t = 4; t < 32; ++t) shifted[t + s] = w[t];

    const FeatureVector a = extract_features(make_waveform(w));
    const FeatureVector b = extract_features(make_waveform(shifted));
    CHECK(a.energy == b.energy);
    CHECK(a.max_amplitude == b.max_amplitude);
    CHECK(a.kurtosis == doctest::Approx(b.kurtosis).epsilon(1e-12));
    CHECK(a.rise_time == b.rise_time);
    CHECK(b.mean_excess_delay == doctest::Approx(a.mean_excess_delay + s).epsilon(1e-9));
    CHECK(b.rms_delay_spread == doctest::Approx(a.rms_delay_spread).epsilon(1e-9));
}

TEST_CASE("regression on an exactly linear target fits to numerical precision") {
    std::mt19937_64 rng(11);
    std::vector<FeatureVector> feats;
    std::vector<double> targets;
    for (int i = 0; i < 60; ++i) {
        const FeatureVector f = random_features(rng);
        feats.push_back(f);
        const auto a = f.as_array();
        targets.push_back(0.3 * a[0] - 1.2 * a[2] + 0.05 * a[4] + 2.0);
    }
    TrainConfig cfg;
    cfg.l2 = 0.0;
    cfg.epochs = 5000;
    cfg.learning_rate = 0.1;
    const LinearModel m = baseline::train_svr(feats, targets, cfg);
    double mse = 0.0;
    for (size_t i = 0; i < feats.size(); ++i) {
        const double r = m.predict_scalar(feats[i]) - targets[i];
        mse += r * r;
    }
    mse /= static_cast<double>(feats.size());
    CHECK(mse < 1e-6);
}

TEST_CASE("zero training epochs predict the (zero) bias only") {
    std::mt19937_64 rng(12);
    std::vector<FeatureVector> feats;
    std::vector<double> targets;
    for (int i = 0; i < 10; ++i) {
        feats.push_back(random_features(rng));
        targets.push_back(static_cast<double>(i));
    }
    TrainConfig cfg;
    cfg.epochs = 0;
    const LinearModel m = baseline::train_svr(feats, targets, cfg);
    for (const FeatureVector& f : feats) CHECK(m.predict_scalar(f) == m.bias[0]);
}

TEST_CASE("gradient descent reaches the closed-form ridge optimum") {
    std::mt19937_64 rng(13);
    const int n = 50;
    std::vector<FeatureVector> feats;
    std::vector<double> targets;
    std::normal_distribution<double> noise(0.0, 0.1);
    for (int i = 0; i < n; ++i) {
        const FeatureVector f = random_features(rng);
        feats.push_back(f);
        const auto a = f.as_array();
        targets.push_back(1.5 * a[1] - 0.7 * a[3] + noise(rng));
    }
    TrainConfig cfg;
    cfg.l2 = 0.01;
    cfg.epochs = 20000;
    cfg.learning_rate = 0.05;
    const LinearModel m = baseline::train_svr(feats, targets, cfg);

    // Oracle: standardize independently, solve the regularized normal
    // equations by Gaussian elimination, evaluate the same objective.
    const int d = FeatureVector::kCount;
    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (const auto& f : feats) {
        const auto a = f.as_array();
        for (int j = 0; j < d; ++j) mean[j] += a[j];
    }
    for (double& v : mean) v /= n;
    for (const auto& f : feats) {
        const auto a = f.as_array();
        for (int j = 0; j < d; ++j) sd[j] += (a[j] - mean[j]) * (a[j] - mean[j]);
    }
    for (double& v : sd) v = std::sqrt(v / n);
    std::vector<std::vector<double>> x(n, std::vector<double>(d + 1, 1.0));
    for (int i = 0; i < n; ++i) {
        const auto a = feats[static_cast<size_t>(i)].as_array();
        for (int j = 0; j < d; ++j) x[i][j] = (a[j] - mean[j]) / sd[j];
    }
    // A = X^T X / n + l2*D (bias unpenalized), rhs = X^T y / n.
    std::vector<std::vector<double>> A(d + 1, std::vector<double>(d + 1, 0.0));
    std::vector<double> rhs(d + 1, 0.0);
    for (int i = 0; i < n; ++i)
        for (int p = 0; p <= d; ++p) {
            for (int q = 0; q <= d; ++q) A[p][q] += x[i][p] * x[i][q] / n;
            rhs[p] += x[i][p] * targets[static_cast<size_t>(i)] / n;
        }
    for (int j = 0; j < d; ++j) A[j][j] += cfg.l2;
    // Gaussian elimination with partial pivoting.
    std::vector<double> theta = rhs;
    for (int col = 0; col <= d; ++col) {
        int pivot = col;
        for (int r = col + 1; r <= d; ++r)
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
        std::swap(A[col], A[pivot]);
        std::swap(theta[col], theta[pivot]);
        for (int r = 0; r <= d; ++r) {
            if (r == col) continue;
            const double factor = A[r][col] / A[col][col];
            for (int c = col; c <= d; ++c) A[r][c] -= factor * A[col][c];
            theta[r] -= factor * theta[col];
        }
    }
    for (int j = 0; j <= d; ++j) theta[j] /= A[j][j];

    auto objective = [&](const std::vector<double>& w, double b) {
        double J = 0.0;
        for (int i = 0; i < n; ++i) {
            double pred = b;
            for (int j = 0; j < d; ++j) pred += w[static_cast<size_t>(j)] * x[i][j];
            const double r = pred - targets[static_cast<size_t>(i)];
            J += r * r;
        }
        J /= 2.0 * n;
        for (int j = 0; j < d; ++j) J += 0.5 * cfg.l2 * w[static_cast<size_t>(j)] * w[static_cast<size_t>(j)];
        return J;
    };

    const std::vector<double> w_star(theta.begin(), theta.begin() + d);
    const double j_star = objective(w_star, theta[static_cast<size_t>(d)]);
    REQUIRE(m.kept.size() == static_cast<size_t>(d));  // no constant columns here
    const double j_gd = objective(m.weights[0], m.bias[0]);
    CHECK(std::abs(j_gd - j_star) < 1e-6);
}

TEST_CASE("constant feature columns are dropped") {
    std::mt19937_64 rng(14);
    std::vector<FeatureVector> feats;
    std::vector<double> targets;
    for (int i = 0; i < 20; ++i) {
        FeatureVector f = random_features(rng);
        f.kurtosis = 3.0;  // constant column
        feats.push_back(f);
        targets.push_back(f.energy);
    }
    const LinearModel m = baseline::train_svr(feats, targets, TrainConfig{});
    CHECK(m.kept.size() == FeatureVector::kCount - 1);
}

TEST_CASE("linearly separable classes are classified perfectly") {
    std::mt19937_64 rng(15);
    std::vector<FeatureVector> feats;
    std::vector<int> labels;
    for (int i = 0; i < 80; ++i) {
        FeatureVector f = random_features(rng);
        const int k = i % 2;
        f.energy = k == 0 ? 1.0 + 0.2 * f.max_amplitude : 5.0 + 0.2 * f.max_amplitude;
        feats.push_back(f);
        labels.push_back(k);
    }
    TrainConfig cfg;
    cfg.epochs = 3000;
    const LinearModel m = baseline::train_svc(feats, labels, 2, cfg);
    for (size_t i = 0; i < feats.size(); ++i) CHECK(m.predict_class(feats[i]) == labels[i]);
}

TEST_CASE("hinge loss variant also separates") {
    std::mt19937_64 rng(16);
    std::vector<FeatureVector> feats;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        FeatureVector f = random_features(rng);
        const int k = i % 2;
        f.rise_time = k == 0 ? -4.0 : 4.0;
        feats.push_back(f);
        labels.push_back(k);
    }
    TrainConfig cfg;
    cfg.cls_loss = TrainConfig::ClsLoss::kHinge;
    cfg.epochs = 3000;
    const LinearModel m = baseline::train_svc(feats, labels, 2, cfg);
    int hits = 0;
    for (size_t i = 0; i < feats.size(); ++i)
        if (m.predict_class(feats[i]) == labels[i]) ++hits;
    CHECK(hits == 60);
}

TEST_CASE("uninformative features score at chance level") {
    std::mt19937_64 rng(17);
    const int k = 5;
    std::vector<FeatureVector> train_feats, test_feats;
    std::vector<int> train_labels, test_labels;
    for (int i = 0; i < 500; ++i) {
        train_feats.push_back(random_features(rng));
        train_labels.push_back(static_cast<int>(rng() % k));
    }
    for (int i = 0; i < 1000; ++i) {
        test_feats.push_back(random_features(rng));
        test_labels.push_back(static_cast<int>(rng() % k));
    }
    TrainConfig cfg;
    cfg.epochs = 500;
    const LinearModel m = baseline::train_svc(train_feats, train_labels, k, cfg);
    int hits = 0;
    for (size_t i = 0; i < test_feats.size(); ++i)
        if (m.predict_class(test_feats[i]) == test_labels[i]) ++hits;
    const double acc = hits / 1000.0;
    CHECK(acc > 1.0 / k - 0.1);
    CHECK(acc < 1.0 / k + 0.1);
}

TEST_CASE("single-class training sets are rejected") {
    std::mt19937_64 rng(18);
    std::vector<FeatureVector> feats{random_features(rng), random_features(rng)};
    CHECK_THROWS_AS(baseline::train_svc(feats, {1, 1}, 2, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("consistent permutation of features and weights leaves predictions unchanged") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    LinearModel m;
    m.kept = {0, 1, 2, 3, 4, 5};
    m.weights = {{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)}};
    m.bias = {u(rng)};
    m.feat_mean = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    m.feat_std = {1.0, 2.0, 0.5, 1.5, 3.0, 0.25};

    const FeatureVector f = random_features(rng);
    const double before = m.predict_scalar(f);

    // Swap slots 1 and 4 everywhere.
    auto fa = f.as_array();
    std::swap(fa[1], fa[4]);
    FeatureVector fp;
    fp.energy = fa[0];
    fp.max_amplitude = fa[1];
    fp.rise_time = fa[2];
    fp.mean_excess_delay = fa[3];
    fp.rms_delay_spread = fa[4];
    fp.kurtosis = fa[5];
    LinearModel mp = m;
    std::swap(mp.weights[0][1], mp.weights[0][4]);
    std::swap(mp.feat_mean[1], mp.feat_mean[4]);
    std::swap(mp.feat_std[1], mp.feat_std[4]);

    CHECK(mp.predict_scalar(fp) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("full-batch regression loss is non-increasing with a small learning rate") {
    std::mt19937_64 rng(20);
    std::vector<FeatureVector> feats;
    std::vector<double> targets;
    for (int i = 0; i < 40; ++i) {
        const FeatureVector f = random_features(rng);
        feats.push_back(f);
        targets.push_back(f.as_array()[0] * 0.5 + 0.1);
    }
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.momentum = 0.0;
    cfg.l2 = 0.001;

    auto objective = [&](const LinearModel& m) {
        double J = 0.0;
        for (size_t i = 0; i < feats.size(); ++i) {
            const double r = m.predict_scalar(feats[i]) - targets[i];
            J += r * r;
        }
        J /= 2.0 * static_cast<double>(feats.size());
        for (double wj : m.weights[0]) J += 0.5 * cfg.l2 * wj * wj;
        return J;
    };

    double previous = -1.0;
    for (int epochs = 0; epochs <= 50; epochs += 10) {
        cfg.epochs = epochs;
        const double J = objective(baseline::train_svr(feats, targets, cfg));
        if (previous >= 0.0) CHECK(J <= previous + 1e-12);
        previous = J;
    }
}
