#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "uwbrem/waveform.hpp"

namespace uwbrem::baseline {

// Hand-crafted waveform features, the classical alternative to learned
// codes. Delay-domain quantities are in sample units.
struct FeatureVector {
    double energy = 0.0;
    double max_amplitude = 0.0;
    double rise_time = 0.0;
    double mean_excess_delay = 0.0;
    double rms_delay_spread = 0.0;
    double kurtosis = 0.0;

    static constexpr int kCount = 6;
    std::array<double, kCount> as_array() const {
        return {energy, max_amplitude, rise_time, mean_excess_delay, rms_delay_spread, kurtosis};
    }
    static const char* name(int i);
};

FeatureVector extract_features(const Waveform& x);

void export_features_csv(const std::vector<FeatureVector>& features, const std::string& path);

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 2000;
    double l2 = 1e-4;
    double momentum = 0.9;
    uint64_t rng_seed = 0;
    enum class ClsLoss { kLogistic, kHinge } cls_loss = ClsLoss::kLogistic;
};

// Linear model on standardized features. Standardization statistics come
// from the training split only; constant columns are dropped with a
// warning and recorded in `kept`.
struct LinearModel {
    std::vector<std::vector<double>> weights;  // outputs x kept-features
    std::vector<double> bias;                  // outputs
    std::vector<double> feat_mean, feat_std;   // per original feature
    std::vector<int> kept;                     // original indices of retained columns

    std::vector<double> scores(const FeatureVector& f) const;
    double predict_scalar(const FeatureVector& f) const;  // regression output
    int predict_class(const FeatureVector& f) const;      // argmax score
};

// Ridge regression by full-batch gradient descent on
//   J = 1/(2n) sum (w.f + b - y)^2 + l2/2 * |w|^2.
LinearModel train_svr(const std::vector<FeatureVector>& features, const std::vector<double>& targets,
                      const TrainConfig& cfg);

// Multiclass linear classifier (logistic by default, one-vs-rest hinge as
// the alternative), L2-penalized, full-batch gradient descent.
LinearModel train_svc(const std::vector<FeatureVector>& features, const std::vector<int>& labels,
                      int n_classes, const TrainConfig& cfg);

}  // namespace uwbrem::baseline
