#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uwbrem/config_file.hpp"
#include "uwbrem/dataset.hpp"
#include "uwbrem/graph.hpp"
#include "uwbrem/param_store.hpp"
#include "uwbrem/waveform.hpp"

namespace uwbrem::dgm {

enum class ClassifierLoss { kSquaredError, kCrossEntropy };

struct ModelConfig {
    int n_samples = 152;  // waveform length N_s
    int n_classes = 2;    // K
    int d_range = 16;     // range code width
    int d_env = 16;       // environment code width

    std::vector<int> encoder_channels{8, 16, 32};
    int conv_kernel = 5;
    int conv_stride = 2;
    // Reshapes the input waveform to [rows, N_s/rows] before the conv
    // stack, so the first layer convolves grid rows as channels. rows must
    // divide N_s; 1 keeps the plain 1-D topology.
    int input_grid_rows = 1;
    std::vector<int> decoder_channels{16, 8};
    std::vector<int> estimator_hidden{32};
    std::vector<int> classifier_hidden{32};

    double w_rec = 1.0;
    double w_est = 1.0;
    double w_cls = 1.0;
    double kl_weight = 0.0;  // optional L2 pull on the latent codes, off by default
    ClassifierLoss classifier_loss = ClassifierLoss::kSquaredError;

    double learning_rate = 1e-4;
    double momentum = 0.9;
    int batch_size = 32;
    int epochs = 100;
    uint64_t rng_seed = 1;
};

void validate(const ModelConfig& cfg);
ModelConfig parse_model_config(const config::File& f);
config::File model_config_to_file(const ModelConfig& cfg);

struct LatentCodes {
    std::vector<double> y;  // range-related code
    std::vector<double> z;  // environment-related code
};

struct InferenceResult {
    double range_error = 0.0;    // estimated bias, meters
    int env_label = 0;           // argmax of scores (lowest index wins ties)
    std::vector<double> scores;  // length K
    LatentCodes codes;
};

struct LossBreakdown {
    double total = 0.0;
    double rec = 0.0;
    double est = 0.0;
    double cls = 0.0;
};

struct TrainLog {
    std::vector<double> total, rec, est, cls;  // per-epoch sums
    double wall_seconds = 0.0;

    size_t epochs() const { return total.size(); }
};

void write_train_log_csv(const TrainLog& log, const std::string& path);

// Encoder -> (y,z) bottleneck -> decoder, with an estimator head on y and a
// classifier head on z. Parameters live in four groups: encoder, decoder,
// estimator, classifier.
class DgmModel {
public:
    DgmModel() = default;
    explicit DgmModel(ModelConfig cfg);

    const ModelConfig& config() const { return cfg_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    std::map<std::string, std::string>& meta() { return meta_; }
    const std::map<std::string, std::string>& meta() const { return meta_; }

    LatentCodes encode(const std::vector<double>& waveform) const;
    std::vector<double> decode(const LatentCodes& codes) const;
    std::vector<double> reconstruct(const std::vector<double>& waveform) const;

    // Test-phase path: one encoder pass, estimator on y, classifier on z.
    InferenceResult infer(const std::vector<double>& waveform) const;

    // Runs both heads on a stored bottleneck vector (y then z), through the
    // same slicing the full forward pass uses.
    InferenceResult infer_from_codes(const LatentCodes& codes) const;

    // Head-only passes; the estimator sees only y and the classifier only z.
    double estimate_from_codes(const LatentCodes& codes) const;
    std::vector<double> classify_from_codes(const LatentCodes& codes) const;

private:
    ModelConfig cfg_;
    nn::ParamStore params_;
    std::map<std::string, std::string> meta_;
};

// Builds the full training objective over a batch:
//   L = w_rec*sum|x-xhat|^2 + w_est*sum(dhat-d)^2 + w_cls*L_cls
// with L_cls either squared error against one-hot labels or cross-entropy.
// Returns the scalar loss node; the unweighted term values go to `parts`.
nn::NodeId build_loss(nn::Graph& g, const DgmModel& model, const data::Dataset& batch,
                      LossBreakdown* parts = nullptr);

// Loss terms on a batch without touching parameters.
LossBreakdown loss(const DgmModel& model, const data::Dataset& batch);

// Minibatch SGD on the composite objective; all four parameter groups are
// updated jointly every step. Throws with a diagnostic if the loss becomes
// non-finite.
TrainLog train(DgmModel& model, const data::Dataset& train_set);

// Versioned text checkpoint; round-trips parameters bit-exactly.
void save(const DgmModel& model, const std::string& path);
DgmModel load(const std::string& path);

}  // namespace uwbrem::dgm
