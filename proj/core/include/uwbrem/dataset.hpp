#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uwbrem/waveform.hpp"

namespace uwbrem::data {

// One labeled measurement: received waveform, range error in meters, and
// environment class index in {0..K-1}.
struct Sample {
    Waveform waveform;
    double range_error = 0.0;
    int env_label = 0;
};

struct Dataset {
    std::vector<Sample> samples;
    int n_classes = 0;
    int n_samples_per_waveform = 0;
    std::vector<std::string> class_names;

    size_t size() const { return samples.size(); }
};

// Throws std::invalid_argument if any invariant is violated (nonempty, equal
// waveform lengths, labels < K, finite values).
void validate(const Dataset& d);

struct SplitSpec {
    double train_fraction = 0.8;
    uint64_t rng_seed = 0;
    bool stratified = false;  // per-class proportional split when true
};

// CSV interchange, one sample per row:
//   label,range_error_m,s0,...,s{N_s-1}
// Header row optional on import, always written on export. Values use
// enough digits to round-trip doubles exactly.
Dataset import_csv(const std::string& path);
void export_csv(const Dataset& d, const std::string& path);

// Remaps labels through `mapping` (one entry per current class) and
// compresses the targets to contiguous {0..K'-1}. Merged class names are
// joined with '+'.
Dataset relabel(const Dataset& d, const std::vector<int>& mapping);

// Keeps only samples whose label is in `keep`, then compresses labels to
// contiguous indices.
Dataset filter_labels(const Dataset& d, const std::vector<int>& keep);

// Exact partition: |train| = round(train_fraction*N), disjoint, union = d.
std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec);

struct NormParams {
    std::vector<double> peak;  // per-sample original peak absolute amplitude
};

// Per-waveform scaling to unit peak absolute amplitude. Idempotent.
std::pair<Dataset, NormParams> normalize(const Dataset& d);

}  // namespace uwbrem::data
