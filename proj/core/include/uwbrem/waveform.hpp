#pragma once

#include <vector>

namespace uwbrem {

// Fixed-length sampled received signal. All waveforms in a dataset share the
// same length and sample interval.
struct Waveform {
    std::vector<double> samples;
    double sample_interval = 1e-9;  // seconds per sample

    int length() const { return static_cast<int>(samples.size()); }
};

}  // namespace uwbrem
