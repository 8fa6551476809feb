#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uwbrem/dataset.hpp"
#include "uwbrem/waveform.hpp"

namespace uwbrem::sim {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact

struct TransmitPulse {
    std::vector<double> samples;
    double sample_interval = 1e-9;  // seconds per sample
};

// Discrete Gaussian monocycle (first derivative of a Gaussian) with the
// given half-width in samples, peak normalized to 1.
TransmitPulse gaussian_monocycle(int width_samples, double sample_interval);

struct PathComponent {
    double amplitude = 0.0;
    double delay = 0.0;  // seconds
};

struct ChannelRealization {
    std::vector<PathComponent> paths;  // delays sorted nondecreasing
    double noise_sigma = 0.0;          // AWGN standard deviation
    double observation_window = 0.0;   // seconds
};

// Parameterizes one environment class for synthetic generation. decay_rate
// is amplitude decay per second of excess delay.
struct EnvironmentProfile {
    int label = 0;
    std::string name;
    double path_count_mean = 1.0;
    double decay_rate = 1.0;
    double nlos_bias_min = 0.0;  // meters
    double nlos_bias_max = 0.0;
    double noise_sigma = 0.0;
    double first_path_attenuation = 1.0;  // in [0,1]
};

void validate(const EnvironmentProfile& profile);

// Received waveform on the discrete sample grid:
//   out[t] = sum_l alpha_l * pulse(t - tau_l) + awgn(noise_sigma).
// Delays are quantized to the nearest sample index; contributions beyond the
// n_samples window are truncated. Pure function of its inputs and the seed.
Waveform synthesize(const TransmitPulse& pulse, const ChannelRealization& channel, int n_samples,
                    uint64_t rng_seed);

struct DrawnChannel {
    ChannelRealization channel;
    double range_error = 0.0;  // the non-negative bias b, meters
};

// Draws a channel realization for one environment: first-path delay
// (true_distance + b)/c with b uniform in the profile's bias range, a
// Poisson path count clamped to >= 1, excess delays uniform in the
// remaining window, and amplitudes decaying exponentially with excess
// delay. The observation window bounds all delays.
DrawnChannel draw_channel(const EnvironmentProfile& profile, double true_distance,
                          double observation_window, uint64_t rng_seed);

// Balanced labeled dataset: per_class samples for each profile, distances
// uniform in distance_range. Deterministic in rng_seed.
data::Dataset generate_dataset(const std::vector<EnvironmentProfile>& profiles, int per_class,
                               std::pair<double, double> distance_range, const TransmitPulse& pulse,
                               int n_samples, uint64_t rng_seed);

// Profile blocks from a structured config file (see docs/formats.md).
std::vector<EnvironmentProfile> load_profiles(const std::string& path);

}  // namespace uwbrem::sim
