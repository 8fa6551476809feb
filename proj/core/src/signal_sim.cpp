#include "uwbrem/signal_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "uwbrem/config_file.hpp"

namespace uwbrem::sim {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Deterministic sub-seed derivation so per-sample streams are independent
// of generation order.
uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0) {
    return splitmix64(splitmix64(base ^ (a * 0xD6E8FEB86659FD93ULL)) ^ b);
}

}  // namespace

TransmitPulse gaussian_monocycle(int width_samples, double sample_interval) {
    if (width_samples < 1) throw std::invalid_argument("gaussian_monocycle: width must be >= 1");
    if (sample_interval <= 0) throw std::invalid_argument("gaussian_monocycle: sample_interval must be positive");
    // t*exp(-t^2/(2 sigma^2)) sampled over +-2*width, sigma = width/2.
    const double sigma = width_samples / 2.0;
    const int half = 2 * width_samples;
    std::vector<double> s;
    s.reserve(static_cast<size_t>(2 * half + 1));
    double peak = 0.0;
    for (int t = -half; t <= half; ++t) {
        const double v = t * std::exp(-(t * t) / (2.0 * sigma * sigma));
        s.push_back(v);
        peak = std::max(peak, std::abs(v));
    }
    for (double& v : s) v /= peak;
    return TransmitPulse{std::move(s), sample_interval};
}

void validate(const EnvironmentProfile& p) {
    auto bad = [&](const std::string& what) {
        throw std::invalid_argument("profile '" + p.name + "': " + what);
    };
    if (!(p.path_count_mean > 0)) bad("path_count_mean must be > 0");
    if (!(p.decay_rate > 0)) bad("decay_rate must be > 0");
    if (p.nlos_bias_min < 0 || p.nlos_bias_max < 0) bad("nlos bias range must be >= 0");
    if (p.nlos_bias_min > p.nlos_bias_max) bad("nlos_bias_min > nlos_bias_max");
    if (p.noise_sigma < 0) bad("noise_sigma must be >= 0");
    if (p.first_path_attenuation < 0 || p.first_path_attenuation > 1)
        bad("first_path_attenuation must be in [0,1]");
    for (double v : {p.path_count_mean, p.decay_rate, p.nlos_bias_min, p.nlos_bias_max, p.noise_sigma,
                     p.first_path_attenuation})
        if (!std::isfinite(v)) bad("non-finite field");
}

Waveform synthesize(const TransmitPulse& pulse, const ChannelRealization& channel, int n_samples,
                    uint64_t rng_seed) {
    if (pulse.samples.empty()) throw std::invalid_argument("synthesize: empty pulse");
    if (pulse.sample_interval <= 0) throw std::invalid_argument("synthesize: sample_interval must be positive");
    if (channel.paths.empty()) throw std::invalid_argument("synthesize: channel has no paths");
    if (channel.noise_sigma < 0) throw std::invalid_argument("synthesize: negative noise_sigma");
    if (n_samples < 1) throw std::invalid_argument("synthesize: n_samples must be >= 1");

    Waveform w;
    w.sample_interval = pulse.sample_interval;
    w.samples.assign(static_cast<size_t>(n_samples), 0.0);

    const double dt = pulse.sample_interval;
    for (const PathComponent& path : channel.paths) {
        if (path.delay < 0) throw std::invalid_argument("synthesize: negative path delay");
        const int offset = static_cast<int>(std::llround(path.delay / dt));
        for (size_t j = 0; j < pulse.samples.size(); ++j) {
            const int t = offset + static_cast<int>(j);
            if (t < 0 || t >= n_samples) continue;  // truncated outside the window
            w.samples[static_cast<size_t>(t)] += path.amplitude * pulse.samples[j];
        }
    }

    if (channel.noise_sigma > 0) {
        std::mt19937_64 rng(rng_seed);
        std::normal_distribution<double> noise(0.0, channel.noise_sigma);
        for (double& v : w.samples) v += noise(rng);
    }
    return w;
}

DrawnChannel draw_channel(const EnvironmentProfile& profile, double true_distance,
                          double observation_window, uint64_t rng_seed) {
    validate(profile);
    if (!(true_distance > 0)) throw std::invalid_argument("draw_channel: true_distance must be positive");
    if (!(observation_window > 0)) throw std::invalid_argument("draw_channel: observation window must be positive");

    std::mt19937_64 rng(rng_seed);

    double bias = profile.nlos_bias_min;
    if (profile.nlos_bias_max > profile.nlos_bias_min) {
        std::uniform_real_distribution<double> b(profile.nlos_bias_min, profile.nlos_bias_max);
        bias = b(rng);
    }
    const double tau_first = (true_distance + bias) / kSpeedOfLight;
    if (tau_first > observation_window)
        throw std::invalid_argument("draw_channel: first-path delay exceeds observation window");

    std::poisson_distribution<int> pc(profile.path_count_mean);
    const int n_paths = std::max(1, pc(rng));

    ChannelRealization ch;
    ch.noise_sigma = profile.noise_sigma;
    ch.observation_window = observation_window;
    ch.paths.reserve(static_cast<size_t>(n_paths));
    ch.paths.push_back({profile.first_path_attenuation, tau_first});

    if (n_paths > 1) {
        std::uniform_real_distribution<double> excess(0.0, observation_window - tau_first);
        std::uniform_real_distribution<double> fade(0.5, 1.0);
        std::vector<double> delays;
        delays.reserve(static_cast<size_t>(n_paths - 1));
        for (int l = 1; l < n_paths; ++l) delays.push_back(tau_first + excess(rng));
        std::sort(delays.begin(), delays.end());
        for (double tau : delays) {
            const double amp = std::exp(-profile.decay_rate * (tau - tau_first)) * fade(rng);
            ch.paths.push_back({amp, tau});
        }
    }
    return DrawnChannel{std::move(ch), bias};
}

data::Dataset generate_dataset(const std::vector<EnvironmentProfile>& profiles, int per_class,
                               std::pair<double, double> distance_range, const TransmitPulse& pulse,
                               int n_samples, uint64_t rng_seed) {
    if (profiles.empty()) throw std::invalid_argument("generate_dataset: no profiles");
    if (per_class < 1) throw std::invalid_argument("generate_dataset: per_class must be >= 1");
    if (!(distance_range.first > 0) || !(distance_range.second >= distance_range.first))
        throw std::invalid_argument("generate_dataset: invalid distance range");
    if (pulse.samples.empty()) throw std::invalid_argument("generate_dataset: empty pulse");

    const int k = static_cast<int>(profiles.size());
    std::vector<char> seen(static_cast<size_t>(k), 0);
    for (const auto& p : profiles) {
        validate(p);
        if (p.label < 0 || p.label >= k || seen[static_cast<size_t>(p.label)])
            throw std::invalid_argument("generate_dataset: profile labels must be distinct and cover 0..K-1");
        seen[static_cast<size_t>(p.label)] = 1;
    }

    const double t_ob = n_samples * pulse.sample_interval;

    data::Dataset ds;
    ds.n_classes = k;
    ds.n_samples_per_waveform = n_samples;
    ds.class_names.resize(static_cast<size_t>(k));
    for (const auto& p : profiles)
        ds.class_names[static_cast<size_t>(p.label)] = p.name.empty() ? "env" + std::to_string(p.label) : p.name;

    ds.samples.reserve(static_cast<size_t>(k) * per_class);
    for (const auto& profile : profiles) {
        for (int i = 0; i < per_class; ++i) {
            const uint64_t s = derive_seed(rng_seed, static_cast<uint64_t>(profile.label), static_cast<uint64_t>(i));
            std::mt19937_64 rng(derive_seed(s, 0));
            std::uniform_real_distribution<double> dist(distance_range.first, distance_range.second);
            const double d = distance_range.second > distance_range.first ? dist(rng) : distance_range.first;
            DrawnChannel drawn = draw_channel(profile, d, t_ob, derive_seed(s, 1));
            Waveform w = synthesize(pulse, drawn.channel, n_samples, derive_seed(s, 2));
            ds.samples.push_back({std::move(w), drawn.range_error, profile.label});
        }
    }
    return ds;
}

std::vector<EnvironmentProfile> load_profiles(const std::string& path) {
    const config::File f = config::parse_file(path);
    std::vector<EnvironmentProfile> out;
    int next_label = 0;
    for (const config::Section* sec : f.all("profile")) {
        sec->require_known_keys({"name", "label", "path_count_mean", "decay_rate", "nlos_bias_min",
                                 "nlos_bias_max", "noise_sigma", "first_path_attenuation"});
        EnvironmentProfile p;
        p.label = sec->get_int("label", next_label);
        p.name = sec->get_string("name", "env" + std::to_string(p.label));
        p.path_count_mean = sec->get_double("path_count_mean");
        p.decay_rate = sec->get_double("decay_rate");
        p.nlos_bias_min = sec->get_double("nlos_bias_min");
        p.nlos_bias_max = sec->get_double("nlos_bias_max");
        p.noise_sigma = sec->get_double("noise_sigma", 0.0);
        p.first_path_attenuation = sec->get_double("first_path_attenuation", 1.0);
        validate(p);
        next_label = p.label + 1;
        out.push_back(std::move(p));
    }
    if (out.empty()) throw std::invalid_argument(path + ": no [profile] sections found");
    return out;
}

}  // namespace uwbrem::sim
