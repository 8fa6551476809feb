#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uwbrem/baseline.hpp"
#include "uwbrem/config_file.hpp"
#include "uwbrem/dataset.hpp"
#include "uwbrem/dgm.hpp"
#include "uwbrem/metrics.hpp"
#include "uwbrem/projection.hpp"
#include "uwbrem/report.hpp"
#include "uwbrem/signal_sim.hpp"

namespace {

using namespace uwbrem;

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

void write_resolved_config(const config::File& f, const std::string& out_path) {
    config::write_file(f, out_path + ".resolved.cfg");
}

void print_class_histogram(const data::Dataset& ds) {
    std::vector<size_t> counts(static_cast<size_t>(ds.n_classes), 0);
    for (const data::Sample& s : ds.samples) ++counts[static_cast<size_t>(s.env_label)];
    std::cout << "classes:\n";
    for (int k = 0; k < ds.n_classes; ++k)
        std::cout << "  " << k << " " << ds.class_names[static_cast<size_t>(k)] << ": "
                  << counts[static_cast<size_t>(k)] << "\n";
}

struct GenerateSettings {
    int per_class = 100;
    double distance_min = 2.0;
    double distance_max = 4.0;
    int n_samples = 152;
    double sample_interval = 1e-9;
    int pulse_width = 5;
    uint64_t seed = 1;
};

GenerateSettings parse_generate(const config::File& f) {
    GenerateSettings g;
    if (const config::Section* s = f.find("generate")) {
        s->require_known_keys({"per_class", "distance_min", "distance_max", "n_samples", "sample_interval",
                               "pulse_width", "seed"});
        g.per_class = s->get_int("per_class", g.per_class);
        g.distance_min = s->get_double("distance_min", g.distance_min);
        g.distance_max = s->get_double("distance_max", g.distance_max);
        g.n_samples = s->get_int("n_samples", g.n_samples);
        g.sample_interval = s->get_double("sample_interval", g.sample_interval);
        g.pulse_width = s->get_int("pulse_width", g.pulse_width);
        g.seed = s->get_u64("seed", g.seed);
    }
    return g;
}

config::File generate_to_file(const GenerateSettings& g, const std::vector<sim::EnvironmentProfile>& profiles) {
    config::File f;
    config::Section s;
    s.name = "generate";
    s.set("per_class", std::to_string(g.per_class));
    s.set("distance_min", config::format_double(g.distance_min));
    s.set("distance_max", config::format_double(g.distance_max));
    s.set("n_samples", std::to_string(g.n_samples));
    s.set("sample_interval", config::format_double(g.sample_interval));
    s.set("pulse_width", std::to_string(g.pulse_width));
    s.set("seed", std::to_string(g.seed));
    f.sections.push_back(std::move(s));
    for (const sim::EnvironmentProfile& p : profiles) {
        config::Section ps;
        ps.name = "profile";
        ps.set("label", std::to_string(p.label));
        ps.set("name", p.name);
        ps.set("path_count_mean", config::format_double(p.path_count_mean));
        ps.set("decay_rate", config::format_double(p.decay_rate));
        ps.set("nlos_bias_min", config::format_double(p.nlos_bias_min));
        ps.set("nlos_bias_max", config::format_double(p.nlos_bias_max));
        ps.set("noise_sigma", config::format_double(p.noise_sigma));
        ps.set("first_path_attenuation", config::format_double(p.first_path_attenuation));
        f.sections.push_back(std::move(ps));
    }
    return f;
}

int cmd_generate(const std::string& config_path, const std::string& out_path, std::optional<uint64_t> seed) {
    GenerateSettings g = parse_generate(config::parse_file(config_path));
    if (seed) g.seed = *seed;
    const std::vector<sim::EnvironmentProfile> profiles = sim::load_profiles(config_path);
    const sim::TransmitPulse pulse = sim::gaussian_monocycle(g.pulse_width, g.sample_interval);
    const data::Dataset ds = sim::generate_dataset(profiles, g.per_class, {g.distance_min, g.distance_max},
                                                   pulse, g.n_samples, g.seed);
    data::export_csv(ds, out_path);
    write_resolved_config(generate_to_file(g, profiles), out_path);
    std::cout << "wrote " << ds.samples.size() << " samples to " << out_path << "\n";
    print_class_histogram(ds);
    return 0;
}

data::SplitSpec parse_split(const config::File& f) {
    data::SplitSpec spec;
    if (const config::Section* s = f.find("split")) {
        s->require_known_keys({"train_fraction", "seed", "stratified"});
        spec.train_fraction = s->get_double("train_fraction", spec.train_fraction);
        spec.rng_seed = s->get_u64("seed", spec.rng_seed);
        spec.stratified = s->get_bool("stratified", spec.stratified);
    }
    return spec;
}

config::Section split_to_section(const data::SplitSpec& spec) {
    config::Section s;
    s.name = "split";
    s.set("train_fraction", config::format_double(spec.train_fraction));
    s.set("seed", std::to_string(spec.rng_seed));
    s.set("stratified", spec.stratified ? "true" : "false");
    return s;
}

int cmd_train(const std::string& config_path, const std::string& data_path, const std::string& out_path,
              std::optional<uint64_t> seed) {
    const config::File f = config::parse_file(config_path);
    dgm::ModelConfig cfg = dgm::parse_model_config(f);
    const data::SplitSpec split_spec = parse_split(f);
    if (seed) cfg.rng_seed = *seed;

    data::Dataset full = data::import_csv(data_path);
    if (cfg.n_samples != full.n_samples_per_waveform)
        throw std::invalid_argument("config n_samples=" + std::to_string(cfg.n_samples) +
                                    " does not match dataset waveform length " +
                                    std::to_string(full.n_samples_per_waveform));
    if (cfg.n_classes < full.n_classes)
        throw std::invalid_argument("config n_classes=" + std::to_string(cfg.n_classes) +
                                    " is smaller than dataset class count " + std::to_string(full.n_classes));

    auto [train_raw, test_raw] = data::split(full, split_spec);
    auto [train_set, train_norm] = data::normalize(train_raw);

    dgm::DgmModel model(cfg);
    std::cout << "training on " << train_set.samples.size() << " samples (" << model.params().total_parameters()
              << " parameters, " << cfg.epochs << " epochs)\n";
    const dgm::TrainLog log = dgm::train(model, train_set);

    model.meta()["split_seed"] = std::to_string(split_spec.rng_seed);
    model.meta()["split_train_fraction"] = config::format_double(split_spec.train_fraction);
    model.meta()["split_stratified"] = split_spec.stratified ? "true" : "false";
    model.meta()["data_file"] = std::filesystem::path(data_path).filename().string();
    dgm::save(model, out_path);
    dgm::write_train_log_csv(log, out_path + ".trainlog.csv");

    config::File resolved = dgm::model_config_to_file(cfg);
    resolved.sections.push_back(split_to_section(split_spec));
    write_resolved_config(resolved, out_path);

    std::cout << "initial L = " << log.total.front() << ", final L = " << log.total.back() << " ("
              << log.wall_seconds << " s)\n";
    std::cout << "saved checkpoint to " << out_path << "\n";
    return 0;
}

data::SplitSpec split_from_meta(const dgm::DgmModel& model) {
    data::SplitSpec spec;
    const auto& meta = model.meta();
    if (auto it = meta.find("split_seed"); it != meta.end()) spec.rng_seed = std::stoull(it->second);
    if (auto it = meta.find("split_train_fraction"); it != meta.end()) spec.train_fraction = std::stod(it->second);
    if (auto it = meta.find("split_stratified"); it != meta.end()) spec.stratified = it->second == "true";
    return spec;
}

Waveform normalized_copy(const Waveform& w) {
    double peak = 0.0;
    for (double v : w.samples) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) throw std::invalid_argument("all-zero waveform");
    Waveform out = w;
    for (double& v : out.samples) v /= peak;
    return out;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path, const std::string& out_prefix,
                 const std::string& config_path) {
    const dgm::DgmModel model = dgm::load(model_path);
    const data::SplitSpec split_spec = split_from_meta(model);
    if (!config_path.empty()) {
        const data::SplitSpec requested = parse_split(config::parse_file(config_path));
        if (requested.rng_seed != split_spec.rng_seed ||
            requested.train_fraction != split_spec.train_fraction ||
            requested.stratified != split_spec.stratified)
            std::cerr << "warning: [split] in " << config_path
                      << " differs from the one stored in the checkpoint; using the checkpoint's split\n";
    }

    const data::Dataset full = data::import_csv(data_path);
    auto [train_raw, test_raw] = data::split(full, split_spec);

    // Same partition feeds both methods; spot-check the shared test set.
    if (train_raw.samples.size() + test_raw.samples.size() != full.samples.size())
        throw std::logic_error("evaluate: split is not a partition");

    // DGM on normalized waveforms (matching training conditions).
    std::vector<double> dgm_residuals;
    std::vector<int> dgm_pred, truth;
    dgm_residuals.reserve(test_raw.samples.size());
    for (const data::Sample& s : test_raw.samples) {
        const dgm::InferenceResult r = model.infer(normalized_copy(s.waveform).samples);
        dgm_residuals.push_back(s.range_error - r.range_error);
        dgm_pred.push_back(r.env_label);
        truth.push_back(s.env_label);
    }

    // Classical pipeline on raw waveform features.
    std::vector<baseline::FeatureVector> train_feats, test_feats;
    std::vector<double> train_targets;
    std::vector<int> train_labels;
    for (const data::Sample& s : train_raw.samples) {
        train_feats.push_back(baseline::extract_features(s.waveform));
        train_targets.push_back(s.range_error);
        train_labels.push_back(s.env_label);
    }
    for (const data::Sample& s : test_raw.samples) test_feats.push_back(baseline::extract_features(s.waveform));

    baseline::TrainConfig bcfg;
    const baseline::LinearModel svr = baseline::train_svr(train_feats, train_targets, bcfg);
    const baseline::LinearModel svc = baseline::train_svc(train_feats, train_labels, full.n_classes, bcfg);

    std::vector<double> svr_residuals, unmitigated;
    std::vector<int> svc_pred;
    for (size_t i = 0; i < test_raw.samples.size(); ++i) {
        const data::Sample& s = test_raw.samples[i];
        svr_residuals.push_back(s.range_error - svr.predict_scalar(test_feats[i]));
        unmitigated.push_back(s.range_error);  // zero estimate
        svc_pred.push_back(svc.predict_class(test_feats[i]));
    }

    eval::EvalReport row;
    row.dataset_name = stem_of(data_path);
    row.sample_count = static_cast<int>(test_raw.samples.size());
    row.unmitigated_mae = eval::mae(unmitigated);
    row.svr_rmse = eval::rmse(svr_residuals);
    row.svr_mae = eval::mae(svr_residuals);
    row.dgm_rmse = eval::rmse(dgm_residuals);
    row.dgm_mae = eval::mae(dgm_residuals);
    row.svc_accuracy = eval::accuracy(svc_pred, truth);
    row.dgm_accuracy = eval::accuracy(dgm_pred, truth);
    row.per_class_accuracy.assign(static_cast<size_t>(full.n_classes), 0.0);
    {
        std::vector<size_t> totals(static_cast<size_t>(full.n_classes), 0);
        std::vector<size_t> hits(static_cast<size_t>(full.n_classes), 0);
        for (size_t i = 0; i < truth.size(); ++i) {
            ++totals[static_cast<size_t>(truth[i])];
            if (dgm_pred[i] == truth[i]) ++hits[static_cast<size_t>(truth[i])];
        }
        for (int k = 0; k < full.n_classes; ++k)
            row.per_class_accuracy[static_cast<size_t>(k)] =
                totals[static_cast<size_t>(k)] ? static_cast<double>(hits[static_cast<size_t>(k)]) /
                                                     static_cast<double>(totals[static_cast<size_t>(k)])
                                               : 0.0;
    }

    const std::vector<eval::EvalReport> rows{row};
    const std::string table = eval::render_comparison(rows);
    std::cout << table;
    {
        std::ofstream out(out_prefix + ".report.txt");
        out << table;
    }
    eval::write_comparison_csv(rows, out_prefix + ".report.csv");
    eval::write_cdf_csv(eval::cdf(unmitigated), out_prefix + ".cdf_unmitigated.csv");
    eval::write_cdf_csv(eval::cdf(svr_residuals), out_prefix + ".cdf_svr.csv");
    eval::write_cdf_csv(eval::cdf(dgm_residuals), out_prefix + ".cdf_dgm.csv");
    baseline::export_features_csv(test_feats, out_prefix + ".features.csv");

    config::File resolved = dgm::model_config_to_file(model.config());
    resolved.sections.push_back(split_to_section(split_spec));
    write_resolved_config(resolved, out_prefix);
    return 0;
}

// Accepts either bare waveform rows (N_s values) or dataset rows
// (label,range_error_m,s0,...). Header rows are skipped.
std::vector<std::vector<double>> read_waveform_rows(const std::string& path, int n_samples) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
        size_t start;
        if (static_cast<int>(fields.size()) == n_samples)
            start = 0;
        else if (static_cast<int>(fields.size()) == n_samples + 2)
            start = 2;
        else if (lineno == 1)
            continue;  // header
        else
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(n_samples) + " waveform values per row");
        std::vector<double> w;
        w.reserve(static_cast<size_t>(n_samples));
        bool numeric = true;
        for (size_t i = start; i < fields.size(); ++i) {
            char* end = nullptr;
            const double v = std::strtod(fields[i].c_str(), &end);
            if (end == fields[i].c_str() || *end != '\0') {
                numeric = false;
                break;
            }
            w.push_back(v);
        }
        if (!numeric) {
            if (lineno == 1) continue;  // header
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-numeric waveform value");
        }
        rows.push_back(std::move(w));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no waveform rows");
    return rows;
}

int cmd_infer(const std::string& model_path, const std::string& input_path, const std::string& out_path) {
    const dgm::DgmModel model = dgm::load(model_path);
    const int n_samples = model.config().n_samples;
    const int k = model.config().n_classes;
    const std::vector<std::vector<double>> rows = read_waveform_rows(input_path, n_samples);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write predictions: " + out_path);
    out << "range_error_est,label_est";
    for (int i = 0; i < k; ++i) out << ",score_" << i;
    for (int i = 0; i < model.config().d_range; ++i) out << ",y_" << i;
    for (int i = 0; i < model.config().d_env; ++i) out << ",z_" << i;
    out << "\n";
    char buf[40];
    auto put = [&](double v, bool lead_comma = true) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        if (lead_comma) out << ',';
        out << buf;
    };
    for (const std::vector<double>& w : rows) {
        Waveform wf{w, 1e-9};
        const dgm::InferenceResult r = model.infer(normalized_copy(wf).samples);
        put(r.range_error, false);
        out << ',' << r.env_label;
        for (double s : r.scores) put(s);
        for (double y : r.codes.y) put(y);
        for (double z : r.codes.z) put(z);
        out << "\n";
    }
    std::cout << "wrote " << rows.size() << " predictions to " << out_path << "\n";
    return 0;
}

int cmd_project(const std::string& model_path, const std::string& data_path, const std::string& out_path) {
    const dgm::DgmModel model = dgm::load(model_path);
    const data::Dataset full = data::import_csv(data_path);
    auto [train_raw, test_raw] = data::split(full, split_from_meta(model));

    std::vector<std::vector<double>> codes;
    std::vector<int> labels;
    for (const data::Sample& s : test_raw.samples) {
        codes.push_back(model.encode(normalized_copy(s.waveform).samples).z);
        labels.push_back(s.env_label);
    }
    const eval::Projection2D proj = eval::project_latent(codes, labels);
    eval::write_projection_csv(proj, out_path);
    std::cout << "projected " << codes.size() << " environment codes to " << out_path
              << " (explained variance " << proj.explained[0] << ", " << proj.explained[1] << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UWB range error mitigation and environment identification workbench"};
    app.require_subcommand(1);

    std::string config_path, data_path, model_path, input_path, out_path;
    std::optional<uint64_t> seed;

    CLI::App* gen = app.add_subcommand("generate", "Synthesize a labeled waveform dataset");
    gen->add_option("--config", config_path, "Config with [generate] and [profile] blocks")->required();
    gen->add_option("--out", out_path, "Output dataset CSV")->required();
    gen->add_option("--seed", seed, "Override the generation seed");

    CLI::App* train = app.add_subcommand("train", "Split, normalize and train the model");
    train->add_option("--config", config_path, "Config with [model]/[train]/[split] blocks")->required();
    train->add_option("--data", data_path, "Dataset CSV")->required();
    train->add_option("--out", out_path, "Output checkpoint path")->required();
    train->add_option("--seed", seed, "Override the training seed");

    CLI::App* eval_cmd = app.add_subcommand("evaluate", "Compare DGM against classical baselines");
    eval_cmd->add_option("--model", model_path, "Trained checkpoint")->required();
    eval_cmd->add_option("--data", data_path, "Dataset CSV (same file used for training)")->required();
    eval_cmd->add_option("--out", out_path, "Output prefix for report/CDF files")->required();
    eval_cmd->add_option("--config", config_path, "Optional config to cross-check the split");

    CLI::App* infer = app.add_subcommand("infer", "Range error + environment for waveform rows");
    infer->add_option("--model", model_path, "Trained checkpoint")->required();
    infer->add_option("--input", input_path, "Waveform CSV")->required();
    infer->add_option("--out", out_path, "Predictions CSV")->required();

    CLI::App* project = app.add_subcommand("project", "2-D projection of test-set environment codes");
    project->add_option("--model", model_path, "Trained checkpoint")->required();
    project->add_option("--data", data_path, "Dataset CSV")->required();
    project->add_option("--out", out_path, "Projection CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate(config_path, out_path, seed);
        if (train->parsed()) return cmd_train(config_path, data_path, out_path, seed);
        if (eval_cmd->parsed()) return cmd_evaluate(model_path, data_path, out_path, config_path);
        if (infer->parsed()) return cmd_infer(model_path, input_path, out_path);
        if (project->parsed()) return cmd_project(model_path, data_path, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
