#include "uwbrem/dgm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace uwbrem::dgm {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t base, uint64_t salt) {
    return splitmix64(splitmix64(base ^ (salt * 0xD6E8FEB86659FD93ULL)));
}

struct EncoderGeometry {
    std::vector<int> lengths;  // per conv layer output length
    int flat = 0;              // flattened feature count
};

EncoderGeometry encoder_geometry(const ModelConfig& cfg) {
    EncoderGeometry geo;
    int len = cfg.n_samples / cfg.input_grid_rows;
    for (size_t i = 0; i < cfg.encoder_channels.size(); ++i) {
        if (len < cfg.conv_kernel)
            throw std::invalid_argument("model config: waveform too short for encoder conv layer " +
                                        std::to_string(i));
        len = (len - cfg.conv_kernel) / cfg.conv_stride + 1;
        geo.lengths.push_back(len);
    }
    geo.flat = cfg.encoder_channels.back() * len;
    return geo;
}

struct DecoderGeometry {
    int base_len = 0;   // length of the reshaped FC output
    int final_len = 0;  // conv stack output length (>= n_samples, cropped)
};

DecoderGeometry decoder_geometry(const ModelConfig& cfg) {
    const int stages = static_cast<int>(cfg.decoder_channels.size());
    const int factor = 1 << stages;
    const int shrink = (cfg.conv_kernel - 1) * (factor - 1);
    DecoderGeometry geo;
    geo.base_len = (cfg.n_samples + shrink + factor - 1) / factor;
    int len = geo.base_len;
    for (int i = 0; i < stages; ++i) {
        len *= 2;
        if (len < cfg.conv_kernel)
            throw std::invalid_argument("model config: decoder stage " + std::to_string(i) +
                                        " shorter than kernel");
        len = len - cfg.conv_kernel + 1;
    }
    geo.final_len = len;
    return geo;
}

}  // namespace

void validate(const ModelConfig& cfg) {
    auto bad = [](const std::string& what) { throw std::invalid_argument("model config: " + what); };
    if (cfg.n_samples < 1) bad("n_samples must be >= 1");
    if (cfg.n_classes < 1) bad("n_classes must be >= 1");
    if (cfg.d_range < 1 || cfg.d_env < 1) bad("latent widths must be >= 1");
    if (cfg.encoder_channels.empty()) bad("encoder needs at least one conv layer");
    if (cfg.decoder_channels.empty()) bad("decoder needs at least one conv stage");
    for (int c : cfg.encoder_channels)
        if (c < 1) bad("encoder channel counts must be >= 1");
    for (int c : cfg.decoder_channels)
        if (c < 1) bad("decoder channel counts must be >= 1");
    if (cfg.conv_kernel < 1 || cfg.conv_stride < 1) bad("kernel and stride must be >= 1");
    if (cfg.input_grid_rows < 1 || cfg.n_samples % cfg.input_grid_rows != 0)
        bad("input_grid_rows must divide n_samples");
    if (cfg.w_rec < 0 || cfg.w_est < 0 || cfg.w_cls < 0 || cfg.kl_weight < 0) bad("loss weights must be >= 0");
    if (cfg.learning_rate < 0) bad("learning_rate must be >= 0");
    if (cfg.momentum < 0 || cfg.momentum >= 1) bad("momentum must be in [0,1)");
    if (cfg.batch_size < 1) bad("batch_size must be >= 1");
    if (cfg.epochs < 1) bad("epochs must be >= 1");
    for (int h : cfg.estimator_hidden)
        if (h < 1) bad("estimator hidden widths must be >= 1");
    for (int h : cfg.classifier_hidden)
        if (h < 1) bad("classifier hidden widths must be >= 1");
    encoder_geometry(cfg);
    decoder_geometry(cfg);
}

DgmModel::DgmModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    const EncoderGeometry enc = encoder_geometry(cfg_);
    const DecoderGeometry dec = decoder_geometry(cfg_);
    const int d_codes = cfg_.d_range + cfg_.d_env;
    uint64_t counter = 0;
    auto seed = [&] { return derive_seed(cfg_.rng_seed, 0x70000000ULL + counter++); };
    auto fc = [&](const std::string& name, const std::string& group, int in, int out) {
        params_.add(name + ".w", group, nn::he_uniform({in, out}, in, seed()));
        params_.add(name + ".b", group, nn::Tensor({out}));
    };
    auto conv = [&](const std::string& name, const std::string& group, int cout, int cin, int k) {
        params_.add(name + ".w", group, nn::he_uniform({cout, cin, k}, cin * k, seed()));
        params_.add(name + ".b", group, nn::Tensor({cout}));
    };

    int cin = cfg_.input_grid_rows;
    for (size_t i = 0; i < cfg_.encoder_channels.size(); ++i) {
        conv("encoder.conv" + std::to_string(i), "encoder", cfg_.encoder_channels[i], cin, cfg_.conv_kernel);
        cin = cfg_.encoder_channels[i];
    }
    fc("encoder.fc", "encoder", enc.flat, d_codes);

    fc("decoder.fc", "decoder", d_codes, cfg_.decoder_channels[0] * dec.base_len);
    for (size_t i = 0; i < cfg_.decoder_channels.size(); ++i) {
        const int out = i + 1 < cfg_.decoder_channels.size() ? cfg_.decoder_channels[i + 1] : 1;
        conv("decoder.conv" + std::to_string(i), "decoder", out, cfg_.decoder_channels[i], cfg_.conv_kernel);
    }

    int in = cfg_.d_range;
    for (size_t i = 0; i < cfg_.estimator_hidden.size(); ++i) {
        fc("estimator.fc" + std::to_string(i), "estimator", in, cfg_.estimator_hidden[i]);
        in = cfg_.estimator_hidden[i];
    }
    fc("estimator.fc" + std::to_string(cfg_.estimator_hidden.size()), "estimator", in, 1);

    in = cfg_.d_env;
    for (size_t i = 0; i < cfg_.classifier_hidden.size(); ++i) {
        fc("classifier.fc" + std::to_string(i), "classifier", in, cfg_.classifier_hidden[i]);
        in = cfg_.classifier_hidden[i];
    }
    fc("classifier.fc" + std::to_string(cfg_.classifier_hidden.size()), "classifier", in, cfg_.n_classes);
}

namespace {

nn::NodeId linear(nn::Graph& g, const std::string& name, nn::NodeId x) {
    return g.add(g.matmul(x, g.param(name + ".w")), g.param(name + ".b"));
}

nn::NodeId encoder_nodes(nn::Graph& g, const ModelConfig& cfg, nn::NodeId x) {
    const int batch = g.value(x).dim(0);
    nn::NodeId h = g.reshape(x, {batch, cfg.input_grid_rows, cfg.n_samples / cfg.input_grid_rows});
    for (size_t i = 0; i < cfg.encoder_channels.size(); ++i) {
        const std::string name = "encoder.conv" + std::to_string(i);
        h = g.relu(g.add(g.conv1d(h, g.param(name + ".w"), cfg.conv_stride), g.param(name + ".b")));
    }
    return linear(g, "encoder.fc", g.flatten(h));
}

nn::NodeId decoder_nodes(nn::Graph& g, const ModelConfig& cfg, nn::NodeId codes) {
    const DecoderGeometry dec = decoder_geometry(cfg);
    const int batch = g.value(codes).dim(0);
    nn::NodeId h = g.relu(linear(g, "decoder.fc", codes));
    h = g.reshape(h, {batch, cfg.decoder_channels[0], dec.base_len});
    for (size_t i = 0; i < cfg.decoder_channels.size(); ++i) {
        const std::string name = "decoder.conv" + std::to_string(i);
        h = g.add(g.conv1d(g.upsample1d(h, 2), g.param(name + ".w"), 1), g.param(name + ".b"));
        if (i + 1 < cfg.decoder_channels.size()) h = g.relu(h);  // final stage stays linear
    }
    if (dec.final_len > cfg.n_samples) h = g.slice_len(h, 0, cfg.n_samples);
    return g.reshape(h, {batch, cfg.n_samples});
}

nn::NodeId estimator_nodes(nn::Graph& g, const ModelConfig& cfg, nn::NodeId y) {
    nn::NodeId h = y;
    for (size_t i = 0; i < cfg.estimator_hidden.size(); ++i)
        h = g.relu(linear(g, "estimator.fc" + std::to_string(i), h));
    return linear(g, "estimator.fc" + std::to_string(cfg.estimator_hidden.size()), h);
}

nn::NodeId classifier_nodes(nn::Graph& g, const ModelConfig& cfg, nn::NodeId z) {
    nn::NodeId h = z;
    for (size_t i = 0; i < cfg.classifier_hidden.size(); ++i)
        h = g.relu(linear(g, "classifier.fc" + std::to_string(i), h));
    return g.softmax(linear(g, "classifier.fc" + std::to_string(cfg.classifier_hidden.size()), h));
}

struct ForwardNodes {
    nn::NodeId codes, y, z, xhat, dhat, scores;
};

ForwardNodes forward_nodes(nn::Graph& g, const ModelConfig& cfg, nn::NodeId x) {
    ForwardNodes f;
    f.codes = encoder_nodes(g, cfg, x);
    f.y = g.slice_cols(f.codes, 0, cfg.d_range);
    f.z = g.slice_cols(f.codes, cfg.d_range, cfg.d_range + cfg.d_env);
    f.xhat = decoder_nodes(g, cfg, f.codes);
    f.dhat = estimator_nodes(g, cfg, f.y);
    f.scores = classifier_nodes(g, cfg, f.z);
    return f;
}

nn::Tensor batch_waveforms(const data::Dataset& batch) {
    const int n = static_cast<int>(batch.samples.size());
    const int len = batch.n_samples_per_waveform;
    nn::Tensor x({n, len});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < len; ++j) x.at2(i, j) = batch.samples[static_cast<size_t>(i)].waveform.samples[static_cast<size_t>(j)];
    return x;
}

void check_batch(const ModelConfig& cfg, const data::Dataset& batch) {
    data::validate(batch);
    if (batch.n_samples_per_waveform != cfg.n_samples)
        throw std::invalid_argument("batch waveform length " + std::to_string(batch.n_samples_per_waveform) +
                                    " does not match model n_samples " + std::to_string(cfg.n_samples));
    for (const data::Sample& s : batch.samples)
        if (s.env_label >= cfg.n_classes)
            throw std::invalid_argument("batch label " + std::to_string(s.env_label) +
                                        " outside model class count " + std::to_string(cfg.n_classes));
}

int argmax_lowest(const double* v, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace

nn::NodeId build_loss(nn::Graph& g, const DgmModel& model, const data::Dataset& batch, LossBreakdown* parts) {
    const ModelConfig& cfg = model.config();
    check_batch(cfg, batch);
    const int n = static_cast<int>(batch.samples.size());

    const nn::NodeId x = g.constant(batch_waveforms(batch));
    const ForwardNodes f = forward_nodes(g, cfg, x);

    nn::Tensor dt({n, 1});
    nn::Tensor onehot({n, cfg.n_classes});
    for (int i = 0; i < n; ++i) {
        dt.at2(i, 0) = batch.samples[static_cast<size_t>(i)].range_error;
        onehot.at2(i, batch.samples[static_cast<size_t>(i)].env_label) = 1.0;
    }

    const nn::NodeId diff_rec = g.sub(f.xhat, x);
    const nn::NodeId l_rec = g.sum(g.mul(diff_rec, diff_rec));
    const nn::NodeId diff_est = g.sub(f.dhat, g.constant(std::move(dt)));
    const nn::NodeId l_est = g.sum(g.mul(diff_est, diff_est));
    const nn::NodeId onehot_node = g.constant(std::move(onehot));
    nn::NodeId l_cls;
    if (cfg.classifier_loss == ClassifierLoss::kSquaredError) {
        const nn::NodeId diff_cls = g.sub(f.scores, onehot_node);
        l_cls = g.sum(g.mul(diff_cls, diff_cls));
    } else {
        l_cls = g.scale(g.sum(g.mul(onehot_node, g.log(f.scores))), -1.0);
    }

    nn::NodeId total = g.add(g.add(g.scale(l_rec, cfg.w_rec), g.scale(l_est, cfg.w_est)), g.scale(l_cls, cfg.w_cls));
    if (cfg.kl_weight != 0.0)
        total = g.add(total, g.scale(g.sum(g.mul(f.codes, f.codes)), cfg.kl_weight));

    if (parts) {
        parts->total = g.value(total)[0];
        parts->rec = g.value(l_rec)[0];
        parts->est = g.value(l_est)[0];
        parts->cls = g.value(l_cls)[0];
    }
    return total;
}

LossBreakdown loss(const DgmModel& model, const data::Dataset& batch) {
    nn::Graph g(model.params());
    LossBreakdown parts;
    build_loss(g, model, batch, &parts);
    return parts;
}

LatentCodes DgmModel::encode(const std::vector<double>& waveform) const {
    if (static_cast<int>(waveform.size()) != cfg_.n_samples)
        throw std::invalid_argument("encode: waveform length does not match model n_samples");
    nn::Graph g(params_);
    const nn::NodeId x = g.constant(nn::Tensor({1, cfg_.n_samples}, waveform));
    const nn::NodeId codes = encoder_nodes(g, cfg_, x);
    const nn::Tensor& c = g.value(codes);
    LatentCodes out;
    out.y.assign(c.data(), c.data() + cfg_.d_range);
    out.z.assign(c.data() + cfg_.d_range, c.data() + cfg_.d_range + cfg_.d_env);
    return out;
}

std::vector<double> DgmModel::decode(const LatentCodes& codes) const {
    if (static_cast<int>(codes.y.size()) != cfg_.d_range || static_cast<int>(codes.z.size()) != cfg_.d_env)
        throw std::invalid_argument("decode: code lengths do not match model config");
    nn::Graph g(params_);
    const nn::NodeId y = g.constant(nn::Tensor({1, cfg_.d_range}, codes.y));
    const nn::NodeId z = g.constant(nn::Tensor({1, cfg_.d_env}, codes.z));
    const nn::NodeId xhat = decoder_nodes(g, cfg_, g.concat_cols(y, z));
    const nn::Tensor& v = g.value(xhat);
    return {v.data(), v.data() + v.numel()};
}

std::vector<double> DgmModel::reconstruct(const std::vector<double>& waveform) const {
    const LatentCodes codes = encode(waveform);
    return decode(codes);
}

double DgmModel::estimate_from_codes(const LatentCodes& codes) const {
    if (static_cast<int>(codes.y.size()) != cfg_.d_range)
        throw std::invalid_argument("estimate_from_codes: y length does not match d_range");
    nn::Graph g(params_);
    const nn::NodeId y = g.constant(nn::Tensor({1, cfg_.d_range}, codes.y));
    return g.value(estimator_nodes(g, cfg_, y))[0];
}

std::vector<double> DgmModel::classify_from_codes(const LatentCodes& codes) const {
    if (static_cast<int>(codes.z.size()) != cfg_.d_env)
        throw std::invalid_argument("classify_from_codes: z length does not match d_env");
    nn::Graph g(params_);
    const nn::NodeId z = g.constant(nn::Tensor({1, cfg_.d_env}, codes.z));
    const nn::Tensor& s = g.value(classifier_nodes(g, cfg_, z));
    return {s.data(), s.data() + s.numel()};
}

InferenceResult DgmModel::infer_from_codes(const LatentCodes& codes) const {
    if (static_cast<int>(codes.y.size()) != cfg_.d_range || static_cast<int>(codes.z.size()) != cfg_.d_env)
        throw std::invalid_argument("infer_from_codes: code lengths do not match model config");
    nn::Graph g(params_);
    std::vector<double> joint = codes.y;
    joint.insert(joint.end(), codes.z.begin(), codes.z.end());
    const nn::NodeId c = g.constant(nn::Tensor({1, cfg_.d_range + cfg_.d_env}, std::move(joint)));
    const nn::NodeId y = g.slice_cols(c, 0, cfg_.d_range);
    const nn::NodeId z = g.slice_cols(c, cfg_.d_range, cfg_.d_range + cfg_.d_env);
    const nn::NodeId dhat = estimator_nodes(g, cfg_, y);
    const nn::NodeId scores = classifier_nodes(g, cfg_, z);

    InferenceResult r;
    r.range_error = g.value(dhat)[0];
    const nn::Tensor& s = g.value(scores);
    r.scores.assign(s.data(), s.data() + s.numel());
    r.env_label = argmax_lowest(r.scores.data(), static_cast<int>(r.scores.size()));
    r.codes = codes;
    return r;
}

InferenceResult DgmModel::infer(const std::vector<double>& waveform) const {
    if (params_.size() == 0) throw std::logic_error("infer: model has no parameters loaded");
    if (static_cast<int>(waveform.size()) != cfg_.n_samples)
        throw std::invalid_argument("infer: waveform length does not match model n_samples");
    nn::Graph g(params_);
    const nn::NodeId x = g.constant(nn::Tensor({1, cfg_.n_samples}, waveform));
    const nn::NodeId codes = encoder_nodes(g, cfg_, x);
    const nn::NodeId y = g.slice_cols(codes, 0, cfg_.d_range);
    const nn::NodeId z = g.slice_cols(codes, cfg_.d_range, cfg_.d_range + cfg_.d_env);
    const nn::NodeId dhat = estimator_nodes(g, cfg_, y);
    const nn::NodeId scores = classifier_nodes(g, cfg_, z);

    InferenceResult r;
    r.range_error = g.value(dhat)[0];
    const nn::Tensor& s = g.value(scores);
    r.scores.assign(s.data(), s.data() + s.numel());
    r.env_label = argmax_lowest(r.scores.data(), static_cast<int>(r.scores.size()));
    const nn::Tensor& c = g.value(codes);
    r.codes.y.assign(c.data(), c.data() + cfg_.d_range);
    r.codes.z.assign(c.data() + cfg_.d_range, c.data() + cfg_.d_range + cfg_.d_env);
    return r;
}

TrainLog train(DgmModel& model, const data::Dataset& train_set) {
    const ModelConfig& cfg = model.config();
    check_batch(cfg, train_set);
    const auto t0 = std::chrono::steady_clock::now();

    const size_t n = train_set.samples.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(derive_seed(cfg.rng_seed, 0x5A5A5A5AULL));

    TrainLog log;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        LossBreakdown epoch_sum;
        for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.batch_size)) {
            const size_t stop = std::min(n, start + static_cast<size_t>(cfg.batch_size));
            data::Dataset batch;
            batch.n_classes = train_set.n_classes;
            batch.n_samples_per_waveform = train_set.n_samples_per_waveform;
            batch.class_names = train_set.class_names;
            batch.samples.reserve(stop - start);
            for (size_t i = start; i < stop; ++i) batch.samples.push_back(train_set.samples[order[i]]);

            nn::Graph g(&model.params());
            LossBreakdown parts;
            nn::NodeId loss_node;
            try {
                loss_node = build_loss(g, model, batch, &parts);
                g.backward(loss_node);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ", batch at sample " +
                                         std::to_string(start) + ": " + e.what());
            }
            model.params().sgd_step(cfg.learning_rate, cfg.momentum);
            epoch_sum.total += parts.total;
            epoch_sum.rec += parts.rec;
            epoch_sum.est += parts.est;
            epoch_sum.cls += parts.cls;
        }
        log.total.push_back(epoch_sum.total);
        log.rec.push_back(epoch_sum.rec);
        log.est.push_back(epoch_sum.est);
        log.cls.push_back(epoch_sum.cls);
    }
    log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return log;
}

void write_train_log_csv(const TrainLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write train log: " + path);
    out << "epoch,L,L_rec,L_est,L_cls\n";
    char buf[40];
    for (size_t e = 0; e < log.total.size(); ++e) {
        out << e;
        for (double v : {log.total[e], log.rec[e], log.est[e], log.cls[e]}) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << "\n";
    }
}

ModelConfig parse_model_config(const config::File& f) {
    ModelConfig cfg;
    if (const config::Section* m = f.find("model")) {
        m->require_known_keys({"n_samples", "n_classes", "d_range", "d_env", "encoder_channels", "conv_kernel",
                               "conv_stride", "input_grid_rows", "decoder_channels", "estimator_hidden",
                               "classifier_hidden", "w_rec", "w_est", "w_cls", "kl_weight", "classifier_loss"});
        cfg.n_samples = m->get_int("n_samples", cfg.n_samples);
        cfg.n_classes = m->get_int("n_classes", cfg.n_classes);
        cfg.d_range = m->get_int("d_range", cfg.d_range);
        cfg.d_env = m->get_int("d_env", cfg.d_env);
        cfg.encoder_channels = m->get_int_list("encoder_channels", cfg.encoder_channels);
        cfg.conv_kernel = m->get_int("conv_kernel", cfg.conv_kernel);
        cfg.conv_stride = m->get_int("conv_stride", cfg.conv_stride);
        cfg.input_grid_rows = m->get_int("input_grid_rows", cfg.input_grid_rows);
        cfg.decoder_channels = m->get_int_list("decoder_channels", cfg.decoder_channels);
        cfg.estimator_hidden = m->get_int_list("estimator_hidden", cfg.estimator_hidden);
        cfg.classifier_hidden = m->get_int_list("classifier_hidden", cfg.classifier_hidden);
        cfg.w_rec = m->get_double("w_rec", cfg.w_rec);
        cfg.w_est = m->get_double("w_est", cfg.w_est);
        cfg.w_cls = m->get_double("w_cls", cfg.w_cls);
        cfg.kl_weight = m->get_double("kl_weight", cfg.kl_weight);
        const std::string kind = m->get_string("classifier_loss", "squared_error");
        if (kind == "squared_error")
            cfg.classifier_loss = ClassifierLoss::kSquaredError;
        else if (kind == "cross_entropy")
            cfg.classifier_loss = ClassifierLoss::kCrossEntropy;
        else
            throw std::invalid_argument("config [model] classifier_loss: expected squared_error or cross_entropy");
    }
    if (const config::Section* t = f.find("train")) {
        t->require_known_keys({"learning_rate", "momentum", "batch_size", "epochs", "seed"});
        cfg.learning_rate = t->get_double("learning_rate", cfg.learning_rate);
        cfg.momentum = t->get_double("momentum", cfg.momentum);
        cfg.batch_size = t->get_int("batch_size", cfg.batch_size);
        cfg.epochs = t->get_int("epochs", cfg.epochs);
        cfg.rng_seed = t->get_u64("seed", cfg.rng_seed);
    }
    validate(cfg);
    return cfg;
}

config::File model_config_to_file(const ModelConfig& cfg) {
    config::File f;
    config::Section m;
    m.name = "model";
    m.set("n_samples", std::to_string(cfg.n_samples));
    m.set("n_classes", std::to_string(cfg.n_classes));
    m.set("d_range", std::to_string(cfg.d_range));
    m.set("d_env", std::to_string(cfg.d_env));
    m.set("encoder_channels", config::join_ints(cfg.encoder_channels));
    m.set("conv_kernel", std::to_string(cfg.conv_kernel));
    m.set("conv_stride", std::to_string(cfg.conv_stride));
    m.set("input_grid_rows", std::to_string(cfg.input_grid_rows));
    m.set("decoder_channels", config::join_ints(cfg.decoder_channels));
    m.set("estimator_hidden", config::join_ints(cfg.estimator_hidden));
    m.set("classifier_hidden", config::join_ints(cfg.classifier_hidden));
    m.set("w_rec", config::format_double(cfg.w_rec));
    m.set("w_est", config::format_double(cfg.w_est));
    m.set("w_cls", config::format_double(cfg.w_cls));
    m.set("kl_weight", config::format_double(cfg.kl_weight));
    m.set("classifier_loss",
          cfg.classifier_loss == ClassifierLoss::kSquaredError ? "squared_error" : "cross_entropy");
    f.sections.push_back(std::move(m));

    config::Section t;
    t.name = "train";
    t.set("learning_rate", config::format_double(cfg.learning_rate));
    t.set("momentum", config::format_double(cfg.momentum));
    t.set("batch_size", std::to_string(cfg.batch_size));
    t.set("epochs", std::to_string(cfg.epochs));
    t.set("seed", std::to_string(cfg.rng_seed));
    f.sections.push_back(std::move(t));
    return f;
}

void save(const DgmModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << "uwbrem-checkpoint v1\n";
    config::File f = model_config_to_file(model.config());
    if (!model.meta().empty()) {
        config::Section meta;
        meta.name = "meta";
        for (const auto& [k, v] : model.meta()) meta.set(k, v);
        f.sections.push_back(std::move(meta));
    }
    out << config::serialize(f);
    out << "[params]\n";
    char buf[40];
    for (const nn::ParamStore::Entry& e : model.params().entries()) {
        out << "param " << e.name << " " << e.group << " " << e.value.rank();
        for (int d : e.value.shape()) out << " " << d;
        out << " :";
        for (int64_t i = 0; i < e.value.numel(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", e.value[i]);
            out << ' ' << buf;
        }
        out << "\n";
    }
    out << "end\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

DgmModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "uwbrem-checkpoint v1")
        throw std::runtime_error(path + ": not a v1 checkpoint (bad magic line)");

    std::string cfg_text;
    while (std::getline(in, line)) {
        if (line == "[params]") break;
        cfg_text += line;
        cfg_text += "\n";
    }
    if (line != "[params]") throw std::runtime_error(path + ": missing [params] block");

    const config::File f = config::parse_string(cfg_text, path);
    DgmModel model(parse_model_config(f));
    if (const config::Section* meta = f.find("meta"))
        for (const auto& [k, v] : meta->entries) model.meta()[k] = v;

    size_t loaded = 0;
    bool saw_end = false;
    while (std::getline(in, line)) {
        if (line == "end") {
            saw_end = true;
            break;
        }
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tag, name, group;
        int rank;
        ss >> tag >> name >> group >> rank;
        if (!ss || tag != "param") throw std::runtime_error(path + ": malformed param line");
        std::vector<int> shape(static_cast<size_t>(rank));
        for (int& d : shape) ss >> d;
        std::string colon;
        ss >> colon;
        if (!ss || colon != ":") throw std::runtime_error(path + ": malformed param line for " + name);
        if (!model.params().contains(name))
            throw std::runtime_error(path + ": checkpoint parameter '" + name +
                                     "' does not exist in a model built from the stored config");
        nn::Tensor& value = model.params().value(name);
        if (value.shape() != shape)
            throw std::runtime_error(path + ": shape mismatch for '" + name + "': checkpoint " +
                                     nn::Tensor::shape_str(shape) + " vs model " +
                                     nn::Tensor::shape_str(value.shape()));
        for (int64_t i = 0; i < value.numel(); ++i) {
            double v;
            if (!(ss >> v)) throw std::runtime_error(path + ": truncated values for '" + name + "'");
            value[i] = v;
        }
        double extra;
        if (ss >> extra) throw std::runtime_error(path + ": too many values for '" + name + "'");
        ++loaded;
    }
    if (!saw_end) throw std::runtime_error(path + ": missing end marker");
    if (loaded != model.params().size())
        throw std::runtime_error(path + ": checkpoint has " + std::to_string(loaded) + " parameters, model expects " +
                                 std::to_string(model.params().size()));
    return model;
}

}  // namespace uwbrem::dgm
