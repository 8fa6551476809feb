#include "uwbrem/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace uwbrem::data {

void validate(const Dataset& d) {
    if (d.samples.empty()) throw std::invalid_argument("dataset: empty");
    if (d.n_classes < 1) throw std::invalid_argument("dataset: n_classes must be >= 1");
    if (static_cast<int>(d.class_names.size()) != d.n_classes)
        throw std::invalid_argument("dataset: class_names size does not match n_classes");
    for (const Sample& s : d.samples) {
        if (s.waveform.length() != d.n_samples_per_waveform)
            throw std::invalid_argument("dataset: waveform length mismatch");
        if (s.env_label < 0 || s.env_label >= d.n_classes)
            throw std::invalid_argument("dataset: label out of range");
        if (!std::isfinite(s.range_error)) throw std::invalid_argument("dataset: non-finite range error");
        for (double v : s.waveform.samples)
            if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite waveform value");
    }
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0';
}

}  // namespace

Dataset import_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    struct Row {
        std::string label;
        double range_error;
        std::vector<double> samples;
    };
    std::vector<Row> rows;
    std::string line;
    size_t lineno = 0;
    int n_cols = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_row(line);
        if (fields.size() < 3)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected label,range_error_m,s0,...");
        double err;
        if (lineno == 1 && !parse_double(fields[1], err)) continue;  // optional header row
        Row r;
        r.label = fields[0];
        if (!parse_double(fields[1], r.range_error))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-numeric range error '" +
                                     fields[1] + "'");
        r.samples.reserve(fields.size() - 2);
        for (size_t i = 2; i < fields.size(); ++i) {
            double v;
            if (!parse_double(fields[i], v))
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-numeric waveform value '" +
                                         fields[i] + "'");
            r.samples.push_back(v);
        }
        if (n_cols < 0) n_cols = static_cast<int>(r.samples.size());
        if (static_cast<int>(r.samples.size()) != n_cols)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": ragged row, expected " +
                                     std::to_string(n_cols) + " waveform values");
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");

    // Distinct label strings, sorted, remapped to contiguous indices.
    std::map<std::string, int> label_ids;
    for (const Row& r : rows) label_ids.emplace(r.label, 0);
    int next = 0;
    for (auto& [name, id] : label_ids) id = next++;

    Dataset ds;
    ds.n_classes = next;
    ds.n_samples_per_waveform = n_cols;
    for (const auto& [name, id] : label_ids) ds.class_names.push_back(name);
    ds.samples.reserve(rows.size());
    for (Row& r : rows) {
        Sample s;
        s.waveform.samples = std::move(r.samples);
        s.range_error = r.range_error;
        s.env_label = label_ids.at(r.label);
        ds.samples.push_back(std::move(s));
    }
    validate(ds);
    return ds;
}

void export_csv(const Dataset& d, const std::string& path) {
    validate(d);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out << "label,range_error_m";
    for (int i = 0; i < d.n_samples_per_waveform; ++i) out << ",s" << i;
    out << "\n";
    char buf[40];
    for (const Sample& s : d.samples) {
        out << d.class_names[static_cast<size_t>(s.env_label)];
        std::snprintf(buf, sizeof(buf), "%.17g", s.range_error);
        out << ',' << buf;
        for (double v : s.waveform.samples) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset relabel(const Dataset& d, const std::vector<int>& mapping) {
    validate(d);
    if (static_cast<int>(mapping.size()) != d.n_classes)
        throw std::invalid_argument("relabel: mapping must cover every current class");

    // Compress mapped values to contiguous indices ordered by mapped value.
    std::map<int, int> compress;
    for (int m : mapping) compress.emplace(m, 0);
    int next = 0;
    for (auto& [v, id] : compress) id = next++;

    Dataset out;
    out.n_classes = next;
    out.n_samples_per_waveform = d.n_samples_per_waveform;
    out.class_names.assign(static_cast<size_t>(next), "");
    for (int old = 0; old < d.n_classes; ++old) {
        std::string& name = out.class_names[static_cast<size_t>(compress.at(mapping[static_cast<size_t>(old)]))];
        if (!name.empty()) name += "+";
        name += d.class_names[static_cast<size_t>(old)];
    }
    out.samples = d.samples;
    for (Sample& s : out.samples) s.env_label = compress.at(mapping[static_cast<size_t>(s.env_label)]);
    return out;
}

Dataset filter_labels(const Dataset& d, const std::vector<int>& keep) {
    validate(d);
    if (keep.empty()) throw std::invalid_argument("filter_labels: empty keep set");
    std::vector<char> keep_mask(static_cast<size_t>(d.n_classes), 0);
    for (int k : keep) {
        if (k < 0 || k >= d.n_classes) throw std::invalid_argument("filter_labels: label out of range");
        keep_mask[static_cast<size_t>(k)] = 1;
    }
    std::vector<int> new_id(static_cast<size_t>(d.n_classes), -1);
    Dataset out;
    out.n_samples_per_waveform = d.n_samples_per_waveform;
    int next = 0;
    for (int k = 0; k < d.n_classes; ++k) {
        if (!keep_mask[static_cast<size_t>(k)]) continue;
        new_id[static_cast<size_t>(k)] = next++;
        out.class_names.push_back(d.class_names[static_cast<size_t>(k)]);
    }
    out.n_classes = next;
    for (const Sample& s : d.samples) {
        if (new_id[static_cast<size_t>(s.env_label)] < 0) continue;
        Sample copy = s;
        copy.env_label = new_id[static_cast<size_t>(s.env_label)];
        out.samples.push_back(std::move(copy));
    }
    if (out.samples.empty()) throw std::invalid_argument("filter_labels: no samples left");
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec) {
    validate(d);
    if (d.samples.size() < 2) throw std::invalid_argument("split: need at least 2 samples");
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw std::invalid_argument("split: train_fraction must be in (0,1)");

    const size_t n = d.samples.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(spec.rng_seed);

    std::vector<char> in_train(n, 0);
    if (spec.stratified) {
        // Proportional per-class draw; remainders filled globally so the
        // total still matches round(fraction*N).
        std::vector<std::vector<size_t>> per_class(static_cast<size_t>(d.n_classes));
        for (size_t i = 0; i < n; ++i) per_class[static_cast<size_t>(d.samples[i].env_label)].push_back(i);
        size_t target = static_cast<size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
        size_t taken = 0;
        std::vector<size_t> leftovers;
        for (auto& idxs : per_class) {
            std::shuffle(idxs.begin(), idxs.end(), rng);
            size_t take = static_cast<size_t>(spec.train_fraction * static_cast<double>(idxs.size()));
            take = std::min(take, idxs.size());
            for (size_t j = 0; j < idxs.size(); ++j) {
                if (j < take) {
                    in_train[idxs[j]] = 1;
                    ++taken;
                } else {
                    leftovers.push_back(idxs[j]);
                }
            }
        }
        std::shuffle(leftovers.begin(), leftovers.end(), rng);
        for (size_t j = 0; taken < target && j < leftovers.size(); ++j, ++taken) in_train[leftovers[j]] = 1;
    } else {
        std::shuffle(order.begin(), order.end(), rng);
        const size_t n_train = static_cast<size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
        for (size_t i = 0; i < n_train; ++i) in_train[order[i]] = 1;
    }

    Dataset train, test;
    for (Dataset* part : {&train, &test}) {
        part->n_classes = d.n_classes;
        part->n_samples_per_waveform = d.n_samples_per_waveform;
        part->class_names = d.class_names;
    }
    for (size_t i = 0; i < n; ++i)
        (in_train[i] ? train : test).samples.push_back(d.samples[i]);
    return {std::move(train), std::move(test)};
}

std::pair<Dataset, NormParams> normalize(const Dataset& d) {
    validate(d);
    Dataset out = d;
    NormParams params;
    params.peak.reserve(d.samples.size());
    for (Sample& s : out.samples) {
        double peak = 0.0;
        for (double v : s.waveform.samples) peak = std::max(peak, std::abs(v));
        if (peak == 0.0) throw std::invalid_argument("normalize: all-zero waveform");
        params.peak.push_back(peak);
        // Divide (not multiply by reciprocal) so peak/peak == 1 exactly and
        // the operation is idempotent.
        for (double& v : s.waveform.samples) v /= peak;
    }
    return {std::move(out), std::move(params)};
}

}  // namespace uwbrem::data
