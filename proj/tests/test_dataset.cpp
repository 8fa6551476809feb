#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "uwbrem/dataset.hpp"

using namespace uwbrem;
using data::Dataset;
using data::Sample;
using data::SplitSpec;

namespace {

std::string write_temp(const std::string& text, const std::string& name) {
    const std::string path = "/tmp/uwbrem_" + name;
    std::ofstream out(path);
    out << text;
    return path;
}

Dataset random_dataset(int n, int n_classes, int len, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-2.0, 2.0), err(0.0, 1.0);
    Dataset d;
    d.n_classes = n_classes;
    d.n_samples_per_waveform = len;
    for (int k = 0; k < n_classes; ++k) d.class_names.push_back("c" + std::to_string(k));
    for (int i = 0; i < n; ++i) {
        Sample s;
        s.waveform.samples.resize(static_cast<size_t>(len));
        for (double& v : s.waveform.samples) v = amp(rng);
        s.range_error = err(rng);
        s.env_label = static_cast<int>(rng() % static_cast<uint64_t>(n_classes));
        d.samples.push_back(std::move(s));
    }
    return d;
}

}  // namespace

TEST_CASE("import remaps string labels to sorted contiguous ids") {
    const std::string path = write_temp(
        "metal,0.5,0.1,0.2,0.3,0.4\n"
        "wood,0.2,1,2,3,4\n",
        "labels.csv");
    const Dataset d = data::import_csv(path);
    CHECK(d.n_classes == 2);
    REQUIRE(d.class_names.size() == 2);
    CHECK(d.class_names[0] == "metal");
    CHECK(d.class_names[1] == "wood");
    CHECK(d.samples[0].env_label == 0);
    CHECK(d.samples[1].env_label == 1);
}

TEST_CASE("import infers waveform length from the first row") {
    const std::string path = write_temp("a,0.25,1,2,3,4\n", "single.csv");
    const Dataset d = data::import_csv(path);
    CHECK(d.n_samples_per_waveform == 4);
    CHECK(d.samples.size() == 1);
}

TEST_CASE("import accepts an optional header and rejects ragged rows") {
    const std::string with_header = write_temp(
        "label,range_error_m,s0,s1\n"
        "a,0.1,1,2\n",
        "header.csv");
    CHECK(data::import_csv(with_header).samples.size() == 1);

    const std::string ragged = write_temp(
        "a,0.1,1,2\n"
        "b,0.2,1,2,3\n",
        "ragged.csv");
    CHECK_THROWS(data::import_csv(ragged));

    const std::string bad_value = write_temp("a,0.1,1,oops\n", "badvalue.csv");
    CHECK_THROWS(data::import_csv(bad_value));

    const std::string empty = write_temp("", "empty.csv");
    CHECK_THROWS(data::import_csv(empty));
}

TEST_CASE("export then import is the identity") {
    const Dataset d = random_dataset(37, 3, 16, 123);
    const std::string path = "/tmp/uwbrem_roundtrip.csv";
    data::export_csv(d, path);
    const Dataset back = data::import_csv(path);
    REQUIRE(back.samples.size() == d.samples.size());
    CHECK(back.n_classes == d.n_classes);
    CHECK(back.class_names == d.class_names);
    for (size_t i = 0; i < d.samples.size(); ++i) {
        CHECK(back.samples[i].env_label == d.samples[i].env_label);
        CHECK(back.samples[i].range_error == d.samples[i].range_error);
        CHECK(back.samples[i].waveform.samples == d.samples[i].waveform.samples);
    }
}

TEST_CASE("identity relabel keeps the dataset unchanged") {
    const Dataset d = random_dataset(20, 3, 8, 5);
    const Dataset r = data::relabel(d, {0, 1, 2});
    CHECK(r.n_classes == 3);
    for (size_t i = 0; i < d.samples.size(); ++i) {
        CHECK(r.samples[i].env_label == d.samples[i].env_label);
        CHECK(r.samples[i].waveform.samples == d.samples[i].waveform.samples);
    }
}

TEST_CASE("relabel merges classes and preserves counts") {
    const Dataset d = random_dataset(100, 5, 8, 6);
    const Dataset r = data::relabel(d, {0, 0, 1, 1, 1});
    CHECK(r.n_classes == 2);
    CHECK(r.samples.size() == d.samples.size());
    size_t merged0 = 0, merged1 = 0, orig0 = 0, orig1 = 0;
    for (const auto& s : d.samples) (s.env_label < 2 ? orig0 : orig1)++;
    for (const auto& s : r.samples) (s.env_label == 0 ? merged0 : merged1)++;
    CHECK(merged0 == orig0);
    CHECK(merged1 == orig1);
    CHECK(r.class_names[0] == "c0+c1");
    CHECK(r.class_names[1] == "c2+c3+c4");
}

TEST_CASE("relabel requires a total mapping") {
    const Dataset d = random_dataset(10, 3, 8, 7);
    CHECK_THROWS_AS(data::relabel(d, {0, 1}), std::invalid_argument);
}

TEST_CASE("filter then relabel keeps only the requested classes") {
    const Dataset d = random_dataset(200, 5, 8, 8);
    const Dataset part = data::filter_labels(d, {1, 2, 3});
    CHECK(part.n_classes == 3);
    size_t expected = 0;
    for (const auto& s : d.samples)
        if (s.env_label >= 1 && s.env_label <= 3) ++expected;
    CHECK(part.samples.size() == expected);
    for (const auto& s : part.samples) CHECK(s.env_label < 3);
    CHECK(part.class_names == std::vector<std::string>{"c1", "c2", "c3"});
}

TEST_CASE("split yields an exact 80/20 partition") {
    const Dataset d = random_dataset(10, 2, 8, 9);
    auto [train, test] = data::split(d, SplitSpec{0.8, 11, false});
    CHECK(train.samples.size() == 8);
    CHECK(test.samples.size() == 2);
}

TEST_CASE("split is deterministic in the seed") {
    const Dataset d = random_dataset(50, 2, 8, 10);
    auto [a_train, a_test] = data::split(d, SplitSpec{0.8, 3, false});
    auto [b_train, b_test] = data::split(d, SplitSpec{0.8, 3, false});
    REQUIRE(a_train.samples.size() == b_train.samples.size());
    for (size_t i = 0; i < a_train.samples.size(); ++i)
        CHECK(a_train.samples[i].waveform.samples == b_train.samples[i].waveform.samples);
}

TEST_CASE("split partitions exactly over many random datasets") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 1000; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 40);
        Dataset d = random_dataset(n, 2, 4, rng());
        // Tag each sample with a unique value so membership is traceable.
        for (int i = 0; i < n; ++i) d.samples[static_cast<size_t>(i)].range_error = i;
        auto [train, test] = data::split(d, SplitSpec{0.8, rng(), false});
        CHECK(train.samples.size() == static_cast<size_t>(std::llround(0.8 * n)));
        CHECK(train.samples.size() + test.samples.size() == static_cast<size_t>(n));
        std::set<int> seen;
        for (const auto& s : train.samples) seen.insert(static_cast<int>(s.range_error));
        for (const auto& s : test.samples) seen.insert(static_cast<int>(s.range_error));
        CHECK(seen.size() == static_cast<size_t>(n));  // disjoint and complete
    }
}

TEST_CASE("stratified split keeps per-class proportions") {
    Dataset d = random_dataset(100, 2, 4, 33);
    // Force exact 50/50 classes.
    for (size_t i = 0; i < d.samples.size(); ++i) d.samples[i].env_label = static_cast<int>(i % 2);
    auto [train, test] = data::split(d, SplitSpec{0.8, 5, true});
    CHECK(train.samples.size() == 80);
    size_t c0 = 0;
    for (const auto& s : train.samples)
        if (s.env_label == 0) ++c0;
    CHECK(c0 == 40);
}

TEST_CASE("split rejects degenerate datasets") {
    const Dataset d = random_dataset(1, 1, 4, 12);
    CHECK_THROWS_AS(data::split(d, SplitSpec{0.8, 0, false}), std::invalid_argument);
}

TEST_CASE("normalize scales to unit peak") {
    Dataset d = random_dataset(1, 1, 4, 13);
    d.samples[0].waveform.samples = {1.0, -2.0, 0.5, 0.0};
    auto [normed, params] = data::normalize(d);
    CHECK(params.peak[0] == 2.0);
    CHECK(normed.samples[0].waveform.samples == std::vector<double>{0.5, -1.0, 0.25, 0.0});
}

TEST_CASE("normalize leaves unit waveforms unchanged") {
    Dataset d = random_dataset(1, 1, 3, 14);
    d.samples[0].waveform.samples = {0.25, -1.0, 0.125};
    auto [normed, params] = data::normalize(d);
    CHECK(normed.samples[0].waveform.samples == d.samples[0].waveform.samples);
}

TEST_CASE("normalize is idempotent") {
    const Dataset d = random_dataset(25, 2, 16, 15);
    auto [once, p1] = data::normalize(d);
    auto [twice, p2] = data::normalize(once);
    for (size_t i = 0; i < d.samples.size(); ++i)
        CHECK(twice.samples[i].waveform.samples == once.samples[i].waveform.samples);
}

TEST_CASE("normalize rejects an all-zero waveform") {
    Dataset d = random_dataset(1, 1, 4, 16);
    d.samples[0].waveform.samples = {0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(data::normalize(d), std::invalid_argument);
}
