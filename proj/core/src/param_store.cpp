#include "uwbrem/param_store.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace uwbrem::nn {

void ParamStore::add(const std::string& name, const std::string& group, Tensor init) {
    if (index_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
    Entry e;
    e.name = name;
    e.group = group;
    e.grad = Tensor(init.shape());
    e.velocity = Tensor(init.shape());
    e.value = std::move(init);
    index_[name] = entries_.size();
    entries_.push_back(std::move(e));
}

ParamStore::Entry& ParamStore::entry(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
    return entries_[it->second];
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
    return entries_[it->second];
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
}

void ParamStore::zero_grad() {
    for (auto& e : entries_) e.grad.fill(0.0);
}

void ParamStore::sgd_step(double lr, double momentum) {
    if (lr < 0) throw std::invalid_argument("sgd_step: learning rate must be nonnegative");
    for (auto& e : entries_) {
        double* p = e.value.data();
        double* g = e.grad.data();
        double* v = e.velocity.data();
        const int64_t n = e.value.numel();
        for (int64_t i = 0; i < n; ++i) {
            v[i] = momentum * v[i] + g[i];
            p[i] -= lr * v[i];
            g[i] = 0.0;
        }
    }
}

int64_t ParamStore::total_parameters() const {
    int64_t n = 0;
    for (const auto& e : entries_) n += e.value.numel();
    return n;
}

Tensor he_uniform(std::vector<int> shape, int fan_in, uint64_t seed) {
    if (fan_in <= 0) throw std::invalid_argument("he_uniform: fan_in must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-limit, limit);
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
    return t;
}

}  // namespace uwbrem::nn
