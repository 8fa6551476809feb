#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "uwbrem/tensor.hpp"

namespace uwbrem::nn {

// Named parameter tensors with gradient and momentum buffers, organized in
// groups (encoder / decoder / estimator / classifier). Iteration order is
// insertion order so updates and checkpoints are deterministic.
class ParamStore {
public:
    struct Entry {
        std::string name;
        std::string group;
        Tensor value;
        Tensor grad;      // same shape as value, accumulated by Graph::backward
        Tensor velocity;  // SGD momentum state
    };

    void add(const std::string& name, const std::string& group, Tensor init);

    bool contains(const std::string& name) const { return index_.count(name) > 0; }
    Entry& entry(const std::string& name);
    const Entry& entry(const std::string& name) const;
    Tensor& value(const std::string& name) { return entry(name).value; }
    const Tensor& value(const std::string& name) const { return entry(name).value; }
    Tensor& grad(const std::string& name) { return entry(name).grad; }

    size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<Entry>& entries() { return entries_; }
    std::vector<std::string> names() const;

    void zero_grad();

    // p <- p - lr*v with v <- momentum*v + grad; gradients are zeroed after
    // the step.
    void sgd_step(double lr, double momentum);

    int64_t total_parameters() const;

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, size_t> index_;
};

// Seedable uniform He-style initializer: U(-limit, limit) with
// limit = sqrt(6 / fan_in).
Tensor he_uniform(std::vector<int> shape, int fan_in, uint64_t seed);

}  // namespace uwbrem::nn
