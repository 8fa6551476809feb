#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace uwbrem::config {

// Minimal sectioned key/value text format:
//   # comment
//   [section]
//   key = value
// Section names may repeat (e.g. one [profile] block per environment).
struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(const std::string& key) const;
    bool has(const std::string& key) const { return find(key) != nullptr; }
    void set(const std::string& key, const std::string& value);

    // Typed getters; throw std::invalid_argument naming section and key on
    // missing entries or parse failures.
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

    // Rejects keys outside `allowed` (unknown-key errors name the offender).
    void require_known_keys(const std::vector<std::string>& allowed) const;
};

struct File {
    std::vector<Section> sections;

    const Section* find(const std::string& name) const;
    const Section& require(const std::string& name) const;
    std::vector<const Section*> all(const std::string& name) const;
};

File parse_string(const std::string& text, const std::string& origin = "<string>");
File parse_file(const std::string& path);
std::string serialize(const File& f);
void write_file(const File& f, const std::string& path);

std::string format_double(double v);  // round-trip exact
std::string join_ints(const std::vector<int>& v);

}  // namespace uwbrem::config
