#include "uwbrem/config_file.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uwbrem::config {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) {
    throw std::invalid_argument("config [" + section + "] " + key + ": " + what);
}

}  // namespace

const std::string* Section::find(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

void Section::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries)
        if (k == key) {
            v = value;
            return;
        }
    entries.emplace_back(key, value);
}

std::string Section::get_string(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) fail(name, key, "missing required key");
    return *v;
}

std::string Section::get_string(const std::string& key, const std::string& fallback) const {
    const std::string* v = find(key);
    return v ? *v : fallback;
}

double Section::get_double(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) fail(name, key, "missing required key");
    char* end = nullptr;
    double d = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0') fail(name, key, "not a number: '" + *v + "'");
    return d;
}

double Section::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int Section::get_int(const std::string& key) const {
    double d = get_double(key);
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) fail(name, key, "not an integer");
    return i;
}

int Section::get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
}

uint64_t Section::get_u64(const std::string& key, uint64_t fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    char* end = nullptr;
    unsigned long long u = std::strtoull(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0') fail(name, key, "not an unsigned integer: '" + *v + "'");
    return static_cast<uint64_t>(u);
}

bool Section::get_bool(const std::string& key, bool fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    fail(name, key, "expected true/false, got '" + *v + "'");
}

std::vector<int> Section::get_int_list(const std::string& key, const std::vector<int>& fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    std::vector<int> out;
    std::stringstream ss(*v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) fail(name, key, "empty list element");
        char* end = nullptr;
        long n = std::strtol(tok.c_str(), &end, 10);
        if (end == tok.c_str() || *end != '\0') fail(name, key, "not an integer list element: '" + tok + "'");
        out.push_back(static_cast<int>(n));
    }
    if (out.empty()) fail(name, key, "empty list");
    return out;
}

void Section::require_known_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [k, v] : entries) {
        bool ok = false;
        for (const auto& a : allowed)
            if (a == k) {
                ok = true;
                break;
            }
        if (!ok) fail(name, k, "unknown key");
    }
}

const Section* File::find(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

const Section& File::require(const std::string& name) const {
    const Section* s = find(name);
    if (!s) throw std::invalid_argument("config: missing required section [" + name + "]");
    return *s;
}

std::vector<const Section*> File::all(const std::string& name) const {
    std::vector<const Section*> out;
    for (const auto& s : sections)
        if (s.name == name) out.push_back(&s);
    return out;
}

File parse_string(const std::string& text, const std::string& origin) {
    File f;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": malformed section header");
            Section s;
            s.name = trim(t.substr(1, t.size() - 2));
            if (s.name.empty())
                throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": empty section name");
            f.sections.push_back(std::move(s));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        if (f.sections.empty())
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": entry outside any section");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": empty key");
        f.sections.back().entries.emplace_back(std::move(key), std::move(value));
    }
    return f;
}

File parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

std::string serialize(const File& f) {
    std::ostringstream out;
    for (size_t i = 0; i < f.sections.size(); ++i) {
        if (i) out << "\n";
        out << "[" << f.sections[i].name << "]\n";
        for (const auto& [k, v] : f.sections[i].entries) out << k << " = " << v << "\n";
    }
    return out.str();
}

void write_file(const File& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << serialize(f);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

}  // namespace uwbrem::config
