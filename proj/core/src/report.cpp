#include "uwbrem/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uwbrem::eval {

namespace {

constexpr int kCellWidth = 12;
const char* kHeaders[7] = {"Unmit-MAE", "SVR-RMSE", "SVR-MAE", "DGM-RMSE", "DGM-MAE", "SVC-Acc", "DGM-Acc"};

std::string pad_left(const std::string& s, int width) {
    if (static_cast<int>(s.size()) >= width) return s;
    return std::string(static_cast<size_t>(width) - s.size(), ' ') + s;
}

std::string cell(const std::optional<double>& v) {
    if (!v) return std::string(kCellWidth, ' ');
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return pad_left(buf, kCellWidth);
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(' ');
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(' ');
    return s.substr(a, b - a + 1);
}

std::optional<double> metrics_of(const std::string& field) {
    const std::string t = trim(field);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') throw std::invalid_argument("report: bad metric field '" + t + "'");
    return v;
}

}  // namespace

std::string render_comparison(const std::vector<EvalReport>& rows) {
    size_t name_w = 8;  // "Scenario"
    for (const EvalReport& r : rows) name_w = std::max(name_w, r.dataset_name.size());

    std::ostringstream out;
    out << "Scenario" << std::string(name_w - 8, ' ');
    for (const char* h : kHeaders) out << pad_left(h, kCellWidth);
    out << "\n";
    for (const EvalReport& r : rows) {
        out << r.dataset_name << std::string(name_w - r.dataset_name.size(), ' ');
        out << cell(r.unmitigated_mae) << cell(r.svr_rmse) << cell(r.svr_mae) << cell(r.dgm_rmse)
            << cell(r.dgm_mae) << cell(r.svc_accuracy) << cell(r.dgm_accuracy);
        out << "\n";
    }
    return out.str();
}

std::vector<EvalReport> parse_comparison(const std::string& table) {
    std::istringstream in(table);
    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("report: empty table");
    const size_t anchor = header.find(kHeaders[0]);
    if (anchor == std::string::npos) throw std::invalid_argument("report: missing header row");
    const size_t name_w = anchor + std::string(kHeaders[0]).size() - kCellWidth;

    std::vector<EvalReport> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        EvalReport r;
        r.dataset_name = trim(line.substr(0, std::min(name_w, line.size())));
        std::optional<double> fields[7];
        for (int i = 0; i < 7; ++i) {
            const size_t start = name_w + static_cast<size_t>(i) * kCellWidth;
            if (start >= line.size()) break;
            fields[i] = metrics_of(line.substr(start, kCellWidth));
        }
        r.unmitigated_mae = fields[0];
        r.svr_rmse = fields[1];
        r.svr_mae = fields[2];
        r.dgm_rmse = fields[3];
        r.dgm_mae = fields[4];
        r.svc_accuracy = fields[5];
        r.dgm_accuracy = fields[6];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_comparison_csv(const std::vector<EvalReport>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << "scenario,samples,unmitigated_mae,svr_rmse,svr_mae,dgm_rmse,dgm_mae,svc_accuracy,dgm_accuracy";
    size_t max_classes = 0;
    for (const EvalReport& r : rows) max_classes = std::max(max_classes, r.per_class_accuracy.size());
    for (size_t k = 0; k < max_classes; ++k) out << ",dgm_acc_class" << k;
    out << "\n";
    char buf[40];
    auto put = [&](const std::optional<double>& v) {
        out << ',';
        if (v) {
            std::snprintf(buf, sizeof(buf), "%.17g", *v);
            out << buf;
        }
    };
    for (const EvalReport& r : rows) {
        out << r.dataset_name << ',' << r.sample_count;
        put(r.unmitigated_mae);
        put(r.svr_rmse);
        put(r.svr_mae);
        put(r.dgm_rmse);
        put(r.dgm_mae);
        put(r.svc_accuracy);
        put(r.dgm_accuracy);
        for (size_t k = 0; k < max_classes; ++k)
            put(k < r.per_class_accuracy.size() ? std::optional<double>(r.per_class_accuracy[k]) : std::nullopt);
        out << "\n";
    }
}

}  // namespace uwbrem::eval
