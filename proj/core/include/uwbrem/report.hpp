#pragma once

#include <optional>
#include <string>
#include <vector>

namespace uwbrem::eval {

// One comparison row: range-error mitigation metrics for the unmitigated
// baseline, the feature regressor (SVR) and the learned model (DGM), plus
// identification accuracy for the feature classifier (SVC) and the DGM.
// Missing methods render as blanks.
struct EvalReport {
    std::string dataset_name;
    int sample_count = 0;
    std::optional<double> unmitigated_mae;
    std::optional<double> svr_rmse, svr_mae;
    std::optional<double> dgm_rmse, dgm_mae;
    std::optional<double> svc_accuracy, dgm_accuracy;
    std::vector<double> per_class_accuracy;  // DGM, indexed by class
};

// Aligned plain-text table, one row per report, metrics at 4 decimals.
std::string render_comparison(const std::vector<EvalReport>& rows);

// Recovers the rendered values (at 4-decimal precision).
std::vector<EvalReport> parse_comparison(const std::string& table);

void write_comparison_csv(const std::vector<EvalReport>& rows, const std::string& path);

}  // namespace uwbrem::eval
