#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scenekit/csv.hpp"

namespace scenekit::fe {

struct PanelRow {
    std::string entity_id;
    long long period = 0;
    double response = 0.0;
    std::vector<double> regressors;  // aligned with PanelDataset::regressor_names

    bool operator==(const PanelRow&) const = default;
};

struct PanelDataset {
    std::string response_name = "response";
    std::vector<std::string> regressor_names;
    std::vector<PanelRow> rows;  // sorted by (entity, period); keys unique
};

// Builds a dataset from a wide CSV table (entity, period, one column per
// variable). Rows with an empty or "NA" cell in any used column are dropped.
struct AssembledPanel {
    PanelDataset data;
    std::size_t dropped_incomplete_rows = 0;
};
AssembledPanel assemble_panel(const csv::Table& table, const std::string& response,
                              const std::vector<std::string>& regressors);

// Validates key uniqueness and regressor arity, and sorts rows.
PanelDataset make_panel(PanelDataset data);

struct VariableTransform {
    std::string name;
    double mean = 0.0;
    double sd = 1.0;  // population sd
};

struct StandardizedPanel {
    PanelDataset data;
    std::vector<VariableTransform> transforms;  // response first, then regressors
};

// Pooled mean-0 / sd-1 scaling of the response and every regressor.
StandardizedPanel standardize(const PanelDataset& data);

struct WithinPanel {
    PanelDataset data;
    std::size_t dropped_single_period_entities = 0;
    // Regressors whose demeaned column is numerically zero (constant within
    // every entity). Left in place here; fit_fe drops them.
    std::vector<std::string> zero_columns;
};

// Entity demeaning. Entities observed in a single period identify nothing and
// are dropped with a count.
WithinPanel within_transform(const PanelDataset& data);

struct RegressorEstimate {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;
    double t = 0.0;
    double p = 1.0;
    std::string stars;  // "", "*", "**", "***"
};

struct FEResult {
    std::vector<RegressorEstimate> estimates;
    std::size_t n_observations = 0;
    std::size_t n_entities = 0;
    std::size_t n_clusters = 0;
    std::vector<std::string> dropped_regressors;
    std::size_t dropped_single_period_entities = 0;
};

struct FEOptions {
    // Adds one indicator column per period (except the first) before
    // demeaning, for two-way robustness checks.
    bool period_effects = false;
};

// Within (fixed-effects) OLS, no intercept, with the CR1 cluster-robust
// sandwich variance clustered by entity and t(G-1) p-values.
FEResult fit_fe(const PanelDataset& data, const FEOptions& options = {});

// Significance stars: * p<0.05, ** p<0.01, *** p<0.001.
std::string stars_for(double p);

// Aligned-text table, one column per fitted model.
std::string format_table(const std::vector<std::string>& column_titles,
                         const std::vector<FEResult>& results);

void write_result(const std::filesystem::path& path, const FEResult& result);
void write_result_meta(const std::filesystem::path& path, const FEResult& result,
                       const std::string& response_name);

}  // namespace scenekit::fe
