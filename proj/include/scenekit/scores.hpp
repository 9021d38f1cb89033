#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scenekit/data.hpp"

namespace scenekit::scores {

struct ScoreKey {
    std::string area_id;
    int year = 0;
    std::string dimension;

    auto operator<=>(const ScoreKey&) const = default;
};

struct ScoreTable {
    std::map<ScoreKey, double> values;
    bool normalized = false;
    // (year, dimension) groups dropped by zscore_by_period for zero variance.
    std::size_t dropped_zero_variance_groups = 0;

    bool operator==(const ScoreTable& other) const {
        return values == other.values && normalized == other.normalized;
    }
};

struct ChangeTable {
    std::map<std::pair<std::string, std::string>, double> values;  // (area, dimension) -> delta
    int from_year = 0;
    int to_year = 0;
};

// Count-weighted mean of amenity dimension weights per (area, year, dimension).
// Codes without a weight for a dimension contribute nothing to that dimension;
// (area, year, dimension) cells whose weighted count total is 0 get no entry.
ScoreTable performance_scores(const data::AmenityPanel& panel,
                              const data::DimensionWeightTable& weights);

// Centers and scales each (year, dimension) slice across areas to mean 0 and
// population sd 1. Slices with zero variance are dropped and counted.
ScoreTable zscore_by_period(const ScoreTable& raw);

ChangeTable score_change(const ScoreTable& table, int from_year, int to_year);

struct JenksResult {
    std::vector<int> classes;          // per input value, 1..k
    std::vector<double> upper_bounds;  // largest value in each class, ascending
    double objective = 0.0;            // total within-class sum of squared deviations
};

// Exact Fisher partitioning of the sorted values into k contiguous classes
// minimizing within-class squared deviation. Equal values always share a
// class; among optimal partitions the lexicographically smallest break
// sequence wins.
JenksResult jenks_classify(const std::vector<double>& values, int k);

// Small built-in weight table for demos and self-tests: the six core
// dimensions over a dozen everyday amenity codes.
data::DimensionWeightTable illustrative_weights();

void write_scores(const std::filesystem::path& path, const ScoreTable& table);
void write_change(const std::filesystem::path& path, const ChangeTable& table);

}  // namespace scenekit::scores
