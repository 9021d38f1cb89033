#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "scenekit/data.hpp"

namespace scenekit::specialization {

// Depth weight per category: roots get 1, each level below adds 1.
struct DepthWeightMap {
    std::map<std::string, int> weights;
    int max_weight = 0;
};

DepthWeightMap depth_weights(const data::Taxonomy& taxonomy);

struct IndexScore {
    double score = 0.0;  // mean depth weight over the distinct category set
    int n_categories = 0;
};

IndexScore specialization_index(const std::set<std::string>& categories,
                                const DepthWeightMap& weights);
// Sensitivity variant: every occurrence counts, not just distinct categories.
IndexScore specialization_index_multiset(const std::map<std::string, long long>& counts,
                                         const DepthWeightMap& weights);

struct SeriesConfig {
    // A category seen in year y stays present through year y + expiry_years - 1;
    // 0 means it never expires.
    int expiry_years = 0;
    bool multiset = false;
};

struct AreaYearScore {
    std::string area_id;
    int year = 0;
    double score = 0.0;
    int n_categories = 0;
};

struct GroupYearPoint {
    std::string group_id;
    int year = 0;
    double mean = 0.0;
    double se = 0.0;  // sample sd / sqrt(n_areas); NaN when n_areas < 2
    int n_areas = 0;
};

struct SpecializationSeries {
    std::vector<GroupYearPoint> points;        // sorted by (group, year)
    std::vector<AreaYearScore> area_scores;    // sorted by (area, year)
};

// Per-area annual index over the categories present in the area (presence per
// SeriesConfig), averaged to group-level series with standard errors.
SpecializationSeries specialization_series(const data::ReviewEventLog& events,
                                           const data::Taxonomy& taxonomy,
                                           const std::map<std::string, std::string>& area_to_group,
                                           const SeriesConfig& config = {});

void write_series(const std::filesystem::path& path, const SpecializationSeries& series);
void write_area_scores(const std::filesystem::path& path, const SpecializationSeries& series);

}  // namespace scenekit::specialization
