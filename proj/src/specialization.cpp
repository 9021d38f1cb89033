#include "scenekit/specialization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scenekit/csv.hpp"
#include "scenekit/errors.hpp"
#include "scenekit/timeutil.hpp"

namespace scenekit::specialization {

DepthWeightMap depth_weights(const data::Taxonomy& taxonomy) {
    DepthWeightMap map;
    for (const auto& node : taxonomy.nodes) {
        int depth = taxonomy.depth_of(node);
        map.weights.emplace(node, depth);
        map.max_weight = std::max(map.max_weight, depth);
    }
    return map;
}

IndexScore specialization_index(const std::set<std::string>& categories,
                                const DepthWeightMap& weights) {
    if (categories.empty()) {
        throw Error(errc::empty_category_set, "specialization index needs >= 1 category");
    }
    double total = 0;
    for (const auto& id : categories) {
        auto it = weights.weights.find(id);
        if (it == weights.weights.end()) {
            throw Error(errc::unknown_category, "category '" + id + "' carries no depth weight");
        }
        total += it->second;
    }
    return {total / static_cast<double>(categories.size()),
            static_cast<int>(categories.size())};
}

IndexScore specialization_index_multiset(const std::map<std::string, long long>& counts,
                                         const DepthWeightMap& weights) {
    double total = 0;
    long long n = 0;
    for (const auto& [id, count] : counts) {
        if (count <= 0) continue;
        auto it = weights.weights.find(id);
        if (it == weights.weights.end()) {
            throw Error(errc::unknown_category, "category '" + id + "' carries no depth weight");
        }
        total += static_cast<double>(count) * it->second;
        n += count;
    }
    if (n == 0) {
        throw Error(errc::empty_category_set, "specialization index needs >= 1 category");
    }
    return {total / static_cast<double>(n), static_cast<int>(n)};
}

SpecializationSeries specialization_series(const data::ReviewEventLog& events,
                                           const data::Taxonomy& taxonomy,
                                           const std::map<std::string, std::string>& area_to_group,
                                           const SeriesConfig& config) {
    if (events.events.empty()) {
        throw Error(errc::empty_log, "specialization series needs >= 1 event");
    }
    DepthWeightMap weights = depth_weights(taxonomy);

    // Category occurrence counts per (area, first year seen ... per year).
    // new_counts[area][year][category] = occurrences contributed in that year.
    std::map<std::string, std::map<int, std::map<std::string, long long>>> new_counts;
    int min_year = std::numeric_limits<int>::max();
    int max_year = std::numeric_limits<int>::min();
    for (const auto& event : events.events) {
        if (!area_to_group.contains(event.area_id)) {
            throw Error(errc::unmapped_area, "area '" + event.area_id + "' has no group mapping");
        }
        int year = timeutil::year_of_instant(event.timestamp);
        min_year = std::min(min_year, year);
        max_year = std::max(max_year, year);
        auto& per_cat = new_counts[event.area_id][year];
        for (const auto& cat : event.categories) per_cat[cat] += 1;
    }

    SpecializationSeries series;
    std::map<std::pair<std::string, int>, std::vector<double>> group_values;
    for (const auto& [area, by_year] : new_counts) {
        int first_year = by_year.begin()->first;
        for (int year = first_year; year <= max_year; ++year) {
            // Union of contributions within the presence window ending at `year`.
            std::map<std::string, long long> window;
            for (const auto& [y, cats] : by_year) {
                if (y > year) break;
                if (config.expiry_years > 0 && y < year - config.expiry_years + 1) continue;
                for (const auto& [cat, count] : cats) window[cat] += count;
            }
            if (window.empty()) continue;
            IndexScore idx;
            if (config.multiset) {
                idx = specialization_index_multiset(window, weights);
            } else {
                std::set<std::string> present;
                for (const auto& [cat, count] : window) present.insert(cat);
                idx = specialization_index(present, weights);
            }
            series.area_scores.push_back({area, year, idx.score, idx.n_categories});
            group_values[{area_to_group.at(area), year}].push_back(idx.score);
        }
    }

    for (const auto& [key, values] : group_values) {
        GroupYearPoint point;
        point.group_id = key.first;
        point.year = key.second;
        point.n_areas = static_cast<int>(values.size());
        double n = static_cast<double>(values.size());
        for (double v : values) point.mean += v;
        point.mean /= n;
        if (values.size() >= 2) {
            double ss = 0;
            for (double v : values) ss += (v - point.mean) * (v - point.mean);
            point.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        } else {
            point.se = std::numeric_limits<double>::quiet_NaN();
        }
        series.points.push_back(point);
    }
    return series;
}

void write_series(const std::filesystem::path& path, const SpecializationSeries& series) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(series.points.size());
    for (const auto& p : series.points) {
        rows.push_back({p.group_id, std::to_string(p.year), csv::format_double(p.mean),
                        std::isnan(p.se) ? std::string() : csv::format_double(p.se),
                        std::to_string(p.n_areas)});
    }
    csv::write_table(path, {"group_id", "year", "mean", "se", "n_areas"}, rows);
}

void write_area_scores(const std::filesystem::path& path, const SpecializationSeries& series) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(series.area_scores.size());
    for (const auto& s : series.area_scores) {
        rows.push_back({s.area_id, std::to_string(s.year), csv::format_double(s.score),
                        std::to_string(s.n_categories)});
    }
    csv::write_table(path, {"area_id", "year", "score", "n_categories"}, rows);
}

}  // namespace scenekit::specialization
