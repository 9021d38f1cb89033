#include "scenekit/scores.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scenekit/csv.hpp"
#include "scenekit/errors.hpp"

namespace scenekit::scores {

ScoreTable performance_scores(const data::AmenityPanel& panel,
                              const data::DimensionWeightTable& weights) {
    bool any_overlap = false;
    for (const auto& obs : panel.observations) {
        for (const auto& dim : weights.dimensions) {
            if (weights.entries.contains({obs.amenity_code, dim})) {
                any_overlap = true;
                break;
            }
        }
        if (any_overlap) break;
    }
    if (!any_overlap) {
        throw Error(errc::no_overlap, "no amenity code in the panel has any dimension weight");
    }

    // Numerator and denominator per (area, year, dimension); the denominator
    // counts only amenities that carry a weight for that dimension.
    std::map<ScoreKey, std::pair<double, double>> sums;
    for (const auto& obs : panel.observations) {
        for (const auto& dim : weights.dimensions) {
            auto it = weights.entries.find({obs.amenity_code, dim});
            if (it == weights.entries.end()) continue;
            auto& [num, den] = sums[{obs.area_id, obs.year, dim}];
            num += static_cast<double>(obs.count) * it->second;
            den += static_cast<double>(obs.count);
        }
    }
    ScoreTable table;
    for (const auto& [key, nd] : sums) {
        if (nd.second > 0) table.values.emplace(key, nd.first / nd.second);
    }
    return table;
}

ScoreTable zscore_by_period(const ScoreTable& raw) {
    if (raw.normalized) {
        throw Error(errc::already_normalized, "score table is already z-scored");
    }
    std::map<std::pair<int, std::string>, std::vector<double>> groups;
    for (const auto& [key, value] : raw.values) {
        groups[{key.year, key.dimension}].push_back(value);
    }
    std::map<std::pair<int, std::string>, std::pair<double, double>> transform;
    std::size_t dropped = 0;
    for (const auto& [group, values] : groups) {
        double n = static_cast<double>(values.size());
        double mean = 0;
        for (double v : values) mean += v;
        mean /= n;
        double ss = 0;
        for (double v : values) ss += (v - mean) * (v - mean);
        double sd = std::sqrt(ss / n);
        if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
            ++dropped;
            continue;
        }
        transform.emplace(group, std::make_pair(mean, sd));
    }
    ScoreTable out;
    out.normalized = true;
    out.dropped_zero_variance_groups = dropped;
    for (const auto& [key, value] : raw.values) {
        auto it = transform.find({key.year, key.dimension});
        if (it == transform.end()) continue;
        out.values.emplace(key, (value - it->second.first) / it->second.second);
    }
    return out;
}

ChangeTable score_change(const ScoreTable& table, int from_year, int to_year) {
    bool saw_from = false;
    bool saw_to = false;
    for (const auto& [key, value] : table.values) {
        saw_from = saw_from || key.year == from_year;
        saw_to = saw_to || key.year == to_year;
    }
    if (!saw_from) {
        throw Error(errc::year_missing, "no scores for year " + std::to_string(from_year));
    }
    if (!saw_to) {
        throw Error(errc::year_missing, "no scores for year " + std::to_string(to_year));
    }
    ChangeTable out;
    out.from_year = from_year;
    out.to_year = to_year;
    for (const auto& [key, value] : table.values) {
        if (key.year != to_year) continue;
        auto it = table.values.find({key.area_id, from_year, key.dimension});
        if (it == table.values.end()) continue;
        out.values.emplace(std::make_pair(key.area_id, key.dimension), value - it->second);
    }
    return out;
}

JenksResult jenks_classify(const std::vector<double>& values, int k) {
    if (k < 1) throw Error(errc::bad_config, "class count must be >= 1");
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(errc::bad_config, "values must be finite");
    }

    // Collapse to distinct sorted values with multiplicities. Equal values
    // never profit from being split across classes (the within-class cost is
    // concave in how many duplicates move), so the partition search can run
    // over distinct values with counts as weights.
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct;
    std::vector<double> weight;
    for (double v : sorted) {
        if (distinct.empty() || v != distinct.back()) {
            distinct.push_back(v);
            weight.push_back(1);
        } else {
            weight.back() += 1;
        }
    }
    std::size_t m = distinct.size();
    if (static_cast<std::size_t>(k) > m) {
        throw Error(errc::too_few_distinct_values,
                    std::to_string(m) + " distinct values cannot fill " + std::to_string(k) +
                        " classes");
    }

    // Prefix sums of weight, weighted value, weighted square.
    std::vector<double> pw(m + 1, 0), ps(m + 1, 0), pss(m + 1, 0);
    for (std::size_t i = 0; i < m; ++i) {
        pw[i + 1] = pw[i] + weight[i];
        ps[i + 1] = ps[i] + weight[i] * distinct[i];
        pss[i + 1] = pss[i] + weight[i] * distinct[i] * distinct[i];
    }
    auto cost = [&](std::size_t i, std::size_t j) {  // inclusive range of distinct indices
        double w = pw[j + 1] - pw[i];
        double s = ps[j + 1] - ps[i];
        double ss = pss[j + 1] - pss[i];
        return std::max(0.0, ss - s * s / w);
    };

    // best[r][i]: minimal cost of splitting distinct[i..m-1] into r classes.
    // Kept as a suffix table so reconstruction can walk left to right taking
    // the smallest feasible break each time, which yields the
    // lexicographically smallest optimal break sequence.
    std::vector<std::vector<double>> best(static_cast<std::size_t>(k) + 1,
                                          std::vector<double>(m + 1, 0));
    for (std::size_t i = 0; i < m; ++i) best[1][i] = cost(i, m - 1);
    for (int r = 2; r <= k; ++r) {
        for (std::size_t i = 0; i + static_cast<std::size_t>(r) <= m; ++i) {
            double lowest = std::numeric_limits<double>::infinity();
            for (std::size_t j = i; j <= m - static_cast<std::size_t>(r); ++j) {
                double c = cost(i, j) + best[r - 1][j + 1];
                if (c < lowest) lowest = c;
            }
            best[static_cast<std::size_t>(r)][i] = lowest;
        }
    }

    std::vector<std::size_t> ends;  // inclusive distinct index ending each class
    std::size_t i = 0;
    for (int r = k; r >= 2; --r) {
        for (std::size_t j = i; j <= m - static_cast<std::size_t>(r); ++j) {
            if (cost(i, j) + best[r - 1][j + 1] == best[static_cast<std::size_t>(r)][i]) {
                ends.push_back(j);
                i = j + 1;
                break;
            }
        }
    }
    ends.push_back(m - 1);

    JenksResult result;
    result.objective = best[static_cast<std::size_t>(k)][0];
    result.upper_bounds.reserve(ends.size());
    for (std::size_t e : ends) result.upper_bounds.push_back(distinct[e]);
    result.classes.reserve(values.size());
    for (double v : values) {
        auto it = std::lower_bound(result.upper_bounds.begin(), result.upper_bounds.end(), v);
        result.classes.push_back(static_cast<int>(it - result.upper_bounds.begin()) + 1);
    }
    return result;
}

data::DimensionWeightTable illustrative_weights() {
    // Hand-assigned demo grid; not calibrated against any source.
    static const struct {
        const char* code;
        double w[6];  // self_expression, glamour, rationalism, tradition,
                      // neighborliness, egalitarianism
    } grid[] = {
        {"REST", {3, 3, 3, 3, 3, 3}},   {"CAFE", {4, 3, 2, 2, 4, 4}},
        {"BAR", {3, 3, 2, 2, 4, 3}},    {"GALLERY", {5, 4, 3, 2, 2, 2}},
        {"THEATER", {5, 5, 3, 3, 2, 2}}, {"CHURCH", {2, 1, 2, 5, 4, 3}},
        {"LIBRARY", {3, 1, 5, 3, 3, 5}}, {"GYM", {3, 2, 3, 2, 3, 3}},
        {"SALON", {4, 5, 2, 2, 3, 2}},  {"DINER", {2, 1, 2, 4, 5, 4}},
        {"BOOKSTORE", {4, 2, 5, 3, 3, 4}}, {"TATTOO", {5, 2, 1, 1, 2, 3}},
    };
    const char* dims[6] = {"self_expression", "glamour",        "rationalism",
                           "tradition",       "neighborliness", "egalitarianism"};
    std::vector<std::tuple<std::string, std::string, double>> rows;
    for (const auto& entry : grid) {
        for (int d = 0; d < 6; ++d) rows.emplace_back(entry.code, dims[d], entry.w[d]);
    }
    return data::make_weight_table(rows);
}

void write_scores(const std::filesystem::path& path, const ScoreTable& table) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(table.values.size());
    for (const auto& [key, value] : table.values) {
        rows.push_back({key.area_id, std::to_string(key.year), key.dimension,
                        csv::format_double(value)});
    }
    csv::write_table(path, {"area_id", "year", "dimension", "score"}, rows);
}

void write_change(const std::filesystem::path& path, const ChangeTable& table) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(table.values.size());
    for (const auto& [key, value] : table.values) {
        rows.push_back({key.first, key.second, csv::format_double(value)});
    }
    csv::write_table(path, {"area_id", "dimension", "change"}, rows);
}

}  // namespace scenekit::scores
