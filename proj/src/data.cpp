#include "scenekit/data.hpp"

#include <algorithm>
#include <set>

#include "scenekit/csv.hpp"
#include "scenekit/errors.hpp"
#include "scenekit/timeutil.hpp"

namespace scenekit::data {

namespace {

std::string triple_text(const std::string& a, int year, const std::string& c) {
    return "(" + a + ", " + std::to_string(year) + ", " + c + ")";
}

}  // namespace

// --- amenity counts ---------------------------------------------------------

AmenityPanel make_amenity_panel(std::vector<AmenityObservation> observations) {
    std::sort(observations.begin(), observations.end());
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& obs = observations[i];
        if (obs.count < 0) {
            throw Error(errc::negative_count,
                        "count " + std::to_string(obs.count) + " for " +
                            triple_text(obs.area_id, obs.year, obs.amenity_code));
        }
        if (i > 0) {
            const auto& prev = observations[i - 1];
            if (prev.area_id == obs.area_id && prev.year == obs.year &&
                prev.amenity_code == obs.amenity_code) {
                throw Error(errc::duplicate_key,
                            "repeated observation " +
                                triple_text(obs.area_id, obs.year, obs.amenity_code));
            }
        }
    }
    AmenityPanel panel;
    panel.observations = std::move(observations);
    std::set<int> years;
    for (const auto& obs : panel.observations) years.insert(obs.year);
    panel.years.assign(years.begin(), years.end());
    panel.contiguous_years =
        years.empty() ||
        static_cast<std::size_t>(*years.rbegin() - *years.begin() + 1) == years.size();
    return panel;
}

AmenityPanel parse_amenity_panel(const std::filesystem::path& path) {
    csv::Table table = csv::read_table(path);
    std::size_t c_area = csv::column_index(table, "area_id");
    std::size_t c_year = csv::column_index(table, "year");
    std::size_t c_code = csv::column_index(table, "amenity_code");
    std::size_t c_count = csv::column_index(table, "count");

    std::vector<AmenityObservation> observations;
    observations.reserve(table.rows.size());
    // Track first-seen lines so duplicate reports point at the second row.
    std::map<std::tuple<std::string, int, std::string>, std::size_t> seen;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        std::size_t line = table.lines[i];
        AmenityObservation obs;
        obs.area_id = row[c_area];
        obs.year = static_cast<int>(csv::parse_int(row[c_year], line));
        obs.amenity_code = row[c_code];
        obs.count = csv::parse_int(row[c_count], line);
        if (obs.count < 0) {
            throw Error(errc::negative_count, "count " + std::to_string(obs.count) + " for " +
                                                  triple_text(obs.area_id, obs.year,
                                                              obs.amenity_code),
                        line);
        }
        auto key = std::make_tuple(obs.area_id, obs.year, obs.amenity_code);
        auto [it, inserted] = seen.emplace(key, line);
        if (!inserted) {
            throw Error(errc::duplicate_key,
                        "repeated observation " +
                            triple_text(obs.area_id, obs.year, obs.amenity_code) +
                            ", first seen at line " + std::to_string(it->second),
                        line);
        }
        observations.push_back(std::move(obs));
    }
    return make_amenity_panel(std::move(observations));
}

void write_amenity_panel(const std::filesystem::path& path, const AmenityPanel& panel) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(panel.observations.size());
    for (const auto& obs : panel.observations) {
        rows.push_back({obs.area_id, std::to_string(obs.year), obs.amenity_code,
                        std::to_string(obs.count)});
    }
    csv::write_table(path, {"area_id", "year", "amenity_code", "count"}, rows);
}

// --- dimension weights ------------------------------------------------------

const std::vector<std::string>& core_dimensions() {
    static const std::vector<std::string> names = {
        "self_expression", "glamour",        "rationalism",
        "tradition",       "neighborliness", "egalitarianism",
    };
    return names;
}

namespace {

constexpr std::size_t kMaxDimensions = 15;

DimensionWeightTable finish_weight_table(
    std::map<std::pair<std::string, std::string>, double> entries) {
    DimensionWeightTable table;
    std::set<std::string> dims;
    for (const auto& [key, weight] : entries) dims.insert(key.second);
    for (const auto& name : core_dimensions()) {
        if (!dims.contains(name)) {
            throw Error(errc::missing_dimension, "weight table defines no '" + name + "' weights");
        }
    }
    if (dims.size() > kMaxDimensions) {
        throw Error(errc::too_many_dimensions,
                    std::to_string(dims.size()) + " dimensions exceed the limit of " +
                        std::to_string(kMaxDimensions));
    }
    table.dimensions.assign(dims.begin(), dims.end());
    table.entries = std::move(entries);
    return table;
}

}  // namespace

DimensionWeightTable make_weight_table(
    const std::vector<std::tuple<std::string, std::string, double>>& rows) {
    std::map<std::pair<std::string, std::string>, double> entries;
    for (const auto& [code, dimension, weight] : rows) {
        if (!(weight >= 1.0 && weight <= 5.0)) {
            throw Error(errc::weight_out_of_range,
                        "weight " + csv::format_double(weight) + " for (" + code + ", " +
                            dimension + ") outside [1, 5]");
        }
        if (!entries.emplace(std::make_pair(code, dimension), weight).second) {
            throw Error(errc::duplicate_key, "repeated weight for (" + code + ", " + dimension + ")");
        }
    }
    return finish_weight_table(std::move(entries));
}

DimensionWeightTable parse_weights(const std::filesystem::path& path) {
    csv::Table table = csv::read_table(path);
    std::size_t c_code = csv::column_index(table, "amenity_code");
    std::size_t c_dim = csv::column_index(table, "dimension");
    std::size_t c_weight = csv::column_index(table, "weight");

    std::map<std::pair<std::string, std::string>, double> entries;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        std::size_t line = table.lines[i];
        double weight = csv::parse_double(row[c_weight], line);
        if (!(weight >= 1.0 && weight <= 5.0)) {
            throw Error(errc::weight_out_of_range,
                        "weight " + csv::format_double(weight) + " for (" + row[c_code] + ", " +
                            row[c_dim] + ") outside [1, 5]",
                        line);
        }
        if (!entries.emplace(std::make_pair(row[c_code], row[c_dim]), weight).second) {
            throw Error(errc::duplicate_key,
                        "repeated weight for (" + row[c_code] + ", " + row[c_dim] + ")", line);
        }
    }
    return finish_weight_table(std::move(entries));
}

void write_weights(const std::filesystem::path& path, const DimensionWeightTable& table) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(table.entries.size());
    for (const auto& [key, weight] : table.entries) {
        rows.push_back({key.first, key.second, csv::format_double(weight)});
    }
    csv::write_table(path, {"amenity_code", "dimension", "weight"}, rows);
}

// --- category taxonomy ------------------------------------------------------

bool Taxonomy::contains(const std::string& id) const {
    return std::binary_search(nodes.begin(), nodes.end(), id);
}

int Taxonomy::depth_of(const std::string& id) const {
    if (!contains(id)) throw Error(errc::unknown_category, "category '" + id + "' not in taxonomy");
    int depth = 1;
    auto it = parent.find(id);
    while (it != parent.end()) {
        ++depth;
        it = parent.find(it->second);
    }
    return depth;
}

namespace {

constexpr int kYelpMaxDepth = 4;

Taxonomy build_taxonomy(const std::vector<std::pair<std::string, std::string>>& edges,
                        const std::vector<std::size_t>& lines, bool yelp_mode) {
    Taxonomy tax;
    std::map<std::string, std::size_t> node_line;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        std::size_t line = i < lines.size() ? lines[i] : 0;
        if (!node_line.emplace(edges[i].first, line).second) {
            throw Error(errc::duplicate_key, "category '" + edges[i].first + "' defined twice",
                        line);
        }
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& [child, par] = edges[i];
        if (par.empty()) continue;
        if (!node_line.contains(par)) {
            throw Error(errc::unknown_parent,
                        "parent '" + par + "' of '" + child + "' has no row of its own",
                        i < lines.size() ? lines[i] : 0);
        }
        tax.parent.emplace(child, par);
    }
    tax.nodes.reserve(node_line.size());
    for (const auto& [node, line] : node_line) tax.nodes.push_back(node);

    // Depth by memoized parent-chain walk; a chain longer than the node count
    // can only mean a cycle.
    std::map<std::string, int> depth;
    for (const auto& node : tax.nodes) {
        std::vector<const std::string*> chain;
        const std::string* cur = &node;
        while (!depth.contains(*cur)) {
            chain.push_back(cur);
            auto it = tax.parent.find(*cur);
            if (it == tax.parent.end()) {
                depth[*cur] = 1;
                chain.pop_back();
                break;
            }
            if (chain.size() > tax.nodes.size()) {
                throw Error(errc::cycle_detected, "parent chain through '" + node + "' never roots",
                            node_line[node]);
            }
            cur = &it->second;
        }
        for (auto rit = chain.rbegin(); rit != chain.rend(); ++rit) {
            depth[**rit] = depth[tax.parent.at(**rit)] + 1;
        }
    }
    for (const auto& [node, d] : depth) tax.max_depth = std::max(tax.max_depth, d);
    if (yelp_mode && tax.max_depth > kYelpMaxDepth) {
        throw Error(errc::depth_exceeded, "taxonomy depth " + std::to_string(tax.max_depth) +
                                              " exceeds the limit of " +
                                              std::to_string(kYelpMaxDepth));
    }
    return tax;
}

}  // namespace

Taxonomy make_taxonomy(const std::vector<std::pair<std::string, std::string>>& edges,
                       bool yelp_mode) {
    return build_taxonomy(edges, {}, yelp_mode);
}

Taxonomy parse_taxonomy(const std::filesystem::path& path, bool yelp_mode) {
    csv::Table table = csv::read_table(path);
    std::size_t c_child = csv::column_index(table, "child");
    std::size_t c_parent = csv::column_index(table, "parent");
    std::vector<std::pair<std::string, std::string>> edges;
    edges.reserve(table.rows.size());
    for (const auto& row : table.rows) edges.emplace_back(row[c_child], row[c_parent]);
    return build_taxonomy(edges, table.lines, yelp_mode);
}

void write_taxonomy(const std::filesystem::path& path, const Taxonomy& taxonomy) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(taxonomy.nodes.size());
    for (const auto& node : taxonomy.nodes) {
        auto it = taxonomy.parent.find(node);
        rows.push_back({node, it == taxonomy.parent.end() ? std::string() : it->second});
    }
    csv::write_table(path, {"child", "parent"}, rows);
}

// --- review events ----------------------------------------------------------

ReviewEventLog make_event_log(std::vector<ReviewEvent> events) {
    for (auto& event : events) {
        std::sort(event.categories.begin(), event.categories.end());
        event.categories.erase(std::unique(event.categories.begin(), event.categories.end()),
                               event.categories.end());
        if (event.categories.empty()) {
            throw Error(errc::empty_categories,
                        "event by '" + event.user_id + "' carries no categories");
        }
    }
    std::sort(events.begin(), events.end(), [](const ReviewEvent& a, const ReviewEvent& b) {
        return std::tie(a.timestamp, a.user_id, a.venue_id, a.area_id, a.categories) <
               std::tie(b.timestamp, b.user_id, b.venue_id, b.area_id, b.categories);
    });
    ReviewEventLog log;
    log.events = std::move(events);
    return log;
}

ReviewEventLog parse_events(const std::filesystem::path& path, const Taxonomy& taxonomy) {
    csv::Table table = csv::read_table(path);
    std::size_t c_user = csv::column_index(table, "user_id");
    std::size_t c_venue = csv::column_index(table, "venue_id");
    std::size_t c_area = csv::column_index(table, "area_id");
    std::size_t c_time = csv::column_index(table, "timestamp");
    std::size_t c_cats = csv::column_index(table, "categories");

    std::vector<ReviewEvent> events;
    events.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        std::size_t line = table.lines[i];
        ReviewEvent event;
        event.user_id = row[c_user];
        event.venue_id = row[c_venue];
        event.area_id = row[c_area];
        event.timestamp = timeutil::parse_instant(row[c_time], line);
        for (auto& token : csv::split(row[c_cats], ';')) {
            if (token.empty()) continue;
            if (!taxonomy.contains(token)) {
                throw Error(errc::unknown_category, "category '" + token + "' not in taxonomy",
                            line);
            }
            event.categories.push_back(std::move(token));
        }
        if (event.categories.empty()) {
            throw Error(errc::empty_categories, "no categories listed", line);
        }
        events.push_back(std::move(event));
    }
    return make_event_log(std::move(events));
}

void write_events(const std::filesystem::path& path, const ReviewEventLog& log) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(log.events.size());
    for (const auto& event : log.events) {
        rows.push_back({event.user_id, event.venue_id, event.area_id,
                        timeutil::format_instant(event.timestamp),
                        csv::join(event.categories, ';')});
    }
    csv::write_table(path, {"user_id", "venue_id", "area_id", "timestamp", "categories"}, rows);
}

// --- dated openings ---------------------------------------------------------

OpeningLog make_opening_log(std::vector<OpeningRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const OpeningRecord& a, const OpeningRecord& b) {
                  return std::tie(a.open_date, a.location_id) < std::tie(b.open_date, b.location_id);
              });
    std::set<std::string> ids;
    for (const auto& rec : records) {
        if (!ids.insert(rec.location_id).second) {
            throw Error(errc::duplicate_location, "location '" + rec.location_id + "' listed twice");
        }
    }
    OpeningLog log;
    log.records = std::move(records);
    return log;
}

OpeningLog parse_openings(const std::filesystem::path& path,
                          const std::optional<std::filesystem::path>& covariates_path) {
    csv::Table table = csv::read_table(path);
    std::size_t c_loc = csv::column_index(table, "location_id");
    std::size_t c_date = csv::column_index(table, "open_date");
    std::size_t c_region = csv::column_index(table, "region_id");

    std::vector<OpeningRecord> records;
    records.reserve(table.rows.size());
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        std::size_t line = table.lines[i];
        auto [it, inserted] = seen.emplace(row[c_loc], line);
        if (!inserted) {
            throw Error(errc::duplicate_location,
                        "location '" + row[c_loc] + "' listed twice, first at line " +
                            std::to_string(it->second),
                        line);
        }
        OpeningRecord rec;
        rec.location_id = row[c_loc];
        rec.open_date = timeutil::parse_date(row[c_date], line);
        rec.region_id = row[c_region];
        records.push_back(std::move(rec));
    }

    OpeningLog log = make_opening_log(std::move(records));
    if (covariates_path) {
        csv::Table cov = csv::read_table(*covariates_path);
        std::size_t v_region = csv::column_index(cov, "region_id");
        std::size_t v_name = csv::column_index(cov, "name");
        std::size_t v_value = csv::column_index(cov, "value");
        std::map<std::string, std::map<std::string, double>> by_region;
        for (std::size_t i = 0; i < cov.rows.size(); ++i) {
            const auto& row = cov.rows[i];
            std::size_t line = cov.lines[i];
            double value = csv::parse_double(row[v_value], line);
            if (!by_region[row[v_region]].emplace(row[v_name], value).second) {
                throw Error(errc::duplicate_key,
                            "repeated covariate '" + row[v_name] + "' for region '" +
                                row[v_region] + "'",
                            line);
            }
        }
        std::set<std::string> missing;
        for (auto& rec : log.records) {
            auto it = by_region.find(rec.region_id);
            if (it == by_region.end()) {
                missing.insert(rec.region_id);
            } else {
                rec.covariates = it->second;
            }
        }
        log.regions_missing_covariates = missing.size();
    }
    return log;
}

void write_openings(const std::filesystem::path& path, const OpeningLog& log) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(log.records.size());
    for (const auto& rec : log.records) {
        rows.push_back({rec.location_id, timeutil::format_date(rec.open_date), rec.region_id});
    }
    csv::write_table(path, {"location_id", "open_date", "region_id"}, rows);
}

void write_covariates(const std::filesystem::path& path, const OpeningLog& log) {
    std::map<std::string, std::map<std::string, double>> by_region;
    for (const auto& rec : log.records) {
        if (!rec.covariates.empty()) by_region[rec.region_id] = rec.covariates;
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& [region, values] : by_region) {
        for (const auto& [name, value] : values) {
            rows.push_back({region, name, csv::format_double(value)});
        }
    }
    csv::write_table(path, {"region_id", "name", "value"}, rows);
}

// --- census variables -------------------------------------------------------

CensusTable parse_census(const std::filesystem::path& path) {
    csv::Table table = csv::read_table(path);
    std::size_t c_area = csv::column_index(table, "area_id");
    std::size_t c_year = csv::column_index(table, "year");
    std::size_t c_var = csv::column_index(table, "variable");
    std::size_t c_value = csv::column_index(table, "value");

    CensusTable census;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        std::size_t line = table.lines[i];
        int year = static_cast<int>(csv::parse_int(row[c_year], line));
        double value = csv::parse_double(row[c_value], line);
        auto key = std::make_tuple(row[c_area], year, row[c_var]);
        if (!census.rows.emplace(key, value).second) {
            throw Error(errc::duplicate_key,
                        "repeated census value " + triple_text(row[c_area], year, row[c_var]),
                        line);
        }
    }
    return census;
}

void write_census(const std::filesystem::path& path, const CensusTable& table) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(table.rows.size());
    for (const auto& [key, value] : table.rows) {
        rows.push_back({std::get<0>(key), std::to_string(std::get<1>(key)), std::get<2>(key),
                        csv::format_double(value)});
    }
    csv::write_table(path, {"area_id", "year", "variable", "value"}, rows);
}

}  // namespace scenekit::data
