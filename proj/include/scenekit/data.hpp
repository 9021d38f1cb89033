#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scenekit::data {

// Parsed structures are canonical values: rows are sorted on a fixed key, so
// permuting an input file yields an identical structure and serializing then
// re-parsing round-trips exactly.

// --- amenity counts ---------------------------------------------------------

struct AmenityObservation {
    std::string area_id;
    int year = 0;
    std::string amenity_code;
    long long count = 0;

    auto operator<=>(const AmenityObservation&) const = default;
};

struct AmenityPanel {
    std::vector<AmenityObservation> observations;  // sorted by (area, year, code)
    std::vector<int> years;                        // distinct, ascending
    bool contiguous_years = true;                  // false when the year set has gaps

    bool operator==(const AmenityPanel&) const = default;
};

AmenityPanel parse_amenity_panel(const std::filesystem::path& path);
AmenityPanel make_amenity_panel(std::vector<AmenityObservation> observations);
void write_amenity_panel(const std::filesystem::path& path, const AmenityPanel& panel);

// --- dimension weights ------------------------------------------------------

// The six core dimension names every weight table must define.
const std::vector<std::string>& core_dimensions();

struct DimensionWeightTable {
    std::vector<std::string> dimensions;                            // sorted, unique
    std::map<std::pair<std::string, std::string>, double> entries;  // (code, dimension) -> weight

    bool operator==(const DimensionWeightTable&) const = default;
};

DimensionWeightTable parse_weights(const std::filesystem::path& path);
DimensionWeightTable make_weight_table(
    const std::vector<std::tuple<std::string, std::string, double>>& rows);
void write_weights(const std::filesystem::path& path, const DimensionWeightTable& table);

// --- category taxonomy ------------------------------------------------------

struct Taxonomy {
    std::vector<std::string> nodes;             // sorted
    std::map<std::string, std::string> parent;  // child -> parent; roots absent
    int max_depth = 0;

    bool contains(const std::string& id) const;
    // 1-based: roots are depth 1. Throws UnknownCategory for foreign ids.
    int depth_of(const std::string& id) const;

    bool operator==(const Taxonomy&) const = default;
};

Taxonomy parse_taxonomy(const std::filesystem::path& path, bool yelp_mode = false);
// Edges as (child, parent-or-empty) pairs; used by generators and tests.
Taxonomy make_taxonomy(const std::vector<std::pair<std::string, std::string>>& edges,
                       bool yelp_mode = false);
void write_taxonomy(const std::filesystem::path& path, const Taxonomy& taxonomy);

// --- review events ----------------------------------------------------------

struct ReviewEvent {
    std::string user_id;
    std::string venue_id;
    std::string area_id;
    std::int64_t timestamp = 0;          // seconds since epoch, UTC
    std::vector<std::string> categories;  // sorted, distinct, nonempty

    auto operator<=>(const ReviewEvent&) const = default;
};

struct ReviewEventLog {
    std::vector<ReviewEvent> events;  // sorted by (timestamp, user, venue, area)

    bool operator==(const ReviewEventLog&) const = default;
};

ReviewEventLog parse_events(const std::filesystem::path& path, const Taxonomy& taxonomy);
ReviewEventLog make_event_log(std::vector<ReviewEvent> events);
void write_events(const std::filesystem::path& path, const ReviewEventLog& log);

// --- dated openings ---------------------------------------------------------

struct OpeningRecord {
    std::string location_id;
    std::int64_t open_date = 0;  // days since epoch
    std::string region_id;
    std::map<std::string, double> covariates;

    auto operator<=>(const OpeningRecord&) const = default;
};

struct OpeningLog {
    std::vector<OpeningRecord> records;  // sorted by (open_date, location_id)
    // Distinct regions that had no row in the covariates file (0 when no
    // covariates file was supplied).
    std::size_t regions_missing_covariates = 0;

    bool operator==(const OpeningLog& other) const { return records == other.records; }
};

OpeningLog parse_openings(const std::filesystem::path& path,
                          const std::optional<std::filesystem::path>& covariates_path = {});
OpeningLog make_opening_log(std::vector<OpeningRecord> records);
void write_openings(const std::filesystem::path& path, const OpeningLog& log);
// One row per (region, covariate); regions with empty maps are omitted.
void write_covariates(const std::filesystem::path& path, const OpeningLog& log);

// --- census variables -------------------------------------------------------

struct CensusTable {
    // (area_id, year, variable) -> value
    std::map<std::tuple<std::string, int, std::string>, double> rows;

    bool operator==(const CensusTable&) const = default;
};

CensusTable parse_census(const std::filesystem::path& path);
void write_census(const std::filesystem::path& path, const CensusTable& table);

}  // namespace scenekit::data
