#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scenekit {

// Every failure the toolkit can report, across parsing and computation.
enum class errc {
    // file / ingest
    io_error,
    missing_column,
    duplicate_key,
    negative_count,
    unparseable_row,
    cycle_detected,
    unknown_parent,
    depth_exceeded,
    unknown_category,
    bad_timestamp,
    empty_categories,
    duplicate_location,
    bad_date,
    weight_out_of_range,
    missing_dimension,
    too_many_dimensions,
    // computation
    no_overlap,
    already_normalized,
    year_missing,
    too_few_distinct_values,
    zero_variance,
    no_multi_period_entities,
    rank_deficient,
    too_few_clusters,
    empty_log,
    too_few_points,
    boundaries_exceed_total,
    unknown_covariate,
    empty_category_set,
    unmapped_area,
    insufficient_baseline,
    series_too_short,
    zero_variance_tension,
    no_history,
    bad_config,
};

const char* errc_name(errc code);

// Carries the error kind plus, for file errors, the 1-based line of the
// offending row (0 when not applicable).
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message, std::size_t line = 0)
        : std::runtime_error(line > 0 ? std::string(errc_name(code)) + " (line " +
                                            std::to_string(line) + "): " + message
                                      : std::string(errc_name(code)) + ": " + message),
          code_(code),
          line_(line) {}

    errc code() const noexcept { return code_; }
    std::size_t line() const noexcept { return line_; }

private:
    errc code_;
    std::size_t line_;
};

inline const char* errc_name(errc code) {
    switch (code) {
        case errc::io_error: return "IoError";
        case errc::missing_column: return "MissingColumn";
        case errc::duplicate_key: return "DuplicateKey";
        case errc::negative_count: return "NegativeCount";
        case errc::unparseable_row: return "UnparseableRow";
        case errc::cycle_detected: return "CycleDetected";
        case errc::unknown_parent: return "UnknownParent";
        case errc::depth_exceeded: return "DepthExceeded";
        case errc::unknown_category: return "UnknownCategory";
        case errc::bad_timestamp: return "BadTimestamp";
        case errc::empty_categories: return "EmptyCategories";
        case errc::duplicate_location: return "DuplicateLocation";
        case errc::bad_date: return "BadDate";
        case errc::weight_out_of_range: return "WeightOutOfRange";
        case errc::missing_dimension: return "MissingDimension";
        case errc::too_many_dimensions: return "TooManyDimensions";
        case errc::no_overlap: return "NoOverlap";
        case errc::already_normalized: return "AlreadyNormalized";
        case errc::year_missing: return "YearMissing";
        case errc::too_few_distinct_values: return "TooFewDistinctValues";
        case errc::zero_variance: return "ZeroVariance";
        case errc::no_multi_period_entities: return "NoMultiPeriodEntities";
        case errc::rank_deficient: return "RankDeficient";
        case errc::too_few_clusters: return "TooFewClusters";
        case errc::empty_log: return "EmptyLog";
        case errc::too_few_points: return "TooFewPoints";
        case errc::boundaries_exceed_total: return "BoundariesExceedTotal";
        case errc::unknown_covariate: return "UnknownCovariate";
        case errc::empty_category_set: return "EmptyCategorySet";
        case errc::unmapped_area: return "UnmappedArea";
        case errc::insufficient_baseline: return "InsufficientBaseline";
        case errc::series_too_short: return "SeriesTooShort";
        case errc::zero_variance_tension: return "ZeroVarianceTension";
        case errc::no_history: return "NoHistory";
        case errc::bad_config: return "BadConfig";
    }
    return "UnknownError";
}

}  // namespace scenekit
