#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scenekit/data.hpp"
#include "scenekit/timeutil.hpp"

namespace scenekit::defense {

struct Config {
    timeutil::PeriodLength period_length = timeutil::PeriodLength::quarter;
    int regular_min_events = 3;     // events in the trailing window to count as a regular
    int regular_window = 8;         // trailing window length, in periods
    double tension_threshold = 0.5; // taste distance above which a newcomer is "distant"
    int top_k = 5;                  // categories in the area profile
    int baseline_periods = 4;       // periods used to build the area profile
    int min_baseline_events = 50;   // regular events required in the baseline
    bool tension_share = false;     // T as share of newcomer events instead of a count
    bool normalize_by_activity = false;  // divide T and S by total area events per period
};

struct TasteProfile {
    std::map<std::string, double> distribution;  // sums to 1
    long long n_events = 0;
};

// Category distribution of a user's events strictly before `as_of`; each
// event spreads weight 1/|categories| over its categories.
TasteProfile taste_profile(const std::vector<data::ReviewEvent>& user_events, std::int64_t as_of);

// Cosine distance in [0, 1] over the union of categories.
double taste_distance(const TasteProfile& a, const TasteProfile& b);

struct VisitorPartition {
    std::vector<std::string> regulars;
    std::vector<std::string> newcomers;
    std::vector<std::string> others;
};

// Partition of the users active in (area, period): a regular has at least
// regular_min_events events in the area during the trailing regular_window
// periods before `period`; a newcomer's first-ever area event falls in
// `period`; everyone else is other.
VisitorPartition classify_visitors(const data::ReviewEventLog& events, const std::string& area,
                                   std::int64_t period, const Config& config = {});

struct AreaProfile {
    std::vector<std::string> top_categories;     // size <= top_k, by descending probability
    std::map<std::string, double> distribution;  // over regulars' baseline events
    long long n_baseline_events = 0;
};

struct TensionStructureSeries {
    std::int64_t first_period = 0;  // absolute period index of element 0
    std::vector<double> tension;
    std::vector<double> structure;
    // Newcomer events whose author had no history before the period and thus
    // no taste profile; excluded from tension.
    std::size_t unknown_profile_events = 0;
};

struct SeriesResult {
    TensionStructureSeries series;
    AreaProfile profile;
};

// Builds the per-period Tension (distant-newcomer activity) and Structure
// (regulars' activity in the area's signature categories) series for one area.
SeriesResult build_series(const data::ReviewEventLog& events, const std::string& area,
                          const Config& config = {});

struct ResponseTest {
    int best_lag = 0;
    double correlation = 0.0;  // at best_lag
    double p_value = 1.0;
    int n_permutations = 0;
};

// Permutation test for "tension spikes are followed by structure increases":
// max lagged cross-correlation of the first-differenced series against
// circular-shift surrogates. Deterministic for a given seed.
ResponseTest test_structural_response(const TensionStructureSeries& series, int max_lag = 4,
                                      int n_permutations = 2000, std::uint64_t seed = 1);

struct SignificanceTest {
    double slope = 0.0;
    double p_value = 1.0;
};

// OLS of S(p+1) - S(p) on T(p) with a conventional t-test (n - 2 df).
SignificanceTest test_significant_response(const TensionStructureSeries& series);

void write_series(const std::filesystem::path& path, const TensionStructureSeries& series,
                  timeutil::PeriodLength period_length);

}  // namespace scenekit::defense
