#include "scenekit/defense.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <set>

#include "scenekit/csv.hpp"
#include "scenekit/errors.hpp"
#include "scenekit/rng.hpp"

namespace scenekit::defense {

TasteProfile taste_profile(const std::vector<data::ReviewEvent>& user_events, std::int64_t as_of) {
    TasteProfile profile;
    for (const auto& event : user_events) {
        if (event.timestamp >= as_of) continue;
        double share = 1.0 / static_cast<double>(event.categories.size());
        for (const auto& cat : event.categories) profile.distribution[cat] += share;
        ++profile.n_events;
    }
    if (profile.n_events == 0) {
        throw Error(errc::no_history, "no events before the requested instant");
    }
    double total = 0;
    for (const auto& [cat, mass] : profile.distribution) total += mass;
    for (auto& [cat, mass] : profile.distribution) mass /= total;
    return profile;
}

double taste_distance(const TasteProfile& a, const TasteProfile& b) {
    double dot = 0;
    double na = 0;
    double nb = 0;
    for (const auto& [cat, pa] : a.distribution) {
        na += pa * pa;
        auto it = b.distribution.find(cat);
        if (it != b.distribution.end()) dot += pa * it->second;
    }
    for (const auto& [cat, pb] : b.distribution) nb += pb * pb;
    if (na <= 0 || nb <= 0) return 1.0;
    double cosine = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(1.0 - cosine, 0.0, 1.0);
}

namespace {

// Per-user view of one area's events, indexed by period.
struct AreaActivity {
    std::map<std::string, std::map<std::int64_t, long long>> counts_by_user;
    std::map<std::string, std::int64_t> first_period_of_user;
    std::int64_t first_period = 0;
    std::int64_t last_period = 0;
    bool any = false;
};

AreaActivity scan_area(const data::ReviewEventLog& events, const std::string& area,
                       const Config& config) {
    AreaActivity activity;
    for (const auto& event : events.events) {
        if (event.area_id != area) continue;
        std::int64_t p = timeutil::period_of_instant(event.timestamp, config.period_length);
        activity.counts_by_user[event.user_id][p] += 1;
        auto [it, inserted] = activity.first_period_of_user.emplace(event.user_id, p);
        if (!inserted) it->second = std::min(it->second, p);
        if (!activity.any) {
            activity.first_period = activity.last_period = p;
            activity.any = true;
        } else {
            activity.first_period = std::min(activity.first_period, p);
            activity.last_period = std::max(activity.last_period, p);
        }
    }
    return activity;
}

bool is_regular(const AreaActivity& activity, const std::string& user, std::int64_t period,
                const Config& config) {
    auto it = activity.counts_by_user.find(user);
    if (it == activity.counts_by_user.end()) return false;
    long long in_window = 0;
    for (std::int64_t q = period - config.regular_window; q < period; ++q) {
        auto cit = it->second.find(q);
        if (cit != it->second.end()) in_window += cit->second;
    }
    return in_window >= config.regular_min_events;
}

bool is_newcomer(const AreaActivity& activity, const std::string& user, std::int64_t period) {
    auto it = activity.first_period_of_user.find(user);
    return it != activity.first_period_of_user.end() && it->second == period;
}

}  // namespace

VisitorPartition classify_visitors(const data::ReviewEventLog& events, const std::string& area,
                                   std::int64_t period, const Config& config) {
    AreaActivity activity = scan_area(events, area, config);
    VisitorPartition partition;
    for (const auto& [user, by_period] : activity.counts_by_user) {
        if (!by_period.contains(period)) continue;
        if (is_regular(activity, user, period, config)) {
            partition.regulars.push_back(user);
        } else if (is_newcomer(activity, user, period)) {
            partition.newcomers.push_back(user);
        } else {
            partition.others.push_back(user);
        }
    }
    return partition;
}

namespace {

void validate(const Config& config) {
    if (config.regular_min_events < 1 || config.regular_window < 1 || config.top_k < 1 ||
        config.baseline_periods < 1 || config.min_baseline_events < 1 ||
        config.tension_threshold < 0.0 || config.tension_threshold > 1.0) {
        throw Error(errc::bad_config, "defense thresholds must be positive, theta in [0, 1]");
    }
}

}  // namespace

SeriesResult build_series(const data::ReviewEventLog& events, const std::string& area,
                          const Config& config) {
    validate(config);
    AreaActivity activity = scan_area(events, area, config);
    if (!activity.any) {
        throw Error(errc::empty_log, "no events in area '" + area + "'");
    }

    // Full event histories per user (any area), for taste profiles.
    std::map<std::string, std::vector<data::ReviewEvent>> history;
    for (const auto& event : events.events) history[event.user_id].push_back(event);

    // Baseline: regulars' events in the first B periods define the profile.
    std::int64_t baseline_end = activity.first_period + config.baseline_periods;  // exclusive
    std::map<std::string, double> baseline_mass;
    long long baseline_events = 0;
    for (const auto& event : events.events) {
        if (event.area_id != area) continue;
        std::int64_t p = timeutil::period_of_instant(event.timestamp, config.period_length);
        if (p >= baseline_end) continue;
        if (!is_regular(activity, event.user_id, p, config)) continue;
        double share = 1.0 / static_cast<double>(event.categories.size());
        for (const auto& cat : event.categories) baseline_mass[cat] += share;
        ++baseline_events;
    }
    if (baseline_events < config.min_baseline_events) {
        throw Error(errc::insufficient_baseline,
                    "baseline has " + std::to_string(baseline_events) + " regular events, needs " +
                        std::to_string(config.min_baseline_events));
    }

    SeriesResult result;
    result.profile.n_baseline_events = baseline_events;
    double total_mass = 0;
    for (const auto& [cat, mass] : baseline_mass) total_mass += mass;
    for (const auto& [cat, mass] : baseline_mass) {
        result.profile.distribution[cat] = mass / total_mass;
    }
    // Top K by probability, ties to the smaller category id.
    std::vector<std::pair<std::string, double>> ranked(result.profile.distribution.begin(),
                                                       result.profile.distribution.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(config.top_k); ++i) {
        result.profile.top_categories.push_back(ranked[i].first);
    }
    std::set<std::string> top(result.profile.top_categories.begin(),
                              result.profile.top_categories.end());

    std::size_t n_periods = static_cast<std::size_t>(activity.last_period -
                                                     activity.first_period + 1);
    result.series.first_period = activity.first_period;
    result.series.tension.assign(n_periods, 0.0);
    result.series.structure.assign(n_periods, 0.0);
    std::vector<double> newcomer_totals(n_periods, 0.0);
    std::vector<double> event_totals(n_periods, 0.0);

    // Taste distances are computed once per (user, period): the profile uses
    // only events strictly before the period start, so it is fixed within a
    // period.
    std::map<std::pair<std::string, std::int64_t>, bool> distant_cache;
    auto is_distant = [&](const std::string& user, std::int64_t p, bool& known) {
        auto key = std::make_pair(user, p);
        auto it = distant_cache.find(key);
        if (it != distant_cache.end()) {
            known = true;
            return it->second;
        }
        std::int64_t start = timeutil::period_start_seconds(p, config.period_length);
        const auto& user_events = history.at(user);
        bool any_prior = !user_events.empty() && user_events.front().timestamp < start;
        if (!any_prior) {
            known = false;
            return false;
        }
        TasteProfile profile = taste_profile(user_events, start);
        TasteProfile area_profile;
        area_profile.distribution = result.profile.distribution;
        area_profile.n_events = baseline_events;
        bool distant = taste_distance(profile, area_profile) > config.tension_threshold;
        distant_cache.emplace(key, distant);
        known = true;
        return distant;
    };

    for (const auto& event : events.events) {
        if (event.area_id != area) continue;
        std::int64_t p = timeutil::period_of_instant(event.timestamp, config.period_length);
        std::size_t slot = static_cast<std::size_t>(p - activity.first_period);
        event_totals[slot] += 1;
        if (is_regular(activity, event.user_id, p, config)) {
            bool hits_top = false;
            for (const auto& cat : event.categories) {
                if (top.contains(cat)) {
                    hits_top = true;
                    break;
                }
            }
            if (hits_top) result.series.structure[slot] += 1;
        } else if (is_newcomer(activity, event.user_id, p)) {
            newcomer_totals[slot] += 1;
            bool known = false;
            bool distant = is_distant(event.user_id, p, known);
            if (!known) {
                ++result.series.unknown_profile_events;
            } else if (distant) {
                result.series.tension[slot] += 1;
            }
        }
    }

    if (config.tension_share) {
        for (std::size_t i = 0; i < n_periods; ++i) {
            result.series.tension[i] =
                newcomer_totals[i] > 0 ? result.series.tension[i] / newcomer_totals[i] : 0.0;
        }
    }
    if (config.normalize_by_activity) {
        for (std::size_t i = 0; i < n_periods; ++i) {
            if (event_totals[i] > 0) {
                result.series.tension[i] /= event_totals[i];
                result.series.structure[i] /= event_totals[i];
            }
        }
    }
    return result;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y, std::size_t x_from,
               std::size_t y_from, std::size_t n) {
    double mx = 0;
    double my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[x_from + i];
        my += y[y_from + i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0;
    double sxx = 0;
    double syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[x_from + i] - mx;
        double dy = y[y_from + i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0 || syy <= 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> difference(const std::vector<double>& values) {
    std::vector<double> out;
    out.reserve(values.size() - 1);
    for (std::size_t i = 1; i < values.size(); ++i) out.push_back(values[i] - values[i - 1]);
    return out;
}

// Max correlation of d_tension against d_structure over lags 1..max_lag;
// smallest lag wins ties.
std::pair<int, double> best_lagged_correlation(const std::vector<double>& dt,
                                               const std::vector<double>& ds, int max_lag) {
    int best_lag = 1;
    double best = -2.0;
    for (int lag = 1; lag <= max_lag; ++lag) {
        std::size_t n = dt.size() - static_cast<std::size_t>(lag);
        double c = pearson(dt, ds, 0, static_cast<std::size_t>(lag), n);
        if (c > best) {
            best = c;
            best_lag = lag;
        }
    }
    return {best_lag, best};
}

}  // namespace

ResponseTest test_structural_response(const TensionStructureSeries& series, int max_lag,
                                      int n_permutations, std::uint64_t seed) {
    std::size_t m = series.tension.size();
    if (max_lag < 1) throw Error(errc::bad_config, "max_lag must be >= 1");
    if (m < static_cast<std::size_t>(max_lag) + 8) {
        throw Error(errc::series_too_short, "need >= " + std::to_string(max_lag + 8) +
                                                " periods, got " + std::to_string(m));
    }
    std::vector<double> dt = difference(series.tension);
    std::vector<double> ds = difference(series.structure);
    std::size_t d = dt.size();

    auto [best_lag, observed] = best_lagged_correlation(dt, ds, max_lag);

    // Circular-shift surrogates over every proper shift except the wraparound
    // band [d - max_lag + 1, d - 1]: a shift there re-aligns a true lag-1..L
    // response inside the tested lag range, putting the signal in the null.
    // Small shifts stay admissible; dropping them thins the surrogate pool and
    // skews the null toward rejection.
    std::int64_t lo = 1;
    std::int64_t hi = static_cast<std::int64_t>(d) - max_lag;
    if (hi < lo) {
        throw Error(errc::series_too_short, "no admissible circular shifts for max_lag " +
                                                std::to_string(max_lag));
    }
    rng::Generator gen = rng::Generator::substream(seed, "structural-response");
    int exceed = 0;
    std::vector<double> shifted(d);
    for (int perm = 0; perm < n_permutations; ++perm) {
        std::int64_t offset = lo + static_cast<std::int64_t>(
                                       gen.below(static_cast<std::uint64_t>(hi - lo + 1)));
        for (std::size_t i = 0; i < d; ++i) {
            shifted[i] = ds[(i + static_cast<std::size_t>(offset)) % d];
        }
        auto [lag, c] = best_lagged_correlation(dt, shifted, max_lag);
        if (c >= observed) ++exceed;
    }

    ResponseTest test;
    test.best_lag = best_lag;
    test.correlation = observed;
    test.p_value = static_cast<double>(exceed) / static_cast<double>(n_permutations);
    test.n_permutations = n_permutations;
    return test;
}

SignificanceTest test_significant_response(const TensionStructureSeries& series) {
    std::size_t m = series.tension.size();
    if (m < 10) {
        throw Error(errc::series_too_short,
                    "need >= 10 periods, got " + std::to_string(m));
    }
    std::size_t n = m - 1;
    double mx = 0;
    double my = 0;
    for (std::size_t p = 0; p < n; ++p) {
        mx += series.tension[p];
        my += series.structure[p + 1] - series.structure[p];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0;
    double sxy = 0;
    for (std::size_t p = 0; p < n; ++p) {
        double dx = series.tension[p] - mx;
        double dy = (series.structure[p + 1] - series.structure[p]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if (sxx <= 0) {
        throw Error(errc::zero_variance_tension, "tension series is constant");
    }
    SignificanceTest test;
    test.slope = sxy / sxx;
    double intercept = my - test.slope * mx;
    double rss = 0;
    for (std::size_t p = 0; p < n; ++p) {
        double predicted = intercept + test.slope * series.tension[p];
        double r = (series.structure[p + 1] - series.structure[p]) - predicted;
        rss += r * r;
    }
    double df = static_cast<double>(n) - 2.0;
    double sigma2 = rss / df;
    double se = std::sqrt(sigma2 / sxx);
    if (se > 0) {
        boost::math::students_t dist(df);
        double t = test.slope / se;
        test.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    } else {
        test.p_value = test.slope == 0.0 ? 1.0 : 0.0;
    }
    return test;
}

void write_series(const std::filesystem::path& path, const TensionStructureSeries& series,
                  timeutil::PeriodLength period_length) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(series.tension.size());
    for (std::size_t i = 0; i < series.tension.size(); ++i) {
        std::int64_t p = series.first_period + static_cast<std::int64_t>(i);
        rows.push_back({timeutil::period_label(p, period_length),
                        csv::format_double(series.tension[i]),
                        csv::format_double(series.structure[i])});
    }
    csv::write_table(path, {"period", "T", "S"}, rows);
}

}  // namespace scenekit::defense
