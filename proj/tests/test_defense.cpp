#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "scenekit/data.hpp"
#include "scenekit/defense.hpp"
#include "scenekit/errors.hpp"
#include "scenekit/rng.hpp"
#include "scenekit/timeutil.hpp"

using namespace scenekit;

namespace {

constexpr std::int64_t kDay = 86400;

std::int64_t quarter_start(std::int64_t q) {
    return timeutil::period_start_seconds(q, timeutil::PeriodLength::quarter);
}

// Base quarter used throughout: 2010Q1.
const std::int64_t kQ0 =
    timeutil::period_of_day(timeutil::days_from_civil(2010, 1, 1), timeutil::PeriodLength::quarter);

data::ReviewEvent event_of(const std::string& user, const std::string& area, std::int64_t at,
                           std::vector<std::string> categories, const std::string& venue = "V1") {
    data::ReviewEvent e;
    e.user_id = user;
    e.venue_id = venue;
    e.area_id = area;
    e.timestamp = at;
    e.categories = std::move(categories);
    return e;
}

defense::TensionStructureSeries series_of(std::vector<double> tension,
                                          std::vector<double> structure) {
    defense::TensionStructureSeries s;
    s.first_period = kQ0;
    s.tension = std::move(tension);
    s.structure = std::move(structure);
    return s;
}

}  // namespace

TEST_SUITE_BEGIN("defense");

TEST_CASE("taste profile of one single-category event") {
    auto profile = defense::taste_profile({event_of("u", "A", 100, {"cafes"})}, 200);
    CHECK(profile.n_events == 1);
    REQUIRE(profile.distribution.size() == 1);
    CHECK(profile.distribution.at("cafes") == 1.0);
}

TEST_CASE("multi-category events split their weight evenly") {
    auto profile = defense::taste_profile({event_of("u", "A", 100, {"cafes", "wine_bars"})}, 200);
    CHECK(profile.distribution.at("cafes") == doctest::Approx(0.5));
    CHECK(profile.distribution.at("wine_bars") == doctest::Approx(0.5));
}

TEST_CASE("profiles only see events strictly before the cutoff") {
    std::vector<data::ReviewEvent> history = {
        event_of("u", "A", 100, {"cafes"}),
        event_of("u", "A", 200, {"french"}),
    };
    auto profile = defense::taste_profile(history, 200);
    CHECK(profile.n_events == 1);
    CHECK(profile.distribution.count("french") == 0);
    CHECK_THROWS_AS((void)defense::taste_profile(history, 100), Error);
}

TEST_CASE("random profiles equal a direct count-and-normalize pass") {
    rng::Generator gen(42);
    std::vector<std::string> pool = {"cafes", "french", "wine_bars", "vinyl", "fashion"};
    std::vector<data::ReviewEvent> history;
    std::map<std::string, double> mass;
    double total = 0.0;
    for (int i = 0; i < 200; ++i) {
        std::size_t n_cats = 1 + gen.below(3);
        std::vector<std::string> cats;
        for (std::size_t c = 0; c < n_cats && cats.size() < pool.size(); ++c) {
            auto pick = pool[gen.below(pool.size())];
            if (std::find(cats.begin(), cats.end(), pick) == cats.end()) cats.push_back(pick);
        }
        std::sort(cats.begin(), cats.end());
        for (const auto& c : cats) mass[c] += 1.0 / static_cast<double>(cats.size());
        total += 1.0;
        history.push_back(event_of("u", "A", 1000 + i, cats));
    }
    auto profile = defense::taste_profile(history, 5000);
    double sum = 0.0;
    for (const auto& [category, share] : profile.distribution) {
        CHECK(share == doctest::Approx(mass.at(category) / total).epsilon(1e-12));
        sum += share;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("taste distance anchors") {
    defense::TasteProfile cafes{{{"cafes", 1.0}}, 1};
    defense::TasteProfile same{{{"cafes", 1.0}}, 3};
    defense::TasteProfile disjoint{{{"fashion", 1.0}}, 2};
    defense::TasteProfile split{{{"cafes", 0.5}, {"french", 0.5}}, 2};
    CHECK(defense::taste_distance(cafes, same) == doctest::Approx(0.0));
    CHECK(defense::taste_distance(cafes, disjoint) == doctest::Approx(1.0));
    CHECK(defense::taste_distance(split, cafes) == doctest::Approx(1.0 - std::sqrt(0.5)));
    CHECK(defense::taste_distance(split, cafes) ==
          doctest::Approx(defense::taste_distance(cafes, split)));
}

TEST_CASE("taste distance stays within [0, 1] on random profiles") {
    rng::Generator gen(7);
    std::vector<std::string> pool = {"a", "b", "c", "d"};
    for (int trial = 0; trial < 50; ++trial) {
        defense::TasteProfile p, q;
        double ps = 0.0, qs = 0.0;
        for (const auto& c : pool) {
            double u = gen.uniform(), v = gen.uniform();
            p.distribution[c] = u;
            q.distribution[c] = v;
            ps += u;
            qs += v;
        }
        for (const auto& c : pool) {
            p.distribution[c] /= ps;
            q.distribution[c] /= qs;
        }
        double d = defense::taste_distance(p, q);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0 + 1e-12);
    }
}

TEST_CASE("visitor classification separates regulars, newcomers, others") {
    std::vector<data::ReviewEvent> events;
    // r1: three events spread over the four quarters before kQ0, active at kQ0.
    events.push_back(event_of("r1", "A", quarter_start(kQ0 - 4) + kDay, {"cafes"}));
    events.push_back(event_of("r1", "A", quarter_start(kQ0 - 3) + kDay, {"cafes"}));
    events.push_back(event_of("r1", "A", quarter_start(kQ0 - 1) + kDay, {"cafes"}));
    events.push_back(event_of("r1", "A", quarter_start(kQ0) + kDay, {"cafes"}));
    // n1: first area event ever, inside kQ0.
    events.push_back(event_of("n1", "A", quarter_start(kQ0) + 2 * kDay, {"fashion"}));
    // o1: one stale event far in the past, then active at kQ0.
    events.push_back(event_of("o1", "A", quarter_start(kQ0 - 20) + kDay, {"cafes"}));
    events.push_back(event_of("o1", "A", quarter_start(kQ0) + 3 * kDay, {"cafes"}));
    auto log = data::make_event_log(std::move(events));
    auto split = defense::classify_visitors(log, "A", kQ0);
    CHECK(split.regulars == std::vector<std::string>{"r1"});
    CHECK(split.newcomers == std::vector<std::string>{"n1"});
    CHECK(split.others == std::vector<std::string>{"o1"});

    std::vector<std::string> all;
    for (const auto& bucket : {split.regulars, split.newcomers, split.others}) {
        all.insert(all.end(), bucket.begin(), bucket.end());
    }
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<std::string>{"n1", "o1", "r1"});
}

TEST_CASE("one stale prior event is not enough for regular status") {
    std::vector<data::ReviewEvent> events;
    events.push_back(event_of("u", "A", quarter_start(kQ0 - 2) + kDay, {"cafes"}));
    events.push_back(event_of("u", "A", quarter_start(kQ0) + kDay, {"cafes"}));
    auto log = data::make_event_log(std::move(events));
    auto split = defense::classify_visitors(log, "A", kQ0);
    CHECK(split.regulars.empty());
    CHECK(split.newcomers.empty());
    CHECK(split.others == std::vector<std::string>{"u"});
}

TEST_CASE("build_series counts distant newcomers and on-profile regular events") {
    std::vector<data::ReviewEvent> events;
    // Four regulars whose baseline is all cafes; enough events to pass the
    // baseline floor with min_baseline_events lowered.
    for (int r = 0; r < 4; ++r) {
        std::string user = "r" + std::to_string(r);
        for (std::int64_t q = kQ0 - 8; q < kQ0; ++q) {
            for (int e = 0; e < 2; ++e) {
                events.push_back(
                    event_of(user, "A", quarter_start(q) + (e + 1) * kDay, {"cafes"}));
            }
        }
        events.push_back(event_of(user, "A", quarter_start(kQ0) + kDay, {"cafes"}));
        events.push_back(event_of(user, "A", quarter_start(kQ0 + 1) + kDay, {"cafes"}));
    }
    // Two newcomers at kQ0 with distant out-of-area history, one similar.
    for (int n = 0; n < 2; ++n) {
        std::string user = "n" + std::to_string(n);
        events.push_back(event_of(user, "X", quarter_start(kQ0 - 2) + kDay, {"fashion"}));
        events.push_back(event_of(user, "A", quarter_start(kQ0) + 5 * kDay, {"fashion"}));
    }
    events.push_back(event_of("s0", "X", quarter_start(kQ0 - 2) + kDay, {"cafes"}));
    events.push_back(event_of("s0", "A", quarter_start(kQ0) + 6 * kDay, {"cafes"}));
    auto log = data::make_event_log(std::move(events));

    defense::Config config;
    config.min_baseline_events = 10;
    auto result = defense::build_series(log, "A", config);
    CHECK(result.profile.top_categories.front() == "cafes");
    // Regular status needs 3 prior-window events, so each user's first two
    // quarters are warm-up; quarters 3 and 4 of the baseline count.
    CHECK(result.profile.n_baseline_events == 4 * 2 * 2);

    auto at = [&](std::int64_t q) {
        return static_cast<std::size_t>(q - result.series.first_period);
    };
    REQUIRE(at(kQ0 + 1) < result.series.tension.size());
    CHECK(result.series.tension[at(kQ0)] == 2.0);       // the two distant newcomers
    CHECK(result.series.structure[at(kQ0)] == 4.0);     // one on-profile event per regular
    CHECK(result.series.structure[at(kQ0 + 1)] == 4.0);
    // The regulars' own first events have no prior history anywhere.
    CHECK(result.series.unknown_profile_events == 4 * 2);
}

TEST_CASE("thin baselines are rejected") {
    std::vector<data::ReviewEvent> events;
    events.push_back(event_of("r", "A", quarter_start(kQ0 - 1) + kDay, {"cafes"}));
    events.push_back(event_of("r", "A", quarter_start(kQ0) + kDay, {"cafes"}));
    auto log = data::make_event_log(std::move(events));
    CHECK_THROWS_AS((void)defense::build_series(log, "A", {}), Error);
}

TEST_CASE("config validation rejects nonsense") {
    defense::Config bad;
    bad.top_k = 0;
    std::vector<data::ReviewEvent> events = {event_of("u", "A", 100, {"cafes"})};
    auto log = data::make_event_log(std::move(events));
    CHECK_THROWS_AS((void)defense::build_series(log, "A", bad), Error);
    defense::Config worse;
    worse.tension_threshold = 1.5;
    CHECK_THROWS_AS((void)defense::build_series(log, "A", worse), Error);
}

TEST_CASE("structural test pins lag 1 when S copies T with delay") {
    rng::Generator gen(3);
    std::vector<double> tension;
    for (int i = 0; i < 40; ++i) tension.push_back(gen.uniform() * 10.0);
    std::vector<double> structure(tension.size(), 0.0);
    for (std::size_t i = 1; i < structure.size(); ++i) structure[i] = tension[i - 1];
    auto series = series_of(tension, structure);
    auto result = defense::test_structural_response(series, 4, 500, 11);
    CHECK(result.best_lag == 1);
    CHECK(result.correlation == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(result.p_value <= 1.0 / 500.0 + 1e-12);
    CHECK(result.n_permutations == 500);
}

TEST_CASE("structural test keeps near-nominal size under the null") {
    int rejections = 0;
    const int runs = 200;
    for (int r = 0; r < runs; ++r) {
        rng::Generator gen(10'000 + r);
        std::vector<double> tension, structure;
        for (int i = 0; i < 36; ++i) {
            tension.push_back(gen.normal(5.0, 1.0));
            structure.push_back(gen.normal(20.0, 2.0));
        }
        auto series = series_of(tension, structure);
        auto result = defense::test_structural_response(series, 4, 200, 999);
        if (result.p_value < 0.05) ++rejections;
    }
    double rate = static_cast<double>(rejections) / runs;
    CHECK(rate >= 0.01);
    CHECK(rate <= 0.12);
}

TEST_CASE("structural p-value ignores the scale of both series") {
    rng::Generator gen(5);
    std::vector<double> tension, structure;
    for (int i = 0; i < 30; ++i) {
        tension.push_back(gen.uniform());
        structure.push_back(gen.uniform() + 0.3 * (i > 0 ? tension[i - 1] : 0.0));
    }
    auto base = defense::test_structural_response(series_of(tension, structure), 4, 300, 77);
    std::vector<double> t2 = tension, s2 = structure;
    for (auto& v : t2) v *= 250.0;
    for (auto& v : s2) v *= 0.004;
    auto scaled = defense::test_structural_response(series_of(t2, s2), 4, 300, 77);
    CHECK(scaled.best_lag == base.best_lag);
    CHECK(scaled.correlation == doctest::Approx(base.correlation).epsilon(1e-9));
    CHECK(scaled.p_value == doctest::Approx(base.p_value).epsilon(1e-12));
}

TEST_CASE("short series cannot be tested") {
    auto series = series_of({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5});
    CHECK_THROWS_AS((void)defense::test_structural_response(series, 4, 100, 1), Error);
    CHECK_THROWS_AS((void)defense::test_significant_response(series), Error);
}

TEST_CASE("significance slope recovers a planted gain of 2") {
    rng::Generator gen(9);
    std::vector<double> tension;
    for (int i = 0; i < 30; ++i) tension.push_back(gen.uniform() * 5.0);
    std::vector<double> structure(tension.size(), 0.0);
    for (std::size_t i = 1; i < structure.size(); ++i) {
        structure[i] = structure[i - 1] + 2.0 * tension[i - 1];
    }
    auto series = series_of(tension, structure);
    auto result = defense::test_significant_response(series);
    CHECK(result.slope == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(result.p_value < 1e-6);
}

TEST_CASE("significance slope matches a direct OLS recomputation") {
    rng::Generator gen(14);
    std::vector<double> tension, structure;
    double level = 10.0;
    for (int i = 0; i < 24; ++i) {
        tension.push_back(gen.uniform() * 4.0);
        level += gen.normal(0.0, 1.0);
        structure.push_back(level);
    }
    auto series = series_of(tension, structure);
    auto result = defense::test_significant_response(series);

    std::vector<double> x, y;
    for (std::size_t p = 0; p + 1 < structure.size(); ++p) {
        x.push_back(tension[p]);
        y.push_back(structure[p + 1] - structure[p]);
    }
    double mx = oracle::mean_of(x), my = oracle::mean_of(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    double slope = sxy / sxx;
    CHECK(result.slope == doctest::Approx(slope).epsilon(1e-10));

    double intercept = my - slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - intercept - slope * x[i];
        rss += r * r;
    }
    double n = static_cast<double>(x.size());
    double se = std::sqrt(rss / (n - 2.0) / sxx);
    double t = slope / se;
    CHECK(result.p_value ==
          doctest::Approx(oracle::student_t_two_sided(t, n - 2.0)).epsilon(1e-6));
}

TEST_CASE("constant tension has no testable variance") {
    std::vector<double> tension(20, 3.0);
    rng::Generator gen(21);
    std::vector<double> structure;
    for (int i = 0; i < 20; ++i) structure.push_back(gen.uniform());
    auto series = series_of(tension, structure);
    try {
        defense::test_significant_response(series);
        FAIL("expected ZeroVarianceTension");
    } catch (const Error& e) {
        CHECK(e.code() == errc::zero_variance_tension);
    }
}

TEST_SUITE_END();
