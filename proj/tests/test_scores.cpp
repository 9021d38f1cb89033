#include <cmath>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "doctest.h"
#include "oracles.hpp"
#include "scenekit/data.hpp"
#include "scenekit/errors.hpp"
#include "scenekit/scores.hpp"

using namespace scenekit;

namespace {

// Weight table with every core dimension present; extra entries overlay it.
data::DimensionWeightTable table_with(
    std::vector<std::tuple<std::string, std::string, double>> entries) {
    for (const auto& d : data::core_dimensions()) entries.emplace_back("FILLER", d, 1.0);
    return data::make_weight_table(entries);
}

data::AmenityPanel panel_of(const std::vector<data::AmenityObservation>& obs) {
    return data::make_amenity_panel(obs);
}

}  // namespace

TEST_SUITE_BEGIN("scores");

TEST_CASE("weighted mean of two amenities") {
    // 2 units at weight 5 and 2 units at weight 1 -> (2*5 + 2*1) / 4 = 3.
    auto weights = table_with({{"BIG", "tradition", 5.0}, {"SMALL", "tradition", 1.0}});
    auto panel = panel_of({{"A1", 2000, "BIG", 2}, {"A1", 2000, "SMALL", 2}});
    auto table = scores::performance_scores(panel, weights);
    CHECK(table.values.at({"A1", 2000, "tradition"}) == 3.0);
}

TEST_CASE("single amenity weighted w on every dimension scores w") {
    std::vector<std::tuple<std::string, std::string, double>> entries;
    for (const auto& d : data::core_dimensions()) entries.emplace_back("X", d, 4.0);
    auto weights = table_with(entries);
    auto table = scores::performance_scores(panel_of({{"A1", 2000, "X", 7}}), weights);
    for (const auto& d : data::core_dimensions()) {
        CHECK(table.values.at({"A1", 2000, d}) == 4.0);
    }
}

TEST_CASE("unweighted codes are skipped, empty cells get no entry") {
    auto weights = table_with({{"KNOWN", "glamour", 2.0}});
    auto table = scores::performance_scores(
        panel_of({{"A1", 2000, "KNOWN", 1}, {"A1", 2000, "MYSTERY", 50}}), weights);
    CHECK(table.values.at({"A1", 2000, "glamour"}) == 2.0);
    // MYSTERY has no weights at all; dimensions without any weighted count
    // are absent rather than zero.
    CHECK_FALSE(table.values.contains({"A1", 2000, "tradition"}));
}

TEST_CASE("random panel equals direct weighted-mean recomputation") {
    std::mt19937 rng(404);
    std::uniform_int_distribution<int> count(1, 9);
    std::uniform_real_distribution<double> weight(1.0, 5.0);
    std::vector<std::string> codes = {"C1", "C2", "C3"};
    std::vector<std::tuple<std::string, std::string, double>> entries;
    std::map<std::pair<std::string, std::string>, double> w;
    for (const auto& code : codes) {
        for (const auto& dim : data::core_dimensions()) {
            if (rng() % 4 == 0) continue;  // leave gaps
            double value = std::round(weight(rng) * 4) / 4;
            entries.emplace_back(code, dim, value);
            w[{code, dim}] = value;
        }
    }
    std::vector<data::AmenityObservation> obs;
    for (int a = 0; a < 5; ++a) {
        for (const auto& code : codes) {
            obs.push_back({"A" + std::to_string(a), 2000, code, count(rng)});
        }
    }
    auto table = scores::performance_scores(panel_of(obs), table_with(entries));
    for (int a = 0; a < 5; ++a) {
        std::string area = "A" + std::to_string(a);
        for (const auto& dim : data::core_dimensions()) {
            double num = 0, den = 0;
            for (const auto& o : obs) {
                if (o.area_id != area) continue;
                auto it = w.find({o.amenity_code, dim});
                if (it == w.end()) continue;
                num += static_cast<double>(o.count) * it->second;
                den += static_cast<double>(o.count);
            }
            if (den == 0) {
                CHECK_FALSE(table.values.contains({area, 2000, dim}));
            } else {
                CHECK(table.values.at({area, 2000, dim}) == doctest::Approx(num / den).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("count scaling within an area-year leaves scores unchanged") {
    auto weights = table_with({{"P", "glamour", 1.5}, {"Q", "glamour", 4.5}});
    auto base = scores::performance_scores(
        panel_of({{"A1", 2000, "P", 3}, {"A1", 2000, "Q", 5}}), weights);
    auto scaled = scores::performance_scores(
        panel_of({{"A1", 2000, "P", 21}, {"A1", 2000, "Q", 35}}), weights);
    CHECK(base.values.at({"A1", 2000, "glamour"}) ==
          doctest::Approx(scaled.values.at({"A1", 2000, "glamour"})).epsilon(1e-14));
}

TEST_CASE("zscore: two areas map to -1 and +1") {
    scores::ScoreTable raw;
    raw.values[{"A1", 2000, "glamour"}] = 1.0;
    raw.values[{"A2", 2000, "glamour"}] = 3.0;
    auto z = scores::zscore_by_period(raw);
    CHECK(z.normalized);
    CHECK(z.values.at({"A1", 2000, "glamour"}) == doctest::Approx(-1.0));
    CHECK(z.values.at({"A2", 2000, "glamour"}) == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)scores::zscore_by_period(z), Error);  // AlreadyNormalized
}

TEST_CASE("zscore: constant groups are dropped with a count") {
    scores::ScoreTable raw;
    raw.values[{"A1", 2000, "glamour"}] = 2.0;
    raw.values[{"A2", 2000, "glamour"}] = 2.0;
    raw.values[{"A1", 2001, "glamour"}] = 1.0;
    raw.values[{"A2", 2001, "glamour"}] = 5.0;
    auto z = scores::zscore_by_period(raw);
    CHECK(z.dropped_zero_variance_groups == 1);
    CHECK_FALSE(z.values.contains({"A1", 2000, "glamour"}));
    CHECK(z.values.contains({"A1", 2001, "glamour"}));
}

TEST_CASE("zscore: random table has mean 0 and sd 1 per group") {
    std::mt19937 rng(99);
    std::normal_distribution<double> score(5.0, 2.0);
    scores::ScoreTable raw;
    for (int a = 0; a < 100; ++a) {
        for (int y : {2000, 2010}) {
            raw.values[{"A" + std::to_string(a), y, "tradition"}] = score(rng);
        }
    }
    auto z = scores::zscore_by_period(raw);
    for (int y : {2000, 2010}) {
        std::vector<double> column;
        for (const auto& [key, v] : z.values) {
            if (key.year == y) column.push_back(v);
        }
        CHECK(std::abs(oracle::mean_of(column)) < 1e-10);
        CHECK(std::abs(oracle::pop_sd_of(column) - 1.0) < 1e-10);
    }
}

TEST_CASE("zscore is invariant to positive affine transforms of a group") {
    std::mt19937 rng(7);
    std::normal_distribution<double> score(0.0, 1.0);
    scores::ScoreTable raw, shifted;
    for (int a = 0; a < 40; ++a) {
        double v = score(rng);
        raw.values[{"A" + std::to_string(a), 2000, "glamour"}] = v;
        shifted.values[{"A" + std::to_string(a), 2000, "glamour"}] = 3.5 * v - 11.0;
    }
    auto za = scores::zscore_by_period(raw);
    auto zb = scores::zscore_by_period(shifted);
    for (const auto& [key, v] : za.values) {
        CHECK(std::abs(v - zb.values.at(key)) < 1e-10);
    }
}

TEST_CASE("score change subtracts and omits partial areas") {
    scores::ScoreTable table;
    table.values[{"A1", 1998, "glamour"}] = 0.2;
    table.values[{"A1", 2016, "glamour"}] = 0.7;
    table.values[{"A2", 2016, "glamour"}] = 0.9;  // missing 1998
    auto change = scores::score_change(table, 1998, 2016);
    CHECK(change.values.at({"A1", "glamour"}) == doctest::Approx(0.5));
    CHECK_FALSE(change.values.contains({"A2", "glamour"}));

    auto zero = scores::score_change(table, 2016, 2016);
    CHECK(zero.values.at({"A1", "glamour"}) == 0.0);
    CHECK(zero.values.at({"A2", "glamour"}) == 0.0);

    auto reversed = scores::score_change(table, 2016, 1998);
    CHECK(reversed.values.at({"A1", "glamour"}) ==
          doctest::Approx(-change.values.at({"A1", "glamour"})));
    CHECK_THROWS_AS((void)scores::score_change(table, 1990, 2016), Error);
}

TEST_CASE("jenks: canonical two-cluster split") {
    auto result = scores::jenks_classify({1, 2, 3, 10, 11, 12}, 2);
    CHECK(result.classes == std::vector<int>{1, 1, 1, 2, 2, 2});
    REQUIRE(result.upper_bounds.size() == 2);
    CHECK(result.upper_bounds[0] == 3.0);
    CHECK(result.upper_bounds[1] == 12.0);
    CHECK(result.objective == doctest::Approx(4.0));  // 2 + 2
}

TEST_CASE("jenks: k=1 puts everything together") {
    auto result = scores::jenks_classify({5, 1, 9}, 1);
    CHECK(result.classes == std::vector<int>{1, 1, 1});
    CHECK(result.upper_bounds == std::vector<double>{9.0});
}

TEST_CASE("jenks: ties share a class and input order is preserved") {
    auto result = scores::jenks_classify({4, 1, 4, 1, 4}, 2);
    CHECK(result.classes == std::vector<int>{2, 1, 2, 1, 2});
}

TEST_CASE("jenks: k above distinct count fails") {
    CHECK_THROWS_AS((void)scores::jenks_classify({1, 1, 2}, 3), Error);
    CHECK_THROWS_AS((void)scores::jenks_classify({1, 2}, 0), Error);
}

TEST_CASE("jenks: objective equals the exhaustive optimum on random inputs") {
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> len(2, 12);
    std::uniform_real_distribution<double> value(-5.0, 5.0);
    for (int trial = 0; trial < 120; ++trial) {
        int n = len(rng);
        std::vector<double> values;
        for (int i = 0; i < n; ++i) {
            // Mix continuous and repeated integer values to exercise ties.
            values.push_back(rng() % 3 == 0 ? std::floor(value(rng)) : value(rng));
        }
        std::set<double> distinct(values.begin(), values.end());
        int max_k = static_cast<int>(std::min<std::size_t>(4, distinct.size()));
        int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_k));
        auto result = scores::jenks_classify(values, k);
        double best = oracle::jenks_exhaustive(values, k);
        CHECK(result.objective == doctest::Approx(best).epsilon(1e-9));

        // The reported classes must reproduce the reported objective.
        std::map<int, std::vector<double>> by_class;
        for (std::size_t i = 0; i < values.size(); ++i) {
            by_class[result.classes[i]].push_back(values[i]);
        }
        double recomputed = 0;
        for (const auto& [cls, members] : by_class) {
            double m = oracle::mean_of(members);
            for (double v : members) recomputed += (v - m) * (v - m);
        }
        CHECK(recomputed == doctest::Approx(result.objective).epsilon(1e-9));
    }
}

TEST_CASE("illustrative weights cover the core dimensions") {
    auto weights = scores::illustrative_weights();
    std::set<std::string> have(weights.dimensions.begin(), weights.dimensions.end());
    std::set<std::string> want(data::core_dimensions().begin(), data::core_dimensions().end());
    CHECK(have == want);
}

TEST_SUITE_END();
