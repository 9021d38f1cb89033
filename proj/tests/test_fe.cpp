#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "scenekit/csv.hpp"
#include "scenekit/errors.hpp"
#include "scenekit/fe.hpp"

using namespace scenekit;

namespace {

// Random full-rank panel with entity effects; sizes per the oracle contract.
fe::PanelDataset random_panel(std::mt19937& rng, int max_entities = 20, int max_periods = 5,
                              int max_regressors = 3) {
    std::uniform_int_distribution<int> entities(2, max_entities);
    std::uniform_int_distribution<int> periods(2, max_periods);
    std::uniform_int_distribution<int> regressors(1, max_regressors);
    std::normal_distribution<double> normal(0.0, 1.0);
    fe::PanelDataset data;
    int k = regressors(rng);
    for (int r = 0; r < k; ++r) data.regressor_names.push_back("x" + std::to_string(r + 1));
    int g = entities(rng);
    for (int e = 0; e < g; ++e) {
        double alpha = 3.0 * normal(rng);
        int t_count = periods(rng);
        for (int t = 0; t < t_count; ++t) {
            fe::PanelRow row;
            row.entity_id = "E" + std::to_string(100 + e);
            row.period = t;
            double signal = alpha;
            for (int r = 0; r < k; ++r) {
                double x = normal(rng);
                row.regressors.push_back(x);
                signal += (r + 1) * 0.5 * x;
            }
            row.response = signal + 0.3 * normal(rng);
            data.rows.push_back(std::move(row));
        }
    }
    return fe::make_panel(std::move(data));
}

// Entities observed once are invisible to the within estimator; the oracle's
// LSDV absorbs them into their own dummy, so estimates still agree, but for
// SE comparisons the correction factor must see the same N. Keep panels
// multi-period.
fe::PanelDataset random_multi_period_panel(std::mt19937& rng) {
    while (true) {
        auto panel = random_panel(rng);
        std::map<std::string, int> counts;
        for (const auto& row : panel.rows) counts[row.entity_id]++;
        bool ok = true;
        for (const auto& [id, c] : counts) ok = ok && c >= 2;
        long long n = static_cast<long long>(panel.rows.size());
        long long k = static_cast<long long>(panel.regressor_names.size());
        long long g = static_cast<long long>(counts.size());
        if (ok && g >= 2 && n - k - g + 1 > 0) return panel;
    }
}

}  // namespace

TEST_SUITE_BEGIN("fe");

TEST_CASE("standardize: {0,2} becomes {-1,+1} and is idempotent") {
    fe::PanelDataset data;
    data.regressor_names = {"x"};
    data.rows = {{"A", 0, 0.0, {0.0}}, {"A", 1, 2.0, {2.0}}};
    auto standardized = fe::standardize(data);
    CHECK(standardized.data.rows[0].response == doctest::Approx(-1.0));
    CHECK(standardized.data.rows[1].response == doctest::Approx(1.0));
    CHECK(standardized.data.rows[0].regressors[0] == doctest::Approx(-1.0));
    CHECK(standardized.transforms[0].mean == doctest::Approx(1.0));
    auto twice = fe::standardize(standardized.data);
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        CHECK(twice.data.rows[i].response ==
              doctest::Approx(standardized.data.rows[i].response).epsilon(1e-12));
    }
}

TEST_CASE("standardize: pooled moments hit 0/1 on random panels") {
    std::mt19937 rng(31);
    auto panel = random_panel(rng);
    auto standardized = fe::standardize(panel);
    std::vector<double> y;
    for (const auto& row : standardized.data.rows) y.push_back(row.response);
    CHECK(std::abs(oracle::mean_of(y)) < 1e-10);
    CHECK(std::abs(oracle::pop_sd_of(y) - 1.0) < 1e-10);
    for (std::size_t c = 0; c < panel.regressor_names.size(); ++c) {
        std::vector<double> x;
        for (const auto& row : standardized.data.rows) x.push_back(row.regressors[c]);
        CHECK(std::abs(oracle::mean_of(x)) < 1e-10);
        CHECK(std::abs(oracle::pop_sd_of(x) - 1.0) < 1e-10);
    }
}

TEST_CASE("standardize rejects constant variables") {
    fe::PanelDataset data;
    data.regressor_names = {"x"};
    data.rows = {{"A", 0, 1.0, {5.0}}, {"A", 1, 2.0, {5.0}}};
    CHECK_THROWS_AS((void)fe::standardize(data), Error);
}

TEST_CASE("within transform: {1,3} becomes {-1,+1}, entity means vanish") {
    fe::PanelDataset data;
    data.regressor_names = {"x"};
    data.rows = {{"A", 0, 1.0, {2.0}}, {"A", 1, 3.0, {4.0}}};
    auto within = fe::within_transform(data);
    CHECK(within.data.rows[0].response == doctest::Approx(-1.0));
    CHECK(within.data.rows[1].response == doctest::Approx(1.0));

    std::mt19937 rng(77);
    auto panel = random_panel(rng);
    auto demeaned = fe::within_transform(panel);
    std::map<std::string, double> sums;
    std::map<std::string, int> counts;
    for (const auto& row : demeaned.data.rows) {
        sums[row.entity_id] += row.response;
        counts[row.entity_id]++;
    }
    for (const auto& [id, total] : sums) {
        CHECK(std::abs(total / counts[id]) < 1e-12);
    }
}

TEST_CASE("within transform drops single-period entities and flags constants") {
    fe::PanelDataset data;
    data.regressor_names = {"x", "c"};
    data.rows = {{"A", 0, 1.0, {2.0, 7.0}},
                 {"A", 1, 3.0, {4.0, 7.0}},
                 {"B", 0, 9.0, {1.0, 3.0}}};
    auto within = fe::within_transform(fe::make_panel(std::move(data)));
    CHECK(within.dropped_single_period_entities == 1);
    CHECK(within.zero_columns == std::vector<std::string>{"c"});

    fe::PanelDataset lonely;
    lonely.regressor_names = {"x"};
    lonely.rows = {{"A", 0, 1.0, {2.0}}, {"B", 0, 2.0, {3.0}}};
    CHECK_THROWS_AS((void)fe::within_transform(fe::make_panel(std::move(lonely))), Error);
}

TEST_CASE("exact fit: y = 2x + entity effect recovers 2 with tiny SE") {
    fe::PanelDataset data;
    data.regressor_names = {"x"};
    std::mt19937 rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int e = 0; e < 6; ++e) {
        double alpha = normal(rng);
        for (int t = 0; t < 4; ++t) {
            double x = normal(rng);
            data.rows.push_back({"E" + std::to_string(e), t, 2.0 * x + alpha, {x}});
        }
    }
    auto result = fe::fit_fe(fe::make_panel(std::move(data)));
    CHECK(result.estimates[0].estimate == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(result.estimates[0].se < 1e-8);
}

TEST_CASE("estimates and cluster SEs match the dummy-variable oracle") {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 25; ++trial) {
        auto panel = random_multi_period_panel(rng);
        auto fitted = fe::fit_fe(panel);
        auto reference = oracle::lsdv(panel);
        REQUIRE(fitted.estimates.size() == reference.estimates.size());
        for (std::size_t j = 0; j < reference.estimates.size(); ++j) {
            CHECK(std::abs(fitted.estimates[j].estimate - reference.estimates[j]) < 1e-8);
            CHECK(std::abs(fitted.estimates[j].se - reference.cluster_se[j]) < 1e-8);
        }
    }
}

TEST_CASE("p-values agree with direct t-density quadrature") {
    std::mt19937 rng(88);
    auto panel = random_multi_period_panel(rng);
    auto fitted = fe::fit_fe(panel);
    double df = static_cast<double>(fitted.n_clusters - 1);
    for (const auto& est : fitted.estimates) {
        CHECK(est.p == doctest::Approx(oracle::student_t_two_sided(est.t, df)).epsilon(1e-6));
    }
}

TEST_CASE("entity-level shifts of the response change nothing") {
    std::mt19937 rng(4321);
    auto panel = random_multi_period_panel(rng);
    auto base = fe::fit_fe(panel);
    auto shifted = panel;
    std::map<std::string, double> offsets;
    for (auto& row : shifted.rows) {
        auto [it, inserted] = offsets.emplace(row.entity_id, 0.0);
        if (inserted) it->second = static_cast<double>(offsets.size()) * 13.5;
        row.response += it->second;
    }
    auto result = fe::fit_fe(shifted);
    for (std::size_t j = 0; j < base.estimates.size(); ++j) {
        CHECK(std::abs(result.estimates[j].estimate - base.estimates[j].estimate) < 1e-10);
    }
}

TEST_CASE("standardized estimates ignore regressor rescaling") {
    std::mt19937 rng(55);
    auto panel = random_multi_period_panel(rng);
    auto base = fe::fit_fe(fe::standardize(panel).data);
    auto scaled = panel;
    for (auto& row : scaled.rows) row.regressors[0] *= 42.0;
    auto result = fe::fit_fe(fe::standardize(scaled).data);
    CHECK(std::abs(result.estimates[0].estimate - base.estimates[0].estimate) < 1e-10);
}

TEST_CASE("entity-constant regressors are dropped by name, others unchanged") {
    std::mt19937 rng(66);
    auto panel = random_multi_period_panel(rng);
    auto base = fe::fit_fe(panel);
    auto augmented = panel;
    augmented.regressor_names.push_back("frozen");
    std::map<std::string, double> constant;
    for (auto& row : augmented.rows) {
        auto [it, inserted] = constant.emplace(row.entity_id, 0.0);
        if (inserted) it->second = static_cast<double>(constant.size());
        row.regressors.push_back(it->second);
    }
    auto result = fe::fit_fe(augmented);
    REQUIRE(result.dropped_regressors == std::vector<std::string>{"frozen"});
    REQUIRE(result.estimates.size() == base.estimates.size());
    for (std::size_t j = 0; j < base.estimates.size(); ++j) {
        CHECK(result.estimates[j].estimate ==
              doctest::Approx(base.estimates[j].estimate).epsilon(1e-10));
    }
}

TEST_CASE("collinear regressors raise RankDeficient with names") {
    fe::PanelDataset data;
    data.regressor_names = {"x", "twice_x"};
    std::mt19937 rng(9);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int e = 0; e < 4; ++e) {
        for (int t = 0; t < 3; ++t) {
            double x = normal(rng);
            data.rows.push_back(
                {"E" + std::to_string(e), t, normal(rng), {x, 2.0 * x}});
        }
    }
    try {
        fe::fit_fe(fe::make_panel(std::move(data)));
        FAIL("expected RankDeficient");
    } catch (const Error& e) {
        CHECK(e.code() == errc::rank_deficient);
        // Pivoting decides which of the aliased pair gets reported.
        std::string what = e.what();
        CHECK((what.find("x") != std::string::npos));
    }
}

TEST_CASE("too few clusters is rejected") {
    fe::PanelDataset data;
    data.regressor_names = {"x"};
    data.rows = {{"A", 0, 1.0, {1.0}}, {"A", 1, 2.0, {2.0}}, {"A", 2, 3.0, {2.5}}};
    CHECK_THROWS_AS((void)fe::fit_fe(fe::make_panel(std::move(data))), Error);
}

TEST_CASE("duplicate (entity, period) keys are rejected") {
    fe::PanelDataset data;
    data.regressor_names = {"x"};
    data.rows = {{"A", 0, 1.0, {1.0}}, {"A", 0, 2.0, {2.0}}};
    CHECK_THROWS_AS((void)fe::make_panel(std::move(data)), Error);
}

TEST_CASE("stars reproduce the legend boundaries") {
    CHECK(fe::stars_for(0.049) == "*");
    CHECK(fe::stars_for(0.05) == "");
    CHECK(fe::stars_for(0.009) == "**");
    CHECK(fe::stars_for(0.01) == "*");
    CHECK(fe::stars_for(0.0009) == "***");
    CHECK(fe::stars_for(0.001) == "**");
}

TEST_CASE("assemble_panel drops rows with missing cells") {
    auto table = csv::parse_text(
        "entity,period,y,x\n"
        "A,1,1.0,2.0\n"
        "A,2,,2.5\n"
        "A,3,3.0,NA\n"
        "A,4,4.0,1.0\n"
        "B,1,0.5,0.25\n"
        "B,2,0.75,0.5\n");
    auto assembled = fe::assemble_panel(table, "y", {"x"});
    CHECK(assembled.dropped_incomplete_rows == 2);
    CHECK(assembled.data.rows.size() == 4);
    CHECK(assembled.data.response_name == "y");
}

TEST_CASE("period effects absorb common shocks") {
    // y = x + 5*period_shock + entity effect; without period indicators the
    // shock biases the x estimate, with them it does not.
    std::mt19937 rng(12);
    std::normal_distribution<double> normal(0.0, 1.0);
    fe::PanelDataset data;
    data.regressor_names = {"x"};
    std::vector<double> shock = {0.0, 2.0, -1.0, 0.5};
    for (int e = 0; e < 10; ++e) {
        double alpha = normal(rng);
        for (int t = 0; t < 4; ++t) {
            double x = normal(rng) + shock[t];  // correlate x with the shock
            data.rows.push_back(
                {"E" + std::to_string(e), t, x + 5.0 * shock[t] + alpha, {x}});
        }
    }
    auto panel = fe::make_panel(std::move(data));
    fe::FEOptions with_effects;
    with_effects.period_effects = true;
    auto adjusted = fe::fit_fe(panel, with_effects);
    auto naive = fe::fit_fe(panel);
    CHECK(std::abs(adjusted.estimates[0].estimate - 1.0) < 1e-8);
    CHECK(std::abs(naive.estimates[0].estimate - 1.0) > 0.5);
}

TEST_CASE("result tables serialize estimates with stars") {
    std::mt19937 rng(3);
    auto panel = random_multi_period_panel(rng);
    auto result = fe::fit_fe(panel);
    std::string text = fe::format_table({"y"}, {result});
    CHECK(text.find("n_obs") != std::string::npos);
    CHECK(text.find("p<0.05") != std::string::npos);

    auto dir = std::filesystem::temp_directory_path() / "scenekit_tests" / "fe_out";
    std::filesystem::create_directories(dir);
    fe::write_result(dir / "fe.csv", result);
    auto parsed = csv::read_table(dir / "fe.csv");
    CHECK(parsed.header ==
          std::vector<std::string>{"regressor", "estimate", "se", "t", "p", "stars"});
    CHECK(parsed.rows.size() == result.estimates.size());
}

TEST_SUITE_END();
