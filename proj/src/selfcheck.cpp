#include "scenekit/selfcheck.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "scenekit/data.hpp"
#include "scenekit/fe.hpp"
#include "scenekit/rng.hpp"
#include "scenekit/specialization.hpp"

namespace scenekit::selfcheck {

namespace {

CheckResult check_depth_anchors() {
    CheckResult result{"depth-weight-anchors", false, ""};
    auto taxonomy = data::make_taxonomy({{"restaurants", ""}, {"french", "restaurants"}});
    auto weights = specialization::depth_weights(taxonomy);
    int root = weights.weights.at("restaurants");
    int child = weights.weights.at("french");
    if (root == 1 && child == 2) {
        result.passed = true;
    } else {
        result.detail = "root=" + std::to_string(root) + " child=" + std::to_string(child);
    }
    return result;
}

CheckResult check_worked_example() {
    CheckResult result{"specialization-worked-example", false, ""};
    auto taxonomy = data::make_taxonomy({
        {"restaurants", ""},
        {"nightlife", ""},
        {"shopping", ""},
        {"arts", ""},
        {"hotels", ""},
        {"wine_bars", "nightlife"},
        {"jazz_blues", "nightlife"},
        {"vinyl", "jazz_blues"},
    });
    auto weights = specialization::depth_weights(taxonomy);
    std::set<std::string> tract_a = {"restaurants", "nightlife", "shopping", "arts", "hotels"};
    std::set<std::string> tract_b = {"vinyl", "wine_bars"};
    double a = specialization::specialization_index(tract_a, weights).score;
    double b = specialization::specialization_index(tract_b, weights).score;
    if (a == 1.0 && b == 2.5) {
        result.passed = true;
    } else {
        std::ostringstream detail;
        detail << "tract_a=" << a << " tract_b=" << b;
        result.detail = detail.str();
    }
    return result;
}

CheckResult check_lsdv_equivalence() {
    CheckResult result{"within-vs-dummy-ols", false, ""};
    constexpr int kEntities = 6, kPeriods = 4, kRegressors = 2;
    rng::Generator gen(20240217);
    fe::PanelDataset data;
    data.response_name = "y";
    data.regressor_names = {"x1", "x2"};
    for (int e = 0; e < kEntities; ++e) {
        double alpha = gen.normal(0.0, 2.0);
        for (int t = 0; t < kPeriods; ++t) {
            fe::PanelRow row;
            row.entity_id = "E" + std::to_string(e);
            row.period = t;
            row.regressors = {gen.normal(), gen.normal()};
            row.response = 0.7 * row.regressors[0] - 0.3 * row.regressors[1] + alpha +
                           gen.normal(0.0, 0.1);
            data.rows.push_back(std::move(row));
        }
    }
    auto fitted = fe::fit_fe(data);

    // LSDV: regressors plus one dummy per entity, plain OLS.
    const int n = kEntities * kPeriods;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, kRegressors + kEntities);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const auto& row = data.rows[static_cast<std::size_t>(i)];
        x(i, 0) = row.regressors[0];
        x(i, 1) = row.regressors[1];
        x(i, kRegressors + i / kPeriods) = 1.0;
        y(i) = row.response;
    }
    Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);

    double gap = std::max(std::abs(fitted.estimates[0].estimate - beta(0)),
                          std::abs(fitted.estimates[1].estimate - beta(1)));
    if (gap < 1e-8) {
        result.passed = true;
    } else {
        std::ostringstream detail;
        detail << "max coefficient gap " << gap;
        result.detail = detail.str();
    }
    return result;
}

}  // namespace

std::vector<CheckResult> run_all() {
    return {check_depth_anchors(), check_worked_example(), check_lsdv_equivalence()};
}

bool report(const std::vector<CheckResult>& results, std::ostream& out) {
    bool all = true;
    for (const auto& r : results) {
        if (r.passed) {
            out << "PASS " << r.name << "\n";
        } else {
            out << "FAIL " << r.name;
            if (!r.detail.empty()) out << " (" << r.detail << ")";
            out << "\n";
            all = false;
        }
    }
    return all;
}

}  // namespace scenekit::selfcheck
