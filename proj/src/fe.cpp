#include "scenekit/fe.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "scenekit/errors.hpp"

namespace scenekit::fe {

namespace {

// Relative tolerance on |R| diagonal entries when deciding rank.
constexpr double kRankTolerance = 1e-10;
// Relative tolerance for calling a demeaned column all-zero.
constexpr double kZeroColumnTolerance = 1e-9;

}  // namespace

PanelDataset make_panel(PanelDataset data) {
    for (const auto& row : data.rows) {
        if (row.regressors.size() != data.regressor_names.size()) {
            throw Error(errc::bad_config,
                        "row for entity '" + row.entity_id + "' defines " +
                            std::to_string(row.regressors.size()) + " regressors, expected " +
                            std::to_string(data.regressor_names.size()));
        }
    }
    std::sort(data.rows.begin(), data.rows.end(),
              [](const PanelRow& a, const PanelRow& b) {
                  return std::tie(a.entity_id, a.period) < std::tie(b.entity_id, b.period);
              });
    for (std::size_t i = 1; i < data.rows.size(); ++i) {
        if (data.rows[i].entity_id == data.rows[i - 1].entity_id &&
            data.rows[i].period == data.rows[i - 1].period) {
            throw Error(errc::duplicate_key,
                        "entity '" + data.rows[i].entity_id + "' has two rows for period " +
                            std::to_string(data.rows[i].period));
        }
    }
    return data;
}

AssembledPanel assemble_panel(const csv::Table& table, const std::string& response,
                              const std::vector<std::string>& regressors) {
    std::size_t c_entity = csv::column_index(table, "entity");
    std::size_t c_period = csv::column_index(table, "period");
    std::size_t c_response = csv::column_index(table, response);
    std::vector<std::size_t> c_regs;
    c_regs.reserve(regressors.size());
    for (const auto& name : regressors) c_regs.push_back(csv::column_index(table, name));

    auto missing = [](const std::string& cell) { return cell.empty() || cell == "NA"; };

    AssembledPanel out;
    out.data.response_name = response;
    out.data.regressor_names = regressors;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        std::size_t line = table.lines[i];
        bool incomplete = missing(row[c_response]);
        for (std::size_t c : c_regs) incomplete = incomplete || missing(row[c]);
        if (incomplete) {
            ++out.dropped_incomplete_rows;
            continue;
        }
        PanelRow prow;
        prow.entity_id = row[c_entity];
        prow.period = csv::parse_int(row[c_period], line);
        prow.response = csv::parse_double(row[c_response], line);
        prow.regressors.reserve(c_regs.size());
        for (std::size_t c : c_regs) prow.regressors.push_back(csv::parse_double(row[c], line));
        out.data.rows.push_back(std::move(prow));
    }
    out.data = make_panel(std::move(out.data));
    return out;
}

StandardizedPanel standardize(const PanelDataset& data) {
    std::size_t n = data.rows.size();
    if (n == 0) throw Error(errc::bad_config, "cannot standardize an empty panel");
    std::size_t k = data.regressor_names.size();

    auto column_stats = [&](auto getter, const std::string& name) {
        double mean = 0;
        for (const auto& row : data.rows) mean += getter(row);
        mean /= static_cast<double>(n);
        double ss = 0;
        for (const auto& row : data.rows) {
            double d = getter(row) - mean;
            ss += d * d;
        }
        double sd = std::sqrt(ss / static_cast<double>(n));
        if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
            throw Error(errc::zero_variance, "variable '" + name + "' has zero pooled variance");
        }
        return VariableTransform{name, mean, sd};
    };

    StandardizedPanel out;
    out.data = data;
    out.transforms.push_back(
        column_stats([](const PanelRow& r) { return r.response; }, data.response_name));
    for (std::size_t j = 0; j < k; ++j) {
        out.transforms.push_back(column_stats(
            [j](const PanelRow& r) { return r.regressors[j]; }, data.regressor_names[j]));
    }
    for (auto& row : out.data.rows) {
        row.response = (row.response - out.transforms[0].mean) / out.transforms[0].sd;
        for (std::size_t j = 0; j < k; ++j) {
            row.regressors[j] =
                (row.regressors[j] - out.transforms[j + 1].mean) / out.transforms[j + 1].sd;
        }
    }
    return out;
}

WithinPanel within_transform(const PanelDataset& data) {
    WithinPanel out;
    out.data.response_name = data.response_name;
    out.data.regressor_names = data.regressor_names;
    std::size_t k = data.regressor_names.size();

    // Rows are sorted by entity, so entities are contiguous runs.
    PanelDataset sorted = make_panel(data);
    std::vector<double> raw_absmax(k, 0.0);
    std::vector<double> demeaned_absmax(k, 0.0);
    std::size_t i = 0;
    while (i < sorted.rows.size()) {
        std::size_t j = i;
        while (j < sorted.rows.size() && sorted.rows[j].entity_id == sorted.rows[i].entity_id) ++j;
        std::size_t len = j - i;
        if (len < 2) {
            ++out.dropped_single_period_entities;
            i = j;
            continue;
        }
        double mean_y = 0;
        std::vector<double> mean_x(k, 0.0);
        for (std::size_t r = i; r < j; ++r) {
            mean_y += sorted.rows[r].response;
            for (std::size_t c = 0; c < k; ++c) mean_x[c] += sorted.rows[r].regressors[c];
        }
        mean_y /= static_cast<double>(len);
        for (auto& m : mean_x) m /= static_cast<double>(len);
        for (std::size_t r = i; r < j; ++r) {
            PanelRow row = sorted.rows[r];
            row.response -= mean_y;
            for (std::size_t c = 0; c < k; ++c) {
                raw_absmax[c] = std::max(raw_absmax[c], std::abs(row.regressors[c]));
                row.regressors[c] -= mean_x[c];
                demeaned_absmax[c] = std::max(demeaned_absmax[c], std::abs(row.regressors[c]));
            }
            out.data.rows.push_back(std::move(row));
        }
        i = j;
    }
    if (out.data.rows.empty()) {
        throw Error(errc::no_multi_period_entities,
                    "every entity has a single period; nothing identifies the within estimator");
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (demeaned_absmax[c] <= kZeroColumnTolerance * std::max(1.0, raw_absmax[c])) {
            out.zero_columns.push_back(data.regressor_names[c]);
        }
    }
    return out;
}

namespace {

// Appends period indicator columns (first period omitted) so two-way checks
// reuse the one-way pipeline.
PanelDataset add_period_indicators(const PanelDataset& data) {
    std::set<long long> periods;
    for (const auto& row : data.rows) periods.insert(row.period);
    PanelDataset out = data;
    bool first = true;
    for (long long p : periods) {
        if (first) {
            first = false;
            continue;
        }
        out.regressor_names.push_back("period_" + std::to_string(p));
        for (auto& row : out.rows) row.regressors.push_back(row.period == p ? 1.0 : 0.0);
    }
    return out;
}

}  // namespace

FEResult fit_fe(const PanelDataset& input, const FEOptions& options) {
    if (input.regressor_names.empty()) {
        throw Error(errc::bad_config, "fit_fe needs at least one regressor");
    }
    PanelDataset prepared = options.period_effects ? add_period_indicators(input) : input;
    WithinPanel within = within_transform(prepared);

    FEResult result;
    result.dropped_single_period_entities = within.dropped_single_period_entities;
    result.dropped_regressors = within.zero_columns;

    // Retained regressors, in declared order.
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < prepared.regressor_names.size(); ++c) {
        if (std::find(within.zero_columns.begin(), within.zero_columns.end(),
                      prepared.regressor_names[c]) == within.zero_columns.end()) {
            keep.push_back(c);
        }
    }
    if (keep.empty()) {
        throw Error(errc::rank_deficient, "all regressors are constant within entities");
    }

    const auto& rows = within.data.rows;
    std::size_t n = rows.size();
    std::size_t k = keep.size();
    Eigen::MatrixXd x(n, k);
    Eigen::VectorXd y(n);
    for (std::size_t r = 0; r < n; ++r) {
        y(static_cast<Eigen::Index>(r)) = rows[r].response;
        for (std::size_t c = 0; c < k; ++c) {
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                rows[r].regressors[keep[c]];
        }
    }

    // Rank check on the pivoted R diagonal, relative to its largest entry.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted(x);
    Eigen::VectorXd rdiag = pivoted.matrixR()
                                .topLeftCorner(static_cast<Eigen::Index>(k),
                                               static_cast<Eigen::Index>(k))
                                .diagonal()
                                .cwiseAbs();
    double rmax = rdiag.maxCoeff();
    std::vector<std::string> dependent;
    for (std::size_t c = 0; c < k; ++c) {
        if (rdiag(static_cast<Eigen::Index>(c)) <= kRankTolerance * rmax) {
            std::size_t original = static_cast<std::size_t>(
                pivoted.colsPermutation().indices()(static_cast<Eigen::Index>(c)));
            dependent.push_back(prepared.regressor_names[keep[original]]);
        }
    }
    if (!dependent.empty()) {
        std::string names;
        for (const auto& name : dependent) names += (names.empty() ? "" : ", ") + name;
        throw Error(errc::rank_deficient, "linearly dependent columns: " + names);
    }

    // Full rank established, so the unpivoted factorization is safe and keeps
    // (X'X)^-1 = R^-1 R^-T free of permutation bookkeeping.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    Eigen::VectorXd beta = qr.solve(y);
    Eigen::VectorXd residuals = y - x * beta;

    Eigen::MatrixXd r = qr.matrixQR()
                            .topLeftCorner(static_cast<Eigen::Index>(k),
                                           static_cast<Eigen::Index>(k))
                            .triangularView<Eigen::Upper>();
    Eigen::MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
    Eigen::MatrixXd bread = rinv * rinv.transpose();

    // Cluster scores s_g = X_g' u_g, one per entity; rows are entity-contiguous.
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                                 static_cast<Eigen::Index>(k));
    std::size_t n_clusters = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        Eigen::VectorXd score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
        while (j < n && rows[j].entity_id == rows[i].entity_id) {
            score += x.row(static_cast<Eigen::Index>(j)).transpose() *
                     residuals(static_cast<Eigen::Index>(j));
            ++j;
        }
        meat += score * score.transpose();
        ++n_clusters;
        i = j;
    }
    if (n_clusters < 2) {
        throw Error(errc::too_few_clusters,
                    "clustered variance needs >= 2 entities, got " + std::to_string(n_clusters));
    }

    double nd = static_cast<double>(n);
    double kd = static_cast<double>(k);
    double gd = static_cast<double>(n_clusters);
    double df_denominator = nd - kd - gd + 1.0;
    if (df_denominator <= 0) {
        throw Error(errc::too_few_clusters,
                    "CR1 correction undefined: N - K - G + 1 = " +
                        std::to_string(df_denominator));
    }
    double correction = (gd / (gd - 1.0)) * ((nd - 1.0) / df_denominator);
    Eigen::MatrixXd vcov = correction * bread * meat * bread;

    boost::math::students_t t_dist(gd - 1.0);
    result.n_observations = n;
    result.n_entities = n_clusters;
    result.n_clusters = n_clusters;
    for (std::size_t c = 0; c < k; ++c) {
        RegressorEstimate est;
        est.name = prepared.regressor_names[keep[c]];
        est.estimate = beta(static_cast<Eigen::Index>(c));
        est.se = std::sqrt(vcov(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)));
        if (est.se > 0) {
            est.t = est.estimate / est.se;
            est.p = 2.0 * boost::math::cdf(boost::math::complement(t_dist, std::abs(est.t)));
        } else {
            est.t = 0.0;
            est.p = est.estimate == 0.0 ? 1.0 : 0.0;
        }
        est.stars = stars_for(est.p);
        result.estimates.push_back(std::move(est));
    }
    return result;
}

std::string stars_for(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

namespace {

std::string round_fixed(double value, int digits) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(digits);
    out << value;
    return out.str();
}

}  // namespace

std::string format_table(const std::vector<std::string>& column_titles,
                         const std::vector<FEResult>& results) {
    if (column_titles.size() != results.size()) {
        throw Error(errc::bad_config, "one title per fitted model required");
    }
    // Row order: union of regressor names in first-appearance order.
    std::vector<std::string> row_names;
    for (const auto& result : results) {
        for (const auto& est : result.estimates) {
            if (std::find(row_names.begin(), row_names.end(), est.name) == row_names.end()) {
                row_names.push_back(est.name);
            }
        }
    }
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> head = {"regressor"};
    head.insert(head.end(), column_titles.begin(), column_titles.end());
    cells.push_back(head);
    for (const auto& name : row_names) {
        std::vector<std::string> line = {name};
        for (const auto& result : results) {
            std::string cell = "-";
            for (const auto& est : result.estimates) {
                if (est.name == name) {
                    cell = round_fixed(est.estimate, 2) + " (" + round_fixed(est.se, 2) + ")" +
                           (est.stars.empty() ? "" : " " + est.stars);
                }
            }
            line.push_back(cell);
        }
        cells.push_back(line);
    }
    std::vector<std::string> tail = {"n_obs"};
    for (const auto& result : results) tail.push_back(std::to_string(result.n_observations));
    cells.push_back(tail);
    tail = {"n_clusters"};
    for (const auto& result : results) tail.push_back(std::to_string(result.n_clusters));
    cells.push_back(tail);

    std::vector<std::size_t> widths(cells[0].size(), 0);
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            widths[c] = std::max(widths[c], line[c].size());
        }
    }
    std::string out;
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            std::string cell = line[c];
            cell.resize(widths[c], ' ');
            out += cell;
            if (c + 1 < line.size()) out += "  ";
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += "\n";
    }
    out += "stars: * p<0.05, ** p<0.01, *** p<0.001\n";
    return out;
}

void write_result_meta(const std::filesystem::path& path, const FEResult& result,
                       const std::string& response_name) {
    nlohmann::ordered_json meta;
    meta["response"] = response_name;
    meta["n_observations"] = result.n_observations;
    meta["n_entities"] = result.n_entities;
    meta["n_clusters"] = result.n_clusters;
    meta["dropped_regressors"] = result.dropped_regressors;
    meta["dropped_single_period_entities"] = result.dropped_single_period_entities;
    csv::write_file(path, meta.dump(2) + "\n");
}

void write_result(const std::filesystem::path& path, const FEResult& result) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(result.estimates.size());
    for (const auto& est : result.estimates) {
        rows.push_back({est.name, csv::format_double(est.estimate), csv::format_double(est.se),
                        csv::format_double(est.t), csv::format_double(est.p), est.stars});
    }
    csv::write_table(path, {"regressor", "estimate", "se", "t", "p", "stars"}, rows);
}

}  // namespace scenekit::fe
