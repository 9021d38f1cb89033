#include "scenekit/diffusion.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "scenekit/csv.hpp"
#include "scenekit/errors.hpp"

namespace scenekit::diffusion {

namespace {

constexpr double kDaysPerYear = 365.25;
constexpr double kRateLow = 1e-3;
constexpr double kRateHigh = 50.0;
constexpr double kStepTolerance = 1e-10;
constexpr int kMaxIterations = 200;

double safe_exp(double x) { return std::exp(std::clamp(x, -700.0, 700.0)); }

double logistic_value(double t, double k, double t0) {
    return 1.0 / (1.0 + safe_exp(-k * (t - t0)));
}

double saturating_value(double t, double lambda) { return 1.0 - safe_exp(-lambda * t); }

double logistic_rss(const AdoptionSeries& s, double k, double t0) {
    double rss = 0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        double r = logistic_value(s.t[i], k, t0) - s.fraction[i];
        rss += r * r;
    }
    return rss;
}

double saturating_rss(const AdoptionSeries& s, double lambda) {
    double rss = 0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        double r = saturating_value(s.t[i], lambda) - s.fraction[i];
        rss += r * r;
    }
    return rss;
}

double aic_for(double rss, std::size_t n, int n_params) {
    // rss floored so a perfect fit yields a large negative AIC instead of -inf.
    double floored = std::max(rss, 1e-300);
    return static_cast<double>(n) * std::log(floored / static_cast<double>(n)) + 2.0 * n_params;
}

}  // namespace

AdoptionSeries adoption_series(const data::OpeningLog& openings, bool annual_bins) {
    if (openings.records.empty()) {
        throw Error(errc::empty_log, "adoption series needs >= 1 opening");
    }
    std::int64_t first = openings.records.front().open_date;
    AdoptionSeries series;
    series.n_total = static_cast<long long>(openings.records.size());
    long long seen = 0;
    std::size_t i = 0;
    while (i < openings.records.size()) {
        std::int64_t days = openings.records[i].open_date - first;
        double bucket = annual_bins
                            ? std::floor(static_cast<double>(days) / kDaysPerYear)
                            : static_cast<double>(days) / kDaysPerYear;
        std::size_t j = i;
        while (j < openings.records.size()) {
            std::int64_t d2 = openings.records[j].open_date - first;
            double b2 = annual_bins ? std::floor(static_cast<double>(d2) / kDaysPerYear)
                                    : static_cast<double>(d2) / kDaysPerYear;
            if (b2 != bucket) break;
            ++j;
        }
        seen += static_cast<long long>(j - i);
        series.t.push_back(bucket);
        series.fraction.push_back(static_cast<double>(seen) /
                                  static_cast<double>(series.n_total));
        i = j;
    }
    return series;
}

namespace {

DiffusionFit fit_logistic(const AdoptionSeries& series) {
    if (series.t.size() < 3) {
        throw Error(errc::too_few_points, "logistic fit needs >= 3 points, got " +
                                              std::to_string(series.t.size()));
    }
    double t_max = series.t.back();

    // Coarse grid: log-spaced rates, linear midpoints. Ties keep the first
    // (smallest) parameters because the comparison is strict.
    const int kGridRate = 48;
    const int kGridMid = 48;
    double best_rss = std::numeric_limits<double>::infinity();
    double best_k = kRateLow;
    double best_t0 = 0.0;
    for (int a = 0; a < kGridRate; ++a) {
        double k = kRateLow * std::pow(kRateHigh / kRateLow,
                                       static_cast<double>(a) / (kGridRate - 1));
        for (int b = 0; b < kGridMid; ++b) {
            double t0 = t_max * static_cast<double>(b) / (kGridMid - 1);
            double rss = logistic_rss(series, k, t0);
            if (rss < best_rss) {
                best_rss = rss;
                best_k = k;
                best_t0 = t0;
            }
        }
    }

    // Gauss-Newton with step halving.
    double k = best_k;
    double t0 = best_t0;
    double rss = best_rss;
    bool converged = false;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
        Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < series.t.size(); ++i) {
            double f = logistic_value(series.t[i], k, t0);
            double slope = f * (1.0 - f);
            Eigen::Vector2d grad(slope * (series.t[i] - t0), -k * slope);
            jtj += grad * grad.transpose();
            jtr += grad * (f - series.fraction[i]);
        }
        Eigen::Vector2d step = jtj.ldlt().solve(-jtr);
        if (!step.allFinite()) break;
        double relative = std::max(std::abs(step(0)) / std::max(1.0, std::abs(k)),
                                   std::abs(step(1)) / std::max(1.0, std::abs(t0)));
        if (relative < kStepTolerance) {
            converged = true;
            break;
        }
        double alpha = 1.0;
        bool improved = false;
        for (int h = 0; h < 30; ++h) {
            double k_try = std::max(1e-6, k + alpha * step(0));
            double t0_try = t0 + alpha * step(1);
            double rss_try = logistic_rss(series, k_try, t0_try);
            if (rss_try < rss) {
                k = k_try;
                t0 = t0_try;
                rss = rss_try;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) {
            // No descent direction left; the grid point (or current iterate)
            // is the best this solver can certify.
            converged = rss <= best_rss;
            break;
        }
    }

    DiffusionFit fit;
    fit.model = Model::logistic;
    fit.k = k;
    fit.t0 = t0;
    fit.rss = rss;
    fit.n_points = static_cast<int>(series.t.size());
    fit.aic = aic_for(rss, series.t.size(), 2);
    fit.converged = converged;
    return fit;
}

DiffusionFit fit_saturating(const AdoptionSeries& series) {
    if (series.t.size() < 2) {
        throw Error(errc::too_few_points, "saturating fit needs >= 2 points, got " +
                                              std::to_string(series.t.size()));
    }
    const int kGrid = 400;
    double best_rss = std::numeric_limits<double>::infinity();
    double best_lambda = kRateLow;
    for (int a = 0; a < kGrid; ++a) {
        double lambda =
            kRateLow * std::pow(kRateHigh / kRateLow, static_cast<double>(a) / (kGrid - 1));
        double rss = saturating_rss(series, lambda);
        if (rss < best_rss) {
            best_rss = rss;
            best_lambda = lambda;
        }
    }

    double lambda = best_lambda;
    double rss = best_rss;
    bool converged = false;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        double jtj = 0;
        double jtr = 0;
        for (std::size_t i = 0; i < series.t.size(); ++i) {
            double grad = series.t[i] * safe_exp(-lambda * series.t[i]);
            double r = saturating_value(series.t[i], lambda) - series.fraction[i];
            jtj += grad * grad;
            jtr += grad * r;
        }
        if (jtj <= 0) break;
        double step = -jtr / jtj;
        if (!std::isfinite(step)) break;
        if (std::abs(step) / std::max(1.0, lambda) < kStepTolerance) {
            converged = true;
            break;
        }
        double alpha = 1.0;
        bool improved = false;
        for (int h = 0; h < 30; ++h) {
            double lambda_try = std::max(1e-6, lambda + alpha * step);
            double rss_try = saturating_rss(series, lambda_try);
            if (rss_try < rss) {
                lambda = lambda_try;
                rss = rss_try;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) {
            converged = rss <= best_rss;
            break;
        }
    }

    DiffusionFit fit;
    fit.model = Model::saturating;
    fit.lambda = lambda;
    fit.rss = rss;
    fit.n_points = static_cast<int>(series.t.size());
    fit.aic = aic_for(rss, series.t.size(), 1);
    fit.converged = converged;
    return fit;
}

}  // namespace

DiffusionFit fit_diffusion(const AdoptionSeries& series, Model model) {
    return model == Model::logistic ? fit_logistic(series) : fit_saturating(series);
}

Classification classify_curve(const AdoptionSeries& series) {
    if (series.t.size() < 4) {
        throw Error(errc::too_few_points, "curve classification needs >= 4 points, got " +
                                              std::to_string(series.t.size()));
    }
    Classification result;
    result.logistic = fit_diffusion(series, Model::logistic);
    result.saturating = fit_diffusion(series, Model::saturating);
    result.delta_aic = result.saturating.aic - result.logistic.aic;
    if (result.delta_aic > 2.0) {
        result.curve = CurveClass::S;
    } else if (result.delta_aic < -2.0) {
        result.curve = CurveClass::C;
    } else {
        result.curve = CurveClass::Hybrid;
    }
    return result;
}

CohortStats cohort_summary(const data::OpeningLog& openings,
                           const std::vector<std::size_t>& boundaries,
                           const std::vector<std::string>& covariate_names) {
    std::size_t total = 0;
    for (std::size_t size : boundaries) {
        if (size == 0) throw Error(errc::bad_config, "cohort sizes must be >= 1");
        total += size;
    }
    if (total > openings.records.size()) {
        throw Error(errc::boundaries_exceed_total,
                    "cohorts need " + std::to_string(total) + " openings, log has " +
                        std::to_string(openings.records.size()));
    }
    for (const auto& name : covariate_names) {
        bool found = false;
        for (const auto& rec : openings.records) {
            if (rec.covariates.contains(name)) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw Error(errc::unknown_covariate, "no opening carries covariate '" + name + "'");
        }
    }

    CohortStats stats;
    std::size_t start = 0;
    for (std::size_t size : boundaries) {
        Cohort cohort;
        cohort.first_index = start;
        cohort.size = size;
        for (const auto& name : covariate_names) {
            std::vector<double> values;
            std::size_t missing = 0;
            for (std::size_t i = start; i < start + size; ++i) {
                auto it = openings.records[i].covariates.find(name);
                if (it == openings.records[i].covariates.end()) {
                    ++missing;
                } else {
                    values.push_back(it->second);
                }
            }
            CovariateSummary summary;
            summary.n = values.size();
            summary.n_missing = missing;
            if (!values.empty()) {
                for (double v : values) summary.mean += v;
                summary.mean /= static_cast<double>(values.size());
                std::sort(values.begin(), values.end());
                std::size_t mid = values.size() / 2;
                summary.median = values.size() % 2 == 1
                                     ? values[mid]
                                     : 0.5 * (values[mid - 1] + values[mid]);
                if (values.size() >= 2) {
                    double ss = 0;
                    for (double v : values) ss += (v - summary.mean) * (v - summary.mean);
                    summary.sd = std::sqrt(ss / (static_cast<double>(values.size()) - 1.0));
                } else {
                    summary.sd = std::numeric_limits<double>::quiet_NaN();
                }
            } else {
                summary.mean = std::numeric_limits<double>::quiet_NaN();
                summary.median = std::numeric_limits<double>::quiet_NaN();
                summary.sd = std::numeric_limits<double>::quiet_NaN();
            }
            cohort.covariates.emplace(name, summary);
        }
        stats.cohorts.push_back(std::move(cohort));
        start += size;
    }
    return stats;
}

const char* model_name(Model model) {
    return model == Model::logistic ? "logistic" : "saturating";
}

const char* curve_class_name(CurveClass c) {
    switch (c) {
        case CurveClass::S: return "S";
        case CurveClass::C: return "C";
        case CurveClass::Hybrid: return "Hybrid";
    }
    return "Hybrid";
}

void write_series(const std::filesystem::path& path, const AdoptionSeries& series) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(series.t.size());
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        rows.push_back({csv::format_double(series.t[i]), csv::format_double(series.fraction[i])});
    }
    csv::write_table(path, {"t", "fraction"}, rows);
}

void write_fits(const std::filesystem::path& path, const Classification& result) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"logistic", csv::format_double(result.logistic.k),
                    csv::format_double(result.logistic.t0),
                    csv::format_double(result.logistic.rss),
                    csv::format_double(result.logistic.aic), curve_class_name(result.curve)});
    rows.push_back({"saturating", csv::format_double(result.saturating.lambda), "",
                    csv::format_double(result.saturating.rss),
                    csv::format_double(result.saturating.aic), curve_class_name(result.curve)});
    csv::write_table(path, {"model", "param1", "param2", "rss", "aic", "class"}, rows);
}

void write_cohorts(const std::filesystem::path& path, const CohortStats& stats) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t c = 0; c < stats.cohorts.size(); ++c) {
        for (const auto& [name, summary] : stats.cohorts[c].covariates) {
            rows.push_back({std::to_string(c + 1), name, csv::format_double(summary.mean),
                            csv::format_double(summary.median),
                            std::isnan(summary.sd) ? std::string()
                                                   : csv::format_double(summary.sd),
                            std::to_string(summary.n)});
        }
    }
    csv::write_table(path, {"cohort", "covariate", "mean", "median", "sd", "n"}, rows);
}

}  // namespace scenekit::diffusion
