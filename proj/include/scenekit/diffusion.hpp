#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scenekit/data.hpp"

namespace scenekit::diffusion {

struct AdoptionSeries {
    std::vector<double> t;         // years since first opening, strictly increasing
    std::vector<double> fraction;  // cumulative share, nondecreasing, ends at 1.0
    long long n_total = 0;
};

// Cumulative adoption curve from dated openings. One point per distinct open
// date; t = days / 365.25 from the earliest date. With annual_bins, dates
// collapse to whole years since the first opening.
AdoptionSeries adoption_series(const data::OpeningLog& openings, bool annual_bins = false);

enum class Model { logistic, saturating };

struct DiffusionFit {
    Model model = Model::logistic;
    double k = 0.0;       // logistic rate
    double t0 = 0.0;      // logistic midpoint, years
    double lambda = 0.0;  // saturating rate
    double rss = 0.0;
    double aic = 0.0;
    int n_points = 0;
    bool converged = false;
};

// Least-squares fit of F(t) = 1/(1+exp(-k(t-t0))) or F(t) = 1-exp(-lambda t)
// to the series: bounded coarse grid, then Gauss-Newton refinement.
// Deterministic for a given series. A fit that never meets the step tolerance
// returns the best point found with converged = false.
DiffusionFit fit_diffusion(const AdoptionSeries& series, Model model);

enum class CurveClass { S, C, Hybrid };

struct Classification {
    CurveClass curve = CurveClass::Hybrid;
    double delta_aic = 0.0;  // aic(saturating) - aic(logistic)
    DiffusionFit logistic;
    DiffusionFit saturating;
};

// Fits both models; S when the logistic wins by more than 2 AIC points,
// C when the saturating model does, Hybrid otherwise.
Classification classify_curve(const AdoptionSeries& series);

struct CovariateSummary {
    double mean = 0.0;
    double median = 0.0;
    double sd = 0.0;  // sample sd; NaN when n < 2
    std::size_t n = 0;
    std::size_t n_missing = 0;
};

struct Cohort {
    std::size_t first_index = 0;  // 0-based position in adoption order
    std::size_t size = 0;
    std::map<std::string, CovariateSummary> covariates;
};

struct CohortStats {
    std::vector<Cohort> cohorts;
};

// Splits openings (sorted by date, ties by location_id) into consecutive
// cohorts of the given sizes and summarizes the named covariates per cohort.
CohortStats cohort_summary(const data::OpeningLog& openings,
                           const std::vector<std::size_t>& boundaries,
                           const std::vector<std::string>& covariate_names);

const char* model_name(Model model);
const char* curve_class_name(CurveClass c);

void write_series(const std::filesystem::path& path, const AdoptionSeries& series);
void write_fits(const std::filesystem::path& path, const Classification& result);
void write_cohorts(const std::filesystem::path& path, const CohortStats& stats);

}  // namespace scenekit::diffusion
