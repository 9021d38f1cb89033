#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenekit/data.hpp"
#include "scenekit/fe.hpp"

namespace scenekit::sim {

// Every generator is a pure function of its config: the seed fixes all output
// bit-for-bit, and per-entity substreams make generation order (and thread
// count) irrelevant. Each result carries its ground-truth record so recovery
// tests never re-derive truth from the data.

// --- development: scene scores vs demographics ------------------------------

struct DevelopmentConfig {
    std::uint64_t seed = 1;
    int n_entities = 100;
    int n_periods = 3;
    double beta_urbane = 0.01;          // pct_ba and median_income effect, urbane dimensions
    double beta_communitarian = -0.01;  // same, communitarian dimensions
    double entity_effect_sd = 1.0;
    double noise_sd = 0.05;
    double walk_step_sd = 1.0;
    bool include_placebo = false;  // extra regressor with true coefficient 0
};

struct DevelopmentPanel {
    std::vector<std::string> regressor_names;
    std::vector<std::string> dimension_names;  // urbane three then communitarian three
    struct Row {
        std::string entity_id;
        long long period;
        std::vector<double> regressors;
        std::vector<double> scores;  // aligned with dimension_names
    };
    std::vector<Row> rows;                                  // sorted by (entity, period)
    std::map<std::string, std::vector<double>> true_beta;   // dimension -> per-regressor

    fe::PanelDataset dataset(const std::string& dimension) const;
    nlohmann::ordered_json truth() const;
};

DevelopmentPanel gen_development_panel(const DevelopmentConfig& config);
void write_development_panel(const std::filesystem::path& path, const DevelopmentPanel& panel);

// --- differentiation: specialization vs business density --------------------

struct DifferentiationConfig {
    std::uint64_t seed = 1;
    int n_entities = 100;
    int n_periods = 5;
    double density_gain = 0.2;  // true effect of business_density
    double entity_effect_sd = 1.0;
    double noise_sd = 0.5;
    double walk_step_sd = 1.0;
    int n_placebos = 2;  // independent covariates with true coefficient 0
};

struct DifferentiationPanel {
    fe::PanelDataset data;           // response: specialization
    std::vector<double> true_beta;   // aligned with data.regressor_names

    nlohmann::ordered_json truth() const;
};

DifferentiationPanel gen_differentiation_panel(const DifferentiationConfig& config);
void write_differentiation_panel(const std::filesystem::path& path,
                                 const DifferentiationPanel& panel);

// --- diffusion: dated openings with known curve shape -----------------------

enum class Shape { S, C, Hybrid };

struct DiffusionConfig {
    std::uint64_t seed = 1;
    Shape shape = Shape::S;
    int n_adopters = 1000;
    // S: adoption times sampled from the logistic CDF.
    double k = 1.0;
    double t0 = 10.0;
    // C: a tiny pioneer block at year 0, then all-at-once waves at whole
    // years whose sizes decay like the increments of 1 - exp(-wave_decay * t).
    int n_waves = 6;
    double wave_decay = 0.65;
    double pioneer_fraction = 0.002;
    double wave_jitter_days = 0.0;
    // Hybrid: exponential-growth segment over [0, hybrid_years], then waves.
    double hybrid_years = 30.0;
    double hybrid_growth = 0.12;
    double hybrid_wave_fraction = 0.45;
    // Region covariate, constant per region and linear in adoption order.
    int adopters_per_region = 25;
    std::string covariate_name = "metro_size";
    double covariate_base = 10.0;
    double covariate_slope = -0.05;  // per region, in adoption order
};

struct DiffusionData {
    data::OpeningLog log;
    Shape shape = Shape::S;
    // Rebasing target: years between the nominal t = 0 and the first realized
    // opening; the midpoint a fit should recover is t0 - first_offset_years.
    double first_offset_years = 0.0;
    double t0_from_first = 0.0;

    nlohmann::ordered_json truth(const DiffusionConfig& config) const;
};

DiffusionData gen_diffusion_series(const DiffusionConfig& config);

// --- defense: event log with a known tension-response gain ------------------

struct DefenseConfig {
    std::uint64_t seed = 1;
    int n_periods = 40;  // quarters
    int n_regulars = 30;
    double regular_rate = 4.0;          // events per regular per quarter (Poisson)
    double regular_top_share = 0.85;    // chance a regular event hits a top category
    double background_newcomer_rate = 2.0;  // one-off visitors per quarter (Poisson)
    std::vector<int> burst_periods = {10};
    int burst_users = 40;
    int burst_events_per_user = 3;
    double gain = 0.8;     // extra regular top-category events at p+1 per burst event at p
    double noise_sd = 0.1; // relative noise on the response size
    int newcomer_history_events = 5;  // out-of-area history per burst user
};

struct DefenseData {
    data::ReviewEventLog log;
    data::Taxonomy taxonomy;
    std::string area_id;
    std::vector<std::string> top_categories;  // the five the regulars favor
    std::vector<long long> burst_event_counts;

    nlohmann::ordered_json truth(const DefenseConfig& config) const;
};

DefenseData gen_defense_events(const DefenseConfig& config);

}  // namespace scenekit::sim
