// scenekit: batch front end for the scene-change analytics modules.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scenekit/csv.hpp"
#include "scenekit/data.hpp"
#include "scenekit/defense.hpp"
#include "scenekit/diffusion.hpp"
#include "scenekit/errors.hpp"
#include "scenekit/fe.hpp"
#include "scenekit/scores.hpp"
#include "scenekit/selfcheck.hpp"
#include "scenekit/sim.hpp"
#include "scenekit/specialization.hpp"
#include "scenekit/svg.hpp"
#include "scenekit/timeutil.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace scenekit;

namespace {

constexpr const char* kVersion = "0.1.0";

const std::vector<std::string>& palette() {
    static const std::vector<std::string> colors = {"#2a6fbb", "#d1495b", "#3a9e5f", "#8862b8",
                                                    "#c77f2e", "#4aa5a3", "#7d7d7d", "#b04e8f"};
    return colors;
}

// Accumulates the reproducibility record; written last so it can list every
// artifact the run produced.
class Manifest {
  public:
    Manifest(std::string subcommand, fs::path out_dir)
        : out_dir_(std::move(out_dir)) {
        doc_["toolkit"] = "scenekit";
        doc_["version"] = kVersion;
        doc_["subcommand"] = std::move(subcommand);
        doc_["seed"] = nullptr;
        doc_["inputs"] = ordered_json::array();
        doc_["parameters"] = ordered_json::object();
        doc_["outputs"] = ordered_json::array();
    }

    void seed(std::uint64_t value) { doc_["seed"] = value; }

    void input(const std::string& role, const fs::path& path) {
        ordered_json entry;
        entry["role"] = role;
        entry["path"] = path.string();
        entry["fnv1a64"] = csv::hex64(csv::fnv1a64_file(path));
        doc_["inputs"].push_back(std::move(entry));
    }

    template <typename T>
    void param(const std::string& key, const T& value) {
        doc_["parameters"][key] = value;
    }

    void output(const std::string& filename) { doc_["outputs"].push_back(filename); }

    void write() {
        csv::write_file(out_dir_ / "manifest.json", doc_.dump(2) + "\n");
    }

  private:
    ordered_json doc_;
    fs::path out_dir_;
};

fs::path ensure_out(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void write_json(const fs::path& path, const ordered_json& doc) {
    csv::write_file(path, doc.dump(2) + "\n");
}

double sample_sd(const std::vector<double>& values) {
    if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

timeutil::PeriodLength period_from_name(const std::string& name) {
    if (name == "month") return timeutil::PeriodLength::month;
    if (name == "quarter") return timeutil::PeriodLength::quarter;
    return timeutil::PeriodLength::year;
}

// --- score / trend / change ---------------------------------------------------

struct ScoreOpts {
    std::string amenities;
    std::string weights;
    bool normalize = false;
    std::string out;
};

scores::ScoreTable compute_scores(const ScoreOpts& opts, Manifest& manifest) {
    auto panel = data::parse_amenity_panel(opts.amenities);
    manifest.input("amenities", opts.amenities);
    data::DimensionWeightTable weights;
    if (opts.weights.empty()) {
        weights = scores::illustrative_weights();
    } else {
        weights = data::parse_weights(opts.weights);
        manifest.input("weights", opts.weights);
    }
    manifest.param("weights_source", opts.weights.empty() ? "builtin" : "file");
    manifest.param("normalize", opts.normalize);
    auto table = scores::performance_scores(panel, weights);
    if (opts.normalize) table = scores::zscore_by_period(table);
    return table;
}

void run_score(const ScoreOpts& opts) {
    fs::path out = ensure_out(opts.out);
    Manifest manifest("score", out);
    auto table = compute_scores(opts, manifest);
    scores::write_scores(out / "scores.csv", table);
    manifest.output("scores.csv");
    manifest.write();
}

struct TrendOpts : ScoreOpts {
    bool svg_timestamp = true;
};

void run_trend(const TrendOpts& opts) {
    fs::path out = ensure_out(opts.out);
    Manifest manifest("trend", out);
    auto table = compute_scores(opts, manifest);

    // Per (dimension, year): mean score across areas with a standard error.
    std::map<std::pair<std::string, int>, std::vector<double>> cells;
    for (const auto& [key, value] : table.values) {
        cells[{key.dimension, key.year}].push_back(value);
    }
    std::vector<std::vector<std::string>> rows;
    std::map<std::string, svg::Series> chart;
    for (const auto& [key, values] : cells) {
        double mean = 0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double sd = sample_sd(values);
        double se = std::isnan(sd) ? sd : sd / std::sqrt(static_cast<double>(values.size()));
        rows.push_back({key.first, std::to_string(key.second), csv::format_double(mean),
                        std::isnan(se) ? "" : csv::format_double(se),
                        std::to_string(values.size())});
        auto& series = chart[key.first];
        series.label = key.first;
        series.x.push_back(key.second);
        series.y.push_back(mean);
        series.whiskers.push_back(std::isnan(se) ? 0.0 : se);
        series.markers = true;
    }
    csv::write_table(out / "trend.csv", {"group_id", "year", "mean", "se", "n_areas"}, rows);
    manifest.output("trend.csv");

    std::vector<svg::Series> series_list;
    std::size_t color = 0;
    for (auto& [name, series] : chart) {
        series.color = palette()[color++ % palette().size()];
        series_list.push_back(std::move(series));
    }
    svg::ChartOptions chart_opts;
    chart_opts.title = "Scene performance by year";
    chart_opts.x_label = "year";
    chart_opts.y_label = opts.normalize ? "z-score" : "score";
    chart_opts.timestamp_comment = opts.svg_timestamp;
    svg::write_chart(out / "trend.svg", series_list, chart_opts);
    manifest.output("trend.svg");
    manifest.write();
}

struct ChangeOpts : ScoreOpts {
    int from_year = 0;
    int to_year = 0;
};

void run_change(const ChangeOpts& opts) {
    fs::path out = ensure_out(opts.out);
    Manifest manifest("change", out);
    auto table = compute_scores(opts, manifest);
    manifest.param("from", opts.from_year);
    manifest.param("to", opts.to_year);
    auto change = scores::score_change(table, opts.from_year, opts.to_year);
    scores::write_change(out / "change.csv", change);
    manifest.output("change.csv");
    manifest.write();
}

// --- jenks ---------------------------------------------------------------------

struct JenksOpts {
    std::string input;
    std::string column = "change";
    int classes = 5;
    std::string out;
};

void run_jenks(const JenksOpts& opts) {
    fs::path out = ensure_out(opts.out);
    Manifest manifest("jenks", out);
    auto table = csv::read_table(opts.input);
    manifest.input("values", opts.input);
    manifest.param("column", opts.column);
    manifest.param("classes", opts.classes);

    std::size_t col = csv::column_index(table, opts.column);
    std::vector<double> values;
    values.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        values.push_back(csv::parse_double(table.rows[r][col], table.lines[r]));
    }
    auto result = scores::jenks_classify(values, opts.classes);

    auto header = table.header;
    header.push_back("class");
    std::vector<std::vector<std::string>> rows = table.rows;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        rows[r].push_back(std::to_string(result.classes[r]));
    }
    csv::write_table(out / "classes.csv", header, rows);
    manifest.output("classes.csv");

    std::vector<std::vector<std::string>> breaks;
    for (std::size_t c = 0; c < result.upper_bounds.size(); ++c) {
        breaks.push_back({std::to_string(c + 1), csv::format_double(result.upper_bounds[c])});
    }
    csv::write_table(out / "breaks.csv", {"class", "upper_bound"}, breaks);
    manifest.output("breaks.csv");
    manifest.write();
}

// --- specialize ------------------------------------------------------------------

struct SpecializeOpts {
    std::string events;
    std::string taxonomy;
    std::string groups;
    std::string group_by = "city";
    int expiry_years = 0;
    bool multiset = false;
    bool yelp_depth = false;
    bool svg_timestamp = true;
    std::string out;
};

void run_specialize(const SpecializeOpts& opts) {
    fs::path out = ensure_out(opts.out);
    Manifest manifest("specialize", out);
    auto taxonomy = data::parse_taxonomy(opts.taxonomy, opts.yelp_depth);
    manifest.input("taxonomy", opts.taxonomy);
    auto events = data::parse_events(opts.events, taxonomy);
    manifest.input("events", opts.events);

    std::map<std::string, std::string> grouping;
    if (!opts.groups.empty()) {
        auto table = csv::read_table(opts.groups);
        manifest.input("groups", opts.groups);
        std::size_t area_col = csv::column_index(table, "area_id");
        std::size_t group_col = csv::column_index(table, opts.group_by);
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& area = table.rows[r][area_col];
            auto [it, inserted] = grouping.emplace(area, table.rows[r][group_col]);
            if (!inserted && it->second != table.rows[r][group_col]) {
                throw Error(errc::duplicate_key, "area '" + area + "' mapped to two groups",
                            table.lines[r]);
            }
        }
    } else {
        for (const auto& event : events.events) grouping.emplace(event.area_id, "all");
    }
    manifest.param("group_by", opts.groups.empty() ? "" : opts.group_by);
    manifest.param("expiry_years", opts.expiry_years);
    manifest.param("multiset", opts.multiset);
    manifest.param("yelp_depth", opts.yelp_depth);

    specialization::SeriesConfig config;
    config.expiry_years = opts.expiry_years;
    config.multiset = opts.multiset;
    auto series = specialization::specialization_series(events, taxonomy, grouping, config);
    specialization::write_series(out / "series.csv", series);
    manifest.output("series.csv");
    specialization::write_area_scores(out / "area_scores.csv", series);
    manifest.output("area_scores.csv");

    std::map<std::string, svg::Series> chart;
    for (const auto& point : series.points) {
        auto& s = chart[point.group_id];
        s.label = point.group_id;
        s.x.push_back(point.year);
        s.y.push_back(point.mean);
        s.whiskers.push_back(std::isnan(point.se) ? 0.0 : point.se);
        s.markers = true;
    }
    std::vector<svg::Series> series_list;
    std::size_t color = 0;
    for (auto& [name, s] : chart) {
        s.color = palette()[color++ % palette().size()];
        series_list.push_back(std::move(s));
    }
    svg::ChartOptions chart_opts;
    chart_opts.title = "Specialization by year";
    chart_opts.x_label = "year";
    chart_opts.y_label = "mean depth weight";
    chart_opts.timestamp_comment = opts.svg_timestamp;
    svg::write_chart(out / "series.svg", series_list, chart_opts);
    manifest.output("series.svg");
    manifest.write();
}

// --- fe --------------------------------------------------------------------------

struct FeOpts {
    std::string panel;
    std::string response;
    std::vector<std::string> regressors;
    std::string cluster = "entity";
    bool raw = false;
    bool period_effects = false;
    std::string out;
};

void run_fe(const FeOpts& opts) {
    fs::path out = ensure_out(opts.out);
    Manifest manifest("fe", out);
    auto table = csv::read_table(opts.panel);
    manifest.input("panel", opts.panel);
    manifest.param("response", opts.response);
    manifest.param("regressors", opts.regressors);
    manifest.param("cluster", opts.cluster);
    manifest.param("standardize", !opts.raw);
    manifest.param("period_effects", opts.period_effects);

    auto assembled = fe::assemble_panel(table, opts.response, opts.regressors);
    fe::PanelDataset panel = std::move(assembled.data);
    if (!opts.raw) panel = fe::standardize(panel).data;
    fe::FEOptions fit_opts;
    fit_opts.period_effects = opts.period_effects;
    auto result = fe::fit_fe(panel, fit_opts);

    fe::write_result(out / "fe.csv", result);
    manifest.output("fe.csv");
    fe::write_result_meta(out / "fe_meta.json", result, opts.response);
    manifest.output("fe_meta.json");
    std::string text = fe::format_table({opts.response}, {result});
    csv::write_file(out / "fe.txt", text);
    manifest.output("fe.txt");
    std::cout << text;
    if (assembled.dropped_incomplete_rows > 0) {
        std::cout << "(dropped " << assembled.dropped_incomplete_rows
                  << " incomplete rows)\n";
    }
    manifest.write();
}

// --- diffusion ---------------------------------------------------------------------

struct DiffusionOpts {
    std::string openings;
    bool annual_bins = false;
    bool svg_timestamp = true;
    std::string out;
};

void run_diffusion(const DiffusionOpts& opts) {
    fs::path out = ensure_out(opts.out);
    Manifest manifest("diffusion", out);
    auto log = data::parse_openings(opts.openings);
    manifest.input("openings", opts.openings);
    manifest.param("annual_bins", opts.annual_bins);

    auto series = diffusion::adoption_series(log, opts.annual_bins);
    diffusion::write_series(out / "adoption.csv", series);
    manifest.output("adoption.csv");
    auto classified = diffusion::classify_curve(series);
    diffusion::write_fits(out / "fits.csv", classified);
    manifest.output("fits.csv");

    svg::Series observed;
    observed.label = "observed";
    observed.x = series.t;
    observed.y = series.fraction;
    observed.markers = true;
    observed.color = "#333333";
    double t_max = series.t.back();
    svg::Series logistic, saturating;
    logistic.label = "logistic fit";
    logistic.color = palette()[0];
    saturating.label = "saturating fit";
    saturating.color = palette()[1];
    for (int i = 0; i <= 200; ++i) {
        double t = t_max * i / 200.0;
        logistic.x.push_back(t);
        logistic.y.push_back(
            1.0 / (1.0 + std::exp(-classified.logistic.k * (t - classified.logistic.t0))));
        saturating.x.push_back(t);
        saturating.y.push_back(1.0 - std::exp(-classified.saturating.lambda * t));
    }
    svg::ChartOptions chart_opts;
    chart_opts.title = std::string("Adoption curve (") +
                       diffusion::curve_class_name(classified.curve) + ")";
    chart_opts.x_label = "years since first opening";
    chart_opts.y_label = "cumulative fraction";
    chart_opts.timestamp_comment = opts.svg_timestamp;
    svg::write_chart(out / "adoption.svg", {observed, logistic, saturating}, chart_opts);
    manifest.output("adoption.svg");
    manifest.write();
}

struct CohortOpts {
    std::string openings;
    std::string covariates;
    std::vector<std::size_t> sizes;
    std::vector<std::string> names;
    std::string out;
};

void run_cohorts(const CohortOpts& opts) {
    fs::path out = ensure_out(opts.out);
    Manifest manifest("cohorts", out);
    std::optional<fs::path> covariates;
    if (!opts.covariates.empty()) covariates = fs::path(opts.covariates);
    auto log = data::parse_openings(opts.openings, covariates);
    manifest.input("openings", opts.openings);
    if (covariates) manifest.input("covariates", *covariates);

    std::vector<std::string> names = opts.names;
    if (names.empty()) {
        std::set<std::string> seen;
        for (const auto& record : log.records) {
            for (const auto& [name, value] : record.covariates) seen.insert(name);
        }
        names.assign(seen.begin(), seen.end());
    }
    manifest.param("sizes", opts.sizes);
    manifest.param("covariates", names);

    auto stats = diffusion::cohort_summary(log, opts.sizes, names);
    diffusion::write_cohorts(out / "cohorts.csv", stats);
    manifest.output("cohorts.csv");
    manifest.write();
}

// --- defense --------------------------------------------------------------------

struct DefenseOpts {
    std::string events;
    std::string taxonomy;
    std::string area;
    std::string period = "quarter";
    int regular_min_events = 3;
    int regular_window = 8;
    double theta = 0.5;
    int top_k = 5;
    int baseline_periods = 4;
    int min_baseline_events = 50;
    bool share = false;
    bool normalize = false;
    int max_lag = 4;
    int permutations = 2000;
    std::uint64_t seed = 1;
    bool svg_timestamp = true;
    std::string out;
};

void run_defense(const DefenseOpts& opts) {
    fs::path out = ensure_out(opts.out);
    Manifest manifest("defense", out);
    manifest.seed(opts.seed);
    auto taxonomy = data::parse_taxonomy(opts.taxonomy);
    manifest.input("taxonomy", opts.taxonomy);
    auto events = data::parse_events(opts.events, taxonomy);
    manifest.input("events", opts.events);

    defense::Config config;
    config.period_length = period_from_name(opts.period);
    config.regular_min_events = opts.regular_min_events;
    config.regular_window = opts.regular_window;
    config.tension_threshold = opts.theta;
    config.top_k = opts.top_k;
    config.baseline_periods = opts.baseline_periods;
    config.min_baseline_events = opts.min_baseline_events;
    config.tension_share = opts.share;
    config.normalize_by_activity = opts.normalize;

    manifest.param("area", opts.area);
    manifest.param("period", opts.period);
    manifest.param("regular_min_events", opts.regular_min_events);
    manifest.param("regular_window", opts.regular_window);
    manifest.param("theta", opts.theta);
    manifest.param("top_k", opts.top_k);
    manifest.param("baseline_periods", opts.baseline_periods);
    manifest.param("min_baseline_events", opts.min_baseline_events);
    manifest.param("tension_share", opts.share);
    manifest.param("normalize_by_activity", opts.normalize);
    manifest.param("max_lag", opts.max_lag);
    manifest.param("permutations", opts.permutations);

    auto result = defense::build_series(events, opts.area, config);
    defense::write_series(out / "defense.csv", result.series, config.period_length);
    manifest.output("defense.csv");

    auto structural = defense::test_structural_response(result.series, opts.max_lag,
                                                        opts.permutations, opts.seed);

    ordered_json report;
    report["area"] = opts.area;
    report["best_lag"] = structural.best_lag;
    report["corr"] = structural.correlation;
    report["p_structural"] = structural.p_value;
    // The slope test needs variation in T; a flat series leaves it undefined.
    try {
        auto slope = defense::test_significant_response(result.series);
        report["slope"] = slope.slope;
        report["p_significant"] = slope.p_value;
    } catch (const Error& e) {
        if (e.code() != errc::zero_variance_tension && e.code() != errc::series_too_short) {
            throw;
        }
        report["slope"] = nullptr;
        report["p_significant"] = nullptr;
    }
    ordered_json echo;
    echo["period"] = opts.period;
    echo["regular_min_events"] = opts.regular_min_events;
    echo["regular_window"] = opts.regular_window;
    echo["theta"] = opts.theta;
    echo["top_k"] = opts.top_k;
    echo["baseline_periods"] = opts.baseline_periods;
    echo["min_baseline_events"] = opts.min_baseline_events;
    echo["tension_share"] = opts.share;
    echo["normalize_by_activity"] = opts.normalize;
    echo["max_lag"] = opts.max_lag;
    echo["permutations"] = opts.permutations;
    echo["seed"] = opts.seed;
    report["config"] = std::move(echo);
    report["top_categories"] = result.profile.top_categories;
    report["n_baseline_events"] = result.profile.n_baseline_events;
    report["unknown_profile_events"] = result.series.unknown_profile_events;
    write_json(out / "defense.json", report);
    manifest.output("defense.json");

    svg::Series tension, structure;
    tension.label = "T (tension)";
    tension.color = palette()[1];
    structure.label = "S (structure)";
    structure.color = palette()[0];
    for (std::size_t i = 0; i < result.series.tension.size(); ++i) {
        tension.x.push_back(static_cast<double>(i));
        tension.y.push_back(result.series.tension[i]);
        structure.x.push_back(static_cast<double>(i));
        structure.y.push_back(result.series.structure[i]);
    }
    svg::ChartOptions chart_opts;
    chart_opts.title = "Tension and structural response";
    chart_opts.x_label = "periods since series start";
    chart_opts.y_label = opts.normalize ? "share of area events" : "events";
    chart_opts.timestamp_comment = opts.svg_timestamp;
    svg::write_chart(out / "defense.svg", {tension, structure}, chart_opts);
    manifest.output("defense.svg");
    manifest.write();
}

// --- simulate -------------------------------------------------------------------

struct SimulateOpts {
    std::string model;
    std::uint64_t seed = 1;
    std::string out;
    // development / differentiation
    int entities = 0;  // 0 = model default
    int periods = 0;
    double noise_sd = -1.0;  // <0 = model default
    bool placebo = false;
    int placebos = -1;
    double gain = std::numeric_limits<double>::quiet_NaN();
    // diffusion
    std::string shape = "S";
    int adopters = 1000;
    double k = 1.0;
    double t0 = 10.0;
    int waves = 6;
    double wave_decay = 0.65;
    // defense
    int regulars = 30;
    std::vector<int> burst_periods;
    int burst_users = 40;
    int burst_events = 3;
};

void run_simulate(const SimulateOpts& opts) {
    fs::path out = ensure_out(opts.out);
    Manifest manifest("simulate", out);
    manifest.seed(opts.seed);
    manifest.param("model", opts.model);

    if (opts.model == "development") {
        sim::DevelopmentConfig config;
        config.seed = opts.seed;
        if (opts.entities > 0) config.n_entities = opts.entities;
        if (opts.periods > 0) config.n_periods = opts.periods;
        if (opts.noise_sd >= 0) config.noise_sd = opts.noise_sd;
        config.include_placebo = opts.placebo;
        manifest.param("entities", config.n_entities);
        manifest.param("periods", config.n_periods);
        manifest.param("noise_sd", config.noise_sd);
        manifest.param("placebo", config.include_placebo);
        auto panel = sim::gen_development_panel(config);
        sim::write_development_panel(out / "panel.csv", panel);
        manifest.output("panel.csv");
        auto truth = panel.truth();
        truth["seed"] = opts.seed;
        write_json(out / "truth.json", truth);
        manifest.output("truth.json");
    } else if (opts.model == "differentiation") {
        sim::DifferentiationConfig config;
        config.seed = opts.seed;
        if (opts.entities > 0) config.n_entities = opts.entities;
        if (opts.periods > 0) config.n_periods = opts.periods;
        if (opts.noise_sd >= 0) config.noise_sd = opts.noise_sd;
        if (opts.placebos >= 0) config.n_placebos = opts.placebos;
        if (!std::isnan(opts.gain)) config.density_gain = opts.gain;
        manifest.param("entities", config.n_entities);
        manifest.param("periods", config.n_periods);
        manifest.param("noise_sd", config.noise_sd);
        manifest.param("placebos", config.n_placebos);
        manifest.param("gain", config.density_gain);
        auto panel = sim::gen_differentiation_panel(config);
        sim::write_differentiation_panel(out / "panel.csv", panel);
        manifest.output("panel.csv");
        auto truth = panel.truth();
        truth["seed"] = opts.seed;
        write_json(out / "truth.json", truth);
        manifest.output("truth.json");
    } else if (opts.model == "diffusion") {
        sim::DiffusionConfig config;
        config.seed = opts.seed;
        config.shape = opts.shape == "S"   ? sim::Shape::S
                       : opts.shape == "C" ? sim::Shape::C
                                           : sim::Shape::Hybrid;
        config.n_adopters = opts.adopters;
        config.k = opts.k;
        config.t0 = opts.t0;
        config.n_waves = opts.waves;
        config.wave_decay = opts.wave_decay;
        manifest.param("shape", opts.shape);
        manifest.param("adopters", config.n_adopters);
        manifest.param("k", config.k);
        manifest.param("t0", config.t0);
        manifest.param("waves", config.n_waves);
        manifest.param("wave_decay", config.wave_decay);
        auto generated = sim::gen_diffusion_series(config);
        data::write_openings(out / "openings.csv", generated.log);
        manifest.output("openings.csv");
        data::write_covariates(out / "covariates.csv", generated.log);
        manifest.output("covariates.csv");
        auto truth = generated.truth(config);
        truth["seed"] = opts.seed;
        write_json(out / "truth.json", truth);
        manifest.output("truth.json");
    } else {
        sim::DefenseConfig config;
        config.seed = opts.seed;
        if (opts.periods > 0) config.n_periods = opts.periods;
        config.n_regulars = opts.regulars;
        if (!opts.burst_periods.empty()) config.burst_periods = opts.burst_periods;
        config.burst_users = opts.burst_users;
        config.burst_events_per_user = opts.burst_events;
        if (!std::isnan(opts.gain)) config.gain = opts.gain;
        if (opts.noise_sd >= 0) config.noise_sd = opts.noise_sd;
        manifest.param("periods", config.n_periods);
        manifest.param("regulars", config.n_regulars);
        manifest.param("burst_periods", config.burst_periods);
        manifest.param("burst_users", config.burst_users);
        manifest.param("burst_events", config.burst_events_per_user);
        manifest.param("gain", config.gain);
        manifest.param("noise_sd", config.noise_sd);
        auto generated = sim::gen_defense_events(config);
        data::write_events(out / "events.csv", generated.log);
        manifest.output("events.csv");
        data::write_taxonomy(out / "taxonomy.csv", generated.taxonomy);
        manifest.output("taxonomy.csv");
        auto truth = generated.truth(config);
        truth["seed"] = opts.seed;
        write_json(out / "truth.json", truth);
        manifest.output("truth.json");
    }
    manifest.write();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scene-change analytics toolkit"};
    app.set_version_flag("--version", std::string("scenekit ") + kVersion);
    app.require_subcommand(1);
    int exit_code = 0;

    ScoreOpts score_opts;
    auto* score = app.add_subcommand("score", "Amenity performance scores per area-year");
    score->add_option("--amenities", score_opts.amenities, "amenity counts CSV")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--weights", score_opts.weights, "dimension weights CSV")
        ->check(CLI::ExistingFile);
    score->add_flag("--normalize", score_opts.normalize, "z-score per (year, dimension)");
    score->add_option("--out", score_opts.out, "output directory")->required();
    score->callback([&] { run_score(score_opts); });

    TrendOpts trend_opts;
    auto* trend = app.add_subcommand("trend", "Mean score per dimension and year");
    trend->add_option("--amenities", trend_opts.amenities, "amenity counts CSV")
        ->required()
        ->check(CLI::ExistingFile);
    trend->add_option("--weights", trend_opts.weights, "dimension weights CSV")
        ->check(CLI::ExistingFile);
    trend->add_flag("--normalize", trend_opts.normalize, "z-score per (year, dimension)");
    trend->add_flag("!--no-svg-timestamp", trend_opts.svg_timestamp,
                    "omit the generation comment from the SVG");
    trend->add_option("--out", trend_opts.out, "output directory")->required();
    trend->callback([&] { run_trend(trend_opts); });

    ChangeOpts change_opts;
    auto* change = app.add_subcommand("change", "Score change between two years");
    change->add_option("--amenities", change_opts.amenities, "amenity counts CSV")
        ->required()
        ->check(CLI::ExistingFile);
    change->add_option("--weights", change_opts.weights, "dimension weights CSV")
        ->check(CLI::ExistingFile);
    change->add_flag("--normalize", change_opts.normalize, "z-score per (year, dimension)");
    change->add_option("--from", change_opts.from_year, "base year")->required();
    change->add_option("--to", change_opts.to_year, "comparison year")->required();
    change->add_option("--out", change_opts.out, "output directory")->required();
    change->callback([&] { run_change(change_opts); });

    JenksOpts jenks_opts;
    auto* jenks = app.add_subcommand("jenks", "Natural-breaks classification of a CSV column");
    jenks->add_option("--input", jenks_opts.input, "input CSV")
        ->required()
        ->check(CLI::ExistingFile);
    jenks->add_option("--column", jenks_opts.column, "numeric column to classify");
    jenks->add_option("--classes", jenks_opts.classes, "number of classes")
        ->check(CLI::PositiveNumber);
    jenks->add_option("--out", jenks_opts.out, "output directory")->required();
    jenks->callback([&] { run_jenks(jenks_opts); });

    SpecializeOpts spec_opts;
    auto* specialize = app.add_subcommand("specialize", "Specialization index series from events");
    specialize->add_option("--events", spec_opts.events, "review events CSV")
        ->required()
        ->check(CLI::ExistingFile);
    specialize->add_option("--taxonomy", spec_opts.taxonomy, "category taxonomy CSV")
        ->required()
        ->check(CLI::ExistingFile);
    specialize->add_option("--groups", spec_opts.groups,
                           "area grouping CSV (area_id plus grouping columns)")
        ->check(CLI::ExistingFile);
    specialize->add_option("--group-by", spec_opts.group_by, "grouping column in --groups");
    specialize->add_option("--expiry-years", spec_opts.expiry_years,
                           "category presence window; 0 = never expires");
    specialize->add_flag("--multiset", spec_opts.multiset, "weight categories by occurrence");
    specialize->add_flag("--yelp-depth", spec_opts.yelp_depth, "enforce taxonomy depth <= 4");
    specialize->add_flag("!--no-svg-timestamp", spec_opts.svg_timestamp,
                         "omit the generation comment from the SVG");
    specialize->add_option("--out", spec_opts.out, "output directory")->required();
    specialize->callback([&] { run_specialize(spec_opts); });

    FeOpts fe_opts;
    auto* fe_cmd = app.add_subcommand("fe", "Fixed-effects panel regression");
    fe_cmd->add_option("--panel", fe_opts.panel, "wide panel CSV (entity, period, variables)")
        ->required()
        ->check(CLI::ExistingFile);
    fe_cmd->add_option("--response", fe_opts.response, "response column")->required();
    fe_cmd->add_option("--regressors", fe_opts.regressors, "regressor columns")
        ->required()
        ->delimiter(',');
    fe_cmd->add_option("--cluster", fe_opts.cluster, "cluster level (entity only)")
        ->check(CLI::IsMember({"entity"}));
    fe_cmd->add_flag("--raw", fe_opts.raw, "skip variable standardization");
    fe_cmd->add_flag("--period-effects", fe_opts.period_effects, "add period indicators");
    fe_cmd->add_option("--out", fe_opts.out, "output directory")->required();
    fe_cmd->callback([&] { run_fe(fe_opts); });

    DiffusionOpts diff_opts;
    auto* diff = app.add_subcommand("diffusion", "Adoption curve fitting and classification");
    diff->add_option("--openings", diff_opts.openings, "dated openings CSV")
        ->required()
        ->check(CLI::ExistingFile);
    diff->add_flag("--annual-bins", diff_opts.annual_bins, "bin open dates to whole years");
    diff->add_flag("!--no-svg-timestamp", diff_opts.svg_timestamp,
                   "omit the generation comment from the SVG");
    diff->add_option("--out", diff_opts.out, "output directory")->required();
    diff->callback([&] { run_diffusion(diff_opts); });

    CohortOpts cohort_opts;
    auto* cohorts = app.add_subcommand("cohorts", "Covariate summaries by adoption cohort");
    cohorts->add_option("--openings", cohort_opts.openings, "dated openings CSV")
        ->required()
        ->check(CLI::ExistingFile);
    cohorts->add_option("--covariates", cohort_opts.covariates, "region covariates CSV")
        ->check(CLI::ExistingFile);
    cohorts->add_option("--sizes", cohort_opts.sizes, "cohort sizes in adoption order")
        ->required()
        ->delimiter(',');
    cohorts->add_option("--names", cohort_opts.names,
                        "covariates to summarize (default: all present)")
        ->delimiter(',');
    cohorts->add_option("--out", cohort_opts.out, "output directory")->required();
    cohorts->callback([&] { run_cohorts(cohort_opts); });

    DefenseOpts defense_opts;
    auto* defense_cmd = app.add_subcommand("defense", "Tension and structural-response series");
    defense_cmd->add_option("--events", defense_opts.events, "review events CSV")
        ->required()
        ->check(CLI::ExistingFile);
    defense_cmd->add_option("--taxonomy", defense_opts.taxonomy, "category taxonomy CSV")
        ->required()
        ->check(CLI::ExistingFile);
    defense_cmd->add_option("--area", defense_opts.area, "area to analyze")->required();
    defense_cmd->add_option("--period", defense_opts.period, "period length")
        ->check(CLI::IsMember({"month", "quarter", "year"}));
    defense_cmd->add_option("--regular-min-events", defense_opts.regular_min_events,
                            "events in the trailing window to count as regular");
    defense_cmd->add_option("--window", defense_opts.regular_window,
                            "trailing window length in periods");
    defense_cmd->add_option("--theta", defense_opts.theta, "taste distance threshold");
    defense_cmd->add_option("--top-k", defense_opts.top_k, "area profile size");
    defense_cmd->add_option("--baseline-periods", defense_opts.baseline_periods,
                            "periods used for the area profile");
    defense_cmd->add_option("--min-baseline-events", defense_opts.min_baseline_events,
                            "regular events required in the baseline");
    defense_cmd->add_flag("--share", defense_opts.share,
                          "tension as a share of newcomer events");
    defense_cmd->add_flag("--normalize", defense_opts.normalize,
                          "divide T and S by total area events per period");
    defense_cmd->add_option("--max-lag", defense_opts.max_lag, "largest response lag tested");
    defense_cmd->add_option("--permutations", defense_opts.permutations,
                            "circular-shift surrogates");
    defense_cmd->add_option("--seed", defense_opts.seed, "permutation seed");
    defense_cmd->add_flag("!--no-svg-timestamp", defense_opts.svg_timestamp,
                          "omit the generation comment from the SVG");
    defense_cmd->add_option("--out", defense_opts.out, "output directory")->required();
    defense_cmd->callback([&] { run_defense(defense_opts); });

    SimulateOpts sim_opts;
    auto* simulate = app.add_subcommand("simulate", "Seeded synthetic data with known truth");
    simulate->add_option("--model", sim_opts.model, "generator")
        ->required()
        ->check(CLI::IsMember({"development", "differentiation", "diffusion", "defense"}));
    simulate->add_option("--seed", sim_opts.seed, "generator seed");
    simulate->add_option("--entities", sim_opts.entities, "panel entities");
    simulate->add_option("--periods", sim_opts.periods, "panel or series periods");
    simulate->add_option("--noise-sd", sim_opts.noise_sd, "observation noise sd");
    simulate->add_flag("--placebo", sim_opts.placebo, "development: add a zero-effect regressor");
    simulate->add_option("--placebos", sim_opts.placebos,
                         "differentiation: zero-effect covariates");
    simulate->add_option("--gain", sim_opts.gain,
                         "differentiation density effect / defense response gain");
    simulate->add_option("--shape", sim_opts.shape, "diffusion curve shape")
        ->check(CLI::IsMember({"S", "C", "Hybrid"}));
    simulate->add_option("--adopters", sim_opts.adopters, "diffusion adopter count");
    simulate->add_option("--k", sim_opts.k, "diffusion logistic rate");
    simulate->add_option("--t0", sim_opts.t0, "diffusion logistic midpoint, years");
    simulate->add_option("--waves", sim_opts.waves, "diffusion wave count");
    simulate->add_option("--wave-decay", sim_opts.wave_decay, "diffusion wave size decay");
    simulate->add_option("--regulars", sim_opts.regulars, "defense regular population");
    simulate->add_option("--burst-period", sim_opts.burst_periods, "defense burst period(s)")
        ->delimiter(',');
    simulate->add_option("--burst-users", sim_opts.burst_users, "defense newcomers per burst");
    simulate->add_option("--burst-events", sim_opts.burst_events,
                         "defense events per burst newcomer");
    simulate->add_option("--out", sim_opts.out, "output directory")->required();
    simulate->callback([&] { run_simulate(sim_opts); });

    auto* selftest = app.add_subcommand("selftest", "Run the embedded sanity checks");
    selftest->callback([&] {
        auto results = selfcheck::run_all();
        if (!selfcheck::report(results, std::cout)) exit_code = 2;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
