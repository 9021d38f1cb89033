#include "scenekit/sim.hpp"

#include <algorithm>
#include <cmath>

#include "scenekit/csv.hpp"
#include "scenekit/errors.hpp"
#include "scenekit/parallel.hpp"
#include "scenekit/rng.hpp"
#include "scenekit/timeutil.hpp"

namespace scenekit::sim {

namespace {

std::string padded(long long value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

const std::vector<std::string>& urbane_dimensions() {
    static const std::vector<std::string> names = {"self_expression", "glamour", "rationalism"};
    return names;
}

const std::vector<std::string>& communitarian_dimensions() {
    static const std::vector<std::string> names = {"tradition", "neighborliness",
                                                   "egalitarianism"};
    return names;
}

}  // namespace

// --- development -------------------------------------------------------------

fe::PanelDataset DevelopmentPanel::dataset(const std::string& dimension) const {
    auto it = std::find(dimension_names.begin(), dimension_names.end(), dimension);
    if (it == dimension_names.end()) {
        throw Error(errc::bad_config, "no generated dimension named '" + dimension + "'");
    }
    std::size_t d = static_cast<std::size_t>(it - dimension_names.begin());
    fe::PanelDataset out;
    out.response_name = dimension;
    out.regressor_names = regressor_names;
    out.rows.reserve(rows.size());
    for (const auto& row : rows) {
        out.rows.push_back({row.entity_id, row.period, row.scores[d], row.regressors});
    }
    return out;
}

nlohmann::ordered_json DevelopmentPanel::truth() const {
    nlohmann::ordered_json truth;
    truth["model"] = "development";
    truth["regressors"] = regressor_names;
    nlohmann::ordered_json betas;
    for (const auto& dim : dimension_names) betas[dim] = true_beta.at(dim);
    truth["true_beta"] = betas;
    return truth;
}

DevelopmentPanel gen_development_panel(const DevelopmentConfig& config) {
    if (config.n_entities < 2 || config.n_periods < 2) {
        throw Error(errc::bad_config, "development panel needs >= 2 entities and >= 2 periods");
    }
    if (config.entity_effect_sd < 0 || config.noise_sd < 0 || config.walk_step_sd < 0) {
        throw Error(errc::bad_config, "standard deviations must be >= 0");
    }

    DevelopmentPanel panel;
    panel.regressor_names = {"pct_ba", "median_income"};
    if (config.include_placebo) panel.regressor_names.push_back("placebo");
    panel.dimension_names = urbane_dimensions();
    for (const auto& name : communitarian_dimensions()) panel.dimension_names.push_back(name);
    for (std::size_t d = 0; d < panel.dimension_names.size(); ++d) {
        double beta = d < 3 ? config.beta_urbane : config.beta_communitarian;
        std::vector<double> betas(panel.regressor_names.size(), beta);
        if (config.include_placebo) betas.back() = 0.0;
        panel.true_beta.emplace(panel.dimension_names[d], betas);
    }

    std::size_t n_regressors = panel.regressor_names.size();
    std::size_t n_periods = static_cast<std::size_t>(config.n_periods);
    panel.rows.resize(static_cast<std::size_t>(config.n_entities) * n_periods);

    parallel::parallel_for(static_cast<std::size_t>(config.n_entities), [&](std::size_t e) {
        std::string entity_id = "E" + padded(static_cast<long long>(e), 6);
        rng::Generator gen = rng::Generator::substream(config.seed, "development|" + entity_id);

        // Regressors follow independent random walks.
        std::vector<std::vector<double>> x(n_regressors, std::vector<double>(n_periods));
        for (std::size_t r = 0; r < n_regressors; ++r) {
            x[r][0] = gen.normal(0.0, 1.0);
            for (std::size_t t = 1; t < n_periods; ++t) {
                x[r][t] = x[r][t - 1] + gen.normal(0.0, config.walk_step_sd);
            }
        }
        std::vector<double> alpha(panel.dimension_names.size());
        for (auto& a : alpha) a = gen.normal(0.0, config.entity_effect_sd);

        for (std::size_t t = 0; t < n_periods; ++t) {
            auto& row = panel.rows[e * n_periods + t];
            row.entity_id = entity_id;
            row.period = static_cast<long long>(t + 1);
            row.regressors.resize(n_regressors);
            for (std::size_t r = 0; r < n_regressors; ++r) row.regressors[r] = x[r][t];
            row.scores.resize(panel.dimension_names.size());
            for (std::size_t d = 0; d < panel.dimension_names.size(); ++d) {
                const auto& beta = panel.true_beta.at(panel.dimension_names[d]);
                double signal = 0;
                for (std::size_t r = 0; r < n_regressors; ++r) signal += beta[r] * x[r][t];
                row.scores[d] = signal + alpha[d] + gen.normal(0.0, config.noise_sd);
            }
        }
    });
    return panel;
}

void write_development_panel(const std::filesystem::path& path, const DevelopmentPanel& panel) {
    std::vector<std::string> header = {"entity", "period"};
    header.insert(header.end(), panel.regressor_names.begin(), panel.regressor_names.end());
    header.insert(header.end(), panel.dimension_names.begin(), panel.dimension_names.end());
    std::vector<std::vector<std::string>> rows;
    rows.reserve(panel.rows.size());
    for (const auto& row : panel.rows) {
        std::vector<std::string> cells = {row.entity_id, std::to_string(row.period)};
        for (double v : row.regressors) cells.push_back(csv::format_double(v));
        for (double v : row.scores) cells.push_back(csv::format_double(v));
        rows.push_back(std::move(cells));
    }
    csv::write_table(path, header, rows);
}

// --- differentiation ----------------------------------------------------------

nlohmann::ordered_json DifferentiationPanel::truth() const {
    nlohmann::ordered_json truth;
    truth["model"] = "differentiation";
    truth["regressors"] = data.regressor_names;
    truth["true_beta"] = true_beta;
    return truth;
}

DifferentiationPanel gen_differentiation_panel(const DifferentiationConfig& config) {
    if (config.n_entities < 2 || config.n_periods < 2) {
        throw Error(errc::bad_config,
                    "differentiation panel needs >= 2 entities and >= 2 periods");
    }
    if (config.entity_effect_sd < 0 || config.noise_sd < 0 || config.walk_step_sd < 0) {
        throw Error(errc::bad_config, "standard deviations must be >= 0");
    }
    static const std::vector<std::string> placebo_names = {"pct_ba", "population", "pct_white",
                                                           "median_rent"};
    if (config.n_placebos < 0 ||
        config.n_placebos > static_cast<int>(placebo_names.size())) {
        throw Error(errc::bad_config, "n_placebos must be between 0 and " +
                                          std::to_string(placebo_names.size()));
    }

    DifferentiationPanel panel;
    panel.data.response_name = "specialization";
    panel.data.regressor_names = {"business_density"};
    for (int i = 0; i < config.n_placebos; ++i) {
        panel.data.regressor_names.push_back(placebo_names[static_cast<std::size_t>(i)]);
    }
    panel.true_beta.assign(panel.data.regressor_names.size(), 0.0);
    panel.true_beta[0] = config.density_gain;

    std::size_t n_regressors = panel.data.regressor_names.size();
    std::size_t n_periods = static_cast<std::size_t>(config.n_periods);
    panel.data.rows.resize(static_cast<std::size_t>(config.n_entities) * n_periods);

    parallel::parallel_for(static_cast<std::size_t>(config.n_entities), [&](std::size_t e) {
        std::string entity_id = "E" + padded(static_cast<long long>(e), 6);
        rng::Generator gen =
            rng::Generator::substream(config.seed, "differentiation|" + entity_id);
        std::vector<std::vector<double>> x(n_regressors, std::vector<double>(n_periods));
        for (std::size_t r = 0; r < n_regressors; ++r) {
            x[r][0] = gen.normal(0.0, 1.0);
            for (std::size_t t = 1; t < n_periods; ++t) {
                x[r][t] = x[r][t - 1] + gen.normal(0.0, config.walk_step_sd);
            }
        }
        double alpha = gen.normal(0.0, config.entity_effect_sd);
        for (std::size_t t = 0; t < n_periods; ++t) {
            auto& row = panel.data.rows[e * n_periods + t];
            row.entity_id = entity_id;
            row.period = static_cast<long long>(t + 1);
            row.regressors.resize(n_regressors);
            for (std::size_t r = 0; r < n_regressors; ++r) row.regressors[r] = x[r][t];
            row.response = config.density_gain * x[0][t] + alpha +
                           gen.normal(0.0, config.noise_sd);
        }
    });
    return panel;
}

void write_differentiation_panel(const std::filesystem::path& path,
                                 const DifferentiationPanel& panel) {
    std::vector<std::string> header = {"entity", "period"};
    header.insert(header.end(), panel.data.regressor_names.begin(),
                  panel.data.regressor_names.end());
    header.push_back(panel.data.response_name);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(panel.data.rows.size());
    for (const auto& row : panel.data.rows) {
        std::vector<std::string> cells = {row.entity_id, std::to_string(row.period)};
        for (double v : row.regressors) cells.push_back(csv::format_double(v));
        cells.push_back(csv::format_double(row.response));
        rows.push_back(std::move(cells));
    }
    csv::write_table(path, header, rows);
}

// --- diffusion ----------------------------------------------------------------

nlohmann::ordered_json DiffusionData::truth(const DiffusionConfig& config) const {
    nlohmann::ordered_json truth;
    truth["model"] = "diffusion";
    switch (shape) {
        case Shape::S: truth["shape"] = "S"; break;
        case Shape::C: truth["shape"] = "C"; break;
        case Shape::Hybrid: truth["shape"] = "Hybrid"; break;
    }
    truth["n_adopters"] = log.records.size();
    if (shape == Shape::S) {
        truth["k"] = config.k;
        truth["t0"] = config.t0;
        truth["first_offset_years"] = first_offset_years;
        truth["t0_from_first"] = t0_from_first;
    } else if (shape == Shape::C) {
        truth["n_waves"] = config.n_waves;
        truth["wave_decay"] = config.wave_decay;
    } else {
        truth["hybrid_years"] = config.hybrid_years;
        truth["hybrid_growth"] = config.hybrid_growth;
        truth["hybrid_wave_fraction"] = config.hybrid_wave_fraction;
    }
    truth["covariate"] = config.covariate_name;
    truth["covariate_base"] = config.covariate_base;
    truth["covariate_slope"] = config.covariate_slope;
    return truth;
}

DiffusionData gen_diffusion_series(const DiffusionConfig& config) {
    if (config.n_adopters < 1) throw Error(errc::bad_config, "need >= 1 adopter");
    if (config.k <= 0 || config.wave_decay <= 0 || config.hybrid_growth <= 0) {
        throw Error(errc::bad_config, "rates must be > 0");
    }
    if (config.n_waves < 1 || config.adopters_per_region < 1) {
        throw Error(errc::bad_config, "n_waves and adopters_per_region must be >= 1");
    }

    const std::int64_t origin = timeutil::days_from_civil(2000, 1, 1);
    std::size_t n = static_cast<std::size_t>(config.n_adopters);

    // Wave schedule shared by C and Hybrid: block i (1-based) carries the
    // increment of 1 - exp(-decay * t) between years i-1 and i, so the block
    // sizes decay geometrically; the final block absorbs the tail.
    auto wave_weights = [&]() {
        std::vector<double> w(static_cast<std::size_t>(config.n_waves));
        double total = 1.0 - std::exp(-config.wave_decay * config.n_waves);
        for (int i = 1; i <= config.n_waves; ++i) {
            w[static_cast<std::size_t>(i - 1)] =
                (std::exp(-config.wave_decay * (i - 1)) - std::exp(-config.wave_decay * i)) /
                total;
        }
        return w;
    };

    std::vector<double> years(n);
    switch (config.shape) {
        case Shape::S: {
            parallel::parallel_for(n, [&](std::size_t i) {
                rng::Generator gen = rng::Generator::substream(
                    config.seed, "adoption|" + std::to_string(i));
                double u = 0;
                do {
                    u = gen.uniform();
                } while (u <= 0.0 || u >= 1.0);
                years[i] = config.t0 + std::log(u / (1.0 - u)) / config.k;
            });
            break;
        }
        case Shape::C: {
            std::vector<double> weights = wave_weights();
            // A deterministic pioneer block anchors t = 0 with negligible
            // mass; waves land at whole years >= 1.
            std::size_t pioneers = std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::llround(config.pioneer_fraction * static_cast<double>(n))));
            if (pioneers >= n) pioneers = 1;
            parallel::parallel_for(n, [&](std::size_t i) {
                rng::Generator gen = rng::Generator::substream(
                    config.seed, "adoption|" + std::to_string(i));
                double jitter = config.wave_jitter_days > 0
                                    ? gen.normal(0.0, config.wave_jitter_days) / 365.25
                                    : 0.0;
                if (i < pioneers) {
                    years[i] = 0.0;
                    return;
                }
                double u = gen.uniform();
                double cum = 0;
                std::size_t block = weights.size() - 1;
                for (std::size_t w = 0; w < weights.size(); ++w) {
                    cum += weights[w];
                    if (u < cum) {
                        block = w;
                        break;
                    }
                }
                years[i] = static_cast<double>(block + 1) + jitter;
            });
            break;
        }
        case Shape::Hybrid: {
            std::vector<double> weights = wave_weights();
            double denom = std::exp(config.hybrid_growth * config.hybrid_years) - 1.0;
            parallel::parallel_for(n, [&](std::size_t i) {
                rng::Generator gen = rng::Generator::substream(
                    config.seed, "adoption|" + std::to_string(i));
                if (gen.uniform() >= config.hybrid_wave_fraction) {
                    double v = gen.uniform();
                    years[i] = std::log(1.0 + v * denom) / config.hybrid_growth;
                } else {
                    double u = gen.uniform();
                    double cum = 0;
                    std::size_t block = weights.size() - 1;
                    for (std::size_t w = 0; w < weights.size(); ++w) {
                        cum += weights[w];
                        if (u < cum) {
                            block = w;
                            break;
                        }
                    }
                    years[i] = config.hybrid_years + static_cast<double>(block + 1);
                }
            });
            break;
        }
    }

    std::vector<data::OpeningRecord> records(n);
    for (std::size_t i = 0; i < n; ++i) {
        records[i].location_id = "L" + padded(static_cast<long long>(i), 6);
        records[i].open_date = origin + std::llround(years[i] * 365.25);
    }
    // Regions follow adoption order so region covariates can encode the
    // hierarchy-of-destinations pattern.
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.open_date, a.location_id) < std::tie(b.open_date, b.location_id);
    });
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t region = i / static_cast<std::size_t>(config.adopters_per_region);
        records[i].region_id = "R" + padded(static_cast<long long>(region), 4);
        records[i].covariates[config.covariate_name] =
            config.covariate_base + config.covariate_slope * static_cast<double>(region);
    }

    DiffusionData out;
    out.shape = config.shape;
    out.log = data::make_opening_log(std::move(records));
    std::int64_t first_day = out.log.records.front().open_date;
    out.first_offset_years = static_cast<double>(first_day - origin) / 365.25;
    out.t0_from_first = config.t0 - out.first_offset_years;
    return out;
}

// --- defense ------------------------------------------------------------------

namespace {

const std::vector<std::string>& defense_top_categories() {
    static const std::vector<std::string> cats = {"cafes", "french", "wine_bars", "jazz_blues",
                                                  "breweries"};
    return cats;
}

const std::vector<std::string>& defense_distant_categories() {
    static const std::vector<std::string> cats = {"fashion", "shoe_stores", "nail_salons",
                                                  "cosmetics", "dept_stores"};
    return cats;
}

data::Taxonomy defense_taxonomy() {
    return data::make_taxonomy(
        {
            {"restaurants", ""},
            {"nightlife", ""},
            {"shopping", ""},
            {"beautysvc", ""},
            {"cafes", "restaurants"},
            {"french", "restaurants"},
            {"wine_bars", "nightlife"},
            {"jazz_blues", "nightlife"},
            {"breweries", "nightlife"},
            {"fashion", "shopping"},
            {"shoe_stores", "shopping"},
            {"dept_stores", "shopping"},
            {"nail_salons", "beautysvc"},
            {"cosmetics", "beautysvc"},
        },
        true);
}

}  // namespace

nlohmann::ordered_json DefenseData::truth(const DefenseConfig& config) const {
    nlohmann::ordered_json truth;
    truth["model"] = "defense";
    truth["area"] = area_id;
    truth["gain"] = config.gain;
    truth["burst_periods"] = config.burst_periods;
    truth["burst_event_counts"] = burst_event_counts;
    truth["n_periods"] = config.n_periods;
    truth["top_categories"] = top_categories;
    return truth;
}

DefenseData gen_defense_events(const DefenseConfig& config) {
    if (config.n_periods < 2 || config.n_regulars < 1) {
        throw Error(errc::bad_config, "defense log needs >= 2 periods and >= 1 regular");
    }
    if (config.regular_rate < 0 || config.background_newcomer_rate < 0 || config.gain < 0 ||
        config.noise_sd < 0) {
        throw Error(errc::bad_config, "rates, gain and noise must be >= 0");
    }
    if (config.regular_top_share < 0 || config.regular_top_share > 1) {
        throw Error(errc::bad_config, "regular_top_share must lie in [0, 1]");
    }
    for (int p : config.burst_periods) {
        if (p < 1 || p >= config.n_periods) {
            throw Error(errc::bad_config, "burst periods must lie in [1, n_periods)");
        }
    }

    const std::string area = "A1";
    const std::string elsewhere = "X0";
    const auto& top = defense_top_categories();
    const auto& distant = defense_distant_categories();

    // Absolute quarter of 2010Q1; series periods are offsets from it.
    const std::int64_t q0 = timeutil::period_of_day(timeutil::days_from_civil(2010, 1, 1),
                                                    timeutil::PeriodLength::quarter);
    auto period_span = [&](std::int64_t p) {
        std::int64_t start =
            timeutil::period_start_seconds(q0 + p, timeutil::PeriodLength::quarter);
        std::int64_t end =
            timeutil::period_start_seconds(q0 + p + 1, timeutil::PeriodLength::quarter);
        return std::make_pair(start, end);
    };

    std::vector<data::ReviewEvent> events;

    // Regulars: steady activity, mostly in the top categories.
    for (int i = 0; i < config.n_regulars; ++i) {
        std::string user = "R" + padded(i, 3);
        rng::Generator gen = rng::Generator::substream(config.seed, "regular|" + user);
        for (int p = 0; p < config.n_periods; ++p) {
            auto [start, end] = period_span(p);
            long long count = gen.poisson(config.regular_rate);
            for (long long e = 0; e < count; ++e) {
                const auto& pool = gen.uniform() < config.regular_top_share ? top : distant;
                const std::string& cat = pool[gen.below(pool.size())];
                data::ReviewEvent event;
                event.user_id = user;
                event.venue_id = "V_" + cat;
                event.area_id = area;
                event.timestamp =
                    start + static_cast<std::int64_t>(
                                gen.below(static_cast<std::uint64_t>(end - start)));
                event.categories = {cat};
                events.push_back(std::move(event));
            }
        }
    }

    // Background one-off visitors: half share the area's tastes, half do not.
    // They keep the tension series alive outside bursts.
    for (int p = 0; p < config.n_periods; ++p) {
        rng::Generator gen =
            rng::Generator::substream(config.seed, "background|" + std::to_string(p));
        long long count = gen.poisson(config.background_newcomer_rate);
        for (long long j = 0; j < count; ++j) {
            std::string user = "B" + std::to_string(p) + "_" + std::to_string(j);
            bool similar = gen.uniform() < 0.5;
            const auto& pool = similar ? top : distant;
            // Prior history elsewhere, so the visitor has a taste profile.
            for (int h = 0; h < 3; ++h) {
                std::int64_t hp = p - 4 + static_cast<std::int64_t>(gen.below(4));
                auto [hstart, hend] = period_span(hp);
                data::ReviewEvent event;
                event.user_id = user;
                const std::string& cat = pool[gen.below(pool.size())];
                event.venue_id = "W_" + cat;
                event.area_id = elsewhere;
                event.timestamp =
                    hstart + static_cast<std::int64_t>(
                                 gen.below(static_cast<std::uint64_t>(hend - hstart)));
                event.categories = {cat};
                events.push_back(std::move(event));
            }
            auto [start, end] = period_span(p);
            data::ReviewEvent visit;
            visit.user_id = user;
            const std::string& cat = pool[gen.below(pool.size())];
            visit.venue_id = "V_" + cat;
            visit.area_id = area;
            visit.timestamp = start + static_cast<std::int64_t>(
                                          gen.below(static_cast<std::uint64_t>(end - start)));
            visit.categories = {cat};
            events.push_back(std::move(visit));
        }
    }

    // Bursts: blocks of newcomers with distant taste histories.
    DefenseData out;
    for (int bp : config.burst_periods) {
        long long burst_total = 0;
        for (int i = 0; i < config.burst_users; ++i) {
            std::string user = "N" + std::to_string(bp) + "_" + padded(i, 3);
            rng::Generator gen = rng::Generator::substream(
                config.seed, "burst|" + std::to_string(bp) + "|" + user);
            for (int h = 0; h < config.newcomer_history_events; ++h) {
                std::int64_t hp = bp - 6 + static_cast<std::int64_t>(gen.below(6));
                auto [hstart, hend] = period_span(hp);
                data::ReviewEvent event;
                event.user_id = user;
                const std::string& cat = distant[gen.below(distant.size())];
                event.venue_id = "W_" + cat;
                event.area_id = elsewhere;
                event.timestamp =
                    hstart + static_cast<std::int64_t>(
                                 gen.below(static_cast<std::uint64_t>(hend - hstart)));
                event.categories = {cat};
                events.push_back(std::move(event));
            }
            auto [start, end] = period_span(bp);
            for (int e = 0; e < config.burst_events_per_user; ++e) {
                data::ReviewEvent event;
                event.user_id = user;
                const std::string& cat = distant[gen.below(distant.size())];
                event.venue_id = "V_" + cat;
                event.area_id = area;
                event.timestamp =
                    start + static_cast<std::int64_t>(
                                gen.below(static_cast<std::uint64_t>(end - start)));
                event.categories = {cat};
                events.push_back(std::move(event));
                ++burst_total;
            }
        }
        out.burst_event_counts.push_back(burst_total);

        // Structural response: regulars add top-category activity in the next
        // period, proportional to the burst.
        if (bp + 1 >= config.n_periods || config.gain <= 0) continue;
        rng::Generator noise = rng::Generator::substream(
            config.seed, "response-noise|" + std::to_string(bp));
        double scaled = config.gain * static_cast<double>(burst_total) *
                        (1.0 + config.noise_sd * noise.normal());
        long long extra = std::max<long long>(0, std::llround(scaled));
        auto [start, end] = period_span(bp + 1);
        for (long long e = 0; e < extra; ++e) {
            int owner = static_cast<int>(e % config.n_regulars);
            std::string user = "R" + padded(owner, 3);
            rng::Generator gen = rng::Generator::substream(
                config.seed,
                "response|" + std::to_string(bp) + "|" + user + "|" + std::to_string(e));
            data::ReviewEvent event;
            event.user_id = user;
            const std::string& cat = top[gen.below(top.size())];
            event.venue_id = "V_" + cat;
            event.area_id = area;
            event.timestamp = start + static_cast<std::int64_t>(
                                          gen.below(static_cast<std::uint64_t>(end - start)));
            event.categories = {cat};
            events.push_back(std::move(event));
        }
    }

    out.log = data::make_event_log(std::move(events));
    out.taxonomy = defense_taxonomy();
    out.area_id = area;
    out.top_categories = top;
    return out;
}

}  // namespace scenekit::sim
