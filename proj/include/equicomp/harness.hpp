#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "equicomp/befit.hpp"
#include "equicomp/ensemble.hpp"
#include "equicomp/errors.hpp"
#include "equicomp/parallel.hpp"
#include "equicomp/partition.hpp"
#include "equicomp/report.hpp"
#include "equicomp/spectrum.hpp"

namespace equicomp {

enum class RunMode { exact, monte_carlo, both };

inline RunMode parse_run_mode(const std::string& s) {
    if (s == "exact") return RunMode::exact;
    if (s == "mc") return RunMode::monte_carlo;
    if (s == "both") return RunMode::both;
    throw validation_error("unknown mode '" + s + "' (expected exact, mc or both)");
}

inline bool wants_exact(RunMode m) { return m != RunMode::monte_carlo; }
inline bool wants_mc(RunMode m) { return m != RunMode::exact; }

struct ExperimentConfig {
    double epsilon = 0.05;            // deviation exponent offset: Δ = N^(3/4+ε)
    double quantile = 0.5;            // split policy: smallest l with Σ_{i<=l} q_i >= quantile*Q
    std::optional<size_t> l_override; // fixed split index (1..s) instead of the policy
    std::vector<long long> n_ladder = {20, 40, 80};
    long long num_samples = 10000;
    std::uint64_t seed = 1;
    RunMode mode = RunMode::both;
    double tilt_exponent = 0.25;      // α in the bound's tilt choice c = Δ/N^(1+α)
    bool scale_spectrum = false;      // replicate the spectrum along the ladder (s ~ N)
    TableLimits limits;

    void validate() const {
        if (!(epsilon > 0 && epsilon <= 0.25))
            throw validation_error("epsilon must lie in (0, 1/4]");
        if (!(quantile > 0 && quantile <= 1))
            throw validation_error("quantile must lie in (0, 1]");
        if (n_ladder.empty()) throw validation_error("N ladder must not be empty");
        for (size_t i = 0; i < n_ladder.size(); ++i) {
            if (n_ladder[i] < 1) throw validation_error("ladder entries must be >= 1");
            if (i > 0 && n_ladder[i] <= n_ladder[i - 1])
                throw validation_error("N ladder must be strictly increasing");
        }
        if (wants_mc(mode) && num_samples < 1)
            throw validation_error("sample count must be >= 1");
        if (!std::isfinite(tilt_exponent)) throw validation_error("tilt exponent must be finite");
    }
};

// Smallest l with Σ_{i<=l} q_i >= quantile*Q, so the split always carries a
// fixed share of the total multiplicity.
inline size_t select_split_index(const ValueSpectrum& spectrum, double quantile) {
    const double target = quantile * static_cast<double>(spectrum.total_multiplicity());
    long long acc = 0;
    for (size_t l = 1; l <= spectrum.size(); ++l) {
        acc += spectrum.multiplicity(l - 1);
        if (static_cast<double>(acc) >= target) return l;
    }
    return spectrum.size();
}

namespace detail {

struct RungContext {
    ValueSpectrum spectrum;
    EnsembleBudget budget;
    BoseFit fit;
    size_t l = 0;
};

inline RungContext prepare_rung(const ValueSpectrum& base, const Rational& mean, long long n,
                                const ExperimentConfig& config, long long ladder_front) {
    RungContext ctx{config.scale_spectrum
                        ? replicate_spectrum(base, std::max<long long>(1, n / ladder_front))
                        : base,
                    {}, {}, 0};
    ctx.budget = make_budget(ctx.spectrum, n, mean);
    ctx.fit = fit_bose(ctx.spectrum, ctx.budget);
    ctx.l = config.l_override ? *config.l_override
                              : select_split_index(ctx.spectrum, config.quantile);
    if (ctx.l < 1 || ctx.l > ctx.spectrum.size())
        throw validation_error("split index out of range");
    return ctx;
}

// Deterministic per-rung seed stream; sample j always uses rung_seed + j no
// matter how sampling is chunked over threads.
inline std::uint64_t rung_seed(std::uint64_t base, size_t rung) {
    return base + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(rung + 1);
}

template <class Fn>
void run_ladder(size_t rungs, Fn&& fn) {
    std::vector<std::exception_ptr> errors(rungs);
    for_each_chunk(static_cast<long long>(rungs), [&](long long, long long begin, long long end) {
        for (long long i = begin; i < end; ++i) {
            try {
                fn(static_cast<size_t>(i));
            } catch (...) {
                errors[static_cast<size_t>(i)] = std::current_exception();
            }
        }
    });
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline void log_rung(std::ostream* log, const std::string& what, long long n,
                     std::chrono::steady_clock::time_point t0) {
    if (!log) return;
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    *log << what << " rung N=" << n << " took " << ms << " ms\n";
}

} // namespace detail

// Concentration experiment: per ladder rung, fit (β',ν'), set Δ = N^(3/4+ε),
// and measure how rare deviations S_l >= Δ are — exactly via the count table,
// empirically via uniform samples, and against the tilted tail bound
// normalized by 𝒩{ℳ}. Wall times go to `log`, never into the report.
inline Report run_concentration(const ValueSpectrum& spectrum, const Rational& mean,
                                const ExperimentConfig& config, std::ostream* log = nullptr) {
    config.validate();
    Report report;
    report.set("experiment", std::string("concentration"));
    report.set("epsilon", config.epsilon);
    report.set("quantile", config.quantile);
    report.set("mean", mean.str());
    report.set("mode", std::string(config.mode == RunMode::exact
                                       ? "exact"
                                       : config.mode == RunMode::monte_carlo ? "mc" : "both"));
    report.set("seed", static_cast<long long>(config.seed));
    report.set("samples", config.num_samples);
    report.set("tilt_exponent", config.tilt_exponent);
    report.columns = {"n",          "l",           "s",           "delta",       "beta",
                      "nu",         "nu_nonnegative", "total_count", "tail_count",
                      "fraction_exact", "tail_samples", "fraction_mc", "c",
                      "ln_bound",   "bound_fraction", "exact_guard_exceeded"};

    std::vector<std::vector<ReportValue>> rows(config.n_ladder.size());

    detail::run_ladder(config.n_ladder.size(), [&](size_t r) {
        const auto t0 = std::chrono::steady_clock::now();
        const long long n = config.n_ladder[r];
        auto ctx = detail::prepare_rung(spectrum, mean, n, config, config.n_ladder.front());
        const double delta = std::pow(static_cast<double>(n), 0.75 + config.epsilon);

        const CountTable table = CountTable::build(ctx.spectrum, ctx.budget, config.limits);
        const BigCount total = table.total();
        if (total == 0) throw validation_error("empty ensemble at rung N=" + std::to_string(n));

        ReportValue total_count = to_decimal(total);
        ReportValue tail_count, fraction_exact, tail_samples, fraction_mc;
        ReportValue c_value, ln_bound_value, bound_fraction;
        bool guard_exceeded = false;

        if (wants_exact(config.mode)) {
            try {
                const BigCount tail = exact_tail_count(table, ctx.fit, ctx.l, delta, config.limits);
                tail_count = to_decimal(tail);
                fraction_exact = ratio_big(tail, total);
            } catch (const guard_error&) {
                if (config.mode == RunMode::exact) throw;
                guard_exceeded = true;
            }
        }
        if (wants_mc(config.mode) || guard_exceeded) {
            const std::uint64_t base = detail::rung_seed(config.seed, r);
            std::vector<long long> chunk_hits(static_cast<size_t>(config.num_samples), 0);
            for_each_chunk(config.num_samples,
                           [&](long long chunk, long long begin, long long end) {
                               long long hits = 0;
                               for (long long j = begin; j < end; ++j) {
                                   const Occupancy occ =
                                       sample_uniform(table, base + static_cast<std::uint64_t>(j));
                                   if (deviation(occ, ctx.fit, ctx.l) >= delta) ++hits;
                               }
                               chunk_hits[static_cast<size_t>(chunk)] = hits;
                           });
            long long hits = 0;
            for (long long h : chunk_hits) hits += h;
            tail_samples = hits;
            fraction_mc = static_cast<double>(hits) / static_cast<double>(config.num_samples);
        }
        if (ctx.l < ctx.spectrum.size()) {
            const double c = delta / std::pow(static_cast<double>(n), 1.0 + config.tilt_exponent);
            const double lb = chernoff_tail_bound(ctx.spectrum, ctx.fit,
                                                  TailBoundParams{c, delta, ctx.l},
                                                  static_cast<double>(n),
                                                  ctx.budget.energy_real());
            c_value = c;
            ln_bound_value = lb;
            bound_fraction = std::exp(lb - log_big(total));
        }

        auto& row = rows[r];
        row = {ReportValue(n),
               ReportValue(static_cast<long long>(ctx.l)),
               ReportValue(static_cast<long long>(ctx.spectrum.size())),
               ReportValue(delta),
               ReportValue(ctx.fit.beta),
               ReportValue(ctx.fit.nu),
               ReportValue(ctx.fit.nu_nonnegative()),
               total_count,
               tail_count,
               fraction_exact,
               tail_samples,
               fraction_mc,
               c_value,
               ln_bound_value,
               bound_fraction,
               ReportValue(guard_exceeded)};
        detail::log_rung(log, "concentration", n, t0);
    });

    report.rows = std::move(rows);
    return report;
}

// Restricted Boltzmann average of Lemma-2 shape: R(N) = (1/𝒩{ℳ}) Σ counts·e^{−β'e}
// over energies e <= E − N^(1/2+ε). Reported with the rung-over-rung ratio.
inline double lemma2_restricted_average(const CountTable& table, double beta,
                                        long long e_cap_grid) {
    const BigCount total = table.total();
    if (total == 0) throw validation_error("empty ensemble");
    if (e_cap_grid < 0) return 0.0;
    const double u = table.spectrum().quantum().to_double();
    const long long cap = std::min(e_cap_grid, table.e_cap());
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    for (long long e = 0; e <= cap; ++e) {
        const BigCount& c = table.at(table.n_max(), e);
        if (c == 0) continue;
        const double t = log_big(c) - beta * static_cast<double>(e) * u;
        terms.push_back(t);
        if (t > max_term) max_term = t;
    }
    if (terms.empty()) return 0.0;
    double sum = 0;
    for (double t : terms) sum += std::exp(t - max_term);
    return std::exp(max_term + std::log(sum) - log_big(total));
}

inline Report run_lemma2(const ValueSpectrum& spectrum, const Rational& mean,
                         const ExperimentConfig& config, std::ostream* log = nullptr) {
    config.validate();
    Report report;
    report.set("experiment", std::string("lemma2"));
    report.set("epsilon", config.epsilon);
    report.set("mean", mean.str());
    report.columns = {"n", "e_grid", "e_cap_grid", "beta", "r", "ratio_vs_prev"};

    std::vector<std::vector<ReportValue>> rows(config.n_ladder.size());
    std::vector<double> r_values(config.n_ladder.size(), 0.0);

    detail::run_ladder(config.n_ladder.size(), [&](size_t r) {
        const auto t0 = std::chrono::steady_clock::now();
        const long long n = config.n_ladder[r];
        auto ctx = detail::prepare_rung(spectrum, mean, n, config, config.n_ladder.front());
        const CountTable table =
            CountTable::build(ctx.spectrum, ctx.budget, config.limits, false);
        const double margin = std::pow(static_cast<double>(n), 0.5 + config.epsilon);
        const double u = ctx.spectrum.quantum().to_double();
        const long long cap_grid = static_cast<long long>(
            std::floor((ctx.budget.energy_real() - margin) / u + 1e-12));
        const double rv = lemma2_restricted_average(table, ctx.fit.beta, cap_grid);
        r_values[r] = rv;
        rows[r] = {ReportValue(n), ReportValue(ctx.budget.e_grid), ReportValue(cap_grid),
                   ReportValue(ctx.fit.beta), ReportValue(rv), ReportValue()};
        detail::log_rung(log, "lemma2", n, t0);
    });

    for (size_t r = 1; r < rows.size(); ++r)
        if (r_values[r - 1] > 0) rows[r][5] = ReportValue(r_values[r] / r_values[r - 1]);

    report.rows = std::move(rows);
    return report;
}

// Exact-vs-saddle comparison of ln Z along an N ladder.
inline Report run_saddle_scan(const ValueSpectrum& spectrum, double beta,
                              const std::vector<long long>& n_ladder,
                              const TableLimits& limits = {}, std::ostream* log = nullptr) {
    if (n_ladder.empty()) throw validation_error("N ladder must not be empty");
    for (size_t i = 1; i < n_ladder.size(); ++i)
        if (n_ladder[i] <= n_ladder[i - 1])
            throw validation_error("N ladder must be strictly increasing");
    if (!(beta > 0)) throw validation_error("saddle scan requires beta > 0");

    Report report;
    report.set("experiment", std::string("saddle_scan"));
    report.set("beta", beta);
    report.set("degenerate", spectrum.size() == 1);
    report.columns = {"n", "ln_z_exact", "ln_z_saddle", "rel_err"};

    std::vector<std::vector<ReportValue>> rows(n_ladder.size());
    std::vector<double> errors(n_ladder.size(), 0.0);

    detail::run_ladder(n_ladder.size(), [&](size_t r) {
        const auto t0 = std::chrono::steady_clock::now();
        const long long n = n_ladder[r];
        const long long e_cap = n * spectrum.grid_value(spectrum.size() - 1);
        const CountTable table = CountTable::build(spectrum, n, e_cap, limits, false);
        const double exact = partition_exact(table, beta, n);
        const double saddle = partition_saddle(spectrum, beta, static_cast<double>(n));
        const double rel = std::abs(saddle - exact) / std::abs(exact);
        errors[r] = rel;
        rows[r] = {ReportValue(n), ReportValue(exact), ReportValue(saddle), ReportValue(rel)};
        detail::log_rung(log, "saddle_scan", n, t0);
    });

    bool monotone = true;
    for (size_t r = 1; r < errors.size(); ++r)
        if (errors[r] >= errors[r - 1]) monotone = false;
    report.set("error_strictly_decreasing", monotone);

    report.rows = std::move(rows);
    return report;
}

} // namespace equicomp
