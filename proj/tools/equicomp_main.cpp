// equicomp — exact laboratory for energy-constrained equiprobable occupancies.
//
// Subcommands: fit, count, sample, tail, partition, bound, concentration,
// lemma2, saddle-scan. Exit codes: 0 success, 2 validation error, 3 guard
// exceeded, 4 I/O failure. EQUICOMP_THREADS caps parallelism.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "equicomp/equicomp.hpp"

namespace {

using namespace equicomp;

struct CommonArgs {
    std::string spectrum_path;
    std::string quantum = "1";
    std::string out_path;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--spectrum", args.spectrum_path, "spectrum CSV (header value,multiplicity)")
        ->required();
    cmd->add_option("--quantum", args.quantum, "energy quantum u (rational)");
    cmd->add_option("--out", args.out_path, "output file (default: stdout)");
    cmd->add_option("--format", args.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
}

ValueSpectrum load(const CommonArgs& args) {
    return load_spectrum(args.spectrum_path, parse_rational(args.quantum));
}

void emit(const Report& report, const CommonArgs& args) {
    const ReportFormat format = parse_report_format(args.format);
    if (args.out_path.empty()) {
        std::cout << render_report(report, format);
    } else {
        emit_report(report, args.out_path, format);
    }
}

void warn_regime(const ValueSpectrum& spectrum, long long n) {
    for (const auto& w : regime_warnings(spectrum, n)) std::cerr << "warning: " << w << "\n";
}

Report fit_report(const ValueSpectrum& spectrum, const EnsembleBudget& budget,
                  const BoseFit& fit) {
    Report report;
    report.set("beta", fit.beta);
    report.set("nu", fit.nu);
    report.set("nu_nonnegative", fit.nu_nonnegative());
    report.set("residual_N", fit.residual_n);
    report.set("residual_E", fit.residual_e);
    report.set("n", budget.n);
    report.set("energy", budget.energy().str());
    report.columns = {"cell", "x", "q", "phi"};
    for (size_t i = 0; i < spectrum.size(); ++i) {
        auto& row = report.add_row();
        row[0] = static_cast<long long>(i + 1);
        row[1] = spectrum.value(i).str();
        row[2] = spectrum.multiplicity(i);
        row[3] = fit.phi[i];
    }
    return report;
}

int run(int argc, char** argv) {
    CLI::App app{"exact counting, sampling and tail analysis of energy-constrained "
                 "equiprobable occupancies"};
    app.require_subcommand(1);

    CommonArgs args;
    long long n = 0;
    std::string mean = "1";
    double epsilon = 0.05;
    double quantile = 0.5;
    long long l_flag = 0;
    long long samples = 10000;
    long long seed = 1;
    std::string mode = "both";
    double beta = 1.0;
    double delta = -1.0;
    double tilt_exponent = 0.25;
    long long replicate = 1;
    std::vector<long long> n_ladder = {20, 40, 80};
    std::vector<double> delta_exps = {0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> c_fracs = {0.02, 0.05, 0.1, 0.2, 0.4};
    TableLimits limits;

    auto add_budget = [&](CLI::App* cmd) {
        cmd->add_option("--n", n, "particle count N")->required();
        cmd->add_option("--mean", mean, "mean energy M (rational; E = M*N)")->required();
    };
    auto add_guards = [&](CLI::App* cmd) {
        cmd->add_option("--guard-n", limits.max_particles, "table guard on N");
        cmd->add_option("--guard-cells", limits.max_energy_cells, "table guard on energy cells");
    };

    auto* fit_cmd = app.add_subcommand("fit", "solve the occupation conditions for (beta, nu)");
    add_common(fit_cmd, args);
    add_budget(fit_cmd);

    auto* count_cmd = app.add_subcommand("count", "exact variant count of the ensemble");
    add_common(count_cmd, args);
    add_budget(count_cmd);
    add_guards(count_cmd);

    auto* sample_cmd = app.add_subcommand("sample", "uniform occupancy samples (CSV rows)");
    add_common(sample_cmd, args);
    add_budget(sample_cmd);
    add_guards(sample_cmd);
    sample_cmd->add_option("--samples", samples, "number of draws");
    sample_cmd->add_option("--seed", seed, "base seed");

    auto* tail_cmd = app.add_subcommand("tail", "exact count of variants with S_l >= delta");
    add_common(tail_cmd, args);
    add_budget(tail_cmd);
    add_guards(tail_cmd);
    tail_cmd->add_option("--l", l_flag, "split index l (default: Q/2 quantile)");
    tail_cmd->add_option("--delta", delta, "deviation threshold (default: N^(3/4+epsilon))");
    tail_cmd->add_option("--epsilon", epsilon, "threshold exponent offset");

    auto* partition_cmd =
        app.add_subcommand("partition", "exact vs saddle-point ln Z at one N");
    add_common(partition_cmd, args);
    partition_cmd->add_option("--n", n, "particle count N")->required();
    partition_cmd->add_option("--beta", beta, "inverse temperature")->required();
    add_guards(partition_cmd);

    auto* bound_cmd = app.add_subcommand("bound", "tilted tail bound over a (c, delta) grid");
    add_common(bound_cmd, args);
    add_budget(bound_cmd);
    add_guards(bound_cmd);
    bound_cmd->add_option("--l", l_flag, "split index l (default: Q/2 quantile)");
    bound_cmd->add_option("--delta-exp", delta_exps, "delta grid exponents (delta = N^p)")
        ->delimiter(',');
    bound_cmd->add_option("--c-frac", c_fracs, "tilt grid as fractions of the admissibility gap")
        ->delimiter(',');
    bound_cmd->add_option("--mode", mode, "exact|mc|both: exact adds the exact tail fractions")
        ->check(CLI::IsMember({"exact", "mc", "both"}));

    auto* conc_cmd = app.add_subcommand("concentration", "deviation concentration along an N ladder");
    add_common(conc_cmd, args);
    conc_cmd->add_option("--mean", mean, "mean energy M (rational; E = M*N)")->required();
    conc_cmd->add_option("--n-ladder", n_ladder, "N ladder")->delimiter(',');
    conc_cmd->add_option("--epsilon", epsilon, "threshold exponent offset");
    conc_cmd->add_option("--quantile", quantile, "multiplicity quantile for the split index");
    conc_cmd->add_option("--l", l_flag, "fixed split index (overrides the quantile policy)");
    conc_cmd->add_option("--samples", samples, "Monte Carlo draws per rung");
    conc_cmd->add_option("--seed", seed, "base seed");
    conc_cmd->add_option("--mode", mode, "exact|mc|both")
        ->check(CLI::IsMember({"exact", "mc", "both"}));
    conc_cmd->add_option("--tilt-exponent", tilt_exponent, "alpha in c = delta/N^(1+alpha)");
    conc_cmd->add_option("--replicate", replicate,
                         "grow the spectrum along the ladder (s ~ N) when > 1");
    add_guards(conc_cmd);

    auto* lemma2_cmd = app.add_subcommand("lemma2", "restricted Boltzmann average along an N ladder");
    add_common(lemma2_cmd, args);
    lemma2_cmd->add_option("--mean", mean, "mean energy M (rational; E = M*N)")->required();
    lemma2_cmd->add_option("--n-ladder", n_ladder, "N ladder")->delimiter(',');
    lemma2_cmd->add_option("--epsilon", epsilon, "cap exponent offset");
    lemma2_cmd->add_option("--replicate", replicate,
                           "grow the spectrum along the ladder (s ~ N) when > 1");
    add_guards(lemma2_cmd);

    auto* scan_cmd = app.add_subcommand("saddle-scan", "exact vs saddle-point ln Z along an N ladder");
    add_common(scan_cmd, args);
    scan_cmd->add_option("--beta", beta, "inverse temperature")->required();
    scan_cmd->add_option("--n-ladder", n_ladder, "N ladder")->delimiter(',');
    add_guards(scan_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const ValueSpectrum spectrum = load(args);

    if (fit_cmd->parsed()) {
        const auto budget = make_budget(spectrum, n, parse_rational(mean));
        warn_regime(spectrum, n);
        emit(fit_report(spectrum, budget, fit_bose(spectrum, budget)), args);
        return 0;
    }

    if (count_cmd->parsed()) {
        const auto budget = make_budget(spectrum, n, parse_rational(mean));
        warn_regime(spectrum, n);
        const auto table = CountTable::build(spectrum, budget, limits, false);
        Report report;
        report.set("quantum", spectrum.quantum().str());
        report.set("mean", budget.mean.str());
        report.columns = {"n", "e_grid", "count"};
        auto& row = report.add_row();
        row[0] = budget.n;
        row[1] = budget.e_grid;
        row[2] = to_decimal(count_variants(table));
        emit(report, args);
        return 0;
    }

    if (sample_cmd->parsed()) {
        const auto budget = make_budget(spectrum, n, parse_rational(mean));
        const auto table = CountTable::build(spectrum, budget, limits);
        Report report;
        report.columns = {"sample", "energy_grid"};
        for (size_t i = 0; i < spectrum.size(); ++i)
            report.columns.push_back("n_" + std::to_string(i + 1));
        for (long long j = 0; j < samples; ++j) {
            const Occupancy occ =
                sample_uniform(table, static_cast<std::uint64_t>(seed) +
                                          static_cast<std::uint64_t>(j));
            auto& row = report.add_row();
            row[0] = j;
            row[1] = occ.energy_grid;
            for (size_t i = 0; i < occ.counts.size(); ++i) row[2 + i] = occ.counts[i];
        }
        emit(report, args);
        return 0;
    }

    if (tail_cmd->parsed()) {
        const auto budget = make_budget(spectrum, n, parse_rational(mean));
        const auto fit = fit_bose(spectrum, budget);
        const auto table = CountTable::build(spectrum, budget, limits);
        const size_t l = l_flag > 0 ? static_cast<size_t>(l_flag)
                                    : select_split_index(spectrum, quantile);
        const double d =
            delta >= 0 ? delta : std::pow(static_cast<double>(n), 0.75 + epsilon);
        const BigCount tail = exact_tail_count(table, fit, l, d, limits);
        const BigCount total = count_variants(table);
        Report report;
        report.set("l", static_cast<long long>(l));
        report.set("delta", d);
        report.set("tail_count", to_decimal(tail));
        report.set("total_count", to_decimal(total));
        report.set("fraction", ratio_big(tail, total));
        report.columns = {"l", "delta", "tail_count", "total_count", "fraction"};
        auto& row = report.add_row();
        row[0] = static_cast<long long>(l);
        row[1] = d;
        row[2] = to_decimal(tail);
        row[3] = to_decimal(total);
        row[4] = ratio_big(tail, total);
        emit(report, args);
        return 0;
    }

    if (partition_cmd->parsed()) {
        const long long e_cap = n * spectrum.grid_value(spectrum.size() - 1);
        const auto table = CountTable::build(spectrum, n, e_cap, limits, false);
        const double exact = partition_exact(table, beta, n);
        const double saddle = partition_saddle(spectrum, beta, static_cast<double>(n));
        Report report;
        report.set("beta", beta);
        report.columns = {"n", "ln_z_exact", "ln_z_saddle", "rel_err"};
        auto& row = report.add_row();
        row[0] = n;
        row[1] = exact;
        row[2] = saddle;
        row[3] = std::abs(saddle - exact) / std::abs(exact);
        emit(report, args);
        return 0;
    }

    if (bound_cmd->parsed()) {
        const auto budget = make_budget(spectrum, n, parse_rational(mean));
        const auto fit = fit_bose(spectrum, budget);
        size_t l = l_flag > 0 ? static_cast<size_t>(l_flag)
                              : select_split_index(spectrum, quantile);
        if (l >= spectrum.size()) l = spectrum.size() - 1;
        if (l < 1) throw validation_error("bound requires a spectrum with s >= 2");
        const bool exact = mode != "mc";
        std::optional<CountTable> table;
        BigCount total = 0;
        if (exact) {
            table.emplace(CountTable::build(spectrum, budget, limits));
            total = table->total();
        }
        const double gap = fit.beta * spectrum.value_real(0) - fit.nu;
        Report report;
        report.set("beta", fit.beta);
        report.set("nu", fit.nu);
        report.set("l", static_cast<long long>(l));
        report.set("gap", gap);
        report.columns = {"c", "delta", "ln_bound", "bound_fraction", "tail_count",
                          "fraction_exact"};
        for (const double p : delta_exps) {
            const double d = std::pow(static_cast<double>(n), p);
            for (const double f : c_fracs) {
                const double c = f * gap;
                const double lb = chernoff_tail_bound(spectrum, fit, {c, d, l},
                                                      static_cast<double>(n),
                                                      budget.energy_real());
                auto& row = report.add_row();
                row[0] = c;
                row[1] = d;
                row[2] = lb;
                if (exact) {
                    const BigCount tail = exact_tail_count(*table, fit, l, d, limits);
                    row[3] = std::exp(lb - log_big(total));
                    row[4] = to_decimal(tail);
                    row[5] = ratio_big(tail, total);
                }
            }
        }
        emit(report, args);
        return 0;
    }

    ExperimentConfig config;
    config.epsilon = epsilon;
    config.quantile = quantile;
    if (l_flag > 0) config.l_override = static_cast<size_t>(l_flag);
    config.n_ladder = n_ladder;
    config.num_samples = samples;
    config.seed = static_cast<std::uint64_t>(seed);
    config.mode = parse_run_mode(mode);
    config.tilt_exponent = tilt_exponent;
    config.scale_spectrum = replicate > 1;
    config.limits = limits;

    if (conc_cmd->parsed()) {
        emit(run_concentration(spectrum, parse_rational(mean), config, &std::cerr), args);
        return 0;
    }
    if (lemma2_cmd->parsed()) {
        emit(run_lemma2(spectrum, parse_rational(mean), config, &std::cerr), args);
        return 0;
    }
    if (scan_cmd->parsed()) {
        emit(run_saddle_scan(spectrum, beta, n_ladder, limits, &std::cerr), args);
        return 0;
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const equicomp::guard_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const equicomp::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const equicomp::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
