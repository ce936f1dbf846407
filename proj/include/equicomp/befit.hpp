#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "equicomp/errors.hpp"
#include "equicomp/rootfind.hpp"
#include "equicomp/spectrum.hpp"

namespace equicomp {

// Fitted ensemble parameters: inverse temperature beta, exponent offset nu
// (nu < beta*x_1 so every occupation is positive) and the per-cell expected
// occupations phi_i = q_i / (e^{beta*x_i - nu} - 1).
struct BoseFit {
    double beta = 0;
    double nu = 0;
    std::vector<double> phi;
    double residual_n = 0; // (Σφ − N)/N
    double residual_e = 0; // (Σφx − E)/max(E, tiny)

    bool nu_nonnegative() const { return nu >= 0.0; }
};

// Σ q_i / (e^{beta*x_i - nu} - 1); strictly increasing in nu on (-inf, beta*x_1)
// with range (0, inf).
inline double occupation_sum(const ValueSpectrum& spectrum, double beta, double nu) {
    double sum = 0;
    for (size_t i = 0; i < spectrum.size(); ++i) {
        const double t = beta * spectrum.value_real(i) - nu;
        sum += static_cast<double>(spectrum.multiplicity(i)) / std::expm1(t);
    }
    return sum;
}

inline double occupation_energy(const ValueSpectrum& spectrum, double beta, double nu) {
    double sum = 0;
    for (size_t i = 0; i < spectrum.size(); ++i) {
        const double t = beta * spectrum.value_real(i) - nu;
        sum += static_cast<double>(spectrum.multiplicity(i)) * spectrum.value_real(i) /
               std::expm1(t);
    }
    return sum;
}

// d/dnu of occupation_sum: Σ q_i e^t/(e^t−1)^2 with t = beta*x_i − nu.
inline double occupation_sum_slope(const ValueSpectrum& spectrum, double beta, double nu) {
    double sum = 0;
    for (size_t i = 0; i < spectrum.size(); ++i) {
        const double t = beta * spectrum.value_real(i) - nu;
        const double u = 1.0 / std::expm1(t);
        sum += static_cast<double>(spectrum.multiplicity(i)) * u * (1.0 + u);
    }
    return sum;
}

// Solves Σ q_i/(e^{beta*x_i − nu} − 1) = n_target for the unique nu < beta*x_1.
inline double solve_nu(const ValueSpectrum& spectrum, double beta, double n_target,
                       double rel_tol = 1e-12) {
    if (!std::isfinite(beta)) throw validation_error("beta must be finite");
    if (beta < 0) throw validation_error("beta must be nonnegative");
    if (!(n_target > 0)) throw validation_error("occupation target must be positive");
    const double edge = beta * spectrum.value_real(0);

    // Upper bracket: walk toward the pole at beta*x_1 until the sum exceeds N.
    double gap_hi = 1.0;
    while (occupation_sum(spectrum, beta, edge - gap_hi) < n_target) {
        gap_hi *= 0.125;
        if (gap_hi < 1e-300) break;
    }
    // Lower bracket: widen away from the pole until the sum drops below N.
    double gap_lo = gap_hi * 2;
    while (occupation_sum(spectrum, beta, edge - gap_lo) > n_target) {
        gap_lo *= 8;
        if (!std::isfinite(gap_lo)) throw guard_error("occupation bracket failed to expand");
    }

    auto f = [&](double nu) { return occupation_sum(spectrum, beta, nu) - n_target; };
    auto df = [&](double nu) { return occupation_sum_slope(spectrum, beta, nu); };
    auto done = [&](double, double fx) { return std::abs(fx) <= rel_tol * n_target; };
    return newton_bisect_increasing(f, df, edge - gap_lo, edge - gap_hi, done);
}

namespace detail {

// d/dbeta of the fitted energy at fixed N (nu adjusting implicitly); always <= 0.
inline double fitted_energy_slope(const ValueSpectrum& spectrum, double beta, double nu) {
    double sum_d = 0, sum_xd = 0, sum_xxd = 0;
    for (size_t i = 0; i < spectrum.size(); ++i) {
        const double x = spectrum.value_real(i);
        const double t = beta * x - nu;
        const double u = 1.0 / std::expm1(t);
        const double d = static_cast<double>(spectrum.multiplicity(i)) * u * (1.0 + u);
        sum_d += d;
        sum_xd += x * d;
        sum_xxd += x * x * d;
    }
    if (sum_d <= 0) return 0;
    return -(sum_xxd - sum_xd * sum_xd / sum_d);
}

} // namespace detail

// Solves the two fit conditions Σφ_i = N and Σφ_i x_i = E for (beta, nu).
// Targets are real-valued. Outer root-find on beta (the fitted energy is
// monotone decreasing in beta), inner solve_nu at each evaluation.
inline BoseFit fit_bose(const ValueSpectrum& spectrum, double n_target, double e_target,
                        double outer_tol = 1e-10, double inner_tol = 1e-12) {
    if (!(n_target > 0)) throw validation_error("particle target must be positive");
    const double e_scale = std::max(std::abs(e_target), 1e-30);
    // The root-finders run well past the contract tolerances (to bracket
    // collapse) so the recovered parameters stay sharp even when the energy
    // is nearly insensitive to beta; the contract is enforced on residuals.
    const double solve_tol = std::min(inner_tol, 1e-14);

    auto build = [&](double beta, double nu) {
        BoseFit fit;
        fit.beta = beta;
        fit.nu = nu;
        fit.phi.reserve(spectrum.size());
        double sum = 0, esum = 0;
        for (size_t i = 0; i < spectrum.size(); ++i) {
            const double t = beta * spectrum.value_real(i) - nu;
            const double phi = static_cast<double>(spectrum.multiplicity(i)) / std::expm1(t);
            fit.phi.push_back(phi);
            sum += phi;
            esum += phi * spectrum.value_real(i);
        }
        fit.residual_n = (sum - n_target) / n_target;
        fit.residual_e = (esum - e_target) / e_scale;
        return fit;
    };

    // Degenerate single-cell spectrum: the energy condition is x_1 times the
    // number condition, so E must equal N*x_1 and any beta works.
    if (spectrum.size() == 1) {
        const double forced = n_target * spectrum.value_real(0);
        if (std::abs(e_target - forced) > outer_tol * std::max(e_scale, std::abs(forced)))
            throw validation_error("energy target unreachable: single-cell spectrum forces E=" +
                                   std::to_string(forced));
        const double beta = 1.0;
        return build(beta, solve_nu(spectrum, beta, n_target, solve_tol));
    }

    auto energy_at = [&](double beta) {
        return occupation_energy(spectrum, beta, solve_nu(spectrum, beta, n_target, solve_tol));
    };

    constexpr double beta_min = 1e-13, beta_max = 1e12;
    // Scale-free start: unit thermal gap across the spectrum's spread.
    double beta_hi = 1.0 / std::max(spectrum.value_real(spectrum.size() - 1) -
                                        spectrum.value_real(0),
                                    1e-12);
    double beta_lo = beta_hi;
    while (energy_at(beta_hi) > e_target) {
        beta_hi *= 4;
        if (beta_hi > beta_max) break;
    }
    while (energy_at(beta_lo) < e_target) {
        beta_lo *= 0.25;
        if (beta_lo < beta_min) break;
    }
    beta_hi = std::min(beta_hi, beta_max);
    beta_lo = std::max(beta_lo, beta_min);

    auto finish = [&](double beta) {
        BoseFit fit = build(beta, solve_nu(spectrum, beta, n_target, solve_tol));
        if (std::abs(fit.residual_n) > outer_tol || std::abs(fit.residual_e) > outer_tol)
            throw guard_error("fit did not reach tolerance: residual_n=" +
                              std::to_string(fit.residual_n) + " residual_e=" +
                              std::to_string(fit.residual_e));
        return fit;
    };

    const double e_at_lo = energy_at(beta_lo);
    const double e_at_hi = energy_at(beta_hi);
    // Accept an endpoint already inside tolerance: budgets sitting on the
    // admissibility boundary E = N*x̄ resolve to the smallest representable beta.
    if (e_at_lo < e_target) {
        if (std::abs(e_at_lo - e_target) <= outer_tol * e_scale) return finish(beta_lo);
        throw validation_error("energy target " + std::to_string(e_target) +
                               " above the achievable range (" + std::to_string(e_at_hi) + ", " +
                               std::to_string(e_at_lo) + ")");
    }
    if (e_at_hi > e_target) {
        if (std::abs(e_at_hi - e_target) <= outer_tol * e_scale) return finish(beta_hi);
        throw validation_error("energy target " + std::to_string(e_target) +
                               " below the achievable range (" + std::to_string(e_at_hi) + ", " +
                               std::to_string(e_at_lo) + ")");
    }

    // energy_at decreases in beta; flip sign to reuse the increasing solver.
    auto f = [&](double beta) { return e_target - energy_at(beta); };
    auto df = [&](double beta) {
        const double nu = solve_nu(spectrum, beta, n_target, solve_tol);
        return -detail::fitted_energy_slope(spectrum, beta, nu);
    };
    auto done = [&](double, double fx) { return std::abs(fx) <= 4e-16 * e_scale; };
    const double beta = newton_bisect_increasing(f, df, beta_lo, beta_hi, done, 500);
    return finish(beta);
}

inline BoseFit fit_bose(const ValueSpectrum& spectrum, const EnsembleBudget& budget) {
    return fit_bose(spectrum, static_cast<double>(budget.n), budget.energy_real());
}

// Predicted cumulative occupancy B_l = Σ_{i<=l} φ_i for l in 0..s.
inline double cumulative_curve(const BoseFit& fit, size_t l) {
    if (l > fit.phi.size())
        throw validation_error("cell index " + std::to_string(l) + " out of range 0.." +
                               std::to_string(fit.phi.size()));
    double sum = 0;
    for (size_t i = 0; i < l; ++i) sum += fit.phi[i];
    return sum;
}

} // namespace equicomp
