#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "equicomp/befit.hpp"
#include "equicomp/bigcount.hpp"
#include "equicomp/ensemble.hpp"
#include "equicomp/errors.hpp"
#include "equicomp/spectrum.hpp"

namespace equicomp {

// Grand-canonical parameters; every cell factor converges iff nu < beta*x_i.
struct GrandParams {
    double beta = 0;
    double nu = 0;
};

// Exponential tilt c, deviation threshold Delta and split index l for the
// tail bound.
struct TailBoundParams {
    double c = 0;
    double delta = 0;
    size_t l = 0;
};

inline bool admissible(const ValueSpectrum& spectrum, const GrandParams& params) {
    for (size_t i = 0; i < spectrum.size(); ++i)
        if (!(params.nu < params.beta * spectrum.value_real(i))) return false;
    return true;
}

inline void require_admissible(const ValueSpectrum& spectrum, const GrandParams& params) {
    if (!admissible(spectrum, params))
        throw validation_error("inadmissible grand parameters: nu=" + std::to_string(params.nu) +
                               " must stay below beta*x_i for every cell");
}

// Cell grand factor ξ_i = (1 − e^{nu − beta*x_i})^{−q_i}.
inline double log_xi(const ValueSpectrum& spectrum, size_t cell, const GrandParams& params) {
    if (cell >= spectrum.size()) throw validation_error("cell index out of range");
    const double y = params.nu - params.beta * spectrum.value_real(cell);
    if (!(y < 0)) throw validation_error("inadmissible grand parameters for cell " +
                                         std::to_string(cell + 1));
    return -static_cast<double>(spectrum.multiplicity(cell)) * std::log1p(-std::exp(y));
}

inline double xi(const ValueSpectrum& spectrum, size_t cell, const GrandParams& params) {
    return std::exp(log_xi(spectrum, cell, params));
}

// ln Π ξ_i over the half-open cell range [begin, end); empty range gives 0.
inline double log_zeta(const ValueSpectrum& spectrum, size_t begin, size_t end,
                       const GrandParams& params) {
    if (begin > end || end > spectrum.size()) throw validation_error("cell range out of bounds");
    double sum = 0;
    for (size_t i = begin; i < end; ++i) sum += log_xi(spectrum, i, params);
    return sum;
}

inline double log_zeta(const ValueSpectrum& spectrum, const GrandParams& params) {
    return log_zeta(spectrum, 0, spectrum.size(), params);
}

// ln ζ continued to nu + i*alpha; the real part is ln |ζ|.
inline std::complex<double> log_zeta_complex(const ValueSpectrum& spectrum, size_t begin,
                                             size_t end, const GrandParams& params,
                                             double alpha) {
    if (begin > end || end > spectrum.size()) throw validation_error("cell range out of bounds");
    require_admissible(spectrum, params);
    std::complex<double> sum = 0;
    for (size_t i = begin; i < end; ++i) {
        const std::complex<double> w =
            std::exp(std::complex<double>(params.nu - params.beta * spectrum.value_real(i), alpha));
        sum -= static_cast<double>(spectrum.multiplicity(i)) * std::log(1.0 - w);
    }
    return sum;
}

struct Curvature {
    double value = 0;    // ∂²/∂ν² ln ζ over the range
    double bound_qd = 0; // Q*d with d the ground-cell term factor
    double d = 0;        // e^{nu − beta*x_1} / (1 − e^{nu − beta*x_1})²
};

// Second nu-derivative of ln ζ over [begin, end): Σ q_i y_i/(1−y_i)² with
// y_i = e^{nu−beta*x_i}; dominated term-wise by Q*d since x_1 is minimal.
inline Curvature zeta_curvature(const ValueSpectrum& spectrum, size_t begin, size_t end,
                                const GrandParams& params) {
    if (begin > end || end > spectrum.size()) throw validation_error("cell range out of bounds");
    require_admissible(spectrum, params);
    Curvature out;
    for (size_t i = begin; i < end; ++i) {
        const double y = std::exp(params.nu - params.beta * spectrum.value_real(i));
        const double denom = 1.0 - y;
        out.value += static_cast<double>(spectrum.multiplicity(i)) * y / (denom * denom);
    }
    const double y1 = std::exp(params.nu - params.beta * spectrum.value_real(0));
    out.d = y1 / ((1.0 - y1) * (1.0 - y1));
    out.bound_qd = static_cast<double>(spectrum.total_multiplicity()) * out.d;
    return out;
}

inline Curvature zeta_curvature(const ValueSpectrum& spectrum, const GrandParams& params) {
    return zeta_curvature(spectrum, 0, spectrum.size(), params);
}

// ln Z(beta, n) from the exact count table: ln Σ_e counts[s][n][e] e^{−beta e}.
// Compensated log-sum-exp; requires the table to cover the full energy range
// n*x_s so no variant is truncated.
inline double partition_exact(const CountTable& table, double beta, long long n) {
    if (!table.full_spectrum())
        throw validation_error("partition requires a full-spectrum table");
    if (n < 0 || n > table.n_max()) throw validation_error("particle count outside table");
    const ValueSpectrum& spectrum = table.spectrum();
    const long long full_range = n * spectrum.grid_value(spectrum.size() - 1);
    if (table.e_cap() < full_range)
        throw validation_error("table truncated: energy range " + std::to_string(table.e_cap()) +
                               " below required " + std::to_string(full_range));

    const double u = spectrum.quantum().to_double();
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<long long, double>> terms; // (e, ln counts[n][e])
    for (long long e = 0; e <= table.e_cap(); ++e) {
        const BigCount& c = table.at(n, e);
        if (c == 0) continue;
        const double t = log_big(c) - beta * static_cast<double>(e) * u;
        terms.emplace_back(e, t);
        if (t > max_term) max_term = t;
    }
    if (terms.empty()) return -std::numeric_limits<double>::infinity();

    double sum = 0, comp = 0; // Kahan
    for (const auto& [e, t] : terms) {
        const double y = std::exp(t - max_term) - comp;
        const double next = sum + y;
        comp = (next - sum) - y;
        sum = next;
    }
    return max_term + std::log(sum);
}

inline double partition_exact(const CountTable& table, double beta) {
    return partition_exact(table, beta, table.n_max());
}

// Gaussian saddle-point estimate of ln Z(beta, n): the integrand's phase is
// stationary at alpha = 0 once nu solves the occupation condition, giving
// ln Ẑ = −nu*n + ln ζ_s(beta, nu) − ½ ln(2π ∂²/∂ν² ln ζ_s).
inline double partition_saddle(const ValueSpectrum& spectrum, double beta, double n) {
    if (!(beta > 0)) throw validation_error("saddle point requires beta > 0");
    if (!(n >= 1)) throw validation_error("saddle point requires n >= 1");
    const double nu = solve_nu(spectrum, beta, n);
    const GrandParams params{beta, nu};
    const double curv = zeta_curvature(spectrum, params).value;
    return -nu * n + log_zeta(spectrum, params) - 0.5 * std::log(2.0 * std::numbers::pi * curv);
}

// ln of the tilted tail bound at the fit point:
// ln ζ_s(β',ν') − cΔ + (c²/2) β'² Q d + β'E − ν'N.
inline double chernoff_tail_bound(const ValueSpectrum& spectrum, const BoseFit& fit,
                                  const TailBoundParams& tparams, double n, double e) {
    if (!(tparams.c > 0)) throw validation_error("tilt c must be positive");
    if (!(tparams.delta > 0)) throw validation_error("delta must be positive");
    if (tparams.l < 1 || tparams.l >= spectrum.size())
        throw validation_error("split index l must satisfy 1 <= l < s");
    const GrandParams params{fit.beta, fit.nu};
    require_admissible(spectrum, params);
    const Curvature curv = zeta_curvature(spectrum, params);
    return log_zeta(spectrum, params) - tparams.c * tparams.delta +
           0.5 * tparams.c * tparams.c * fit.beta * fit.beta * curv.bound_qd +
           fit.beta * e - fit.nu * n;
}

} // namespace equicomp
