#include "doctest.h"

#include <cmath>
#include <random>

#include "equicomp/partition.hpp"
#include "support/oracle.hpp"

using namespace equicomp;

namespace {

ValueSpectrum three_cells() {
    return make_spectrum(Rational(1),
                         {{Rational(1), 1}, {Rational(2), 1}, {Rational(3), 1}});
}

std::mt19937_64& rng() {
    static std::mt19937_64 gen(4242);
    return gen;
}

ValueSpectrum random_spectrum(int min_s = 2) {
    std::uniform_int_distribution<int> s_dist(min_s, 5), x_dist(0, 7), q_dist(1, 3);
    for (;;) {
        std::vector<std::pair<Rational, long long>> rows;
        const int s = s_dist(rng());
        for (int i = 0; i < s; ++i) rows.emplace_back(Rational(x_dist(rng())), q_dist(rng()));
        ValueSpectrum sp = make_spectrum(Rational(1), rows);
        if (static_cast<int>(sp.size()) >= min_s) return sp;
    }
}

GrandParams random_params(const ValueSpectrum& sp) {
    std::uniform_real_distribution<double> beta_dist(0.3, 2.0), gap_dist(0.05, 3.0);
    const double beta = beta_dist(rng());
    return GrandParams{beta, beta * sp.value_real(0) - gap_dist(rng())};
}

} // namespace

TEST_CASE("xi formula values") {
    const auto sp = make_spectrum(Rational(1), {{Rational(1), 2}});
    // direct evaluation of (1 - e^{nu - beta x})^{-q}
    CHECK(xi(sp, 0, {1.0, -1.0}) ==
          doctest::Approx(std::pow(1.0 - std::exp(-2.0), -2.0)).epsilon(1e-14));
    CHECK(xi(sp, 0, {1.0, -1.0}) == doctest::Approx(1.337533057991243).epsilon(1e-12));

    // empty-cell limit: nu -> -inf gives xi -> 1
    CHECK(xi(sp, 0, {1.0, -40.0}) == doctest::Approx(1.0).epsilon(1e-12));

    // ties to the occupation example: q=1, beta=1, x=1, nu=1-ln2 gives xi=2
    const auto unit = make_spectrum(Rational(1), {{Rational(1), 1}});
    CHECK(xi(unit, 0, {1.0, 1.0 - std::log(2.0)}) == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(xi(unit, 0, {1.0, 1.0}), validation_error);
    CHECK_THROWS_AS(xi(unit, 0, {1.0, 1.5}), validation_error);
}

TEST_CASE("log_zeta: empty range, additivity, closed form") {
    const auto sp = random_spectrum(3);
    const auto params = random_params(sp);
    CHECK(log_zeta(sp, 2, 2, params) == 0.0);
    // additivity across any split; exact because it is the same summation order
    const size_t s = sp.size();
    for (size_t l = 0; l <= s; ++l) {
        CHECK(log_zeta(sp, 0, l, params) + log_zeta(sp, l, s, params) ==
              doctest::Approx(log_zeta(sp, params)).epsilon(1e-14));
    }
    const auto unit = make_spectrum(Rational(1), {{Rational(1), 1}});
    CHECK(log_zeta(unit, {1.0, 1.0 - std::log(2.0)}) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("occupation identity: d/dnu ln zeta equals the occupation sum") {
    for (int trial = 0; trial < 50; ++trial) {
        const auto sp = random_spectrum();
        const auto params = random_params(sp);
        const double h = 1e-6;
        const double fd = (log_zeta(sp, {params.beta, params.nu + h}) -
                           log_zeta(sp, {params.beta, params.nu - h})) /
                          (2 * h);
        const double occ = occupation_sum(sp, params.beta, params.nu);
        CHECK(fd == doctest::Approx(occ).epsilon(1e-6));
    }
}

TEST_CASE("prefix occupation identity at the fit point") {
    // d/dnu ln zeta_l at (beta', nu') equals the predicted cumulative phi_l
    const auto sp = three_cells();
    const auto fit = fit_bose(sp, 12.0, 20.0);
    for (size_t l = 1; l <= sp.size(); ++l) {
        const double h = 1e-6;
        const double fd = (log_zeta(sp, 0, l, {fit.beta, fit.nu + h}) -
                           log_zeta(sp, 0, l, {fit.beta, fit.nu - h})) /
                          (2 * h);
        CHECK(fd == doctest::Approx(cumulative_curve(fit, l)).epsilon(1e-6));
    }
}

TEST_CASE("curvature matches central finite differences") {
    for (int trial = 0; trial < 50; ++trial) {
        const auto sp = random_spectrum();
        const auto params = random_params(sp);
        const double h = 1e-4;
        const double fd = (log_zeta(sp, {params.beta, params.nu + h}) -
                           2 * log_zeta(sp, params) +
                           log_zeta(sp, {params.beta, params.nu - h})) /
                          (h * h);
        const auto curv = zeta_curvature(sp, params);
        CHECK(curv.value == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("curvature is dominated by Q*d") {
    for (int trial = 0; trial < 200; ++trial) {
        const auto sp = random_spectrum();
        const auto params = random_params(sp);
        const auto curv = zeta_curvature(sp, params);
        CHECK(curv.value <= curv.bound_qd * (1 + 1e-14));
    }
    // single cell: the sum equals q1*d exactly
    const auto unit = make_spectrum(Rational(1), {{Rational(2), 3}});
    const auto curv = zeta_curvature(unit, {1.0, 0.5});
    CHECK(curv.value == doctest::Approx(3.0 * curv.d).epsilon(1e-14));
}

TEST_CASE("partition_exact on closed-form ensembles") {
    // x=(0,1), q=(1,1), N=2, beta=ln2: variants at energies 0,1,2 give 1.75
    const auto sp = make_spectrum(Rational(1), {{Rational(0), 1}, {Rational(1), 1}});
    const auto table = CountTable::build(sp, 2, 2);
    CHECK(partition_exact(table, std::log(2.0)) == doctest::Approx(std::log(1.75)).epsilon(1e-13));

    // beta=0 collapses to the unconstrained variant count at ΣN_i = N
    const auto sp3 = three_cells();
    const long long n = 6;
    const auto full = CountTable::build(sp3, n, n * 3);
    const BigCount count_all = full.count_at_most(n, n * 3);
    CHECK(partition_exact(full, 0.0) == doctest::Approx(log_big(count_all)).epsilon(1e-13));

    // single cell: Z = C(N+q-1, q-1) e^{-beta N x1}; with q=1 just e^{-beta N}
    const auto unit = make_spectrum(Rational(1), {{Rational(1), 1}});
    const auto ut = CountTable::build(unit, 5, 5);
    CHECK(partition_exact(ut, 0.8) == doctest::Approx(-0.8 * 5).epsilon(1e-13));

    // truncated table is rejected
    const auto trunc = CountTable::build(sp3, 4, 7);
    CHECK_THROWS_WITH_AS(partition_exact(trunc, 1.0), doctest::Contains("truncated"),
                         validation_error);
}

TEST_CASE("partition_exact agrees with slot enumeration on a random instance") {
    const auto sp = make_spectrum(Rational(1),
                                  {{Rational(0), 2}, {Rational(2), 1}, {Rational(3), 2}});
    const long long n = 5;
    const long long e_cap = n * 3;
    const auto table = CountTable::build(sp, n, e_cap);
    const auto hist = oracle::enumerate_slots(sp, n, e_cap);
    const double beta = 0.6;
    double z = 0;
    for (long long e = 0; e <= e_cap; ++e)
        z += static_cast<double>(hist.at(n, e)) * std::exp(-beta * static_cast<double>(e));
    CHECK(partition_exact(table, beta) == doctest::Approx(std::log(z)).epsilon(1e-12));
}

TEST_CASE("saddle estimate converges toward exact ln Z") {
    const auto sp = three_cells();
    const double beta = 1.0;
    double prev_err = 1e9;
    for (long long n : {25, 50, 100}) {
        const auto table = CountTable::build(sp, n, n * 3, {}, false);
        const double exact = partition_exact(table, beta);
        const double saddle = partition_saddle(sp, beta, static_cast<double>(n));
        const double err = std::abs(saddle - exact) / std::abs(exact);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-2);

    // stress: beta -> 0+ keeps the saddle finite while exact Z degenerates to
    // the unconstrained count
    const double tiny_beta = 1e-6;
    CHECK(std::isfinite(partition_saddle(sp, tiny_beta, 10.0)));
    CHECK_THROWS_AS(partition_saddle(sp, 0.0, 10.0), validation_error);
}

TEST_CASE("saddle phase is stationary at alpha = 0") {
    const auto sp = random_spectrum();
    const double beta = 0.9;
    const double n = 7.5;
    const double nu = solve_nu(sp, beta, n);
    // g(alpha) = -i N alpha + ln zeta(nu + i alpha); g'(0) = 0 at the fit point
    const double h = 1e-6;
    const auto gp = (log_zeta_complex(sp, 0, sp.size(), {beta, nu}, h) -
                     log_zeta_complex(sp, 0, sp.size(), {beta, nu}, -h)) /
                        (2 * h) -
                    std::complex<double>(0, n);
    CHECK(std::abs(gp.imag()) < 1e-5);
    CHECK(std::abs(gp.real()) < 1e-5);
}

TEST_CASE("modulus inequality off the real axis") {
    // |zeta(nu + i alpha)| < zeta(nu) for alpha != 0 (mod 2pi)
    for (int trial = 0; trial < 20; ++trial) {
        const auto sp = random_spectrum();
        const auto params = random_params(sp);
        const double ln_zeta = log_zeta(sp, params);
        for (int k = 1; k <= 20; ++k) {
            const double alpha = 6.28318530717958648 * k / 21.0; // avoids 0 mod 2pi
            const double ln_mod =
                log_zeta_complex(sp, 0, sp.size(), params, alpha).real();
            CHECK(ln_mod < ln_zeta);
        }
        // per-cell version
        for (size_t i = 0; i < sp.size(); ++i) {
            const double ln_mod = log_zeta_complex(sp, i, i + 1, params, 1.0).real();
            CHECK(ln_mod < log_xi(sp, i, params));
        }
    }
}

TEST_CASE("grand sum over canonical partitions reproduces zeta") {
    // zeta_s(beta,nu) = Σ_n Z(beta,n) e^{nu n}, summed until the analytic
    // geometric tail bound drops below 1e-9 of the partial sum.
    std::uniform_int_distribution<int> s_dist(2, 3), x_dist(0, 3), q_dist(1, 2);
    std::uniform_real_distribution<double> beta_dist(0.5, 1.5), gap_dist(0.6, 1.2);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::pair<Rational, long long>> rows;
        const int s = s_dist(rng());
        for (int i = 0; i < s; ++i) rows.emplace_back(Rational(x_dist(rng())), q_dist(rng()));
        const ValueSpectrum sp = make_spectrum(Rational(1), rows);
        const double beta = beta_dist(rng());
        const double nu = beta * sp.value_real(0) - gap_dist(rng());
        const double y1 = std::exp(nu - beta * sp.value_real(0));
        REQUIRE(y1 <= 0.9);

        const long long q_total = sp.total_multiplicity();
        const double lhs = log_zeta(sp, {beta, nu});
        long long n_max = 64;
        for (;;) {
            const auto table =
                CountTable::build(sp, n_max,
                                  std::max<long long>(n_max * sp.grid_value(sp.size() - 1), 0),
                                  TableLimits{100000, 10000000}, false);
            // log-sum-exp over n of ln Z(beta,n) + nu n
            std::vector<double> terms;
            double max_term = -1e308;
            for (long long n = 0; n <= n_max; ++n) {
                const double t = partition_exact(table, beta, n) + nu * static_cast<double>(n);
                terms.push_back(t);
                max_term = std::max(max_term, t);
            }
            double sum = 0;
            for (double t : terms) sum += std::exp(t - max_term);
            const double ln_sum = max_term + std::log(sum);

            // tail bound: Z(beta,n) e^{nu n} <= C(n+Q-1,Q-1) y1^n for n > n_max,
            // ratio of consecutive term bounds r = y1 (n+Q)/(n+1)
            const double ln_u_term =
                log_big(binomial(n_max + 1 + q_total - 1, q_total - 1)) +
                static_cast<double>(n_max + 1) * std::log(y1);
            const double r = y1 * static_cast<double>(n_max + 1 + q_total) /
                             static_cast<double>(n_max + 2);
            if (r < 1.0 && ln_u_term - std::log(1 - r) < ln_sum + std::log(1e-9)) {
                CHECK(std::abs(std::exp(ln_sum - lhs) - 1.0) < 1e-8);
                break;
            }
            n_max *= 2;
            REQUIRE(n_max <= 1024);
        }
    }
}

TEST_CASE("cosh product lower bound") {
    // for |u|,|v| >= d: cosh(u) cosh(v) > e^d / 2
    std::uniform_real_distribution<double> d_dist(0.0, 3.0), extra(0.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double d = d_dist(rng());
        const double u = (rng()() % 2 ? 1 : -1) * (d + extra(rng()));
        const double v = (rng()() % 2 ? 1 : -1) * (d + extra(rng()));
        CHECK(std::cosh(u) * std::cosh(v) > std::exp(d) / 2.0);
    }
}

TEST_CASE("tilted cosh pair dominates the indicator product (with constant 2)") {
    // Θ(S_l-Δ)Θ(S_{s-l}-Δ) <= 2 e^{-cΔ} cosh(c(B_l-φ_l)) cosh(c(B̄-φ̄)), Θ(0)=1.
    // The provable constant is 2; see the cosh lower bound above.
    const auto sp = three_cells();
    const auto fit = fit_bose(sp, 9.0, 16.0);
    const auto table = CountTable::build(sp, 9, 16);
    std::uniform_real_distribution<double> c_dist(0.01, 2.0), delta_dist(0.0, 6.0);
    for (int trial = 0; trial < 400; ++trial) {
        const size_t l = 1 + rng()() % sp.size();
        const auto occ = sample_uniform(table, trial);
        const double c = c_dist(rng());
        const double delta = delta_dist(rng());
        const double phi_head = cumulative_curve(fit, l);
        const double phi_tail = cumulative_curve(fit, sp.size()) - phi_head;
        const double b_head = static_cast<double>(occ.cumulative[l - 1]);
        const double b_tail = static_cast<double>(occ.total()) - b_head;
        const double s_head = std::abs(b_head - phi_head);
        const double s_tail = std::abs(b_tail - phi_tail);
        const double lhs = (s_head >= delta && s_tail >= delta) ? 1.0 : 0.0;
        const double rhs = 2.0 * std::exp(-c * delta) * std::cosh(c * (b_head - phi_head)) *
                           std::cosh(c * (b_tail - phi_tail));
        CHECK(lhs <= rhs);
    }
}

TEST_CASE("tail bound: c -> 0 limit drops the deviation term") {
    const auto sp = three_cells();
    const auto fit = fit_bose(sp, 10.0, 18.0);
    const double n = 10.0, e = 18.0;
    const double base = log_zeta(sp, {fit.beta, fit.nu}) + fit.beta * e - fit.nu * n;
    const double near0 = chernoff_tail_bound(sp, fit, {1e-12, 5.0, 1}, n, e);
    CHECK(near0 == doctest::Approx(base).epsilon(1e-9));
    CHECK_THROWS_AS(chernoff_tail_bound(sp, fit, {0.0, 5.0, 1}, n, e), validation_error);
    CHECK_THROWS_AS(chernoff_tail_bound(sp, fit, {0.1, -1.0, 1}, n, e), validation_error);
    CHECK_THROWS_AS(chernoff_tail_bound(sp, fit, {0.1, 5.0, 3}, n, e), validation_error);
    CHECK_THROWS_AS(chernoff_tail_bound(sp, fit, {0.1, 5.0, 0}, n, e), validation_error);
}

TEST_CASE("tail bound dominates the exact deviating count on a desk instance") {
    const auto sp = make_spectrum(Rational(1), {{Rational(1), 2}, {Rational(2), 2}});
    const long long n = 30;
    const auto budget = make_budget(sp, n, Rational(3, 2)); // E = 45
    const auto fit = fit_bose(sp, budget);
    const auto table = CountTable::build(sp, budget);
    const BigCount total = count_variants(table);
    REQUIRE(total > 0);
    const size_t l = 1;
    // the tilt must stay inside the admissibility gap: zeta(nu+c) only
    // converges for c < beta*x_1 - nu
    const double gap = fit.beta * sp.value_real(0) - fit.nu;
    for (const double delta : {2.0, 5.0, 9.0, 15.0, 22.0}) {
        const BigCount tail = exact_tail_count(table, fit, l, delta);
        for (const double frac : {0.02, 0.05, 0.1, 0.2, 0.4}) {
            const double c = frac * gap;
            const double bound = chernoff_tail_bound(sp, fit, {c, delta, l},
                                                     static_cast<double>(n),
                                                     budget.energy_real());
            if (tail > 0) CHECK(bound >= log_big(tail));
        }
    }
}

TEST_CASE("saddle stationarity reproduces the fitted nu") {
    const auto sp = three_cells();
    const auto budget = make_budget(sp, 40, Rational(2));
    const auto fit = fit_bose(sp, budget);
    const double nu = solve_nu(sp, fit.beta, 40.0);
    CHECK(std::abs(nu - fit.nu) < 1e-8);
}
