#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "equicomp/befit.hpp"
#include "equicomp/bigcount.hpp"
#include "equicomp/errors.hpp"
#include "equicomp/parallel.hpp"
#include "equicomp/spectrum.hpp"

namespace equicomp {

// One aggregate occupancy variant {N_i} with its cumulative sums and grid energy.
struct Occupancy {
    std::vector<long long> counts;     // N_i per cell
    std::vector<long long> cumulative; // B_l = Σ_{i<=l} N_i
    long long energy_grid = 0;         // Σ N_i x_i in quantum units

    long long total() const { return cumulative.empty() ? 0 : cumulative.back(); }
};

struct TableLimits {
    long long max_particles = 10000;
    long long max_energy_cells = 1000000;
};

namespace detail {

// Dense (n, e) grid of exact counts for one DP stage.
struct StageGrid {
    long long n_max = 0;
    long long e_cap = 0;
    std::vector<BigCount> cells; // (n_max+1) x (e_cap+1), energy minor

    void init(long long n, long long e) {
        n_max = n;
        e_cap = e;
        cells.assign(static_cast<size_t>((n + 1) * (e + 1)), BigCount(0));
    }
    BigCount& at(long long n, long long e) {
        return cells[static_cast<size_t>(n * (e_cap + 1) + e)];
    }
    const BigCount& at(long long n, long long e) const {
        return cells[static_cast<size_t>(n * (e_cap + 1) + e)];
    }
};

// Stars-and-bars weights for one cell: w[m] = C(m + q - 1, q - 1), the number
// of ways m particles split over the cell's q slots.
inline std::vector<BigCount> cell_weights(long long q, long long n_max) {
    std::vector<BigCount> w(static_cast<size_t>(n_max + 1));
    w[0] = 1;
    for (long long m = 1; m <= n_max; ++m) {
        w[static_cast<size_t>(m)] = w[static_cast<size_t>(m - 1)] * (m + q - 1) / m;
    }
    return w;
}

} // namespace detail

// Degeneracy-weighted count table: stage k holds, for every particle split n
// and exact grid energy e, the number of slot-level variants over the first k
// cells of the range: counts[k][n][e] = Σ_m C(m+q_k-1, q_k-1) * counts[k-1][n-m][e-m*x_k].
class CountTable {
public:
    // cell_begin/cell_end select a contiguous cell range [begin, end), so the
    // same recurrence also builds suffix tables for the deviation split.
    static CountTable build(const ValueSpectrum& spectrum, long long n, long long e_cap,
                            const TableLimits& limits = {}, bool keep_stages = true,
                            size_t cell_begin = 0, size_t cell_end = SIZE_MAX) {
        if (n < 0) throw validation_error("particle count must be nonnegative");
        if (e_cap < 0) throw validation_error("energy cap must be nonnegative");
        if (cell_end == SIZE_MAX) cell_end = spectrum.size();
        if (cell_begin > cell_end || cell_end > spectrum.size())
            throw validation_error("cell range out of bounds");
        if (n > limits.max_particles)
            throw guard_error("table guard: N=" + std::to_string(n) + " exceeds limit " +
                              std::to_string(limits.max_particles));
        if (e_cap + 1 > limits.max_energy_cells)
            throw guard_error("table guard: " + std::to_string(e_cap + 1) +
                              " energy cells exceed limit " +
                              std::to_string(limits.max_energy_cells));

        CountTable table;
        table.spectrum_ = spectrum;
        table.n_max_ = n;
        table.e_cap_ = e_cap;
        table.cell_begin_ = cell_begin;
        table.cell_end_ = cell_end;
        table.keep_stages_ = keep_stages;

        detail::StageGrid current;
        current.init(n, e_cap);
        current.at(0, 0) = 1;

        for (size_t k = cell_begin; k < cell_end; ++k) {
            const long long x = spectrum.grid_value(k);
            table.weights_.push_back(detail::cell_weights(spectrum.multiplicity(k), n));
            const auto& w = table.weights_.back();
            detail::StageGrid next;
            next.init(n, e_cap);
            for (long long np = 0; np <= n; ++np) {
                for (long long ep = 0; ep <= e_cap; ++ep) {
                    const BigCount& src = current.at(np, ep);
                    if (src == 0) continue;
                    const long long m_max =
                        x > 0 ? std::min(n - np, (e_cap - ep) / x) : n - np;
                    for (long long m = 0; m <= m_max; ++m) {
                        next.at(np + m, ep + m * x) += w[static_cast<size_t>(m)] * src;
                    }
                }
            }
            if (keep_stages) table.stages_.push_back(std::move(current));
            current = std::move(next);
        }
        if (keep_stages) table.stages_.push_back(std::move(current));
        else table.final_only_ = std::move(current);
        return table;
    }

    static CountTable build(const ValueSpectrum& spectrum, const EnsembleBudget& budget,
                            const TableLimits& limits = {}, bool keep_stages = true) {
        return build(spectrum, budget.n, budget.e_grid, limits, keep_stages);
    }

    const ValueSpectrum& spectrum() const { return *spectrum_; }
    long long n_max() const { return n_max_; }
    long long e_cap() const { return e_cap_; }
    size_t cell_begin() const { return cell_begin_; }
    size_t cell_end() const { return cell_end_; }
    size_t cells() const { return cell_end_ - cell_begin_; }
    bool has_stages() const { return keep_stages_; }
    bool full_spectrum() const { return cell_begin_ == 0 && cell_end_ == spectrum_->size(); }

    // Weight table of the range's k-th cell, indexed by occupation m.
    const std::vector<BigCount>& weights(size_t k) const { return weights_[k]; }

    // Final-stage count at exact (n, e).
    const BigCount& at(long long n, long long e) const {
        require_in_range(n, e);
        return final_grid().at(n, e);
    }

    // Stage k in 0..cells(): counts over the first k cells of the range.
    const BigCount& at_stage(size_t k, long long n, long long e) const {
        require_stages();
        if (k >= stages_.size()) throw validation_error("stage index out of range");
        require_in_range(n, e);
        return stages_[k].at(n, e);
    }

    // Σ_{e <= e_limit} counts[s][n][e]
    BigCount count_at_most(long long n, long long e_limit) const {
        require_in_range(n, 0);
        if (e_limit > e_cap_) e_limit = e_cap_;
        BigCount sum = 0;
        const auto& grid = final_grid();
        for (long long e = 0; e <= e_limit; ++e) sum += grid.at(n, e);
        return sum;
    }

    // 𝒩{ℳ}: all variants with Σ N_i = N and energy within the table budget.
    BigCount total() const { return count_at_most(n_max_, e_cap_); }

private:
    const detail::StageGrid& final_grid() const {
        return keep_stages_ ? stages_.back() : final_only_;
    }
    void require_in_range(long long n, long long e) const {
        if (n < 0 || n > n_max_ || e < 0 || e > e_cap_)
            throw validation_error("table index out of range");
    }
    void require_stages() const {
        if (!keep_stages_)
            throw validation_error("table was built without per-stage storage");
    }

    // Spectrum kept by value; tables outlive the scope that built them.
    std::optional<ValueSpectrum> spectrum_;
    long long n_max_ = 0;
    long long e_cap_ = 0;
    size_t cell_begin_ = 0;
    size_t cell_end_ = 0;
    bool keep_stages_ = true;
    std::vector<std::vector<BigCount>> weights_;
    std::vector<detail::StageGrid> stages_;
    detail::StageGrid final_only_;
};

inline BigCount count_variants(const CountTable& table) { return table.total(); }

// Draws one aggregate occupancy with probability proportional to its
// slot-level weight Π C(N_i+q_i-1, q_i-1): first the exact total energy from
// the final-stage marginal, then a backward walk over the stages. The walk is
// pure integer arithmetic; deterministic for a fixed seed.
inline Occupancy sample_uniform(const CountTable& table, std::uint64_t seed) {
    if (!table.has_stages())
        throw validation_error("sampling requires a table built with per-stage storage");
    if (!table.full_spectrum())
        throw validation_error("sampling requires a full-spectrum table");
    const BigCount total = table.total();
    if (total == 0) throw validation_error("empty ensemble: no variant satisfies the budget");

    std::mt19937_64 rng(seed);
    const long long n_total = table.n_max();

    BigCount r = uniform_below(total, rng);
    long long energy = -1;
    for (long long e = 0; e <= table.e_cap(); ++e) {
        const BigCount& c = table.at(n_total, e);
        if (r < c) {
            energy = e;
            break;
        }
        r -= c;
    }
    if (energy < 0) throw validation_error("energy selection failed"); // unreachable

    const ValueSpectrum& spectrum = table.spectrum();
    const size_t s = spectrum.size();
    Occupancy occ;
    occ.counts.assign(s, 0);
    occ.energy_grid = energy;

    long long n = n_total;
    long long e = energy;
    for (size_t k = s; k-- > 0;) {
        const long long x = spectrum.grid_value(k);
        const auto& w = table.weights(k);
        BigCount rk = uniform_below(table.at_stage(k + 1, n, e), rng);
        const long long m_max = x > 0 ? std::min(n, e / x) : n;
        long long chosen = -1;
        for (long long m = 0; m <= m_max; ++m) {
            const BigCount option = w[static_cast<size_t>(m)] * table.at_stage(k, n - m, e - m * x);
            if (rk < option) {
                chosen = m;
                break;
            }
            rk -= option;
        }
        if (chosen < 0) throw validation_error("occupancy walk failed"); // unreachable
        occ.counts[k] = chosen;
        n -= chosen;
        e -= chosen * x;
    }

    occ.cumulative.resize(s);
    long long run = 0;
    for (size_t i = 0; i < s; ++i) {
        run += occ.counts[i];
        occ.cumulative[i] = run;
    }
    return occ;
}

// S_l = |B_l − Σ_{i<=l} φ_i| for l in 1..s.
inline double deviation(const Occupancy& occupancy, const BoseFit& fit, size_t l) {
    if (l < 1 || l > occupancy.cumulative.size())
        throw validation_error("cell index " + std::to_string(l) + " out of range 1.." +
                               std::to_string(occupancy.cumulative.size()));
    return std::abs(static_cast<double>(occupancy.cumulative[l - 1]) - cumulative_curve(fit, l));
}

// Exact weighted count of variants with S_l >= delta (inclusive). Splits the
// ensemble at cell l: head counts come from stage l of the table, tail counts
// from a fresh table over cells l+1..s, convolved under the shared energy
// budget. Parallel over the head particle count.
inline BigCount exact_tail_count(const CountTable& table, const BoseFit& fit, size_t l,
                                 double delta, const TableLimits& limits = {}) {
    const size_t s = table.spectrum().size();
    if (l < 1 || l > s)
        throw validation_error("cell index " + std::to_string(l) + " out of range 1.." +
                               std::to_string(s));
    if (delta < 0) throw validation_error("delta must be nonnegative");
    if (!table.has_stages())
        throw validation_error("tail counting requires a table built with per-stage storage");
    if (!table.full_spectrum())
        throw validation_error("tail counting requires a full-spectrum table");

    const long long n_total = table.n_max();
    const long long e_cap = table.e_cap();
    const double curve = cumulative_curve(fit, l);
    if (delta > static_cast<double>(n_total) + curve) return BigCount(0);

    const CountTable suffix =
        CountTable::build(table.spectrum(), n_total, e_cap, limits, false, l, s);

    // tail_cum[m][e'] = number of suffix variants with m particles and energy <= e'.
    std::vector<std::vector<BigCount>> tail_cum(static_cast<size_t>(n_total + 1));
    for (long long m = 0; m <= n_total; ++m) {
        auto& row = tail_cum[static_cast<size_t>(m)];
        row.resize(static_cast<size_t>(e_cap + 1));
        BigCount run = 0;
        for (long long e = 0; e <= e_cap; ++e) {
            run += suffix.at(m, e);
            row[static_cast<size_t>(e)] = run;
        }
    }

    std::vector<BigCount> chunk_sums(static_cast<size_t>(n_total + 1), BigCount(0));
    for_each_chunk(n_total + 1, [&](long long chunk, long long begin, long long end) {
        BigCount local = 0;
        for (long long b = begin; b < end; ++b) {
            if (std::abs(static_cast<double>(b) - curve) < delta) continue;
            const auto& tail_row = tail_cum[static_cast<size_t>(n_total - b)];
            for (long long e1 = 0; e1 <= e_cap; ++e1) {
                const BigCount& head = table.at_stage(l, b, e1);
                if (head == 0) continue;
                local += head * tail_row[static_cast<size_t>(e_cap - e1)];
            }
        }
        chunk_sums[static_cast<size_t>(chunk)] = std::move(local);
    });
    BigCount total = 0;
    for (const auto& c : chunk_sums) total += c;
    return total;
}

} // namespace equicomp
