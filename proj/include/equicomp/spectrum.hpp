#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "equicomp/errors.hpp"
#include "equicomp/rational.hpp"

namespace equicomp {

// Ordered distinct energy values x_1 < ... < x_s with multiplicities q_i,
// placed exactly on the integer grid defined by the quantum u: x_i = grid[i]*u.
// Immutable after construction; all downstream counting runs on the grid.
class ValueSpectrum {
public:
    ValueSpectrum(Rational quantum, std::vector<long long> grid,
                  std::vector<long long> multiplicity)
        : quantum_(quantum), grid_(std::move(grid)), mult_(std::move(multiplicity)) {
        validate();
        values_real_.reserve(grid_.size());
        for (long long g : grid_)
            values_real_.push_back((quantum_ * Rational(g)).to_double());
    }

    size_t size() const { return grid_.size(); }
    const Rational& quantum() const { return quantum_; }
    long long grid_value(size_t i) const { return grid_[i]; }
    long long multiplicity(size_t i) const { return mult_[i]; }
    Rational value(size_t i) const { return quantum_ * Rational(grid_[i]); }
    double value_real(size_t i) const { return values_real_[i]; }
    const std::vector<long long>& grid() const { return grid_; }
    const std::vector<long long>& multiplicities() const { return mult_; }

    long long total_multiplicity() const {
        long long q = 0;
        for (long long m : mult_) q += m;
        return q;
    }

    // x̄ = Σ q_i x_i / Q
    Rational mean_value() const {
        __int128 num = 0;
        long long q_total = 0;
        for (size_t i = 0; i < grid_.size(); ++i) {
            num += (__int128)mult_[i] * grid_[i];
            q_total += mult_[i];
        }
        const Rational grid_mean = Rational::from_int128(num, q_total);
        return grid_mean * quantum_;
    }

private:
    void validate() const {
        if (quantum_.num <= 0) throw validation_error("quantum must be positive");
        if (grid_.empty()) throw validation_error("spectrum must contain at least one value");
        if (grid_.size() != mult_.size())
            throw validation_error("values and multiplicities differ in length");
        for (size_t i = 0; i < grid_.size(); ++i) {
            if (grid_[i] < 0) throw validation_error("negative energy value at cell " + std::to_string(i + 1));
            if (mult_[i] < 1) throw validation_error("nonpositive multiplicity at cell " + std::to_string(i + 1));
            if (i > 0 && grid_[i] <= grid_[i - 1])
                throw validation_error("values not strictly increasing at cell " + std::to_string(i + 1));
        }
    }

    Rational quantum_;
    std::vector<long long> grid_;
    std::vector<long long> mult_;
    std::vector<double> values_real_;
};

// Snaps a value to the integer grid of `quantum`, tolerating relative
// off-grid error up to 1e-9 of the quantum. Exact rational comparison.
inline long long snap_to_grid(const Rational& value, const Rational& quantum) {
    const Rational steps = value / quantum;
    const long long k = round_to_integer(steps);
    const Rational err = abs(steps - Rational(k));
    if (!(err <= Rational(1, 1000000000)))
        throw validation_error("value " + value.str() + " is not on the grid of quantum " +
                               quantum.str());
    return k;
}

// Merges duplicate values (multiplicities summed) and sorts ascending.
inline ValueSpectrum make_spectrum(const Rational& quantum,
                                   const std::vector<std::pair<Rational, long long>>& rows) {
    if (quantum.num <= 0) throw validation_error("quantum must be positive");
    std::map<long long, long long> cells;
    for (size_t r = 0; r < rows.size(); ++r) {
        const auto& [value, mult] = rows[r];
        if (value.num < 0)
            throw validation_error("row " + std::to_string(r + 1) + ": negative value");
        if (mult < 1)
            throw validation_error("row " + std::to_string(r + 1) + ": multiplicity must be >= 1");
        long long g;
        try {
            g = snap_to_grid(value, quantum);
        } catch (const validation_error& e) {
            throw validation_error("row " + std::to_string(r + 1) + ": " + e.what());
        }
        cells[g] += mult;
    }
    std::vector<long long> grid, mult;
    grid.reserve(cells.size());
    mult.reserve(cells.size());
    for (const auto& [g, q] : cells) {
        grid.push_back(g);
        mult.push_back(q);
    }
    return ValueSpectrum(quantum, std::move(grid), std::move(mult));
}

// CSV file with header `value,multiplicity`; value is a decimal or `p/q`.
inline ValueSpectrum load_spectrum(const std::string& path, const Rational& quantum) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open spectrum file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw validation_error(path + ": empty spectrum file");
    auto strip = [](std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(),
                               [](unsigned char c) { return std::isspace(c); }),
                s.end());
        return s;
    };
    if (strip(line) != "value,multiplicity")
        throw validation_error(path + ":1: expected header 'value,multiplicity'");

    std::vector<std::pair<Rational, long long>> rows;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw validation_error(path + ":" + std::to_string(lineno) + ": expected two columns");
        const std::string vcol = line.substr(0, comma);
        const std::string mcol = line.substr(comma + 1);
        if (mcol.find(',') != std::string::npos)
            throw validation_error(path + ":" + std::to_string(lineno) + ": too many columns");
        Rational value;
        try {
            value = parse_rational(vcol);
        } catch (const validation_error& e) {
            throw validation_error(path + ":" + std::to_string(lineno) + ": column 1: " + e.what());
        }
        long long mult = 0;
        try {
            const Rational m = parse_rational(mcol);
            if (!m.is_integer()) throw validation_error("multiplicity must be an integer");
            mult = m.num;
        } catch (const validation_error& e) {
            throw validation_error(path + ":" + std::to_string(lineno) + ": column 2: " + e.what());
        }
        rows.emplace_back(value, mult);
    }
    try {
        return make_spectrum(quantum, rows);
    } catch (const validation_error& e) {
        throw validation_error(path + ": " + e.what());
    }
}

inline void save_spectrum_csv(const ValueSpectrum& spectrum, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write spectrum file '" + path + "'");
    out << "value,multiplicity\n";
    for (size_t i = 0; i < spectrum.size(); ++i)
        out << spectrum.value(i).str() << "," << spectrum.multiplicity(i) << "\n";
    if (!out) throw io_error("write failed for '" + path + "'");
}

inline std::string spectrum_to_json(const ValueSpectrum& spectrum) {
    std::ostringstream os;
    os << "{\"multiplicities\":[";
    for (size_t i = 0; i < spectrum.size(); ++i)
        os << (i ? "," : "") << spectrum.multiplicity(i);
    os << "],\"quantum\":\"" << spectrum.quantum().str() << "\",\"values\":[";
    for (size_t i = 0; i < spectrum.size(); ++i)
        os << (i ? "," : "") << '"' << spectrum.value(i).str() << '"';
    os << "]}";
    return os.str();
}

// Tiles the value set `copies` times at a stride of one quantum past the
// largest value, growing s proportionally while keeping the quantum.
inline ValueSpectrum replicate_spectrum(const ValueSpectrum& spectrum, long long copies) {
    if (copies < 1) throw validation_error("replication factor must be >= 1");
    if (copies == 1) return spectrum;
    const long long stride = spectrum.grid_value(spectrum.size() - 1) + 1;
    std::vector<long long> grid, mult;
    grid.reserve(spectrum.size() * copies);
    mult.reserve(spectrum.size() * copies);
    for (long long c = 0; c < copies; ++c) {
        for (size_t i = 0; i < spectrum.size(); ++i) {
            grid.push_back(c * stride + spectrum.grid_value(i));
            mult.push_back(spectrum.multiplicity(i));
        }
    }
    return ValueSpectrum(spectrum.quantum(), std::move(grid), std::move(mult));
}

// Regime checks are advisory only: desk-scale experiments run with a small
// fixed s on purpose.
inline std::vector<std::string> regime_warnings(const ValueSpectrum& spectrum, long long n,
                                                double a1 = 0.05, double a2 = 20.0,
                                                const Rational& bound = Rational(1000000)) {
    std::vector<std::string> warnings;
    const double s = static_cast<double>(spectrum.size());
    if (n > 0 && (s < a1 * n || s > a2 * n))
        warnings.push_back("cell count s=" + std::to_string(spectrum.size()) +
                           " is outside the proportional band for N=" + std::to_string(n));
    if (spectrum.value(spectrum.size() - 1) > bound)
        warnings.push_back("largest value " + spectrum.value(spectrum.size() - 1).str() +
                           " exceeds the declared bound " + bound.str());
    return warnings;
}

// Particle count N with energy budget E = M*N held exactly on the grid.
struct EnsembleBudget {
    long long n = 0;        // particles
    long long e_grid = 0;   // energy budget in quantum units
    Rational quantum;       // copied from the spectrum
    Rational mean;          // M = E/N
    Rational xbar;          // Σ q_i x_i / Q

    Rational energy() const { return quantum * Rational(e_grid); }
    double energy_real() const { return energy().to_double(); }
};

inline EnsembleBudget make_budget(const ValueSpectrum& spectrum, long long n,
                                  const Rational& mean) {
    if (n < 1) throw validation_error("particle count must be >= 1");
    if (mean.num < 0) throw validation_error("mean energy must be nonnegative");
    const Rational xbar = spectrum.mean_value();
    if (mean > xbar)
        throw validation_error("inadmissible mean: M=" + mean.str() + " exceeds x̄=" + xbar.str());
    const Rational e = mean * Rational(n);
    const Rational steps = e / spectrum.quantum();
    if (!steps.is_integer())
        throw validation_error("energy budget E=" + e.str() + " is not a multiple of the quantum " +
                               spectrum.quantum().str());
    EnsembleBudget budget;
    budget.n = n;
    budget.e_grid = steps.num;
    budget.quantum = spectrum.quantum();
    budget.mean = mean;
    budget.xbar = xbar;
    return budget;
}

} // namespace equicomp
