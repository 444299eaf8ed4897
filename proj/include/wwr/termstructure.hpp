#pragma once

/**
 * @file termstructure.hpp
 * @brief Survival curves G(t), hazard rates h(t), and the deterministic shift
 *        calibrating a latent affine intensity to an external curve.
 *
 * Curves interpolate linearly in ln G, i.e. the hazard rate is piecewise
 * constant between knots, which makes survival integrals exact.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wwr {

/// Market survival probability curve with piecewise-constant hazard.
class SurvivalCurve {
public:
    /// Build from ln G values at ascending knots; grid[0] must be 0 with
    /// log_g[0] = 0, and ln G must be non-increasing.
    SurvivalCurve(std::vector<double> grid, std::vector<double> log_g)
        : grid_(std::move(grid)), logg_(std::move(log_g)) {
        validate();
    }

    /// Flat-hazard curve G(t) = exp(-h t) over [0, span].
    static SurvivalCurve flat(double hazard, double span) {
        return SurvivalCurve({0.0, span}, {0.0, -hazard * span});
    }

    static SurvivalCurve from_survival(std::vector<double> grid,
                                       const std::vector<double>& g) {
        std::vector<double> logg(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!(g[i] > 0.0))
                throw std::invalid_argument(
                    "SurvivalCurve: survival probabilities must be positive");
            logg[i] = std::log(g[i]);
        }
        return SurvivalCurve(std::move(grid), std::move(logg));
    }

    /// Sample a zero-coupon/survival bond function on a uniform grid.
    static SurvivalCurve sample(const std::function<double(double)>& bond,
                                double span, double step = 0.005) {
        if (!(span > 0.0) || !(step > 0.0))
            throw std::invalid_argument("SurvivalCurve::sample: span and step must be positive");
        const std::size_t n = static_cast<std::size_t>(std::ceil(span / step - 1e-9));
        std::vector<double> grid(n + 1), logg(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            const double t = std::min(i * step, span);
            grid[i] = t;
            logg[i] = i == 0 ? 0.0 : std::log(bond(t));
        }
        grid.back() = span;
        return SurvivalCurve(std::move(grid), std::move(logg));
    }

    /// Parse the CSV interface format: header "t,G", strictly ascending t,
    /// first row "0,1".
    static SurvivalCurve load_csv(std::istream& in) {
        std::string line;
        if (!std::getline(in, line))
            throw std::invalid_argument("curve CSV: empty input");
        if (trimmed(line) != "t,G")
            throw std::invalid_argument("curve CSV: expected header \"t,G\"");
        std::vector<double> grid, g;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string row = trimmed(line);
            if (row.empty()) continue;
            const auto comma = row.find(',');
            if (comma == std::string::npos)
                throw std::invalid_argument("curve CSV: missing comma on line " +
                                            std::to_string(lineno));
            grid.push_back(parse_number(row.substr(0, comma), lineno));
            g.push_back(parse_number(row.substr(comma + 1), lineno));
        }
        if (grid.empty())
            throw std::invalid_argument("curve CSV: no data rows");
        if (grid.front() != 0.0 || g.front() != 1.0)
            throw std::invalid_argument("curve CSV: first row must be 0,1");
        return from_survival(std::move(grid), g);
    }

    static SurvivalCurve load_csv_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open curve file: " + path);
        return load_csv(in);
    }

    double log_survival(double t) const {
        const std::size_t i = interval_index(t);
        const double w = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
        return logg_[i] + w * (logg_[i + 1] - logg_[i]);
    }

    /// G(t) in (0, 1]; exact at knots.
    double survival(double t) const { return std::exp(log_survival(t)); }

    /// h(t) = -d/dt ln G(t). At interior knots this is the right-limit slope;
    /// at the final knot the last interval's slope is returned.
    double hazard(double t) const {
        const std::size_t i = interval_index(t);
        return -(logg_[i + 1] - logg_[i]) / (grid_[i + 1] - grid_[i]);
    }

    double span() const { return grid_.back(); }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& log_survival_values() const { return logg_; }

private:
    void validate() const {
        if (grid_.size() < 2 || grid_.size() != logg_.size())
            throw std::invalid_argument("SurvivalCurve: need at least two knots");
        if (grid_.front() != 0.0)
            throw std::invalid_argument("SurvivalCurve: grid must start at 0");
        if (logg_.front() != 0.0)
            throw std::invalid_argument("SurvivalCurve: G(0) must equal 1");
        for (std::size_t i = 1; i < grid_.size(); ++i) {
            if (!(grid_[i] > grid_[i - 1]))
                throw std::invalid_argument("SurvivalCurve: grid must be strictly ascending");
            if (logg_[i] > logg_[i - 1])
                throw std::invalid_argument("SurvivalCurve: survival must be non-increasing");
            if (!std::isfinite(logg_[i]))
                throw std::invalid_argument("SurvivalCurve: survival must stay positive");
        }
    }

    std::size_t interval_index(double t) const {
        if (!(t >= 0.0) || t > grid_.back())
            throw std::out_of_range("SurvivalCurve: t=" + std::to_string(t) +
                                    " outside [0," + std::to_string(grid_.back()) + "]");
        if (t >= grid_.back()) return grid_.size() - 2;
        const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
        return static_cast<std::size_t>(it - grid_.begin()) - 1;
    }

    static std::string trimmed(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static double parse_number(const std::string& field, std::size_t lineno) {
        const std::string f = trimmed(field);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
        if (ec != std::errc() || ptr != f.data() + f.size())
            throw std::invalid_argument("curve CSV: bad number on line " +
                                        std::to_string(lineno));
        return value;
    }

    std::vector<double> grid_;
    std::vector<double> logg_;
};

/// Deterministic intensity shift psi with running integral Psi.
///
/// psi is piecewise constant on the knot intervals (same convention as the
/// curve hazard), so Psi is piecewise linear with Psi(0) = 0. A default
/// constructed shift is identically zero on all of [0, inf).
class ShiftFunction {
public:
    ShiftFunction() = default;

    ShiftFunction(std::vector<double> grid, std::vector<double> psi_per_interval)
        : grid_(std::move(grid)), psi_(std::move(psi_per_interval)) {
        if (grid_.size() < 2 || psi_.size() != grid_.size() - 1)
            throw std::invalid_argument("ShiftFunction: psi needs one value per interval");
        if (grid_.front() != 0.0)
            throw std::invalid_argument("ShiftFunction: grid must start at 0");
        cum_.resize(grid_.size());
        cum_[0] = 0.0;
        for (std::size_t i = 1; i < grid_.size(); ++i) {
            if (!(grid_[i] > grid_[i - 1]))
                throw std::invalid_argument("ShiftFunction: grid must be strictly ascending");
            cum_[i] = cum_[i - 1] + psi_[i - 1] * (grid_[i] - grid_[i - 1]);
        }
    }

    static ShiftFunction zero() { return {}; }

    bool is_zero() const { return grid_.empty(); }

    /// psi(t); right-continuous at knots, last interval value at the end knot.
    double psi(double t) const {
        if (is_zero()) return 0.0;
        return psi_[interval_index(t)];
    }

    /// Psi(t) = integral of psi over [0, t].
    double integral(double t) const {
        if (is_zero()) return 0.0;
        const std::size_t i = interval_index(t);
        return cum_[i] + psi_[i] * (t - grid_[i]);
    }

    /// Psi(s, t) = Psi(t) - Psi(s).
    double integral(double s, double t) const {
        return integral(t) - integral(s);
    }

    bool has_negative_psi() const {
        return std::any_of(psi_.begin(), psi_.end(), [](double x) { return x < 0.0; });
    }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& psi_values() const { return psi_; }

private:
    std::size_t interval_index(double t) const {
        if (!(t >= 0.0) || t > grid_.back() + 1e-12)
            throw std::out_of_range("ShiftFunction: t=" + std::to_string(t) +
                                    " outside [0," + std::to_string(grid_.back()) + "]");
        if (t >= grid_.back()) return grid_.size() - 2;
        const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
        return static_cast<std::size_t>(it - grid_.begin()) - 1;
    }

    std::vector<double> grid_;
    std::vector<double> psi_;   // per interval
    std::vector<double> cum_;   // Psi at knots
};

/// Imply the shift psi(t) = d/dt ln(P^y(0,t)/G(t)) on the market grid.
///
/// With both ln P^y and ln G treated piecewise linearly between market knots,
/// the calibration P^y(0,t) e^{-Psi(t)} = G(t) then holds exactly at every
/// knot (telescoping sum). Negative psi values are legal but queryable via
/// ShiftFunction::has_negative_psi.
inline ShiftFunction calibrate_shift(const std::function<double(double)>& model_bond,
                                     const SurvivalCurve& market) {
    const std::vector<double>& grid = market.grid();
    std::vector<double> psi(grid.size() - 1);
    double prev = 0.0;  // ln(P/G) at t=0
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double p = model_bond(grid[i]);
        if (!(p > 0.0))
            throw std::invalid_argument("calibrate_shift: model bond must be positive");
        const double cur = std::log(p) - market.log_survival(grid[i]);
        psi[i - 1] = (cur - prev) / (grid[i] - grid[i - 1]);
        prev = cur;
    }
    return ShiftFunction(grid, std::move(psi));
}

} // namespace wwr
