#include "mcsim/fuel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mcsim {

namespace {

// Index of the grid cell containing x, clamped so interpolation saturates at
// the edges: returns i with axis[i] <= x < axis[i+1] conceptually.
std::size_t cell_index(const std::vector<double>& axis, double x) {
    if (x <= axis.front()) return 0;
    if (x >= axis.back()) return axis.size() - 2;
    auto it = std::upper_bound(axis.begin(), axis.end(), x);
    return static_cast<std::size_t>(it - axis.begin()) - 1;
}

double cell_frac(const std::vector<double>& axis, std::size_t i, double x) {
    if (x <= axis.front()) return 0.0;
    if (x >= axis.back()) return 1.0;
    return (x - axis[i]) / (axis[i + 1] - axis[i]);
}

void require_increasing(const std::vector<double>& axis, const char* name) {
    if (axis.size() < 2)
        throw std::invalid_argument(std::string(name) +
                                    " axis needs at least two entries");
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (!(axis[i] > axis[i - 1]))
            throw std::invalid_argument(std::string(name) +
                                        " axis must be strictly increasing");
}

} // namespace

FuelMap FuelMap::polynomial(const FuelPolynomial& p) {
    if (p.idle_rate < 0.0)
        throw std::invalid_argument("idle rate must be non-negative");
    FuelMap m(false);
    m.poly_ = p;
    return m;
}

FuelMap FuelMap::table(std::vector<double> v_axis, std::vector<double> a_axis,
                       std::vector<double> rates) {
    require_increasing(v_axis, "velocity");
    require_increasing(a_axis, "acceleration");
    if (rates.size() != v_axis.size() * a_axis.size())
        throw std::invalid_argument("rate grid does not match the axes");
    for (double r : rates)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("rates must be finite and non-negative");
    FuelMap m(true);
    m.v_axis_ = std::move(v_axis);
    m.a_axis_ = std::move(a_axis);
    m.rates_ = std::move(rates);
    return m;
}

FuelMap FuelMap::load_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open fuel table: " + path);
    std::vector<double> v_axis, a_axis, rates;
    std::string line;
    bool header = true;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            ++col;
            if (header && col == 1) continue; // corner cell is a label
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::invalid_argument("fuel table row " +
                                            std::to_string(row) +
                                            ": bad number '" + cell + "'");
            }
        }
        if (header) {
            a_axis = vals;
            header = false;
            continue;
        }
        if (vals.size() != a_axis.size() + 1)
            throw std::invalid_argument("fuel table row " + std::to_string(row) +
                                        ": expected " +
                                        std::to_string(a_axis.size() + 1) +
                                        " cells");
        v_axis.push_back(vals.front());
        rates.insert(rates.end(), vals.begin() + 1, vals.end());
    }
    return table(std::move(v_axis), std::move(a_axis), std::move(rates));
}

double FuelMap::rate(double v, double a) const {
    if (!tabulated_) {
        const FuelPolynomial& p = poly_;
        double r = p.c0 + p.c1 * v + p.c2 * v * v + p.c3 * v * v * v +
                   p.c4 * std::max(0.0, a) * v;
        return std::max(p.idle_rate, r);
    }
    std::size_t i = cell_index(v_axis_, v);
    std::size_t j = cell_index(a_axis_, a);
    double fv = cell_frac(v_axis_, i, v);
    double fa = cell_frac(a_axis_, j, a);
    const std::size_t na = a_axis_.size();
    double r00 = rates_[i * na + j];
    double r01 = rates_[i * na + j + 1];
    double r10 = rates_[(i + 1) * na + j];
    double r11 = rates_[(i + 1) * na + j + 1];
    double r0 = r00 + (r01 - r00) * fa;
    double r1 = r10 + (r11 - r10) * fa;
    return r0 + (r1 - r0) * fv;
}

double FuelMap::idle_rate() const {
    if (!tabulated_) return poly_.idle_rate;
    return rate(0.0, 0.0);
}

double integrate_fuel(const FuelMap& map, std::span<const VaSample> trace,
                      double dt) {
    if (trace.size() < 2) return 0.0;
    double prev = map.rate(trace[0].v, trace[0].a);
    double total = 0.0;
    for (std::size_t k = 1; k < trace.size(); ++k) {
        double cur = map.rate(trace[k].v, trace[k].a);
        total += 0.5 * (prev + cur) * dt;
        prev = cur;
    }
    return total;
}

} // namespace mcsim
