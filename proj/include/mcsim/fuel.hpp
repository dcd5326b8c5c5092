#pragma once

#include <span>
#include <string>
#include <vector>

namespace mcsim {

// Coefficients of the polynomial fuel-rate form
//   rate(v, a) = max(idle, c0 + c1*v + c2*v^2 + c3*v^3 + c4*max(0,a)*v).
// The defaults model an engine whose consumption is dominated by a fixed
// overhead, with a mild speed slope and a kinetic-energy term for
// acceleration; braking and coasting fall back toward the overhead.
struct FuelPolynomial {
    double c0 = 0.55;
    double c1 = 0.004;
    double c2 = 0.0;
    double c3 = 1.5e-6;
    double c4 = 0.05;
    double idle_rate = 0.55; // g/s floor
};

// Instantaneous fuel rate map, g/s as a function of (speed, acceleration).
// Either a polynomial form or a tabulated grid with bilinear interpolation
// (clamped to the grid edges).
class FuelMap {
  public:
    FuelMap() : FuelMap(polynomial(FuelPolynomial{})) {}

    static FuelMap polynomial(const FuelPolynomial& p);

    // Grid axes must be strictly increasing; rates is row-major with one row
    // per velocity axis entry and one column per acceleration axis entry.
    static FuelMap table(std::vector<double> v_axis, std::vector<double> a_axis,
                         std::vector<double> rates);

    // CSV layout: first row is the acceleration axis (first cell ignored),
    // each following row starts with its velocity axis value.
    static FuelMap load_table_csv(const std::string& path);

    double rate(double v, double a) const;
    double idle_rate() const;
    bool is_table() const { return tabulated_; }

  private:
    FuelMap(bool tabulated) : tabulated_(tabulated) {}

    bool tabulated_ = false;
    FuelPolynomial poly_;
    std::vector<double> v_axis_;
    std::vector<double> a_axis_;
    std::vector<double> rates_; // v_axis_.size() x a_axis_.size()
};

struct VaSample {
    double v = 0.0;
    double a = 0.0;
};

// Trapezoidal integral of the fuel rate over a (v, a) trace sampled at dt.
// Fewer than two samples integrate to zero grams.
double integrate_fuel(const FuelMap& map, std::span<const VaSample> trace,
                      double dt);

} // namespace mcsim
