#include "rte/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rte/errors.hpp"

namespace rte {

Grid1D Grid1D::over(double lo, double hi, double h) {
  if (!(h > 0.0) || !(hi > lo)) {
    std::ostringstream msg;
    msg << "invalid grid [" << lo << ", " << hi << "] with step " << h;
    throw ConfigError(msg.str());
  }
  const double ratio = (hi - lo) / h;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "step " << h << " does not divide [" << lo << ", " << hi << "]";
    throw ConfigError(msg.str());
  }
  return Grid1D{lo, h, static_cast<std::size_t>(rounded)};
}

std::vector<double> Grid1D::trapezoid_weights() const {
  std::vector<double> w(size(), h);
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

std::size_t Grid1D::index_of(double x) const {
  const double r = (x - lo) / h;
  const double idx = std::round(r);
  if (std::abs(r - idx) > 1e-7 || idx < 0.0 || idx > static_cast<double>(n)) {
    std::ostringstream msg;
    msg << "coordinate " << x << " is not a grid node";
    throw ConfigError(msg.str());
  }
  return static_cast<std::size_t>(idx);
}

double RadianceField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

RadianceField& RadianceField::operator+=(const RadianceField& other) {
  assert(grid_ == other.grid_);
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += other.values_[n];
  return *this;
}

RadianceField& RadianceField::operator-=(const RadianceField& other) {
  assert(grid_ == other.grid_);
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= other.values_[n];
  return *this;
}

RadianceField& RadianceField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

RadianceField operator+(RadianceField lhs, const RadianceField& rhs) { return lhs += rhs; }
RadianceField operator-(RadianceField lhs, const RadianceField& rhs) { return lhs -= rhs; }
RadianceField operator*(double s, RadianceField f) { return f *= s; }

double max_abs_diff(const RadianceField& a, const RadianceField& b) {
  assert(a.grid() == b.grid());
  double m = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t n = 0; n < av.size(); ++n) m = std::max(m, std::abs(av[n] - bv[n]));
  return m;
}

}  // namespace rte
