#include "ptdimer/trace.hpp"

#include <cmath>
#include <stdexcept>

namespace ptdimer {

UniformGrid::UniformGrid(double start_, double step_, std::size_t count_) : start(start_), step(step_), count(count_) {
  if (count == 0) throw std::invalid_argument("UniformGrid: empty grid");
  if (count > 1 && !(step > 0.0)) throw std::invalid_argument("UniformGrid: step must be positive");
}

UniformGrid UniformGrid::linspace(double start, double stop, std::size_t count) {
  if (count == 0) throw std::invalid_argument("UniformGrid::linspace: empty grid");
  if (count == 1) return {start, 1.0, 1};
  return {start, (stop - start) / static_cast<double>(count - 1), count};
}

std::vector<double> UniformGrid::values() const {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = (*this)[k];
  return out;
}

TimeTrace::TimeTrace(const UniformGrid& grid, std::vector<complex> values_, TraceMeta meta_)
    : times(grid.values()), values(std::move(values_)), meta(std::move(meta_)) {
  meta.sample_interval = grid.step;
  validate();
}

TimeTrace::TimeTrace(std::vector<double> times_, std::vector<complex> values_, TraceMeta meta_)
    : times(std::move(times_)), values(std::move(values_)), meta(std::move(meta_)) {
  if (times.size() > 1) meta.sample_interval = times[1] - times[0];
  validate();
}

std::vector<double> TimeTrace::real() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].real();
  return out;
}

std::vector<double> TimeTrace::magnitude() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::abs(values[i]);
  return out;
}

void TimeTrace::validate() const {
  if (times.size() != values.size()) throw std::invalid_argument("TimeTrace: times and values differ in length");
  if (times.size() < 2) return;
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw std::invalid_argument("TimeTrace: times must be strictly increasing");
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (!(step > 0.0) || std::abs(step - dt) > 1e-6 * dt) throw std::invalid_argument("TimeTrace: time grid is not uniform");
  }
}

std::vector<double> Spectrum::magnitude() const {
  std::vector<double> out(s21.size());
  for (std::size_t i = 0; i < s21.size(); ++i) out[i] = std::abs(s21[i]);
  return out;
}

std::vector<double> Field2D::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = (*this)(r, c);
  return out;
}

void Field2D::set_column(std::size_t c, const std::vector<double>& v) {
  if (v.size() != rows) throw std::invalid_argument("Field2D::set_column: length mismatch");
  for (std::size_t r = 0; r < rows; ++r) (*this)(r, c) = v[r];
}

std::vector<double> Field2D::row(std::size_t r) const {
  return {data.begin() + static_cast<std::ptrdiff_t>(r * cols), data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)};
}

}  // namespace ptdimer
