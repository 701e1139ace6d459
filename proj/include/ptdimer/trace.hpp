#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ptdimer/linalg.hpp"

namespace ptdimer {

/// Uniform grid start + k * step, k = 0 .. count-1.
struct UniformGrid {
  double start = 0.0;
  double step = 0.0;
  std::size_t count = 0;

  UniformGrid() = default;
  UniformGrid(double start_, double step_, std::size_t count_);
  /// count points from start to stop inclusive.
  static UniformGrid linspace(double start, double stop, std::size_t count);

  double operator[](std::size_t k) const { return start + static_cast<double>(k) * step; }
  double back() const { return (*this)[count - 1]; }
  std::size_t size() const { return count; }
  std::vector<double> values() const;
};

struct TraceMeta {
  double g_tilde = 0.0;
  double sample_interval = 0.0;  // seconds
  std::string observable;        // "population", "coherence", "field", ...
  std::size_t shots = 0;         // 0 when noiseless or unknown
};

/// Observable sampled on a uniform time grid (seconds).
struct TimeTrace {
  std::vector<double> times;
  std::vector<complex> values;
  TraceMeta meta;

  TimeTrace() = default;
  TimeTrace(const UniformGrid& grid, std::vector<complex> values_, TraceMeta meta_);
  TimeTrace(std::vector<double> times_, std::vector<complex> values_, TraceMeta meta_);

  std::size_t size() const { return times.size(); }
  std::vector<double> real() const;
  std::vector<double> magnitude() const;
  /// Throws std::invalid_argument unless times are strictly increasing and uniform.
  void validate() const;
};

struct SpectrumMeta {
  double g_tilde = 0.0;
  double Omega_p = 0.0;
  /// Detunings are measured from omega_ref = omega + reference_shift (rad/s).
  double reference_shift = 0.0;
};

/// Transmission vs probe detuning delta_p = omega_ref - omega_p (rad/s).
struct Spectrum {
  std::vector<double> detunings;
  std::vector<complex> s21;
  SpectrumMeta meta;

  std::size_t size() const { return detunings.size(); }
  std::vector<double> magnitude() const;
};

/// Real samples over (g_tilde row, axis column), row-major.
struct Field2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Field2D() = default;
  Field2D(std::size_t rows_, std::size_t cols_, double fill = 0.0) : rows(rows_), cols(cols_), data(rows_ * cols_, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, const std::vector<double>& v);
  std::vector<double> row(std::size_t r) const;
};

}  // namespace ptdimer
