#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dosslot/random.hpp"
#include "dosslot/records.hpp"

namespace dosslot {

/// Step CDF of a shipment's pallet DoS values. Ties merge into one atom.
class EmpiricalCdf {
 public:
  // Throws DomainError on an empty sample or a non-positive value.
  static EmpiricalCdf from_samples(std::span<const int> dos_samples);

  const std::vector<int>& support() const { return support_; }
  const std::vector<double>& cum_weights() const { return cum_weights_; }
  std::size_t sample_count() const { return n_; }

  // Fraction of samples <= t.
  double operator()(double t) const;

  // min{t in support : F(t) >= num/den}, computed on integer counts so that
  // levels like 3/20 are not subject to rounding.
  int lower_quantile(std::size_t num, std::size_t den) const;

 private:
  std::vector<int> support_;
  std::vector<std::size_t> cum_counts_;
  std::vector<double> cum_weights_;
  std::size_t n_ = 0;
};

inline EmpiricalCdf empirical_cdf(std::span<const int> dos_samples) {
  return EmpiricalCdf::from_samples(dos_samples);
}

/// DoS percentile points at levels 0.05, 0.10, ..., 0.95.
class QuantileVector {
 public:
  static constexpr std::size_t kSize = 19;
  using Values = std::array<double, kSize>;

  QuantileVector() { values_.fill(0.0); }
  // Throws DomainError unless entries are finite, nonnegative and non-decreasing.
  explicit QuantileVector(const Values& values);

  static QuantileVector constant(double days);
  // Running-maximum repair of a dip. repairs counts the entries raised.
  static QuantileVector repaired(Values values, std::size_t* repairs = nullptr);

  static constexpr double level(std::size_t i) { return static_cast<double>(i + 1) / 20.0; }

  double operator[](std::size_t i) const { return values_[i]; }
  const Values& values() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

  bool operator==(const QuantileVector&) const = default;

 private:
  Values values_;
};

// 19 comma-separated reals, shortest round-trip form.
std::string to_line(const QuantileVector& qv);
// Accepts exactly 19 comma-separated reals; repairs dips when repairs != nullptr,
// otherwise throws DomainError on a dip.
QuantileVector parse_quantile_line(std::string_view line, std::size_t* repairs = nullptr);

QuantileVector quantile_vector(const EmpiricalCdf& cdf);

inline QuantileVector quantile_vector(std::span<const int> dos_samples) {
  return quantile_vector(empirical_cdf(dos_samples));
}

/// Inverse-transform draw at a fixed uniform variate u in [0,1]. Tails below
/// 0.05 and above 0.95 clamp to the extreme knots; linear between knots.
double sample_dos_at(const QuantileVector& qv, double u);

double sample_dos(const QuantileVector& qv, Rng& rng);

/// Size-debiased warehouse DoS distribution and occupancy rate.
class WarehouseDosDistribution {
 public:
  // masses[p-1] is the (unnormalized, nonnegative) mass of DoS p.
  // Throws DomainError if all masses are zero or r_hat is outside (0,1].
  WarehouseDosDistribution(std::vector<double> masses, double r_hat);

  int max_dos() const { return static_cast<int>(z_.size()); }
  // Normalized mass of DoS p (0 outside [1, max_dos]).
  double z(int p) const;
  const std::vector<double>& masses() const { return z_; }
  double r_hat() const { return r_hat_; }

  // W(t) = sum_{p <= t} z_p.
  double cumulative(double t) const;

 private:
  std::vector<double> z_;
  std::vector<double> cum_;
  double r_hat_;
};

// Normalized z recovered from a sample whose frequency of DoS p is
// proportional to p * z_p (every observation weighted 1/p).
std::vector<double> debias_dos_masses(std::span<const int> observed_dos);

// Per-day resident pallets / capacity for days in [window.begin, window.end).
std::vector<double> occupancy_series(std::span<const PalletRecord> records, int capacity,
                                     const DateRange& window);

// z from debias_dos_masses; r_hat = mean occupancy between the first and last
// arrival day, clamped to [1/capacity, 1].
WarehouseDosDistribution debias_warehouse_distribution(std::span<const PalletRecord> records, int capacity);

}  // namespace dosslot
