#include "dosslot/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dosslot/csv.hpp"
#include "dosslot/errors.hpp"

namespace dosslot {

EmpiricalCdf EmpiricalCdf::from_samples(std::span<const int> dos_samples) {
  if (dos_samples.empty()) throw DomainError("empirical CDF of an empty sample");
  std::vector<int> sorted(dos_samples.begin(), dos_samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 1) throw DomainError("DoS samples must be positive");

  EmpiricalCdf cdf;
  cdf.n_ = sorted.size();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (cdf.support_.empty() || cdf.support_.back() != sorted[i]) {
      cdf.support_.push_back(sorted[i]);
      cdf.cum_counts_.push_back(0);
    }
    cdf.cum_counts_.back() = i + 1;
  }
  cdf.cum_weights_.reserve(cdf.cum_counts_.size());
  for (std::size_t c : cdf.cum_counts_)
    cdf.cum_weights_.push_back(static_cast<double>(c) / static_cast<double>(cdf.n_));
  cdf.cum_weights_.back() = 1.0;
  return cdf;
}

double EmpiricalCdf::operator()(double t) const {
  auto it = std::upper_bound(support_.begin(), support_.end(), t,
                             [](double v, int s) { return v < static_cast<double>(s); });
  if (it == support_.begin()) return 0.0;
  return cum_weights_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

int EmpiricalCdf::lower_quantile(std::size_t num, std::size_t den) const {
  // cum_count / n >= num / den  <=>  cum_count * den >= num * n
  for (std::size_t j = 0; j < support_.size(); ++j)
    if (cum_counts_[j] * den >= num * n_) return support_[j];
  return support_.back();
}

QuantileVector::QuantileVector(const Values& values) : values_(values) {
  for (std::size_t i = 0; i < kSize; ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0)
      throw DomainError("quantile entries must be finite and nonnegative");
    if (i && values_[i] < values_[i - 1]) throw DomainError("quantile entries must be non-decreasing");
  }
}

QuantileVector QuantileVector::constant(double days) {
  Values v;
  v.fill(days);
  return QuantileVector(v);
}

QuantileVector QuantileVector::repaired(Values values, std::size_t* repairs) {
  std::size_t raised = 0;
  for (std::size_t i = 1; i < kSize; ++i) {
    if (values[i] < values[i - 1]) {
      values[i] = values[i - 1];
      ++raised;
    }
  }
  if (repairs) *repairs = raised;
  return QuantileVector(values);
}

std::string to_line(const QuantileVector& qv) {
  std::string out;
  for (std::size_t i = 0; i < QuantileVector::kSize; ++i) {
    if (i) out += ',';
    out += csv::format_real(qv[i]);
  }
  return out;
}

QuantileVector parse_quantile_line(std::string_view line, std::size_t* repairs) {
  const auto cells = csv::split_line(line);
  if (cells.size() != QuantileVector::kSize)
    throw DomainError("expected 19 quantile values, got " + std::to_string(cells.size()));
  QuantileVector::Values v;
  for (std::size_t i = 0; i < v.size(); ++i) {
    try {
      v[i] = csv::parse_real(cells[i]);
    } catch (const std::invalid_argument& e) {
      throw DomainError(e.what());
    }
  }
  if (repairs) return QuantileVector::repaired(v, repairs);
  return QuantileVector(v);
}

QuantileVector quantile_vector(const EmpiricalCdf& cdf) {
  QuantileVector::Values v;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = cdf.lower_quantile(i + 1, 20);
  return QuantileVector(v);
}

double sample_dos_at(const QuantileVector& qv, double u) {
  constexpr std::size_t last = QuantileVector::kSize - 1;
  const double pos = u * 20.0 - 1.0;  // knot index, level = (index + 1) / 20
  if (!(pos > 0.0)) return qv.front();
  if (pos >= static_cast<double>(last)) return qv.back();
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  if (frac == 0.0) return qv[i];
  return qv[i] + frac * (qv[i + 1] - qv[i]);
}

double sample_dos(const QuantileVector& qv, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return sample_dos_at(qv, unit(rng));
}

WarehouseDosDistribution::WarehouseDosDistribution(std::vector<double> masses, double r_hat)
    : z_(std::move(masses)), r_hat_(r_hat) {
  if (!(r_hat_ > 0.0 && r_hat_ <= 1.0)) throw DomainError("occupancy rate must lie in (0, 1]");
  while (!z_.empty() && z_.back() == 0.0) z_.pop_back();
  double total = 0.0;
  for (double m : z_) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw DomainError("DoS masses must be nonnegative");
    total += m;
  }
  if (z_.empty() || total <= 0.0) throw DomainError("DoS distribution has no mass");
  cum_.reserve(z_.size());
  double running = 0.0;
  for (double& m : z_) {
    m /= total;
    running += m;
    cum_.push_back(running);
  }
  cum_.back() = 1.0;
}

double WarehouseDosDistribution::z(int p) const {
  if (p < 1 || p > max_dos()) return 0.0;
  return z_[static_cast<std::size_t>(p - 1)];
}

double WarehouseDosDistribution::cumulative(double t) const {
  if (!(t >= 1.0)) return 0.0;
  const double fl = std::floor(t);
  if (fl >= static_cast<double>(cum_.size())) return 1.0;
  return cum_[static_cast<std::size_t>(fl) - 1];
}

std::vector<double> debias_dos_masses(std::span<const int> observed_dos) {
  if (observed_dos.empty()) throw DomainError("cannot debias an empty sample");
  std::map<int, double> weight;
  double total = 0.0;
  for (int p : observed_dos) {
    if (p < 1) throw DomainError("DoS must be positive");
    weight[p] += 1.0 / p;
  }
  std::vector<double> z(static_cast<std::size_t>(weight.rbegin()->first), 0.0);
  // Sum in DoS order so the result does not depend on input order.
  for (const auto& [p, w] : weight) total += w;
  for (const auto& [p, w] : weight) z[static_cast<std::size_t>(p - 1)] = w / total;
  return z;
}

std::vector<double> occupancy_series(std::span<const PalletRecord> records, int capacity,
                                     const DateRange& window) {
  if (capacity <= 0) throw DomainError("capacity must be positive");
  const long days = std::max(0L, days_between(window.begin, window.end));
  std::vector<long> delta(static_cast<std::size_t>(days) + 1, 0);
  for (const auto& r : records) {
    const long from = std::max(0L, days_between(window.begin, r.arrival_date));
    const long to = std::min(days, days_between(window.begin, r.exit_date()));
    if (from >= to) continue;
    ++delta[static_cast<std::size_t>(from)];
    --delta[static_cast<std::size_t>(to)];
  }
  std::vector<double> series(static_cast<std::size_t>(days));
  long resident = 0;
  for (std::size_t d = 0; d < series.size(); ++d) {
    resident += delta[d];
    series[d] = static_cast<double>(resident) / capacity;
  }
  return series;
}

WarehouseDosDistribution debias_warehouse_distribution(std::span<const PalletRecord> records, int capacity) {
  if (capacity <= 0) throw DomainError("capacity must be positive");
  if (records.empty()) throw DomainError("cannot estimate a warehouse distribution from no records");
  std::vector<int> dos;
  dos.reserve(records.size());
  Date first = records.front().arrival_date;
  Date last = first;
  for (const auto& r : records) {
    dos.push_back(r.dos_days);
    first = std::min(first, r.arrival_date);
    last = std::max(last, r.arrival_date);
  }
  const auto series = occupancy_series(records, capacity, {first, add_days(last, 1)});
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  const double r_hat = std::clamp(mean, 1.0 / capacity, 1.0);
  return WarehouseDosDistribution(debias_dos_masses(dos), r_hat);
}

}  // namespace dosslot
