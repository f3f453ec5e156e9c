#include "dosslot/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dosslot/errors.hpp"

namespace dosslot {

double msle_loss(const QuantileVector& actual, const QuantileVector& predicted) {
  double sum = 0.0;
  for (std::size_t i = 0; i < QuantileVector::kSize; ++i) {
    if (actual[i] < 0.0 || predicted[i] < 0.0) throw DomainError("MSLE of negative days");
    const double d = std::log(actual[i] + 1.0) - std::log(predicted[i] + 1.0);
    sum += d * d;
  }
  return sum / static_cast<double>(QuantileVector::kSize);
}

double ape(double predicted_days, double actual_days) {
  if (!(actual_days > 0.0)) throw DomainError("APE needs a positive actual value");
  return std::abs(predicted_days - actual_days) / actual_days;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

double mape(std::span<const PredictionPair> pairs) {
  if (pairs.empty()) throw DomainError("MAPE of an empty set");
  std::vector<double> pool;
  pool.reserve(pairs.size() * QuantileVector::kSize);
  for (const auto& [pred, act] : pairs)
    for (std::size_t i = 0; i < QuantileVector::kSize; ++i)
      if (act[i] > 0.0) pool.push_back(ape(pred[i], act[i]));
  return median(std::move(pool));
}

EvaluationReport evaluate(std::span<const PredictionPair> pairs) {
  if (pairs.empty()) throw DomainError("evaluation of an empty set");
  EvaluationReport report;
  report.n_shipments = pairs.size();
  double total = 0.0;
  for (const auto& [pred, act] : pairs) total += msle_loss(act, pred);
  report.msle = total / static_cast<double>(pairs.size());
  report.mape = mape(pairs);
  for (std::size_t i = 0; i < QuantileVector::kSize; ++i) {
    std::vector<double> level;
    for (const auto& [pred, act] : pairs)
      if (act[i] > 0.0) level.push_back(ape(pred[i], act[i]));
    report.per_percentile_mape[i] = level.empty() ? 0.0 : median(std::move(level));
  }
  return report;
}

double placement_percentile(long rank, long n_locations) {
  if (n_locations < 1 || rank < 1 || rank > n_locations) throw DomainError("rank outside [1, N]");
  return static_cast<double>(rank) / static_cast<double>(n_locations);
}

}  // namespace dosslot
