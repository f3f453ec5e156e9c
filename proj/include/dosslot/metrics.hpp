#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "dosslot/distribution.hpp"

namespace dosslot {

// (1/19) * sum (ln(actual_i + 1) - ln(predicted_i + 1))^2
double msle_loss(const QuantileVector& actual, const QuantileVector& predicted);

// |predicted - actual| / actual. Throws DomainError when actual <= 0.
double ape(double predicted_days, double actual_days);

// Median; even counts average the two central order statistics.
// Throws DomainError on an empty input.
double median(std::vector<double> values);

struct PredictionPair {
  QuantileVector predicted;
  QuantileVector actual;
};

// Median of the pooled APE over all 19 levels of all pairs. Entries with
// actual == 0 are left out of the pool.
double mape(std::span<const PredictionPair> pairs);

struct EvaluationReport {
  double msle = 0.0;  // mean over shipments
  double mape = 0.0;
  std::size_t n_shipments = 0;
  std::array<double, QuantileVector::kSize> per_percentile_mape{};
};

EvaluationReport evaluate(std::span<const PredictionPair> pairs);

// rank / N. Throws DomainError unless 1 <= rank <= N.
double placement_percentile(long rank, long n_locations);

}  // namespace dosslot
