#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dosslot/policies.hpp"
#include "dosslot/records.hpp"
#include "dosslot/warehouse.hpp"

namespace dosslot {

struct StreamPallet {
  PalletHandle handle = 0;
  std::size_t shipment = 0;  // index into ArrivalStream::shipments
  int dos = 1;
};

/// Pallet arrivals per discrete period 1..horizon.
struct ArrivalStream {
  long horizon = 0;
  std::vector<ShipmentFeatures> shipments;
  std::vector<std::vector<StreamPallet>> periods;  // periods[t - 1]

  const std::vector<StreamPallet>& arrivals(long t) const { return periods[static_cast<std::size_t>(t - 1)]; }
  // n_p(t)
  long count(int dos, long t) const;
  std::size_t total_arrivals() const;
  int max_dos() const;
  // Shipments with their true pallet DoS, e.g. to build an oracle predictor.
  std::vector<Shipment> as_shipments() const;
};

// DoS p -> pallets of that DoS arriving every period.
using BalanceSpec = std::map<int, int>;

// sum_p p * n_p, the steady-state resident count.
long balance_load(const BalanceSpec& spec);

struct FeatureSpec {
  // Consecutive (shuffled) arrivals of a period are cut into shipments of
  // this many pallets; 1 makes every pallet its own shipment.
  std::size_t pallets_per_shipment = 1;
  // Product groups are contiguous DoS buckets; 0 means one group per DoS.
  std::size_t product_groups = 0;
  std::vector<std::string> customers{"retail", "foodservice"};
  bool shuffle_within_period = true;
};

// Every period emits exactly n_p pallets of DoS p. Throws ConfigError on an
// empty spec, a non-positive entry or horizon < max p.
ArrivalStream generate_perfect_balance_stream(const BalanceSpec& spec, long horizon, const FeatureSpec& features,
                                              std::uint64_t seed);

// Adds one extra pallet (DoS drawn from the spec's keys) to each period with
// probability rate, breaking perfect balance.
ArrivalStream perturb_stream(ArrivalStream stream, double rate, std::uint64_t seed);

// Period of a record = days since the earliest arrival + 1.
ArrivalStream stream_from_records(std::span<const PalletRecord> records);

struct BalanceReport {
  bool balanced = true;
  std::size_t checked = 0;     // (p, t) pairs with t > p
  std::size_t violations = 0;  // pairs with n_p(t - p) != n_p(t)
  double violation_fraction() const { return checked ? static_cast<double>(violations) / checked : 0.0; }
};

BalanceReport check_perfect_balance(const ArrivalStream& stream);
inline bool verify_perfect_balance(const ArrivalStream& stream) { return check_perfect_balance(stream).balanced; }

// z_p proportional to p times the arrivals of DoS p (resident pallet mass),
// r_hat = mean residents per period over the horizon / N, clamped to [1/N, 1].
WarehouseDosDistribution stream_dos_distribution(const ArrivalStream& stream, long n_locations);

struct PlacementRecord {
  AssignmentDecision decision;
  long arrival_period = 0;
  long placed_period = 0;
  long departure_period = 0;  // first period the location is free again
  int dos = 1;
  double percentile = 0.0;
};

struct SimulationResult {
  double total_cost = 0.0;   // sum over periods and occupied locations of 4 t_i
  double visit_cost = 0.0;   // sum over placements of 4 t_i
  std::vector<PlacementRecord> placements;
  std::size_t overflow_events = 0;  // pallet-periods spent waiting in staging
  long periods = 0;
  std::vector<long> residents;  // after arrivals, per period
  double mean_percentile = 0.0;
  double median_percentile = 0.0;
};

// Per period: departures, then staged pallets (FIFO), then new arrivals.
// Runs past the horizon until every pallet has left.
SimulationResult run_simulation(const ArrivalStream& stream, const Warehouse& warehouse, const Policy& policy,
                                std::uint64_t seed);

// Sum over placements of 4 t_i * (departure - placed): the occupancy cost
// recomputed from the placement ledger.
double recount_total_cost(const SimulationResult& result, const Warehouse& warehouse);

enum class CostModel { Occupancy, PerVisit };

struct BruteForceResult {
  double cost = 0.0;
  std::vector<Rank> ranks;  // optimal choice for each arrival in stream order
  double search_bound = 0.0;
};

inline constexpr double kDefaultSearchLimit = 1e7;

// Exhaustive search over location choices. Throws SearchLimitExceeded when
// the product of available-location counts exceeds limit, CapacityError when
// some arrival would find the warehouse full.
BruteForceResult brute_force_optimal(const ArrivalStream& stream, const Warehouse& warehouse,
                                     CostModel model = CostModel::Occupancy, double limit = kDefaultSearchLimit);

// Builds a policy for one stream, e.g. an oracle that knows its true DoS.
// Called concurrently when compare_policies runs with threads > 1.
using PolicyFactory = std::function<std::shared_ptr<const Policy>(const ArrivalStream&)>;

struct NamedPolicy {
  std::string label;
  std::shared_ptr<const Policy> policy;  // used when factory is empty
  PolicyFactory factory;
};

inline constexpr std::size_t kHistogramBins = 20;
using Histogram = std::array<std::size_t, kHistogramBins>;

std::size_t histogram_bin(double percentile);

struct ComparisonRow {
  std::string policy;
  std::uint64_t seed = 0;
  double total_cost = 0.0;
  double visit_cost = 0.0;
  double mean_percentile = 0.0;
  double median_percentile = 0.0;
  std::size_t placements = 0;
  std::size_t overflow_events = 0;
  Histogram histogram{};
};

struct PolicySummary {
  std::string policy;
  double mean_total_cost = 0.0;
  double mean_visit_cost = 0.0;
  double mean_percentile = 0.0;    // over all placements of all seeds
  double median_percentile = 0.0;
  std::size_t overflow_events = 0;
  Histogram histogram{};
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // policy-major, seeds in given order
  std::vector<PolicySummary> summary;
};

// Builds the stream simulated under a given seed.
using StreamSource = std::function<ArrivalStream(std::uint64_t seed)>;

// Every policy runs on the stream of every seed, with that seed driving the
// policy's random engine. threads > 1 runs (policy, seed) pairs concurrently;
// the table is identical either way.
ComparisonTable compare_policies(const StreamSource& source, const Warehouse& warehouse,
                                 std::span<const NamedPolicy> policies, std::span<const std::uint64_t> seeds,
                                 unsigned threads = 1);

ComparisonTable compare_policies(const ArrivalStream& stream, const Warehouse& warehouse,
                                 std::span<const NamedPolicy> policies, std::span<const std::uint64_t> seeds,
                                 unsigned threads = 1);

// N = 200 with resident load 160 (r = 0.8).
BalanceSpec default_pressured_spec();

}  // namespace dosslot
