#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <vector>

#include "dosslot/distribution.hpp"

namespace dosslot {

using PalletHandle = std::uint64_t;
using Rank = long;  // 1-based position in ascending travel-time order

/// Storage locations ordered by travel time from the staging area.
///
/// All placement logic works on ranks: rank 1 is the location closest to the
/// dock (ties in travel time broken by smaller location id). The distance
/// between two locations is either their rank difference (the default 1-D
/// aisle model) or the difference of their travel times.
class Warehouse {
 public:
  enum class Metric { RankDistance, TravelTimeDifference };

  struct Location {
    long id = 0;
    double travel_time = 0.0;
    double extra_cost = 0.0;
  };

  // Throws DomainError on an empty list, non-positive travel time, negative
  // extra cost or duplicate ids.
  explicit Warehouse(std::vector<Location> locations, Metric metric = Metric::RankDistance);

  // N locations with t_i = i and no extra cost.
  static Warehouse aisle(long n_locations);

  long size() const { return static_cast<long>(by_rank_.size()); }
  Metric metric() const { return metric_; }

  const Location& at_rank(Rank r) const { return by_rank_[static_cast<std::size_t>(r - 1)]; }
  double travel_time(Rank r) const { return at_rank(r).travel_time; }
  double extra_cost(Rank r) const { return at_rank(r).extra_cost; }
  // Throws DomainError for an unknown id.
  Rank rank_of(long location_id) const;

  double distance(Rank v, Rank w) const;
  bool has_extra_costs() const { return has_extra_costs_; }

  // Locations in rank order.
  std::span<const Location> locations() const { return by_rank_; }

 private:
  std::vector<Location> by_rank_;
  Metric metric_;
  bool has_extra_costs_ = false;
};

Warehouse load_geometry(std::istream& in, Warehouse::Metric metric = Warehouse::Metric::RankDistance);
void write_geometry(std::ostream& out, const Warehouse& warehouse);

/// Which pallet (if any) sits in each location. At most one per location.
class OccupancyState {
 public:
  explicit OccupancyState(long n_locations);

  long capacity() const { return static_cast<long>(slots_.size()); }
  long occupied_count() const { return capacity() - static_cast<long>(free_.size()); }
  const std::set<Rank>& free_ranks() const { return free_; }
  bool is_free(Rank r) const { return !slots_[static_cast<std::size_t>(r - 1)].has_value(); }
  std::optional<PalletHandle> at(Rank r) const { return slots_[static_cast<std::size_t>(r - 1)]; }
  std::optional<Rank> location_of(PalletHandle h) const;

  // Throws StateError if r is occupied or h is already stored.
  void store(Rank r, PalletHandle h);
  // Frees the pallet's location. Throws StateError for an unknown handle.
  Rank retrieve(PalletHandle h);

  long clock = 0;

  bool operator==(const OccupancyState&) const = default;

 private:
  std::vector<std::optional<PalletHandle>> slots_;
  std::set<Rank> free_;
  std::map<PalletHandle, Rank> where_;
};

struct AssignmentDecision {
  PalletHandle pallet = 0;
  Rank rank = 0;         // chosen location
  long location_id = 0;
  Rank target_rank = 0;
  double visit_cost = 0.0;  // 4 * t of the chosen location
};

// round(N * r_hat * W(p_hat)), halves away from zero, clamped to [1, N].
Rank target_location(long n_locations, double r_hat, const WarehouseDosDistribution& dist, double p_hat);

// Chooses the available w minimizing d(target, w) + c(w); ties go to the
// location closer to the dock. Stores the pallet there.
// Throws CapacityError when nothing is available.
AssignmentDecision assign(const Warehouse& warehouse, OccupancyState& state, Rank target_rank,
                          PalletHandle pallet);

// Stores the pallet at a fixed rank, used by policies that pick directly.
AssignmentDecision place_at(const Warehouse& warehouse, OccupancyState& state, Rank rank, Rank target_rank,
                            PalletHandle pallet);

inline Rank retrieve(OccupancyState& state, PalletHandle pallet) { return state.retrieve(pallet); }

}  // namespace dosslot
