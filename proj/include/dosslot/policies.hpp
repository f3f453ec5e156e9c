#pragma once

#include <array>
#include <map>
#include <memory>
#include <span>
#include <string>

#include "dosslot/predictor.hpp"
#include "dosslot/random.hpp"
#include "dosslot/warehouse.hpp"

namespace dosslot {

struct ArrivingPallet {
  PalletHandle handle = 0;
  const ShipmentFeatures* features = nullptr;
  int true_dos = 1;
};

/// Placement rule. Implementations are immutable; all state lives in the
/// OccupancyState and the caller's random engine.
class Policy {
 public:
  virtual ~Policy() = default;
  // Throws CapacityError when the warehouse is full.
  virtual AssignmentDecision place(const ArrivingPallet& pallet, const Warehouse& warehouse, OccupancyState& state,
                                   Rng& rng) const = 0;
  virtual std::string name() const = 0;
};

/// Predict a distribution, draw p_hat from it, target round(N r W(p_hat)).
class DosPolicy final : public Policy {
 public:
  DosPolicy(std::shared_ptr<const QuantilePredictor> predictor, WarehouseDosDistribution distribution)
      : predictor_(std::move(predictor)), distribution_(std::move(distribution)) {}

  AssignmentDecision place(const ArrivingPallet& pallet, const Warehouse& warehouse, OccupancyState& state,
                           Rng& rng) const override;
  std::string name() const override { return "dos"; }
  const WarehouseDosDistribution& distribution() const { return distribution_; }

 private:
  std::shared_ptr<const QuantilePredictor> predictor_;
  WarehouseDosDistribution distribution_;
};

/// Closest available location, DoS ignored.
class GreedyPolicy final : public Policy {
 public:
  AssignmentDecision place(const ArrivingPallet& pallet, const Warehouse& warehouse, OccupancyState& state,
                           Rng& rng) const override;
  std::string name() const override { return "greedy"; }
};

enum class PalletClass { A = 0, B = 1, C = 2 };

/// Three contiguous rank bands and the class of each product group.
struct ClassZones {
  // Last rank of bands A and B; band C runs to N. A band may be empty.
  Rank a_end = 0;
  Rank b_end = 0;
  long n_locations = 0;
  std::map<std::string, PalletClass> group_class;

  std::pair<Rank, Rank> band(PalletClass c) const;  // inclusive, first > last when empty
  // Unmapped groups fall into class B.
  PalletClass class_of(const std::string& product_group) const;
};

enum class BandSizing { TurnoverShare, EqualThirds };

// Groups ranked by turnover (descending, ties by name) are split into
// terciles. Throws DomainError on an empty or non-positive table.
ClassZones build_class_zones(const std::map<std::string, double>& turnover, long n_locations,
                             BandSizing sizing = BandSizing::TurnoverShare);

/// ABC storage: closest available within the pallet's band, spilling to the
/// nearest non-full band.
class ClassPolicy final : public Policy {
 public:
  explicit ClassPolicy(ClassZones zones) : zones_(std::move(zones)) {}
  AssignmentDecision place(const ArrivingPallet& pallet, const Warehouse& warehouse, OccupancyState& state,
                           Rng& rng) const override;
  std::string name() const override { return "class"; }
  const ClassZones& zones() const { return zones_; }

 private:
  ClassZones zones_;
};

/// Turnover/COI: each group targets 1 + round(N * s), where s is the turnover
/// share of the groups turning over faster than it.
class TurnoverPolicy final : public Policy {
 public:
  // Throws DomainError on an empty or non-positive table.
  explicit TurnoverPolicy(std::map<std::string, double> turnover);
  AssignmentDecision place(const ArrivingPallet& pallet, const Warehouse& warehouse, OccupancyState& state,
                           Rng& rng) const override;
  std::string name() const override { return "turnover"; }

  // Fraction of total turnover ahead of a group with this turnover.
  double share_ahead(double turnover) const;
  Rank target_rank(const std::string& product_group, long n_locations) const;

 private:
  std::map<std::string, double> turnover_;
  double median_turnover_ = 0.0;
};

/// Uniform over available locations.
class RandomPolicy final : public Policy {
 public:
  AssignmentDecision place(const ArrivingPallet& pallet, const Warehouse& warehouse, OccupancyState& state,
                           Rng& rng) const override;
  std::string name() const override { return "random"; }
};

// Retrievals per day for each product group (footprint 1 per pallet), over
// the span from the first arrival to the last departure.
std::map<std::string, double> turnover_by_group(std::span<const PalletRecord> records);

}  // namespace dosslot
