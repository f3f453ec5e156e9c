#include "dosslot/policies.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dosslot/errors.hpp"
#include "dosslot/metrics.hpp"

namespace dosslot {

AssignmentDecision DosPolicy::place(const ArrivingPallet& pallet, const Warehouse& warehouse, OccupancyState& state,
                                    Rng& rng) const {
  const QuantileVector predicted = predictor_->predict(*pallet.features);
  const double p_hat = sample_dos(predicted, rng);
  const Rank target = target_location(warehouse.size(), distribution_.r_hat(), distribution_, p_hat);
  return assign(warehouse, state, target, pallet.handle);
}

AssignmentDecision GreedyPolicy::place(const ArrivingPallet& pallet, const Warehouse& warehouse, OccupancyState& state,
                                       Rng&) const {
  if (state.free_ranks().empty()) throw CapacityError("no available location");
  const Rank r = *state.free_ranks().begin();
  return place_at(warehouse, state, r, 1, pallet.handle);
}

std::pair<Rank, Rank> ClassZones::band(PalletClass c) const {
  switch (c) {
    case PalletClass::A: return {1, a_end};
    case PalletClass::B: return {a_end + 1, b_end};
    case PalletClass::C: return {b_end + 1, n_locations};
  }
  return {1, 0};
}

PalletClass ClassZones::class_of(const std::string& product_group) const {
  auto it = group_class.find(product_group);
  return it == group_class.end() ? PalletClass::B : it->second;
}

ClassZones build_class_zones(const std::map<std::string, double>& turnover, long n_locations, BandSizing sizing) {
  if (turnover.empty()) throw DomainError("class zones need at least one product group");
  if (n_locations < 1) throw DomainError("capacity must be positive");
  std::vector<std::pair<std::string, double>> ranked(turnover.begin(), turnover.end());
  for (const auto& [g, t] : ranked)
    if (!(t > 0.0)) throw DomainError("turnover of '" + g + "' must be positive");
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  ClassZones zones;
  zones.n_locations = n_locations;
  std::array<double, 3> share{};
  double total = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto cls = static_cast<PalletClass>(3 * i / ranked.size());
    zones.group_class[ranked[i].first] = cls;
    share[static_cast<std::size_t>(cls)] += ranked[i].second;
    total += ranked[i].second;
  }
  const double n = static_cast<double>(n_locations);
  if (sizing == BandSizing::EqualThirds) {
    zones.a_end = std::lround(n / 3.0);
    zones.b_end = std::lround(2.0 * n / 3.0);
  } else {
    zones.a_end = std::lround(n * share[0] / total);
    zones.b_end = std::lround(n * (share[0] + share[1]) / total);
  }
  zones.a_end = std::clamp<Rank>(zones.a_end, 0, n_locations);
  zones.b_end = std::clamp<Rank>(zones.b_end, zones.a_end, n_locations);
  return zones;
}

AssignmentDecision ClassPolicy::place(const ArrivingPallet& pallet, const Warehouse& warehouse, OccupancyState& state,
                                      Rng&) const {
  const auto& free = state.free_ranks();
  if (free.empty()) throw CapacityError("no available location");
  using enum PalletClass;
  const PalletClass own = zones_.class_of(pallet.features->product_group);
  static constexpr std::array<std::array<PalletClass, 3>, 3> kSpillOrder{{{A, B, C}, {B, A, C}, {C, B, A}}};
  const Rank own_first = zones_.band(own).first;
  for (PalletClass c : kSpillOrder[static_cast<std::size_t>(own)]) {
    const auto [lo, hi] = zones_.band(c);
    if (lo > hi) continue;
    auto it = free.lower_bound(lo);
    if (it != free.end() && *it <= hi) return place_at(warehouse, state, *it, own_first, pallet.handle);
  }
  throw CapacityError("no available location");  // unreachable: bands partition [1, N]
}

TurnoverPolicy::TurnoverPolicy(std::map<std::string, double> turnover) : turnover_(std::move(turnover)) {
  if (turnover_.empty()) throw DomainError("turnover table is empty");
  std::vector<double> values;
  for (const auto& [g, t] : turnover_) {
    if (!(t > 0.0)) throw DomainError("turnover of '" + g + "' must be positive");
    values.push_back(t);
  }
  median_turnover_ = median(values);
}

double TurnoverPolicy::share_ahead(double turnover) const {
  double ahead = 0.0;
  double total = 0.0;
  for (const auto& [g, t] : turnover_) {
    total += t;
    if (t > turnover) ahead += t;
  }
  return ahead / total;
}

Rank TurnoverPolicy::target_rank(const std::string& product_group, long n_locations) const {
  auto it = turnover_.find(product_group);
  const double own = it == turnover_.end() ? median_turnover_ : it->second;
  const long rank = 1 + std::lround(static_cast<double>(n_locations) * share_ahead(own));
  return std::clamp<long>(rank, 1, n_locations);
}

AssignmentDecision TurnoverPolicy::place(const ArrivingPallet& pallet, const Warehouse& warehouse,
                                         OccupancyState& state, Rng&) const {
  return assign(warehouse, state, target_rank(pallet.features->product_group, warehouse.size()), pallet.handle);
}

AssignmentDecision RandomPolicy::place(const ArrivingPallet& pallet, const Warehouse& warehouse, OccupancyState& state,
                                       Rng& rng) const {
  const auto& free = state.free_ranks();
  if (free.empty()) throw CapacityError("no available location");
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  const Rank r = *std::next(free.begin(), static_cast<long>(pick(rng)));
  return place_at(warehouse, state, r, r, pallet.handle);
}

std::map<std::string, double> turnover_by_group(std::span<const PalletRecord> records) {
  if (records.empty()) return {};
  Date first = records.front().arrival_date;
  Date last = records.front().exit_date();
  std::map<std::string, double> count;
  for (const auto& r : records) {
    first = std::min(first, r.arrival_date);
    last = std::max(last, r.exit_date());
    count[r.product_group] += 1.0;
  }
  const double days = static_cast<double>(std::max(1L, days_between(first, last)));
  for (auto& [g, c] : count) c /= days;
  return count;
}

}  // namespace dosslot
