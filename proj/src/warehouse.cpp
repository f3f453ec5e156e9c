#include "dosslot/warehouse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "dosslot/csv.hpp"
#include "dosslot/errors.hpp"

namespace dosslot {

Warehouse::Warehouse(std::vector<Location> locations, Metric metric)
    : by_rank_(std::move(locations)), metric_(metric) {
  if (by_rank_.empty()) throw DomainError("warehouse needs at least one location");
  std::unordered_set<long> ids;
  for (const auto& loc : by_rank_) {
    if (!(loc.travel_time > 0.0) || !std::isfinite(loc.travel_time))
      throw DomainError("travel time must be positive at location " + std::to_string(loc.id));
    if (!(loc.extra_cost >= 0.0) || !std::isfinite(loc.extra_cost))
      throw DomainError("extra cost must be nonnegative at location " + std::to_string(loc.id));
    if (!ids.insert(loc.id).second) throw DomainError("duplicate location id " + std::to_string(loc.id));
    has_extra_costs_ = has_extra_costs_ || loc.extra_cost > 0.0;
  }
  std::sort(by_rank_.begin(), by_rank_.end(), [](const Location& a, const Location& b) {
    return a.travel_time != b.travel_time ? a.travel_time < b.travel_time : a.id < b.id;
  });
}

Warehouse Warehouse::aisle(long n_locations) {
  if (n_locations < 1) throw DomainError("warehouse needs at least one location");
  std::vector<Location> locs;
  locs.reserve(static_cast<std::size_t>(n_locations));
  for (long i = 1; i <= n_locations; ++i) locs.push_back({i, static_cast<double>(i), 0.0});
  return Warehouse(std::move(locs));
}

Rank Warehouse::rank_of(long location_id) const {
  for (std::size_t i = 0; i < by_rank_.size(); ++i)
    if (by_rank_[i].id == location_id) return static_cast<Rank>(i + 1);
  throw DomainError("unknown location id " + std::to_string(location_id));
}

double Warehouse::distance(Rank v, Rank w) const {
  if (metric_ == Metric::RankDistance) return static_cast<double>(std::abs(v - w));
  return std::abs(travel_time(v) - travel_time(w));
}

Warehouse load_geometry(std::istream& in, Warehouse::Metric metric) {
  auto header = csv::next_line(in);
  if (!header) throw LoadError(1, "missing header");
  const auto cols = csv::split_line(*header);
  if (cols != std::vector<std::string>{"location_id", "travel_time", "extra_cost"})
    throw LoadError(1, "expected header location_id,travel_time,extra_cost");
  std::vector<Warehouse::Location> locs;
  std::size_t line_no = 1;
  while (auto line = csv::next_line(in)) {
    ++line_no;
    const auto cells = csv::split_line(*line);
    if (cells.size() != 3) throw LoadError(line_no, "expected 3 fields");
    try {
      locs.push_back({static_cast<long>(csv::parse_int(cells[0])), csv::parse_real(cells[1]),
                      csv::parse_real(cells[2])});
    } catch (const std::invalid_argument& e) {
      throw LoadError(line_no, e.what());
    }
  }
  try {
    return Warehouse(std::move(locs), metric);
  } catch (const DomainError& e) {
    throw LoadError(line_no, e.what());
  }
}

void write_geometry(std::ostream& out, const Warehouse& warehouse) {
  out << "location_id,travel_time,extra_cost\n";
  for (const auto& loc : warehouse.locations())
    out << loc.id << ',' << csv::format_real(loc.travel_time) << ',' << csv::format_real(loc.extra_cost) << '\n';
}

OccupancyState::OccupancyState(long n_locations) : slots_(static_cast<std::size_t>(n_locations)) {
  if (n_locations < 1) throw DomainError("capacity must be positive");
  for (Rank r = 1; r <= n_locations; ++r) free_.insert(free_.end(), r);
}

std::optional<Rank> OccupancyState::location_of(PalletHandle h) const {
  auto it = where_.find(h);
  if (it == where_.end()) return std::nullopt;
  return it->second;
}

void OccupancyState::store(Rank r, PalletHandle h) {
  if (r < 1 || r > capacity()) throw StateError("rank " + std::to_string(r) + " outside the warehouse");
  auto& slot = slots_[static_cast<std::size_t>(r - 1)];
  if (slot) throw StateError("location at rank " + std::to_string(r) + " is occupied");
  if (!where_.emplace(h, r).second) throw StateError("pallet " + std::to_string(h) + " is already stored");
  slot = h;
  free_.erase(r);
}

Rank OccupancyState::retrieve(PalletHandle h) {
  auto it = where_.find(h);
  if (it == where_.end()) throw StateError("pallet " + std::to_string(h) + " is not stored");
  const Rank r = it->second;
  where_.erase(it);
  slots_[static_cast<std::size_t>(r - 1)].reset();
  free_.insert(r);
  return r;
}

Rank target_location(long n_locations, double r_hat, const WarehouseDosDistribution& dist, double p_hat) {
  const double raw = static_cast<double>(n_locations) * r_hat * dist.cumulative(p_hat);
  // Products that should be integral can land a few ulps below; snap them.
  const double snapped = std::abs(raw - std::round(raw)) < 1e-9 ? std::round(raw) : raw;
  const long rounded = std::lround(snapped);
  return std::clamp<long>(rounded, 1, n_locations);
}

AssignmentDecision place_at(const Warehouse& warehouse, OccupancyState& state, Rank rank, Rank target_rank,
                            PalletHandle pallet) {
  state.store(rank, pallet);
  return {pallet, rank, warehouse.at_rank(rank).id, target_rank, 4.0 * warehouse.travel_time(rank)};
}

AssignmentDecision assign(const Warehouse& warehouse, OccupancyState& state, Rank target_rank,
                          PalletHandle pallet) {
  const auto& free = state.free_ranks();
  if (free.empty()) throw CapacityError("no available location");

  Rank best = 0;
  if (warehouse.metric() == Warehouse::Metric::RankDistance && !warehouse.has_extra_costs()) {
    // The nearest free rank is a neighbour of target_rank in the ordered set;
    // on a tie the lower rank is closer to the dock.
    auto above = free.lower_bound(target_rank);
    if (above == free.end()) {
      best = *std::prev(above);
    } else if (above == free.begin()) {
      best = *above;
    } else {
      const Rank below = *std::prev(above);
      best = (target_rank - below) <= (*above - target_rank) ? below : *above;
    }
  } else {
    double best_cost = std::numeric_limits<double>::infinity();
    for (Rank r : free) {  // ascending rank, so strict < keeps the dock-side tie
      const double cost = warehouse.distance(target_rank, r) + warehouse.extra_cost(r);
      if (cost < best_cost) {
        best_cost = cost;
        best = r;
      }
    }
  }
  return place_at(warehouse, state, best, target_rank, pallet);
}

}  // namespace dosslot
