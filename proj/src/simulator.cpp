#include "dosslot/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <unordered_map>

#include "dosslot/errors.hpp"
#include "dosslot/metrics.hpp"

namespace dosslot {

long ArrivalStream::count(int dos, long t) const {
  if (t < 1 || t > horizon) return 0;
  return std::count_if(arrivals(t).begin(), arrivals(t).end(), [dos](const StreamPallet& p) { return p.dos == dos; });
}

std::size_t ArrivalStream::total_arrivals() const {
  std::size_t n = 0;
  for (const auto& period : periods) n += period.size();
  return n;
}

int ArrivalStream::max_dos() const {
  int m = 0;
  for (const auto& period : periods)
    for (const auto& p : period) m = std::max(m, p.dos);
  return m;
}

std::vector<Shipment> ArrivalStream::as_shipments() const {
  std::vector<Shipment> out(shipments.size());
  for (std::size_t i = 0; i < shipments.size(); ++i) out[i].features = shipments[i];
  for (const auto& period : periods)
    for (const auto& p : period) out[p.shipment].pallet_dos.push_back(p.dos);
  std::erase_if(out, [](const Shipment& s) { return s.pallet_dos.empty(); });
  return out;
}

long balance_load(const BalanceSpec& spec) {
  long load = 0;
  for (const auto& [p, n] : spec) load += static_cast<long>(p) * n;
  return load;
}

namespace {

const Date kStreamEpoch = make_date(2020, 1, 1);

std::string period_group(int dos, const BalanceSpec& spec, std::size_t groups) {
  if (groups == 0) return "dos" + std::to_string(dos);
  const auto idx = static_cast<std::size_t>(std::distance(spec.begin(), spec.find(dos)));
  return "G" + std::to_string(idx * groups / spec.size() + 1);
}

}  // namespace

ArrivalStream generate_perfect_balance_stream(const BalanceSpec& spec, long horizon, const FeatureSpec& features,
                                              std::uint64_t seed) {
  if (spec.empty()) throw ConfigError("balance spec is empty");
  for (const auto& [p, n] : spec)
    if (p < 1 || n < 1) throw ConfigError("balance spec entries need DoS >= 1 and count >= 1");
  if (horizon < spec.rbegin()->first) throw ConfigError("horizon must be at least the largest DoS");
  if (features.pallets_per_shipment < 1) throw ConfigError("pallets_per_shipment must be >= 1");
  if (features.customers.empty()) throw ConfigError("feature spec needs a customer type");

  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> customer(0, features.customers.size() - 1);
  ArrivalStream stream;
  stream.horizon = horizon;
  stream.periods.resize(static_cast<std::size_t>(horizon));
  PalletHandle next_handle = 1;
  for (long t = 1; t <= horizon; ++t) {
    std::vector<int> dos;
    for (const auto& [p, n] : spec) dos.insert(dos.end(), static_cast<std::size_t>(n), p);
    if (features.shuffle_within_period) std::shuffle(dos.begin(), dos.end(), rng);
    auto& period = stream.periods[static_cast<std::size_t>(t - 1)];
    for (std::size_t i = 0; i < dos.size(); ++i) {
      if (i % features.pallets_per_shipment == 0) {
        ShipmentFeatures f;
        f.shipment_id = "T" + std::to_string(t) + "-" + std::to_string(i / features.pallets_per_shipment + 1);
        f.arrival_date = add_days(kStreamEpoch, t - 1);
        f.warehouse_id = "SIM";
        f.customer_type = features.customers[customer(rng)];
        f.product_group = period_group(dos[i], spec, features.product_groups);
        f.tokens = tokenize_description("");
        stream.shipments.push_back(std::move(f));
      }
      period.push_back({next_handle++, stream.shipments.size() - 1, dos[i]});
    }
  }
  return stream;
}

ArrivalStream perturb_stream(ArrivalStream stream, double rate, std::uint64_t seed) {
  std::vector<int> values;
  for (const auto& period : stream.periods)
    for (const auto& p : period) values.push_back(p.dos);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.empty()) return stream;

  PalletHandle next_handle = 1;
  for (const auto& period : stream.periods)
    for (const auto& p : period) next_handle = std::max(next_handle, p.handle + 1);

  Rng rng = make_rng(seed);
  std::bernoulli_distribution extra(std::clamp(rate, 0.0, 1.0));
  std::uniform_int_distribution<std::size_t> which(0, values.size() - 1);
  for (long t = 1; t <= stream.horizon; ++t) {
    if (!extra(rng)) continue;
    const int dos = values[which(rng)];
    ShipmentFeatures f;
    f.shipment_id = "X" + std::to_string(t);
    f.arrival_date = add_days(kStreamEpoch, t - 1);
    f.warehouse_id = "SIM";
    f.customer_type = "extra";
    f.product_group = "dos" + std::to_string(dos);
    f.tokens = tokenize_description("");
    stream.shipments.push_back(std::move(f));
    stream.periods[static_cast<std::size_t>(t - 1)].push_back({next_handle++, stream.shipments.size() - 1, dos});
  }
  return stream;
}

ArrivalStream stream_from_records(std::span<const PalletRecord> records) {
  ArrivalStream stream;
  if (records.empty()) return stream;
  const auto shipments = group_shipments(records);
  Date first = shipments.front().features.arrival_date;
  Date last = first;
  for (const auto& s : shipments) {
    first = std::min(first, s.features.arrival_date);
    last = std::max(last, s.features.arrival_date);
  }
  stream.horizon = days_between(first, last) + 1;
  stream.periods.resize(static_cast<std::size_t>(stream.horizon));
  PalletHandle next_handle = 1;
  for (std::size_t i = 0; i < shipments.size(); ++i) {
    stream.shipments.push_back(shipments[i].features);
    const long t = days_between(first, shipments[i].features.arrival_date) + 1;
    for (int dos : shipments[i].pallet_dos)
      stream.periods[static_cast<std::size_t>(t - 1)].push_back({next_handle++, i, dos});
  }
  return stream;
}

BalanceReport check_perfect_balance(const ArrivalStream& stream) {
  std::vector<int> present;
  for (const auto& period : stream.periods)
    for (const auto& p : period) present.push_back(p.dos);
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());

  BalanceReport report;
  for (int p : present) {
    for (long t = p + 1; t <= stream.horizon; ++t) {
      ++report.checked;
      if (stream.count(p, t - p) != stream.count(p, t)) ++report.violations;
    }
  }
  report.balanced = report.violations == 0;
  return report;
}

WarehouseDosDistribution stream_dos_distribution(const ArrivalStream& stream, long n_locations) {
  if (n_locations < 1) throw DomainError("capacity must be positive");
  std::vector<double> mass(static_cast<std::size_t>(std::max(1, stream.max_dos())), 0.0);
  double pallet_periods = 0.0;
  for (const auto& period : stream.periods) {
    for (const auto& p : period) {
      mass[static_cast<std::size_t>(p.dos - 1)] += p.dos;
      pallet_periods += p.dos;
    }
  }
  if (pallet_periods == 0.0) throw DomainError("stream has no arrivals");
  const double mean_residents = pallet_periods / static_cast<double>(std::max(1L, stream.horizon));
  const double r_hat = std::clamp(mean_residents / static_cast<double>(n_locations), 1.0 / n_locations, 1.0);
  return WarehouseDosDistribution(std::move(mass), r_hat);
}

SimulationResult run_simulation(const ArrivalStream& stream, const Warehouse& warehouse, const Policy& policy,
                                std::uint64_t seed) {
  Rng rng = make_rng(seed);
  SimulationResult result;
  OccupancyState state(warehouse.size());
  std::map<long, std::vector<PalletHandle>> departures;
  struct Waiting {
    StreamPallet pallet;
    long arrival_period;
  };
  std::deque<Waiting> staging;
  double occupied_time = 0.0;  // sum of t_i over occupied locations

  for (long t = 1; t <= stream.horizon || !departures.empty() || !staging.empty(); ++t) {
    state.clock = t;
    if (auto it = departures.find(t); it != departures.end()) {
      for (PalletHandle h : it->second) occupied_time -= warehouse.travel_time(state.retrieve(h));
      departures.erase(it);
    }

    std::deque<Waiting> queue;
    queue.swap(staging);
    if (t <= stream.horizon)
      for (const auto& p : stream.arrivals(t)) queue.push_back({p, t});

    for (const auto& w : queue) {
      if (state.free_ranks().empty()) {
        staging.push_back(w);
        ++result.overflow_events;
        continue;
      }
      const ArrivingPallet arriving{w.pallet.handle, &stream.shipments[w.pallet.shipment], w.pallet.dos};
      AssignmentDecision d;
      try {
        d = policy.place(arriving, warehouse, state, rng);
      } catch (const CapacityError&) {
        staging.push_back(w);
        ++result.overflow_events;
        continue;
      }
      occupied_time += warehouse.travel_time(d.rank);
      result.visit_cost += d.visit_cost;
      const long leave = t + w.pallet.dos;
      departures[leave].push_back(d.pallet);
      result.placements.push_back(
          {d, w.arrival_period, t, leave, w.pallet.dos, placement_percentile(d.rank, warehouse.size())});
    }
    result.total_cost += 4.0 * occupied_time;
    result.residents.push_back(state.occupied_count());
    result.periods = t;
  }

  if (!result.placements.empty()) {
    std::vector<double> pct;
    pct.reserve(result.placements.size());
    double sum = 0.0;
    for (const auto& p : result.placements) {
      pct.push_back(p.percentile);
      sum += p.percentile;
    }
    result.mean_percentile = sum / static_cast<double>(pct.size());
    result.median_percentile = median(std::move(pct));
  }
  return result;
}

double recount_total_cost(const SimulationResult& result, const Warehouse& warehouse) {
  double total = 0.0;
  for (const auto& p : result.placements)
    total += 4.0 * warehouse.travel_time(p.decision.rank) * static_cast<double>(p.departure_period - p.placed_period);
  return total;
}

// ---- exhaustive search ---------------------------------------------------

namespace {

class ExhaustiveSearch {
 public:
  ExhaustiveSearch(const ArrivalStream& stream, const Warehouse& warehouse, CostModel model)
      : warehouse_(warehouse), model_(model), memoize_(warehouse.size() <= 12) {
    for (long t = 1; t <= stream.horizon; ++t)
      for (const auto& p : stream.arrivals(t)) arrivals_.push_back({t, p.dos});
  }

  // Product over arrivals of the number of free locations it sees. The
  // resident count does not depend on where pallets go, so neither does this.
  double bound() const {
    std::map<long, long> leaving;
    long residents = 0;
    long current = 0;
    double bound = 1.0;
    for (const auto& a : arrivals_) {
      for (long t = current + 1; t <= a.period; ++t) {
        if (auto it = leaving.find(t); it != leaving.end()) residents -= it->second;
      }
      current = a.period;
      const long free = warehouse_.size() - residents;
      if (free <= 0) throw CapacityError("arrival in period " + std::to_string(a.period) + " finds no free location");
      bound *= static_cast<double>(free);
      ++residents;
      ++leaving[a.period + a.dos];
    }
    return bound;
  }

  BruteForceResult solve() {
    BruteForceResult result;
    std::vector<int> remaining(static_cast<std::size_t>(warehouse_.size()), 0);
    result.cost = future(0, remaining).cost;
    long period = arrivals_.empty() ? 0 : arrivals_.front().period;
    for (std::size_t i = 0; i < arrivals_.size(); ++i) {
      advance(remaining, arrivals_[i].period - period);
      period = arrivals_[i].period;
      const Rank r = future(i, remaining).choice;
      result.ranks.push_back(r);
      remaining[static_cast<std::size_t>(r - 1)] = arrivals_[i].dos;
    }
    return result;
  }

 private:
  struct Arrival {
    long period;
    int dos;
  };
  struct Best {
    double cost;
    Rank choice;
  };

  static void advance(std::vector<int>& remaining, long periods) {
    if (periods <= 0) return;
    for (int& r : remaining) r = static_cast<int>(std::max(0L, r - periods));
  }

  double placement_cost(Rank r, int dos) const {
    const double visit = 4.0 * warehouse_.travel_time(r);
    return model_ == CostModel::Occupancy ? visit * dos : visit;
  }

  // Minimal cost of arrivals i.. given occupancy just before arrival i.
  Best future(std::size_t i, const std::vector<int>& remaining) {
    if (i == arrivals_.size()) return {0.0, 0};
    std::string key;
    if (memoize_) {
      key.assign(reinterpret_cast<const char*>(&i), sizeof i);
      key.append(reinterpret_cast<const char*>(remaining.data()), remaining.size() * sizeof(int));
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    Best best{std::numeric_limits<double>::infinity(), 0};
    std::vector<int> next = remaining;
    const long gap = i + 1 < arrivals_.size() ? arrivals_[i + 1].period - arrivals_[i].period : 0;
    for (Rank r = 1; r <= warehouse_.size(); ++r) {
      if (remaining[static_cast<std::size_t>(r - 1)] > 0) continue;
      next = remaining;
      next[static_cast<std::size_t>(r - 1)] = arrivals_[i].dos;
      advance(next, gap);
      const double cost = placement_cost(r, arrivals_[i].dos) + future(i + 1, next).cost;
      if (cost < best.cost) best = {cost, r};
    }
    if (memoize_) memo_.emplace(std::move(key), best);
    return best;
  }

  const Warehouse& warehouse_;
  CostModel model_;
  bool memoize_;
  std::vector<Arrival> arrivals_;
  std::unordered_map<std::string, Best> memo_;
};

}  // namespace

BruteForceResult brute_force_optimal(const ArrivalStream& stream, const Warehouse& warehouse, CostModel model,
                                     double limit) {
  ExhaustiveSearch search(stream, warehouse, model);
  const double bound = search.bound();
  if (bound > limit) throw SearchLimitExceeded(bound, limit);
  BruteForceResult result = search.solve();
  result.search_bound = bound;
  return result;
}

// ---- policy comparison ---------------------------------------------------

std::size_t histogram_bin(double percentile) {
  const double scaled = std::ceil(percentile * static_cast<double>(kHistogramBins) - 1e-9);
  return static_cast<std::size_t>(std::clamp(scaled - 1.0, 0.0, static_cast<double>(kHistogramBins - 1)));
}

namespace {

ComparisonRow summarize_run(const std::string& label, std::uint64_t seed, const SimulationResult& r) {
  ComparisonRow row;
  row.policy = label;
  row.seed = seed;
  row.total_cost = r.total_cost;
  row.visit_cost = r.visit_cost;
  row.mean_percentile = r.mean_percentile;
  row.median_percentile = r.median_percentile;
  row.placements = r.placements.size();
  row.overflow_events = r.overflow_events;
  for (const auto& p : r.placements) ++row.histogram[histogram_bin(p.percentile)];
  return row;
}

}  // namespace

ComparisonTable compare_policies(const StreamSource& source, const Warehouse& warehouse,
                                 std::span<const NamedPolicy> policies, std::span<const std::uint64_t> seeds,
                                 unsigned threads) {
  std::vector<ArrivalStream> streams;
  streams.reserve(seeds.size());
  for (auto seed : seeds) streams.push_back(source(seed));

  const std::size_t tasks = policies.size() * seeds.size();
  std::vector<ComparisonRow> rows(tasks);
  std::vector<std::vector<double>> percentiles(tasks);
  auto run = [&](std::size_t k) {
    const auto& named = policies[k / seeds.size()];
    const std::size_t s = k % seeds.size();
    const auto policy = named.factory ? named.factory(streams[s]) : named.policy;
    const auto result = run_simulation(streams[s], warehouse, *policy, seeds[s]);
    rows[k] = summarize_run(named.label, seeds[s], result);
    for (const auto& p : result.placements) percentiles[k].push_back(p.percentile);
  };

  if (threads <= 1) {
    for (std::size_t k = 0; k < tasks; ++k) run(k);
  } else {
    for (std::size_t start = 0; start < tasks; start += threads) {
      std::vector<std::future<void>> batch;
      for (std::size_t k = start; k < std::min(tasks, start + threads); ++k)
        batch.push_back(std::async(std::launch::async, run, k));
      for (auto& f : batch) f.get();
    }
  }

  ComparisonTable table;
  table.rows = rows;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    PolicySummary sum;
    sum.policy = policies[i].label;
    std::vector<double> pooled;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto& row = rows[i * seeds.size() + s];
      sum.mean_total_cost += row.total_cost;
      sum.mean_visit_cost += row.visit_cost;
      sum.overflow_events += row.overflow_events;
      for (std::size_t b = 0; b < kHistogramBins; ++b) sum.histogram[b] += row.histogram[b];
      const auto& pct = percentiles[i * seeds.size() + s];
      pooled.insert(pooled.end(), pct.begin(), pct.end());
    }
    if (!seeds.empty()) {
      sum.mean_total_cost /= static_cast<double>(seeds.size());
      sum.mean_visit_cost /= static_cast<double>(seeds.size());
    }
    if (!pooled.empty()) {
      double total = 0.0;
      for (double v : pooled) total += v;
      sum.mean_percentile = total / static_cast<double>(pooled.size());
      sum.median_percentile = median(std::move(pooled));
    }
    table.summary.push_back(std::move(sum));
  }
  return table;
}

ComparisonTable compare_policies(const ArrivalStream& stream, const Warehouse& warehouse,
                                 std::span<const NamedPolicy> policies, std::span<const std::uint64_t> seeds,
                                 unsigned threads) {
  return compare_policies([&stream](std::uint64_t) { return stream; }, warehouse, policies, seeds, threads);
}

BalanceSpec default_pressured_spec() { return {{1, 14}, {2, 9}, {4, 6}, {8, 4}, {16, 2}, {40, 1}}; }

}  // namespace dosslot
