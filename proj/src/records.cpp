#include "dosslot/records.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <unordered_map>

#include "dosslot/csv.hpp"
#include "dosslot/errors.hpp"

namespace dosslot {

DescriptionTokens tokenize_description(std::string_view description) {
  DescriptionTokens tokens;
  tokens.fill(kPadToken);
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < description.size() && n < kDescriptionTokens) {
    while (i < description.size() && std::isspace(static_cast<unsigned char>(description[i]))) ++i;
    const std::size_t start = i;
    while (i < description.size() && !std::isspace(static_cast<unsigned char>(description[i]))) ++i;
    if (i > start) {
      std::string word(description.substr(start, i - start));
      std::transform(word.begin(), word.end(), word.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      tokens[n++] = std::move(word);
    }
  }
  return tokens;
}

ShipmentFeatures features_of(const PalletRecord& r) {
  return {r.shipment_id,      r.arrival_date,      r.warehouse_id, r.customer_type,
          r.product_group,    r.pallet_weight,     r.inbound_location,
          r.outbound_location, r.description,      tokenize_description(r.description)};
}

Date Shipment::exit_date() const {
  const int longest = pallet_dos.empty() ? 0 : *std::max_element(pallet_dos.begin(), pallet_dos.end());
  return add_days(features.arrival_date, longest);
}

std::string synthesized_shipment_id(const PalletRecord& r) {
  return format_date(r.arrival_date) + "|" + r.warehouse_id + "|" + r.product_group + "|" +
         r.description + "|" + r.inbound_location;
}

namespace {

enum Field : std::size_t {
  kArrival, kWarehouse, kCustomer, kGroup, kWeight, kInbound, kOutbound, kDescription, kDos,
  kShipment, kFieldCount
};

std::array<const std::string*, kFieldCount> names_of(const ColumnMapping& m) {
  return {&m.arrival_date,     &m.warehouse_id,      &m.customer_type, &m.product_group,
          &m.pallet_weight,    &m.inbound_location,  &m.outbound_location,
          &m.description,      &m.dos_days,          &m.shipment_id};
}

PalletRecord parse_row(const std::vector<std::string>& cells,
                       const std::array<std::optional<std::size_t>, kFieldCount>& col) {
  auto cell = [&](Field f) -> const std::string& { return cells[*col[f]]; };
  PalletRecord r;
  try {
    r.arrival_date = parse_date(cell(kArrival));
  } catch (const DomainError& e) {
    throw std::invalid_argument(std::string("arrival_date: ") + e.what());
  }
  r.warehouse_id = cell(kWarehouse);
  r.customer_type = cell(kCustomer);
  r.product_group = cell(kGroup);
  try {
    r.pallet_weight = csv::parse_real(cell(kWeight));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("pallet_weight: ") + e.what());
  }
  if (!(r.pallet_weight >= 0.0) || !std::isfinite(r.pallet_weight))
    throw std::invalid_argument("pallet_weight: must be a nonnegative finite number");
  r.inbound_location = cell(kInbound);
  r.outbound_location = cell(kOutbound);
  r.description = cell(kDescription);
  long long dos = 0;
  try {
    dos = csv::parse_int(cell(kDos));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("dos_days: ") + e.what());
  }
  if (dos < 1 || dos > 1'000'000) throw std::invalid_argument("dos_days: must be a positive integer, got " + cell(kDos));
  r.dos_days = static_cast<int>(dos);
  if (col[kShipment] && !cell(kShipment).empty())
    r.shipment_id = cell(kShipment);
  else
    r.shipment_id = synthesized_shipment_id(r);
  return r;
}

}  // namespace

ParseResult parse_records(std::istream& in, const ColumnMapping& schema) {
  std::string line;
  std::size_t line_no = 0;
  auto read = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!read()) throw SchemaError("missing header row");
  std::vector<std::string> header;
  try {
    header = csv::split_line(line);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("malformed header: ") + e.what());
  }

  std::array<std::optional<std::size_t>, kFieldCount> col{};
  const auto names = names_of(schema);
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] != *names[f]) continue;
      if (col[f]) throw SchemaError("duplicate header column '" + header[i] + "'");
      col[f] = i;
    }
    if (!col[f] && f != kShipment) throw SchemaError("missing header column '" + *names[f] + "'");
  }

  ParseResult result;
  while (read()) {
    std::vector<std::string> cells;
    try {
      cells = csv::split_line(line);
    } catch (const std::invalid_argument& e) {
      result.errors.push_back({line_no, e.what()});
      continue;
    }
    if (cells.size() != header.size()) {
      result.errors.push_back({line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                            std::to_string(cells.size())});
      continue;
    }
    try {
      result.records.push_back(parse_row(cells, col));
    } catch (const std::invalid_argument& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  return result;
}

void write_records(std::ostream& out, std::span<const PalletRecord> records) {
  out << "arrival_date,warehouse_id,customer_type,product_group,pallet_weight,"
         "inbound_location,outbound_location,description,dos_days,shipment_id\n";
  for (const auto& r : records) {
    out << csv::join({format_date(r.arrival_date), r.warehouse_id, r.customer_type, r.product_group,
                      csv::format_real(r.pallet_weight), r.inbound_location, r.outbound_location,
                      r.description, std::to_string(r.dos_days), r.shipment_id})
        << '\n';
  }
}

void write_row_errors(std::ostream& out, std::span<const RowError> errors) {
  for (const auto& e : errors) out << "row " << e.line << ": " << e.reason << '\n';
}

std::vector<Shipment> group_shipments(std::span<const PalletRecord> records) {
  std::vector<Shipment> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, inserted] = index.try_emplace(r.shipment_id, out.size());
    if (inserted) {
      out.push_back({features_of(r), {r.dos_days}});
      continue;
    }
    Shipment& s = out[it->second];
    if (!(features_of(r) == s.features))
      throw GroupingError("conflicting features within shipment '" + r.shipment_id + "'");
    s.pallet_dos.push_back(r.dos_days);
  }
  return out;
}

std::vector<PalletRecord> flatten_shipments(std::span<const Shipment> shipments) {
  std::vector<PalletRecord> out;
  for (const auto& s : shipments) {
    const auto& f = s.features;
    for (int dos : s.pallet_dos)
      out.push_back({f.arrival_date, f.warehouse_id, f.customer_type, f.product_group, f.pallet_weight,
                     f.inbound_location, f.outbound_location, f.description, dos, f.shipment_id});
  }
  return out;
}

void validate(const SplitConfig& c) {
  if (!(c.test_window.begin < c.test_window.end)) throw ConfigError("test window is empty or reversed");
  if (!(c.extended_window.begin < c.extended_window.end))
    throw ConfigError("extended window is empty or reversed");
  if (c.test_window.begin < c.train_exit_cutoff)
    throw ConfigError("test window starts before the training exit cutoff");
  if (c.extended_window.begin < c.test_window.end)
    throw ConfigError("extended window overlaps or precedes the test window");
}

DatasetSplit split_dataset(std::span<const Shipment> shipments, const SplitConfig& config) {
  validate(config);
  DatasetSplit split;
  auto within = [](const Shipment& s, const DateRange& w) {
    return s.features.arrival_date > w.begin && s.exit_date() < w.end;
  };
  for (const auto& s : shipments) {
    if (s.exit_date() < config.train_exit_cutoff)
      split.train.push_back(s);
    else if (within(s, config.test_window))
      split.test.push_back(s);
    else if (within(s, config.extended_window))
      split.extended_test.push_back(s);
    else
      ++split.dropped;
  }
  return split;
}

// ---- synthetic records -------------------------------------------------

namespace {

void check(const GeneratorConfig& c) {
  if (c.groups.empty()) throw ConfigError("generator needs at least one product group");
  if (c.customers.empty()) throw ConfigError("generator needs at least one customer type");
  if (c.warehouses.empty()) throw ConfigError("generator needs at least one warehouse");
  if (c.locations.empty()) throw ConfigError("generator needs at least one location");
  if (!(c.mean_shipment_size >= 1.0)) throw ConfigError("mean shipment size must be >= 1");
  if (c.dates.end < c.dates.begin) throw ConfigError("generator date range is reversed");
  for (const auto& g : c.groups) {
    if (g.name.empty()) throw ConfigError("product group with empty name");
    if (!(g.share > 0.0)) throw ConfigError("group '" + g.name + "' needs a positive share");
    if (g.dos.kind == DosModel::Kind::Constant && g.dos.constant_days < 1)
      throw ConfigError("group '" + g.name + "' constant DoS must be >= 1");
    if (g.dos.kind == DosModel::Kind::LogNormal && !(g.dos.sigma >= 0.0))
      throw ConfigError("group '" + g.name + "' sigma must be >= 0");
  }
}

template <class T, class Rng>
const T& pick(const std::vector<T>& v, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

}  // namespace

std::vector<PalletRecord> synthesize_records(const GeneratorConfig& config, std::uint64_t seed) {
  check(config);
  std::mt19937_64 rng(seed);

  std::vector<double> shares;
  for (const auto& g : config.groups) shares.push_back(g.share);
  std::discrete_distribution<std::size_t> group_dist(shares.begin(), shares.end());
  std::uniform_int_distribution<long> day_dist(0, days_between(config.dates.begin, config.dates.end));
  std::poisson_distribution<int> extra_pallets(config.mean_shipment_size - 1.0);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_int_distribution<int> word_count(2, static_cast<int>(kDescriptionTokens));

  struct Draft {
    PalletRecord base;
    int pallets;
    double mu;
    const ProductGroupSpec* group;
  };
  std::vector<Draft> drafts;
  drafts.reserve(config.shipment_count);

  for (std::size_t s = 0; s < config.shipment_count; ++s) {
    const auto& group = config.groups[group_dist(rng)];
    const auto& customer = pick(config.customers, rng);
    PalletRecord r;
    const long day = day_dist(rng);
    r.arrival_date = add_days(config.dates.begin, day);
    r.warehouse_id = pick(config.warehouses, rng);
    r.customer_type = customer.name;
    r.product_group = group.name;
    r.inbound_location = pick(config.locations, rng);
    r.outbound_location = pick(config.locations, rng);
    r.pallet_weight = std::round(group.weight_mean * (0.5 + std::uniform_real_distribution<double>(0, 1)(rng)));
    if (!group.vocabulary.empty()) {
      const int words = word_count(rng);
      for (int w = 0; w < words; ++w) {
        if (w) r.description += ' ';
        r.description += pick(group.vocabulary, rng);
      }
    }
    char id[32];
    std::snprintf(id, sizeof id, "SH%07zu", s + 1);
    r.shipment_id = id;

    const int pallets = 1 + extra_pallets(rng);
    const double years = static_cast<double>(day) / 365.0;
    const double season = std::sin(2.0 * std::numbers::pi * (month_of(r.arrival_date) - 1) / 12.0);
    double mu = group.dos.mu + group.dos.drift_per_year * years + group.dos.seasonal_amplitude * season +
                customer.mu_offset;
    if (group.dos.shipment_sigma > 0.0) mu += group.dos.shipment_sigma * std_normal(rng);
    drafts.push_back({std::move(r), pallets, mu, &group});
  }

  std::stable_sort(drafts.begin(), drafts.end(),
                   [](const Draft& a, const Draft& b) { return a.base.arrival_date < b.base.arrival_date; });

  std::vector<PalletRecord> out;
  for (const auto& d : drafts) {
    for (int p = 0; p < d.pallets; ++p) {
      PalletRecord r = d.base;
      if (d.group->dos.kind == DosModel::Kind::Constant) {
        r.dos_days = d.group->dos.constant_days;
      } else {
        const double days = std::exp(d.mu + d.group->dos.sigma * std_normal(rng));
        r.dos_days = static_cast<int>(std::clamp(std::lround(days), 1L, 100'000L));
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace dosslot
