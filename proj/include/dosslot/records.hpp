#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dosslot/date.hpp"

namespace dosslot {

inline constexpr std::size_t kDescriptionTokens = 5;
inline constexpr const char* kPadToken = "<pad>";

using DescriptionTokens = std::array<std::string, kDescriptionTokens>;

/// One stored pallet as it appears in the historical records.
struct PalletRecord {
  Date arrival_date{};
  std::string warehouse_id;
  std::string customer_type;
  std::string product_group;
  double pallet_weight = 0.0;  // kg
  std::string inbound_location;
  std::string outbound_location;
  std::string description;
  int dos_days = 1;
  std::string shipment_id;

  Date exit_date() const { return add_days(arrival_date, dos_days); }
  bool operator==(const PalletRecord&) const = default;
};

// Lowercase, whitespace split, first five tokens, padded with kPadToken.
DescriptionTokens tokenize_description(std::string_view description);

/// Everything known about a shipment when it arrives.
struct ShipmentFeatures {
  std::string shipment_id;
  Date arrival_date{};
  std::string warehouse_id;
  std::string customer_type;
  std::string product_group;
  double pallet_weight = 0.0;
  std::string inbound_location;
  std::string outbound_location;
  std::string description;
  DescriptionTokens tokens;

  bool operator==(const ShipmentFeatures&) const = default;
};

ShipmentFeatures features_of(const PalletRecord& r);

/// A group of identical pallets that arrived together.
struct Shipment {
  ShipmentFeatures features;
  std::vector<int> pallet_dos;

  std::size_t size() const { return pallet_dos.size(); }
  // Departure of the last pallet.
  Date exit_date() const;
};

// Header names for each field. shipment_id is optional in the input; when it
// is absent the id is synthesized from the arrival fields (see synthesized_shipment_id).
struct ColumnMapping {
  std::string arrival_date = "arrival_date";
  std::string warehouse_id = "warehouse_id";
  std::string customer_type = "customer_type";
  std::string product_group = "product_group";
  std::string pallet_weight = "pallet_weight";
  std::string inbound_location = "inbound_location";
  std::string outbound_location = "outbound_location";
  std::string description = "description";
  std::string dos_days = "dos_days";
  std::string shipment_id = "shipment_id";
};

struct RowError {
  std::size_t line = 0;  // 1-based file line, header is line 1
  std::string reason;
};

struct ParseResult {
  std::vector<PalletRecord> records;
  std::vector<RowError> errors;
};

// Throws SchemaError on a missing/duplicated required header column. Bad data
// rows never abort; they are collected in ParseResult::errors.
ParseResult parse_records(std::istream& in, const ColumnMapping& schema = {});

void write_records(std::ostream& out, std::span<const PalletRecord> records);
void write_row_errors(std::ostream& out, std::span<const RowError> errors);

std::string synthesized_shipment_id(const PalletRecord& r);

// Groups by shipment_id in order of first appearance. Throws GroupingError
// when members of one id disagree on any feature.
std::vector<Shipment> group_shipments(std::span<const PalletRecord> records);

// Inverse of group_shipments, one record per pallet.
std::vector<PalletRecord> flatten_shipments(std::span<const Shipment> shipments);

struct DateRange {
  Date begin{};
  Date end{};
};

struct SplitConfig {
  Date train_exit_cutoff{};
  DateRange test_window;
  DateRange extended_window;
};

struct DatasetSplit {
  std::vector<Shipment> train;
  std::vector<Shipment> test;
  std::vector<Shipment> extended_test;
  std::size_t dropped = 0;
};

// train: exit < cutoff. test/extended: arrival > window.begin and
// exit < window.end. Throws ConfigError when windows are unordered or overlap.
DatasetSplit split_dataset(std::span<const Shipment> shipments, const SplitConfig& config);

void validate(const SplitConfig& config);

// ---- synthetic records -------------------------------------------------

struct DosModel {
  enum class Kind { LogNormal, Constant };
  Kind kind = Kind::LogNormal;
  double mu = 2.5;
  double sigma = 0.8;
  int constant_days = 1;
  // Shift of mu per 365 days elapsed since the start of the date range.
  double drift_per_year = 0.0;
  // Amplitude of a sinusoidal month-of-year shift of mu.
  double seasonal_amplitude = 0.0;
  // Per-shipment random offset of mu (standard deviation).
  double shipment_sigma = 0.0;
};

struct ProductGroupSpec {
  std::string name;
  DosModel dos;
  double share = 1.0;  // relative arrival frequency
  double weight_mean = 500.0;
  std::vector<std::string> vocabulary;
};

struct CustomerSpec {
  std::string name;
  double mu_offset = 0.0;
};

struct GeneratorConfig {
  std::vector<ProductGroupSpec> groups;
  std::vector<CustomerSpec> customers{{"retail", 0.0}};
  std::vector<std::string> warehouses{"W01"};
  std::vector<std::string> locations{"CA", "TX", "NY"};
  double mean_shipment_size = 10.6;
  std::size_t shipment_count = 1000;
  DateRange dates{make_date(2016, 1, 1), make_date(2017, 12, 31)};
};

// Deterministic in (config, seed). Throws ConfigError on an empty group list
// or invalid parameters.
std::vector<PalletRecord> synthesize_records(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace dosslot
