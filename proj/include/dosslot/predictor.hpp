#pragma once

#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dosslot/distribution.hpp"
#include "dosslot/records.hpp"

namespace dosslot {

/// Maps shipment features to a predicted DoS distribution.
class QuantilePredictor {
 public:
  virtual ~QuantilePredictor() = default;
  virtual QuantileVector predict(const ShipmentFeatures& features) const = 0;
};

enum class FeatureKey {
  WarehouseId,
  CustomerType,
  ProductGroup,
  ArrivalMonth,
  InboundLocation,
  OutboundLocation,
};

std::string to_string(FeatureKey key);
// Throws ConfigError on an unknown name.
FeatureKey feature_key_from_string(std::string_view name);

using KeyLevel = std::vector<FeatureKey>;
// Most specific level first; the global pool is implicit and always last.
using KeyHierarchy = std::vector<KeyLevel>;

// (product_group, customer_type, month) -> (product_group, month) -> (product_group)
KeyHierarchy default_hierarchy();

std::string key_of(const ShipmentFeatures& f, const KeyLevel& level);

// Table keys are field values joined by a unit separator (0x1f).
std::string join_key(std::span<const std::string> values);
std::vector<std::string> split_key(std::string_view key);

inline constexpr std::size_t kDefaultMinSupport = 20;

/// Historical quantiles pooled over a hierarchy of feature keys.
class GroupQuantileModel final : public QuantilePredictor {
 public:
  using Table = std::unordered_map<std::string, QuantileVector>;

  GroupQuantileModel(KeyHierarchy hierarchy, std::size_t min_support, std::vector<Table> tables,
                     QuantileVector global);

  QuantileVector predict(const ShipmentFeatures& features) const override;

  const KeyHierarchy& hierarchy() const { return hierarchy_; }
  std::size_t min_support() const { return min_support_; }
  const std::vector<Table>& tables() const { return tables_; }
  const QuantileVector& global() const { return global_; }

 private:
  KeyHierarchy hierarchy_;
  std::size_t min_support_;
  std::vector<Table> tables_;  // one per hierarchy level
  QuantileVector global_;
};

// Throws FitError on an empty training set.
GroupQuantileModel fit_group_model(std::span<const Shipment> train, const KeyHierarchy& hierarchy,
                                   std::size_t min_support = kDefaultMinSupport);

inline QuantileVector predict_group(const GroupQuantileModel& model, const ShipmentFeatures& features) {
  return model.predict(features);
}

/// Same vector for every shipment.
class ConstantPredictor final : public QuantilePredictor {
 public:
  explicit ConstantPredictor(QuantileVector value) : value_(value) {}
  QuantileVector predict(const ShipmentFeatures&) const override { return value_; }
  const QuantileVector& value() const { return value_; }

 private:
  QuantileVector value_;
};

// Quantiles of every training pallet pooled together.
ConstantPredictor fit_constant_model(std::span<const Shipment> train);

/// Knows each shipment's true pallet DoS; predicts its empirical quantiles.
class OraclePredictor final : public QuantilePredictor {
 public:
  explicit OraclePredictor(std::span<const Shipment> shipments);
  // Throws LookupError for an unknown shipment id.
  QuantileVector predict(const ShipmentFeatures& features) const override;

 private:
  std::unordered_map<std::string, QuantileVector> truth_;
};

inline OraclePredictor oracle_predictor(std::span<const Shipment> shipments) {
  return OraclePredictor(shipments);
}

struct PredictionLoadReport {
  std::size_t rows = 0;
  std::vector<std::size_t> repaired_lines;  // 1-based, header is line 1
};

/// Predictions read from an interchange file, looked up by shipment id.
class ExternalPredictor final : public QuantilePredictor {
 public:
  explicit ExternalPredictor(std::unordered_map<std::string, QuantileVector> table)
      : table_(std::move(table)) {}
  // Throws LookupError for an id missing from the file.
  QuantileVector predict(const ShipmentFeatures& features) const override;
  bool contains(const std::string& shipment_id) const { return table_.count(shipment_id) > 0; }
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, QuantileVector> table_;
};

struct LoadedPredictions {
  ExternalPredictor predictor;
  PredictionLoadReport report;
};

// Header "shipment_id,q05,...,q95" then one row per shipment. Dips are
// repaired with a running maximum and reported. Throws LoadError.
LoadedPredictions load_predictions(std::istream& in);

struct PredictionRow {
  std::string shipment_id;
  QuantileVector quantiles;
};

std::string prediction_header();
void write_predictions(std::ostream& out, std::span<const PredictionRow> rows);

std::vector<PredictionRow> predict_all(const QuantilePredictor& predictor, std::span<const Shipment> shipments);

}  // namespace dosslot
