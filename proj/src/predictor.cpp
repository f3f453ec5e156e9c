#include "dosslot/predictor.hpp"

#include <cstdio>

#include "dosslot/csv.hpp"
#include "dosslot/errors.hpp"

namespace dosslot {

namespace {

constexpr char kKeySeparator = '\x1f';

constexpr std::pair<FeatureKey, const char*> kKeyNames[] = {
    {FeatureKey::WarehouseId, "warehouse_id"},
    {FeatureKey::CustomerType, "customer_type"},
    {FeatureKey::ProductGroup, "product_group"},
    {FeatureKey::ArrivalMonth, "arrival_month"},
    {FeatureKey::InboundLocation, "inbound_location"},
    {FeatureKey::OutboundLocation, "outbound_location"},
};

std::string field_value(const ShipmentFeatures& f, FeatureKey key) {
  switch (key) {
    case FeatureKey::WarehouseId: return f.warehouse_id;
    case FeatureKey::CustomerType: return f.customer_type;
    case FeatureKey::ProductGroup: return f.product_group;
    case FeatureKey::ArrivalMonth: return std::to_string(month_of(f.arrival_date));
    case FeatureKey::InboundLocation: return f.inbound_location;
    case FeatureKey::OutboundLocation: return f.outbound_location;
  }
  return {};
}

}  // namespace

std::string to_string(FeatureKey key) {
  for (const auto& [k, name] : kKeyNames)
    if (k == key) return name;
  return "unknown";
}

FeatureKey feature_key_from_string(std::string_view name) {
  for (const auto& [k, n] : kKeyNames)
    if (name == n) return k;
  throw ConfigError("unknown feature key '" + std::string(name) + "'");
}

KeyHierarchy default_hierarchy() {
  using enum FeatureKey;
  return {{ProductGroup, CustomerType, ArrivalMonth}, {ProductGroup, ArrivalMonth}, {ProductGroup}};
}

std::string key_of(const ShipmentFeatures& f, const KeyLevel& level) {
  std::vector<std::string> values;
  values.reserve(level.size());
  for (FeatureKey k : level) values.push_back(field_value(f, k));
  return join_key(values);
}

std::string join_key(std::span<const std::string> values) {
  std::string key;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) key += kKeySeparator;
    key += values[i];
  }
  return key;
}

std::vector<std::string> split_key(std::string_view key) {
  std::vector<std::string> values;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= key.size(); ++i) {
    if (i == key.size() || key[i] == kKeySeparator) {
      values.emplace_back(key.substr(start, i - start));
      start = i + 1;
    }
  }
  return values;
}

GroupQuantileModel::GroupQuantileModel(KeyHierarchy hierarchy, std::size_t min_support,
                                       std::vector<Table> tables, QuantileVector global)
    : hierarchy_(std::move(hierarchy)),
      min_support_(min_support),
      tables_(std::move(tables)),
      global_(global) {
  if (tables_.size() != hierarchy_.size()) throw FitError("one table per hierarchy level is required");
}

QuantileVector GroupQuantileModel::predict(const ShipmentFeatures& features) const {
  for (std::size_t level = 0; level < hierarchy_.size(); ++level) {
    const auto& table = tables_[level];
    if (auto it = table.find(key_of(features, hierarchy_[level])); it != table.end()) return it->second;
  }
  return global_;
}

GroupQuantileModel fit_group_model(std::span<const Shipment> train, const KeyHierarchy& hierarchy,
                                   std::size_t min_support) {
  if (train.empty()) throw FitError("cannot fit on an empty training set");
  std::vector<GroupQuantileModel::Table> tables;
  for (const auto& level : hierarchy) {
    std::unordered_map<std::string, std::vector<int>> pools;
    for (const auto& s : train) {
      auto& pool = pools[key_of(s.features, level)];
      pool.insert(pool.end(), s.pallet_dos.begin(), s.pallet_dos.end());
    }
    GroupQuantileModel::Table table;
    for (const auto& [key, pool] : pools)
      if (pool.size() >= min_support) table.emplace(key, quantile_vector(pool));
    tables.push_back(std::move(table));
  }
  return GroupQuantileModel(hierarchy, min_support, std::move(tables), fit_constant_model(train).value());
}

ConstantPredictor fit_constant_model(std::span<const Shipment> train) {
  if (train.empty()) throw FitError("cannot fit on an empty training set");
  std::vector<int> pool;
  for (const auto& s : train) pool.insert(pool.end(), s.pallet_dos.begin(), s.pallet_dos.end());
  return ConstantPredictor(quantile_vector(pool));
}

OraclePredictor::OraclePredictor(std::span<const Shipment> shipments) {
  for (const auto& s : shipments) truth_.insert_or_assign(s.features.shipment_id, quantile_vector(s.pallet_dos));
}

QuantileVector OraclePredictor::predict(const ShipmentFeatures& features) const {
  auto it = truth_.find(features.shipment_id);
  if (it == truth_.end()) throw LookupError("oracle has no shipment '" + features.shipment_id + "'");
  return it->second;
}

QuantileVector ExternalPredictor::predict(const ShipmentFeatures& features) const {
  auto it = table_.find(features.shipment_id);
  if (it == table_.end()) throw LookupError("no prediction for shipment '" + features.shipment_id + "'");
  return it->second;
}

std::string prediction_header() {
  std::string h = "shipment_id";
  char buf[8];
  for (std::size_t i = 1; i <= QuantileVector::kSize; ++i) {
    std::snprintf(buf, sizeof buf, ",q%02zu", i * 5);
    h += buf;
  }
  return h;
}

LoadedPredictions load_predictions(std::istream& in) {
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
  if (!read()) throw LoadError(1, "missing header");
  if (line != prediction_header()) throw LoadError(line_no, "unexpected header '" + line + "'");

  std::unordered_map<std::string, QuantileVector> table;
  PredictionLoadReport report;
  while (read()) {
    std::vector<std::string> cells;
    try {
      cells = csv::split_line(line);
    } catch (const std::invalid_argument& e) {
      throw LoadError(line_no, e.what());
    }
    if (cells.size() != QuantileVector::kSize + 1)
      throw LoadError(line_no, "expected shipment id and 19 values, got " + std::to_string(cells.size()) + " fields");
    std::string id = cells.front();
    if (id.empty()) throw LoadError(line_no, "missing shipment id");
    QuantileVector::Values values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      try {
        values[i] = csv::parse_real(cells[i + 1]);
      } catch (const std::invalid_argument& e) {
        throw LoadError(line_no, e.what());
      }
    }
    std::size_t repairs = 0;
    QuantileVector qv;
    try {
      qv = QuantileVector::repaired(values, &repairs);
    } catch (const DomainError& e) {
      throw LoadError(line_no, e.what());
    }
    if (repairs) report.repaired_lines.push_back(line_no);
    if (!table.emplace(std::move(id), qv).second) throw LoadError(line_no, "duplicate shipment id");
    ++report.rows;
  }
  return {ExternalPredictor(std::move(table)), std::move(report)};
}

void write_predictions(std::ostream& out, std::span<const PredictionRow> rows) {
  out << prediction_header() << '\n';
  for (const auto& row : rows) out << csv::quote(row.shipment_id) << ',' << to_line(row.quantiles) << '\n';
}

std::vector<PredictionRow> predict_all(const QuantilePredictor& predictor, std::span<const Shipment> shipments) {
  std::vector<PredictionRow> rows;
  rows.reserve(shipments.size());
  for (const auto& s : shipments) rows.push_back({s.features.shipment_id, predictor.predict(s.features)});
  return rows;
}

}  // namespace dosslot
