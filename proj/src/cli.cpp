#include "dosslot/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dosslot/csv.hpp"
#include "dosslot/errors.hpp"
#include "dosslot/metrics.hpp"
#include "dosslot/predictor.hpp"
#include "dosslot/records.hpp"
#include "dosslot/simulator.hpp"
#include "json.hpp"

namespace dosslot::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataQualityFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  bool strict = false;
  std::string out_dir = ".";
  std::string input;
};

struct Context {
  Options opt;
  json config = json::object();
  std::ostream& out;
  std::ostream& err;
  std::size_t warnings = 0;

  fs::path out_path(const std::string& name) const { return fs::path(opt.out_dir) / name; }

  void warn(const std::string& message) {
    ++warnings;
    err << "warning: " << message << '\n';
  }

  // Fails the run under --strict once any warning has been raised.
  void check_strict() const {
    if (opt.strict && warnings > 0)
      throw DataQualityFailure(std::to_string(warnings) + " data-quality warning(s) under --strict");
  }

  std::vector<std::uint64_t> seeds() const {
    if (!opt.seeds.empty()) return opt.seeds;
    std::vector<std::uint64_t> s;
    if (config.contains("seeds")) s = config.at("seeds").get<std::vector<std::uint64_t>>();
    if (s.empty()) s.push_back(1);
    return s;
  }
};

// ---- files -------------------------------------------------------------

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read '" + path.string() + "'");
  return in;
}

void write_output(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write '" + path.string() + "'");
  out << content;
  if (!out.flush()) throw IoFailure("failed writing '" + path.string() + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- config access -----------------------------------------------------

const json& section(const json& config, const char* key) {
  static const json empty = json::object();
  if (!config.contains(key)) return empty;
  const json& s = config.at(key);
  if (!s.is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return s;
}

template <class T>
T value_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

Date date_value(const json& j, const char* key, Date fallback) {
  if (!j.contains(key)) return fallback;
  return parse_date(j.at(key).get<std::string>());
}

DateRange range_value(const json& j, const char* key, DateRange fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<std::string>>();
  if (v.size() != 2) throw ConfigError(std::string("'") + key + "' must be [begin, end]");
  return {parse_date(v[0]), parse_date(v[1])};
}

// Relative paths in the config are taken relative to the config file.
fs::path config_path(const Context& ctx, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !ctx.opt.config_path.empty())
    path = fs::path(ctx.opt.config_path).parent_path() / path;
  return path;
}

fs::path manifest_dir(const Context& ctx) {
  if (ctx.config.contains("manifests")) return config_path(ctx, ctx.config.at("manifests").get<std::string>());
  return fs::path(ctx.opt.out_dir);
}

SplitConfig split_config(const json& config) {
  const json& s = section(config, "split");
  SplitConfig c;
  c.train_exit_cutoff = date_value(s, "train_exit_cutoff", make_date(2017, 6, 30));
  c.test_window = range_value(s, "test_window", {make_date(2017, 6, 30), make_date(2017, 7, 30)});
  c.extended_window = range_value(s, "extended_window", {make_date(2017, 9, 30), make_date(2017, 12, 31)});
  validate(c);
  return c;
}

DosModel dos_model(const json& j) {
  DosModel m;
  const auto kind = value_or<std::string>(j, "kind", "lognormal");
  if (kind == "lognormal")
    m.kind = DosModel::Kind::LogNormal;
  else if (kind == "constant")
    m.kind = DosModel::Kind::Constant;
  else
    throw ConfigError("unknown DoS model '" + kind + "'");
  m.mu = value_or(j, "mu", m.mu);
  m.sigma = value_or(j, "sigma", m.sigma);
  m.constant_days = value_or(j, "days", m.constant_days);
  m.drift_per_year = value_or(j, "drift_per_year", m.drift_per_year);
  m.seasonal_amplitude = value_or(j, "seasonal_amplitude", m.seasonal_amplitude);
  m.shipment_sigma = value_or(j, "shipment_sigma", m.shipment_sigma);
  return m;
}

GeneratorConfig generator_config(const json& config) {
  const json& g = section(config, "generator");
  GeneratorConfig c;
  c.shipment_count = value_or(g, "shipments", c.shipment_count);
  c.mean_shipment_size = value_or(g, "mean_shipment_size", c.mean_shipment_size);
  c.dates.begin = date_value(g, "start", c.dates.begin);
  c.dates.end = date_value(g, "end", c.dates.end);
  c.warehouses = value_or(g, "warehouses", c.warehouses);
  c.locations = value_or(g, "locations", c.locations);
  if (g.contains("customers")) {
    c.customers.clear();
    for (const auto& cj : g.at("customers"))
      c.customers.push_back({cj.at("name").get<std::string>(), value_or(cj, "mu_offset", 0.0)});
  }
  if (g.contains("groups")) {
    for (const auto& gj : g.at("groups")) {
      ProductGroupSpec spec;
      spec.name = gj.at("name").get<std::string>();
      spec.share = value_or(gj, "share", spec.share);
      spec.weight_mean = value_or(gj, "weight_mean", spec.weight_mean);
      spec.vocabulary = value_or(gj, "vocabulary", spec.vocabulary);
      if (gj.contains("dos")) spec.dos = dos_model(gj.at("dos"));
      c.groups.push_back(std::move(spec));
    }
  }
  return c;
}

KeyHierarchy hierarchy_value(const json& j) {
  if (!j.contains("hierarchy")) return default_hierarchy();
  KeyHierarchy h;
  for (const auto& level : j.at("hierarchy")) {
    KeyLevel l;
    for (const auto& name : level) l.push_back(feature_key_from_string(name.get<std::string>()));
    h.push_back(std::move(l));
  }
  return h;
}

// ---- data loading ------------------------------------------------------

std::vector<PalletRecord> read_records(Context& ctx, const fs::path& path) {
  auto in = open_input(path);
  auto parsed = parse_records(in);
  for (const auto& e : parsed.errors)
    ctx.warn(path.filename().string() + " row " + std::to_string(e.line) + ": " + e.reason);
  return std::move(parsed.records);
}

std::vector<Shipment> read_manifest(Context& ctx, const std::string& split) {
  return group_shipments(read_records(ctx, manifest_dir(ctx) / (split + ".csv")));
}

std::string records_text(std::span<const PalletRecord> records) {
  std::ostringstream os;
  write_records(os, records);
  return os.str();
}

std::string predictions_text(std::span<const PredictionRow> rows) {
  std::ostringstream os;
  write_predictions(os, rows);
  return os.str();
}

// ---- model files -------------------------------------------------------

json vector_json(const QuantileVector& q) { return json(std::vector<double>(q.begin(), q.end())); }

QuantileVector vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != QuantileVector::kSize) throw ConfigError("model vector must have 19 entries");
  QuantileVector::Values values;
  std::copy(v.begin(), v.end(), values.begin());
  return QuantileVector(values);
}

json model_json(const GroupQuantileModel& m) {
  json j;
  j["kind"] = "group";
  j["min_support"] = m.min_support();
  j["global"] = vector_json(m.global());
  json levels = json::array();
  for (std::size_t i = 0; i < m.hierarchy().size(); ++i) {
    json fields = json::array();
    for (FeatureKey k : m.hierarchy()[i]) fields.push_back(to_string(k));
    // Sorted so the file does not depend on hash order.
    std::map<std::string, const QuantileVector*> sorted;
    for (const auto& [key, q] : m.tables()[i]) sorted.emplace(key, &q);
    json entries = json::array();
    for (const auto& [key, q] : sorted) entries.push_back({{"key", split_key(key)}, {"quantiles", vector_json(*q)}});
    levels.push_back({{"fields", fields}, {"entries", entries}});
  }
  j["levels"] = levels;
  return j;
}

json model_json(const ConstantPredictor& m) { return {{"kind", "constant"}, {"global", vector_json(m.value())}}; }

std::shared_ptr<const QuantilePredictor> model_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const auto global = vector_from_json(j.at("global"));
  if (kind == "constant") return std::make_shared<ConstantPredictor>(global);
  if (kind != "group") throw ConfigError("unknown model kind '" + kind + "'");
  KeyHierarchy hierarchy;
  std::vector<GroupQuantileModel::Table> tables;
  for (const auto& level : j.at("levels")) {
    KeyLevel keys;
    for (const auto& f : level.at("fields")) keys.push_back(feature_key_from_string(f.get<std::string>()));
    GroupQuantileModel::Table table;
    for (const auto& e : level.at("entries"))
      table.emplace(join_key(e.at("key").get<std::vector<std::string>>()), vector_from_json(e.at("quantiles")));
    hierarchy.push_back(std::move(keys));
    tables.push_back(std::move(table));
  }
  return std::make_shared<GroupQuantileModel>(std::move(hierarchy), j.at("min_support").get<std::size_t>(),
                                              std::move(tables), global);
}

fs::path model_path(const Context& ctx) {
  const json& p = section(ctx.config, "predictor");
  if (p.contains("model")) return config_path(ctx, p.at("model").get<std::string>());
  return ctx.out_path("model.json");
}

std::shared_ptr<const QuantilePredictor> load_model(const Context& ctx) {
  auto in = open_input(model_path(ctx));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataQualityFailure("model file is not valid JSON: " + std::string(e.what()));
  }
  return model_from_json(j);
}

std::shared_ptr<const QuantilePredictor> fit_from_config(const json& predictor, std::span<const Shipment> train) {
  const auto kind = value_or<std::string>(predictor, "kind", "group");
  if (kind == "constant") return std::make_shared<ConstantPredictor>(fit_constant_model(train));
  // "model" names the saved-model path of evaluate/predict; fitting it means the group model.
  if (kind != "group" && kind != "model") throw ConfigError("cannot fit a predictor of kind '" + kind + "'");
  return std::make_shared<GroupQuantileModel>(fit_group_model(
      train, hierarchy_value(predictor), value_or<std::size_t>(predictor, "min_support", kDefaultMinSupport)));
}

std::shared_ptr<const ExternalPredictor> load_external(Context& ctx, const json& spec) {
  if (!spec.contains("predictions")) throw ConfigError("external predictor needs a 'predictions' path");
  const auto path = config_path(ctx, spec.at("predictions").get<std::string>());
  auto in = open_input(path);
  auto loaded = load_predictions(in);
  for (std::size_t line : loaded.report.repaired_lines)
    ctx.warn(path.filename().string() + " line " + std::to_string(line) + ": non-monotone quantiles repaired");
  return std::make_shared<ExternalPredictor>(std::move(loaded.predictor));
}

// ---- synth / ingest / fit / predict ------------------------------------

int cmd_synth(Context& ctx) {
  const auto config = generator_config(ctx.config);
  const auto records = synthesize_records(config, ctx.seeds().front());
  write_output(ctx.out_path("records.csv"), records_text(records));
  ctx.out << "records " << records.size() << "\n"
          << "shipments " << config.shipment_count << "\n"
          << "wrote " << ctx.out_path("records.csv").string() << "\n";
  return kSuccess;
}

std::string targets_text(std::span<const Shipment> shipments) {
  return predictions_text(predict_all(OraclePredictor(shipments), shipments));
}

int cmd_ingest(Context& ctx) {
  std::string input = ctx.opt.input;
  if (input.empty() && ctx.config.contains("input")) input = config_path(ctx, ctx.config.at("input").get<std::string>()).string();
  if (input.empty()) throw ConfigError("ingest needs --input or an 'input' entry in the config");
  const auto split_cfg = split_config(ctx.config);

  auto in = open_input(input);
  auto parsed = parse_records(in);
  std::ostringstream errors;
  write_row_errors(errors, parsed.errors);
  write_output(ctx.out_path("ingest_errors.txt"), errors.str());
  for (const auto& e : parsed.errors) ctx.warn("row " + std::to_string(e.line) + ": " + e.reason);

  const auto shipments = group_shipments(parsed.records);
  const auto split = split_dataset(shipments, split_cfg);
  const std::pair<const char*, const std::vector<Shipment>*> parts[] = {
      {"train", &split.train}, {"test", &split.test}, {"extended_test", &split.extended_test}};
  json summary;
  summary["records"] = parsed.records.size();
  summary["rejected_rows"] = parsed.errors.size();
  summary["shipments"] = shipments.size();
  summary["dropped_shipments"] = split.dropped;
  for (const auto& [name, part] : parts) {
    write_output(ctx.out_path(std::string(name) + ".csv"), records_text(flatten_shipments(*part)));
    write_output(ctx.out_path(std::string("targets_") + name + ".csv"), targets_text(*part));
    summary["splits"][name] = part->size();
  }
  write_output(ctx.out_path("ingest_summary.json"), dump(summary));

  ctx.out << "records " << parsed.records.size() << "\n"
          << "rejected_rows " << parsed.errors.size() << "\n"
          << "shipments " << shipments.size() << "\n"
          << "train " << split.train.size() << "\n"
          << "test " << split.test.size() << "\n"
          << "extended_test " << split.extended_test.size() << "\n"
          << "dropped " << split.dropped << "\n";
  ctx.check_strict();
  return kSuccess;
}

int cmd_fit(Context& ctx) {
  const json& predictor = section(ctx.config, "predictor");
  const auto train = read_manifest(ctx, "train");
  ctx.check_strict();
  const auto model = fit_from_config(predictor, train);
  json j;
  if (const auto* g = dynamic_cast<const GroupQuantileModel*>(model.get())) {
    j = model_json(*g);
    for (std::size_t i = 0; i < g->tables().size(); ++i)
      ctx.out << "level " << i + 1 << " keys " << g->tables()[i].size() << "\n";
  } else {
    j = model_json(static_cast<const ConstantPredictor&>(*model));
  }
  write_output(ctx.out_path("model.json"), dump(j));
  ctx.out << "train_shipments " << train.size() << "\n"
          << "wrote " << ctx.out_path("model.json").string() << "\n";
  return kSuccess;
}

int cmd_predict(Context& ctx) {
  const auto model = load_model(ctx);
  for (const char* split : {"test", "extended_test"}) {
    const auto shipments = read_manifest(ctx, split);
    const auto name = std::string("predictions_") + split + ".csv";
    write_output(ctx.out_path(name), predictions_text(predict_all(*model, shipments)));
    ctx.out << split << " " << shipments.size() << "\n";
  }
  ctx.check_strict();
  return kSuccess;
}

// ---- evaluate ----------------------------------------------------------

json report_json(const EvaluationReport& r) {
  return {{"msle", r.msle},
          {"mape", r.mape},
          {"n_shipments", r.n_shipments},
          {"per_percentile_mape", std::vector<double>(r.per_percentile_mape.begin(), r.per_percentile_mape.end())}};
}

int cmd_evaluate(Context& ctx) {
  const json& spec = section(ctx.config, "predictor");
  const auto kind = value_or<std::string>(spec, "kind", "model");

  std::map<std::string, std::vector<Shipment>> splits;
  for (const char* split : {"test", "extended_test"}) splits[split] = read_manifest(ctx, split);

  std::shared_ptr<const QuantilePredictor> predictor;
  if (kind == "model") {
    predictor = load_model(ctx);
  } else if (kind == "group" || kind == "constant") {
    predictor = fit_from_config(spec, read_manifest(ctx, "train"));
  } else if (kind == "oracle") {
    std::vector<Shipment> all;
    for (const auto& [name, shipments] : splits) all.insert(all.end(), shipments.begin(), shipments.end());
    predictor = std::make_shared<OraclePredictor>(all);
  } else if (kind == "external") {
    predictor = load_external(ctx, spec);
  } else {
    throw ConfigError("unknown predictor kind '" + kind + "'");
  }

  json report;
  report["predictor"] = kind;
  for (const char* split : {"test", "extended_test"}) {
    std::vector<PredictionPair> pairs;
    std::vector<std::string> missing;
    for (const auto& s : splits[split]) {
      try {
        pairs.push_back({predictor->predict(s.features), quantile_vector(s.pallet_dos)});
      } catch (const LookupError&) {
        missing.push_back(s.features.shipment_id);
      }
    }
    for (const auto& id : missing) ctx.warn(std::string(split) + ": no prediction for shipment '" + id + "'");
    report["missing"][split] = missing;
    if (pairs.empty()) {
      report[split] = nullptr;
      ctx.out << split << " no shipments evaluated\n";
      continue;
    }
    const auto r = evaluate(pairs);
    report[split] = report_json(r);
    ctx.out << split << " shipments " << r.n_shipments << " msle " << csv::format_real(r.msle) << " mape "
            << csv::format_real(r.mape) << "\n";
  }
  report["warnings"] = ctx.warnings;
  write_output(ctx.out_path("evaluation.json"), dump(report));
  ctx.check_strict();
  return kSuccess;
}

// ---- simulate / compare ------------------------------------------------

Warehouse warehouse_from_config(const Context& ctx) {
  const json& w = section(ctx.config, "warehouse");
  const auto metric_name = value_or<std::string>(w, "metric", "rank");
  Warehouse::Metric metric;
  if (metric_name == "rank")
    metric = Warehouse::Metric::RankDistance;
  else if (metric_name == "travel_time")
    metric = Warehouse::Metric::TravelTimeDifference;
  else
    throw ConfigError("unknown distance metric '" + metric_name + "'");
  if (w.contains("geometry")) {
    auto in = open_input(config_path(ctx, w.at("geometry").get<std::string>()));
    return load_geometry(in, metric);
  }
  const long n = value_or<long>(w, "locations", 200);
  if (n < 1) throw ConfigError("warehouse needs at least one location");
  return Warehouse::aisle(n);
}

BalanceSpec balance_spec(const json& stream) {
  if (!stream.contains("spec")) return default_pressured_spec();
  BalanceSpec spec;
  for (const auto& [key, value] : stream.at("spec").items()) {
    int p = 0;
    try {
      p = static_cast<int>(csv::parse_int(key));
    } catch (const std::invalid_argument&) {
      throw ConfigError("stream spec key '" + key + "' is not an integer DoS");
    }
    spec[p] = value.get<int>();
  }
  return spec;
}

StreamSource stream_source(Context& ctx) {
  const json& s = section(ctx.config, "stream");
  const auto kind = value_or<std::string>(s, "kind", "balanced");
  if (kind == "records") {
    if (!s.contains("path")) throw ConfigError("records stream needs a 'path'");
    const auto records = read_records(ctx, config_path(ctx, s.at("path").get<std::string>()));
    auto stream = std::make_shared<const ArrivalStream>(stream_from_records(records));
    return [stream](std::uint64_t) { return *stream; };
  }
  if (kind != "balanced") throw ConfigError("unknown stream kind '" + kind + "'");
  const auto spec = balance_spec(s);
  const long horizon = value_or<long>(s, "horizon", 500);
  FeatureSpec features;
  features.pallets_per_shipment = value_or(s, "pallets_per_shipment", features.pallets_per_shipment);
  features.product_groups = value_or(s, "product_groups", features.product_groups);
  features.shuffle_within_period = value_or(s, "shuffle", features.shuffle_within_period);
  features.customers = value_or(s, "customers", features.customers);
  const double perturb = value_or(s, "perturb_rate", 0.0);
  // Validate once up front so configuration errors surface before any work.
  generate_perfect_balance_stream(spec, horizon, features, 0);
  return [=](std::uint64_t seed) {
    auto stream = generate_perfect_balance_stream(spec, horizon, features, seed);
    if (perturb > 0.0) stream = perturb_stream(std::move(stream), perturb, seed);
    return stream;
  };
}

std::map<std::string, double> stream_turnover(const ArrivalStream& stream) {
  const auto shipments = stream.as_shipments();
  return turnover_by_group(flatten_shipments(shipments));
}

NamedPolicy make_policy(Context& ctx, const json& entry, long n_locations) {
  const json spec = entry.is_string() ? json{{"name", entry}} : entry;
  if (!spec.is_object() || !spec.contains("name")) throw ConfigError("policy entries need a 'name'");
  const auto name = spec.at("name").get<std::string>();
  NamedPolicy named;
  named.label = value_or<std::string>(spec, "label", name);

  if (name == "greedy") {
    named.policy = std::make_shared<GreedyPolicy>();
  } else if (name == "random") {
    named.policy = std::make_shared<RandomPolicy>();
  } else if (name == "turnover") {
    named.factory = [](const ArrivalStream& s) { return std::make_shared<TurnoverPolicy>(stream_turnover(s)); };
  } else if (name == "class") {
    const auto sizing_name = value_or<std::string>(spec, "sizing", "turnover_share");
    BandSizing sizing;
    if (sizing_name == "turnover_share")
      sizing = BandSizing::TurnoverShare;
    else if (sizing_name == "equal_thirds")
      sizing = BandSizing::EqualThirds;
    else
      throw ConfigError("unknown class band sizing '" + sizing_name + "'");
    named.factory = [sizing, n_locations](const ArrivalStream& s) {
      return std::make_shared<ClassPolicy>(build_class_zones(stream_turnover(s), n_locations, sizing));
    };
  } else if (name == "dos") {
    const auto predictor_kind = value_or<std::string>(spec, "predictor", "oracle");
    const auto distribution = value_or<std::string>(spec, "distribution", "stream");
    if (distribution != "stream" && distribution != "debiased")
      throw ConfigError("unknown DoS distribution source '" + distribution + "'");
    std::shared_ptr<const QuantilePredictor> fixed;
    if (predictor_kind == "model") {
      fixed = load_model(ctx);
    } else if (predictor_kind == "external") {
      fixed = load_external(ctx, spec);
    } else if (predictor_kind != "oracle") {
      throw ConfigError("unknown DoS predictor '" + predictor_kind + "'");
    }
    named.factory = [fixed, distribution, n_locations](const ArrivalStream& s) {
      std::shared_ptr<const QuantilePredictor> predictor = fixed;
      if (!predictor) predictor = std::make_shared<const OraclePredictor>(s.as_shipments());
      auto dist = distribution == "stream"
                      ? stream_dos_distribution(s, n_locations)
                      : debias_warehouse_distribution(flatten_shipments(s.as_shipments()), static_cast<int>(n_locations));
      return std::make_shared<DosPolicy>(std::move(predictor), std::move(dist));
    };
  } else {
    throw ConfigError("unknown policy '" + name + "'");
  }
  return named;
}

std::string comparison_text(const ComparisonTable& t) {
  std::ostringstream os;
  os << "policy,seed,total_cost,visit_cost,mean_percentile,median_percentile,placements,overflow_events\n";
  for (const auto& r : t.rows)
    os << csv::quote(r.policy) << ',' << r.seed << ',' << csv::format_real(r.total_cost) << ','
       << csv::format_real(r.visit_cost) << ',' << csv::format_real(r.mean_percentile) << ','
       << csv::format_real(r.median_percentile) << ',' << r.placements << ',' << r.overflow_events << '\n';
  return os.str();
}

std::string summary_text(const ComparisonTable& t) {
  std::ostringstream os;
  os << "policy,mean_total_cost,mean_visit_cost,mean_percentile,median_percentile,overflow_events\n";
  for (const auto& s : t.summary)
    os << csv::quote(s.policy) << ',' << csv::format_real(s.mean_total_cost) << ','
       << csv::format_real(s.mean_visit_cost) << ',' << csv::format_real(s.mean_percentile) << ','
       << csv::format_real(s.median_percentile) << ',' << s.overflow_events << '\n';
  return os.str();
}

// One row per bin, one count column per policy, pooled over seeds.
std::string histogram_text(const ComparisonTable& t) {
  std::ostringstream os;
  os << "bin_lower,bin_upper";
  for (const auto& s : t.summary) os << ',' << csv::quote(s.policy);
  os << '\n';
  for (std::size_t b = 0; b < kHistogramBins; ++b) {
    os << csv::format_real(static_cast<double>(b) / kHistogramBins) << ','
       << csv::format_real(static_cast<double>(b + 1) / kHistogramBins);
    for (const auto& s : t.summary) os << ',' << s.histogram[b];
    os << '\n';
  }
  return os.str();
}

void run_brute_force(Context& ctx, const StreamSource& source, const Warehouse& warehouse,
                     std::span<const std::uint64_t> seeds) {
  const json& b = section(ctx.config, "brute_force");
  if (!value_or(b, "enabled", false)) return;
  const double limit = value_or(b, "limit", kDefaultSearchLimit);
  const auto cost = value_or<std::string>(b, "cost", "occupancy");
  if (cost != "occupancy" && cost != "per_visit") throw ConfigError("unknown brute-force cost '" + cost + "'");
  const CostModel model = cost == "occupancy" ? CostModel::Occupancy : CostModel::PerVisit;
  std::ostringstream os;
  os << "seed,optimal_cost,search_bound\n";
  for (auto seed : seeds) {
    const auto result = brute_force_optimal(source(seed), warehouse, model, limit);
    os << seed << ',' << csv::format_real(result.cost) << ',' << csv::format_real(result.search_bound) << '\n';
    ctx.out << "seed " << seed << " optimal " << csv::format_real(result.cost) << "\n";
  }
  write_output(ctx.out_path("brute_force.csv"), os.str());
}

int run_policies(Context& ctx, bool compare) {
  const auto warehouse = warehouse_from_config(ctx);
  const auto source = stream_source(ctx);
  const auto seeds = ctx.seeds();
  const unsigned threads = value_or(ctx.config, "threads", 1u);

  json entries = ctx.config.contains("policies") ? ctx.config.at("policies") : json::array();
  if (!entries.is_array()) throw ConfigError("'policies' must be a list");
  if (entries.empty()) entries = compare ? json{"dos", "greedy", "class", "turnover", "random"} : json{"dos"};
  if (!compare && ctx.config.contains("policy")) entries = json{ctx.config.at("policy")};
  if (!compare) entries = json{entries.front()};

  std::vector<NamedPolicy> policies;
  for (const auto& e : entries) policies.push_back(make_policy(ctx, e, warehouse.size()));
  ctx.check_strict();

  run_brute_force(ctx, source, warehouse, seeds);

  const auto table = compare_policies(source, warehouse, policies, seeds, threads);
  const std::string stem = compare ? "comparison" : "simulation";
  write_output(ctx.out_path(stem + ".csv"), comparison_text(table));
  write_output(ctx.out_path(stem + "_summary.csv"), summary_text(table));
  write_output(ctx.out_path(stem + "_histogram.csv"), histogram_text(table));

  const PolicySummary* dos = nullptr;
  const PolicySummary* greedy = nullptr;
  for (const auto& s : table.summary) {
    ctx.out << s.policy << " mean_percentile " << csv::format_real(s.mean_percentile) << " total_cost "
            << csv::format_real(s.mean_total_cost) << " visit_cost " << csv::format_real(s.mean_visit_cost)
            << " overflow " << s.overflow_events << "\n";
    if (s.policy == "dos" && !dos) dos = &s;
    if (s.policy == "greedy" && !greedy) greedy = &s;
  }
  if (dos && greedy && greedy->mean_percentile > 0.0)
    ctx.out << "relative_drop " << csv::format_real(1.0 - dos->mean_percentile / greedy->mean_percentile) << "\n";
  return kSuccess;
}

int dispatch(Context& ctx) {
  const auto& c = ctx.opt.command;
  if (c == "synth") return cmd_synth(ctx);
  if (c == "ingest") return cmd_ingest(ctx);
  if (c == "fit") return cmd_fit(ctx);
  if (c == "predict") return cmd_predict(ctx);
  if (c == "evaluate") return cmd_evaluate(ctx);
  if (c == "simulate") return run_policies(ctx, false);
  if (c == "compare") return run_policies(ctx, true);
  throw ConfigError("unknown command '" + c + "'");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Duration-of-stay storage assignment: data pipeline and placement simulator", "dosctl"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", opt.config_path, "JSON run configuration");
  app.add_option("--seed", opt.seeds, "Seed; repeat for several (overrides the config)");
  app.add_flag("--strict", opt.strict, "Exit 2 on any data-quality warning");
  app.add_option("--out", opt.out_dir, "Output directory");
  app.add_option("--input", opt.input, "Records file for ingest (overrides the config)");
  const std::pair<const char*, const char*> commands[] = {
      {"synth", "Write a synthetic records file"},
      {"ingest", "Parse, group and split a records file into manifests and target quantiles"},
      {"fit", "Fit a group or constant quantile model on the training manifest"},
      {"predict", "Write interchange predictions for the test manifests"},
      {"evaluate", "Score a predictor on the test manifests (MSLE, MAPE)"},
      {"simulate", "Simulate one placement policy"},
      {"compare", "Simulate and compare several placement policies"},
  };
  for (const auto& [name, help] : commands)
    app.add_subcommand(name, help)->callback([&opt, name = std::string(name)] { opt.command = name; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  Context ctx{opt, json::object(), out, err};
  try {
    if (!opt.config_path.empty()) {
      auto in = open_input(opt.config_path);
      ctx.config = json::parse(in);
      if (!ctx.config.is_object()) throw ConfigError("configuration must be a JSON object");
    }
    return dispatch(ctx);
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const DataQualityFailure& e) {
    err << "error: " << e.what() << '\n';
    return kDataQuality;
  } catch (const SearchLimitExceeded& e) {
    err << "refusing exhaustive search: " << e.what() << '\n';
    return kConfigError;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kDataQuality;
  } catch (const GroupingError& e) {
    err << "error: " << e.what() << '\n';
    return kDataQuality;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << '\n';
    return kDataQuality;
  } catch (const LookupError& e) {
    err << "error: " << e.what() << '\n';
    return kDataQuality;
  } catch (const FitError& e) {
    err << "error: " << e.what() << '\n';
    return kDataQuality;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const json::exception& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const CapacityError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace dosslot::cli
