#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dosslot/errors.hpp"
#include "dosslot/records.hpp"

using namespace dosslot;

namespace {

const char* kHeader =
    "arrival_date,warehouse_id,customer_type,product_group,pallet_weight,"
    "inbound_location,outbound_location,description,dos_days,shipment_id\n";

PalletRecord record(Date arrival, int dos, std::string id, std::string group = "dairy") {
  PalletRecord r;
  r.arrival_date = arrival;
  r.warehouse_id = "W01";
  r.customer_type = "retail";
  r.product_group = std::move(group);
  r.pallet_weight = 400;
  r.inbound_location = "CA";
  r.outbound_location = "TX";
  r.description = "frozen peas 12oz";
  r.dos_days = dos;
  r.shipment_id = std::move(id);
  return r;
}

GeneratorConfig lognormal_config(std::size_t shipments) {
  GeneratorConfig c;
  ProductGroupSpec g;
  g.name = "frozen";
  g.vocabulary = {"ice", "cream", "vanilla", "pint", "Tub"};
  c.groups.push_back(g);
  c.shipment_count = shipments;
  return c;
}

}  // namespace

TEST_CASE("tokenize keeps word order, lowercases and pads") {
  auto t = tokenize_description("  Frozen  PEAS\t12oz ");
  CHECK(t[0] == "frozen");
  CHECK(t[1] == "peas");
  CHECK(t[2] == "12oz");
  CHECK(t[3] == kPadToken);
  CHECK(t[4] == kPadToken);

  auto long_text = tokenize_description("a b c d e f g");
  CHECK(long_text[4] == "e");
  CHECK(tokenize_description("")[0] == kPadToken);
}

TEST_CASE("parse_records: header only gives no records") {
  std::istringstream in(kHeader);
  auto r = parse_records(in);
  CHECK(r.records.empty());
  CHECK(r.errors.empty());
}

TEST_CASE("parse_records: dos_days 0 is a row error") {
  std::istringstream in(std::string(kHeader) + "2017-01-05,W01,retail,dairy,400,CA,TX,milk,0,S1\n");
  auto r = parse_records(in);
  CHECK(r.records.empty());
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].line == 2);
  CHECK(r.errors[0].reason.find("dos_days") != std::string::npos);
}

TEST_CASE("parse_records: bad rows are reported by line and parsing continues") {
  std::string body = std::string(kHeader) +
                     "2017-01-05,W01,retail,dairy,400,CA,TX,milk,3,S1\n"
                     "2017-13-05,W01,retail,dairy,400,CA,TX,milk,3,S2\n"
                     "2017-01-05,W01,retail,dairy,heavy,CA,TX,milk,3,S3\n"
                     "2017-01-05,W01,retail,dairy,400,CA,TX,\"milk,3,S4\n"
                     "2017-01-05,W01,retail,dairy,400,CA,TX,milk\n"
                     "2017-01-06,W01,retail,dairy,400,CA,TX,\"milk, whole\",2,S5\n";
  std::istringstream in(body);
  auto r = parse_records(in);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[1].description == "milk, whole");
  REQUIRE(r.errors.size() == 4);
  CHECK(r.errors[0].line == 3);
  CHECK(r.errors[1].line == 4);
  CHECK(r.errors[2].line == 5);
  CHECK(r.errors[3].line == 6);

  std::ostringstream report;
  write_row_errors(report, r.errors);
  CHECK(report.str().rfind("row 3: arrival_date", 0) == 0);
}

TEST_CASE("parse_records: header problems are schema errors") {
  std::istringstream missing("arrival_date,warehouse_id\n");
  CHECK_THROWS_AS(parse_records(missing), SchemaError);
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_records(empty), SchemaError);
  std::istringstream dup(std::string("dos_days,") + kHeader);
  CHECK_THROWS_AS(parse_records(dup), SchemaError);
}

TEST_CASE("parse_records: absent shipment_id column synthesizes the id") {
  std::istringstream in(
      "arrival_date,warehouse_id,customer_type,product_group,pallet_weight,"
      "inbound_location,outbound_location,description,dos_days\n"
      "2017-01-05,W01,retail,dairy,400,CA,TX,milk,3\n"
      "2017-01-05,W01,retail,dairy,400,CA,TX,milk,5\n"
      "2017-01-05,W01,retail,dairy,400,NV,TX,milk,5\n");
  auto r = parse_records(in);
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[0].shipment_id == "2017-01-05|W01|dairy|milk|CA");
  auto shipments = group_shipments(r.records);
  REQUIRE(shipments.size() == 2);
  CHECK(shipments[0].size() == 2);
}

TEST_CASE("parse_records: custom column mapping") {
  ColumnMapping m;
  m.dos_days = "stay";
  std::istringstream in(
      "arrival_date,warehouse_id,customer_type,product_group,pallet_weight,"
      "inbound_location,outbound_location,description,stay\n"
      "2017-01-05,W01,retail,dairy,400,CA,TX,milk,4\n");
  auto r = parse_records(in, m);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].dos_days == 4);
}

TEST_CASE("write then parse round-trips a 1000-row synthetic file") {
  auto records = synthesize_records(lognormal_config(200), 7);
  REQUIRE(records.size() >= 1000);
  records.resize(1000);
  // Awkward text survives quoting.
  records[3].description = "say \"hi\", twice";
  records[3].shipment_id = "odd,id";
  std::stringstream buf;
  write_records(buf, records);
  auto parsed = parse_records(buf);
  CHECK(parsed.errors.empty());
  CHECK(parsed.records == records);
}

TEST_CASE("group_shipments") {
  const Date d = make_date(2017, 3, 1);
  SUBCASE("sizes follow the ids") {
    std::vector<PalletRecord> rs{record(d, 2, "A"), record(d, 3, "A"), record(d, 9, "B"), record(d, 4, "A")};
    auto s = group_shipments(rs);
    REQUIRE(s.size() == 2);
    CHECK(s[0].features.shipment_id == "A");
    CHECK(s[0].pallet_dos == std::vector<int>{2, 3, 4});
    CHECK(s[1].size() == 1);
    CHECK(s[0].exit_date() == add_days(d, 4));
  }
  SUBCASE("distinct ids give singletons") {
    std::vector<PalletRecord> rs{record(d, 2, "A"), record(d, 3, "B"), record(d, 9, "C")};
    auto s = group_shipments(rs);
    CHECK(s.size() == 3);
    for (const auto& sh : s) CHECK(sh.size() == 1);
  }
  SUBCASE("conflicting features name the id") {
    std::vector<PalletRecord> rs{record(d, 2, "A"), record(d, 3, "A", "produce")};
    try {
      group_shipments(rs);
      FAIL("expected a grouping error");
    } catch (const GroupingError& e) {
      CHECK(std::string(e.what()).find("'A'") != std::string::npos);
    }
  }
  SUBCASE("flatten inverts grouping") {
    std::vector<PalletRecord> rs{record(d, 2, "A"), record(d, 3, "A"), record(d, 9, "B")};
    CHECK(flatten_shipments(group_shipments(rs)) == rs);
  }
}

TEST_CASE("grouping preserves the pallet count and the synthetic mean shipment size") {
  auto records = synthesize_records(lognormal_config(4000), 11);
  auto shipments = group_shipments(records);
  CHECK(shipments.size() == 4000);
  std::size_t total = 0;
  for (const auto& s : shipments) total += s.size();
  CHECK(total == records.size());
  const double mean = static_cast<double>(total) / shipments.size();
  CHECK(mean == doctest::Approx(10.6).epsilon(0.5 / 10.6));
}

TEST_CASE("split_dataset") {
  SplitConfig cfg{make_date(2017, 6, 30),
                  {make_date(2017, 6, 30), make_date(2017, 7, 30)},
                  {make_date(2017, 9, 30), make_date(2017, 12, 31)}};

  SUBCASE("exit on the cutoff date is not training data") {
    std::vector<PalletRecord> rs{record(make_date(2017, 6, 20), 10, "on"), record(make_date(2017, 6, 20), 9, "before")};
    auto split = split_dataset(group_shipments(rs), cfg);
    REQUIRE(split.train.size() == 1);
    CHECK(split.train[0].features.shipment_id == "before");
    CHECK(split.dropped == 1);
  }
  SUBCASE("window bounds are strict") {
    std::vector<PalletRecord> rs{record(make_date(2017, 6, 30), 2, "starts_on_begin"),
                                 record(make_date(2017, 7, 1), 2, "inside"),
                                 record(make_date(2017, 7, 20), 10, "exits_on_end"),
                                 record(make_date(2017, 10, 1), 5, "extended")};
    auto split = split_dataset(group_shipments(rs), cfg);
    REQUIRE(split.test.size() == 1);
    CHECK(split.test[0].features.shipment_id == "inside");
    REQUIRE(split.extended_test.size() == 1);
    CHECK(split.dropped == 2);
  }
  SUBCASE("empty input") {
    auto split = split_dataset({}, cfg);
    CHECK(split.train.empty());
    CHECK(split.test.empty());
    CHECK(split.extended_test.empty());
    CHECK(split.dropped == 0);
  }
  SUBCASE("bad windows") {
    SplitConfig overlap = cfg;
    overlap.extended_window.begin = make_date(2017, 7, 15);
    CHECK_THROWS_AS(split_dataset({}, overlap), ConfigError);
    SplitConfig reversed = cfg;
    reversed.test_window = {make_date(2017, 7, 30), make_date(2017, 6, 30)};
    CHECK_THROWS_AS(split_dataset({}, reversed), ConfigError);
    SplitConfig early = cfg;
    early.test_window.begin = make_date(2017, 6, 1);
    CHECK_THROWS_AS(split_dataset({}, early), ConfigError);
  }
  SUBCASE("synthetic corpus matches a direct filter and partitions") {
    auto shipments = group_shipments(synthesize_records(lognormal_config(3000), 5));
    auto split = split_dataset(shipments, cfg);
    std::size_t train = 0, test = 0, ext = 0;
    for (const auto& s : shipments) {
      const Date a = s.features.arrival_date;
      int longest = 0;
      for (int p : s.pallet_dos) longest = std::max(longest, p);
      const Date e = add_days(a, longest);
      if (e < make_date(2017, 6, 30))
        ++train;
      else if (a > make_date(2017, 6, 30) && e < make_date(2017, 7, 30))
        ++test;
      else if (a > make_date(2017, 9, 30) && e < make_date(2017, 12, 31))
        ++ext;
    }
    CHECK(split.train.size() == train);
    CHECK(split.test.size() == test);
    CHECK(split.extended_test.size() == ext);
    CHECK(train + test + ext + split.dropped == shipments.size());
    CHECK(test > 0);
    CHECK(ext > 0);

    std::set<std::string> seen;
    for (const auto* part : {&split.train, &split.test, &split.extended_test})
      for (const auto& s : *part) CHECK(seen.insert(s.features.shipment_id).second);
  }
}

TEST_CASE("synthesize_records") {
  SUBCASE("same seed, same bytes") {
    auto cfg = lognormal_config(300);
    std::ostringstream a, b;
    write_records(a, synthesize_records(cfg, 42));
    write_records(b, synthesize_records(cfg, 42));
    CHECK(a.str() == b.str());
    std::ostringstream c;
    write_records(c, synthesize_records(cfg, 43));
    CHECK(a.str() != c.str());
  }
  SUBCASE("constant DoS") {
    GeneratorConfig cfg;
    ProductGroupSpec g;
    g.name = "bulk";
    g.dos.kind = DosModel::Kind::Constant;
    g.dos.constant_days = 5;
    cfg.groups.push_back(g);
    cfg.shipment_count = 100;
    for (const auto& r : synthesize_records(cfg, 1)) CHECK(r.dos_days == 5);
  }
  SUBCASE("log-normal median") {
    auto cfg = lognormal_config(2000);
    cfg.mean_shipment_size = 8;
    auto records = synthesize_records(cfg, 3);
    REQUIRE(records.size() >= 10000);
    std::vector<int> dos;
    for (const auto& r : records) dos.push_back(r.dos_days);
    std::nth_element(dos.begin(), dos.begin() + dos.size() / 2, dos.end());
    const double med = dos[dos.size() / 2];
    CHECK(std::abs(med - std::exp(2.5)) <= 0.1 * std::exp(2.5));
  }
  SUBCASE("records satisfy their invariants and stay sorted") {
    auto cfg = lognormal_config(500);
    auto records = synthesize_records(cfg, 9);
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(records[i].dos_days >= 1);
      CHECK(records[i].arrival_date >= cfg.dates.begin);
      CHECK(records[i].arrival_date <= cfg.dates.end);
      if (i) CHECK(records[i - 1].arrival_date <= records[i].arrival_date);
    }
  }
  SUBCASE("configuration errors") {
    GeneratorConfig empty;
    CHECK_THROWS_AS(synthesize_records(empty, 1), ConfigError);
    auto cfg = lognormal_config(10);
    cfg.mean_shipment_size = 0.5;
    CHECK_THROWS_AS(synthesize_records(cfg, 1), ConfigError);
  }
}
