#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "dosslot/distribution.hpp"
#include "dosslot/errors.hpp"

using namespace dosslot;

namespace {

std::vector<int> iota_samples(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

PalletRecord stay(Date arrival, int dos) {
  PalletRecord r;
  r.arrival_date = arrival;
  r.dos_days = dos;
  r.shipment_id = "x";
  return r;
}

// Reference lower quantile straight from the definition, on sorted samples.
double reference_quantile(std::vector<int> s, double level) {
  std::sort(s.begin(), s.end());
  for (int t : s) {
    const auto le = std::upper_bound(s.begin(), s.end(), t) - s.begin();
    if (static_cast<double>(le) / s.size() >= level - 1e-12) return t;
  }
  return s.back();
}

}  // namespace

TEST_CASE("empirical_cdf") {
  SUBCASE("direct count") {
    std::vector<int> s{1, 2, 3, 4};
    CHECK(empirical_cdf(s)(2) == 0.5);
    CHECK(empirical_cdf(s)(0.5) == 0.0);
    CHECK(empirical_cdf(s)(2.7) == 0.5);
    CHECK(empirical_cdf(s)(40) == 1.0);
  }
  SUBCASE("singleton") {
    std::vector<int> s{7};
    auto cdf = empirical_cdf(s);
    CHECK(cdf.support() == std::vector<int>{7});
    CHECK(cdf(7) == 1.0);
  }
  SUBCASE("ties merge") {
    std::vector<int> s{5, 5, 1, 9};
    auto cdf = empirical_cdf(s);
    CHECK(cdf.support() == std::vector<int>{1, 5, 9});
    CHECK(cdf.cum_weights() == std::vector<double>{0.25, 0.75, 1.0});
    CHECK(cdf.sample_count() == 4);
  }
  SUBCASE("errors") {
    std::vector<int> empty;
    CHECK_THROWS_AS(empirical_cdf(empty), DomainError);
    std::vector<int> zero{3, 0};
    CHECK_THROWS_AS(empirical_cdf(zero), DomainError);
  }
}

TEST_CASE("quantile_vector") {
  SUBCASE("samples 1..20") {
    auto q = quantile_vector(iota_samples(1, 20));
    CHECK(q[0] == 1);
    CHECK(q[9] == 10);
    CHECK(q[18] == 19);
    for (std::size_t i = 0; i < 19; ++i) CHECK(q[i] == static_cast<double>(i + 1));
  }
  SUBCASE("constant") {
    std::vector<int> s(10, 3);
    CHECK(quantile_vector(s) == QuantileVector::constant(3));
  }
  SUBCASE("two points") {
    std::vector<int> s{1, 100};
    auto q = quantile_vector(s);
    for (std::size_t i = 0; i < 19; ++i) CHECK(q[i] == (QuantileVector::level(i) <= 0.5 ? 1.0 : 100.0));
  }
  SUBCASE("levels on exact multiples are not rounded away") {
    // F(3) = 3/20 exactly; level 0.15 must return 3, not 4.
    auto q = quantile_vector(iota_samples(1, 20));
    CHECK(q[2] == 3);
  }
  SUBCASE("random samples: monotone, bounded, match the definition") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
      std::uniform_int_distribution<int> len(1, 60), val(1, 90);
      std::vector<int> s(static_cast<std::size_t>(len(rng)));
      for (int& v : s) v = val(rng);
      auto q = quantile_vector(s);
      const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
      for (std::size_t i = 0; i < 19; ++i) {
        if (i) CHECK(q[i] >= q[i - 1]);
        CHECK(q[i] >= *lo);
        CHECK(q[i] <= *hi);
        CHECK(q[i] == reference_quantile(s, QuantileVector::level(i)));
      }
    }
  }
}

TEST_CASE("QuantileVector validation and text form") {
  QuantileVector::Values v{};
  v.fill(2.0);
  v[5] = 1.0;
  CHECK_THROWS_AS(QuantileVector{v}, DomainError);
  std::size_t repairs = 0;
  auto fixed = QuantileVector::repaired(v, &repairs);
  CHECK(repairs == 1);
  CHECK(fixed[5] == 2.0);

  v.fill(1.0);
  v[0] = -1.0;
  CHECK_THROWS_AS(QuantileVector{v}, DomainError);
  v[0] = std::nan("");
  CHECK_THROWS_AS(QuantileVector{v}, DomainError);

  auto q = quantile_vector(iota_samples(1, 20));
  CHECK(to_line(q) == "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19");
  CHECK(parse_quantile_line(to_line(q)) == q);

  QuantileVector::Values frac{};
  for (std::size_t i = 0; i < 19; ++i) frac[i] = 0.1 * static_cast<double>(i) + 1.0 / 3.0;
  QuantileVector odd(frac);
  CHECK(parse_quantile_line(to_line(odd)) == odd);

  CHECK_THROWS_AS(parse_quantile_line("1,2,3"), DomainError);
  CHECK_THROWS_AS(parse_quantile_line("5,4,4,4,4,4,4,4,4,4,4,4,4,4,4,4,4,4,4"), DomainError);
  std::size_t n = 0;
  CHECK(parse_quantile_line("5,4,4,4,4,4,4,4,4,4,4,4,4,4,4,4,4,4,4", &n) == QuantileVector::constant(5));
  CHECK(n == 18);
}

TEST_CASE("sample_dos") {
  SUBCASE("degenerate") {
    Rng rng = make_rng(1);
    auto q = QuantileVector::constant(7);
    for (int i = 0; i < 100; ++i) CHECK(sample_dos(q, rng) == 7.0);
  }
  SUBCASE("knots, interpolation, tails") {
    auto q = quantile_vector(iota_samples(1, 20));
    CHECK(sample_dos_at(q, 0.5) == q[9]);
    CHECK(sample_dos_at(q, 0.05) == q[0]);
    CHECK(sample_dos_at(q, 0.01) == q[0]);
    CHECK(sample_dos_at(q, 0.95) == q[18]);
    CHECK(sample_dos_at(q, 0.999) == q[18]);
    CHECK(sample_dos_at(q, 0.525) == doctest::Approx(10.5));
  }
  SUBCASE("Monte-Carlo median near the source median") {
    auto q = quantile_vector(iota_samples(1, 20));
    Rng rng = make_rng(2024);
    std::vector<double> draws(100000);
    for (double& d : draws) d = sample_dos(q, rng);
    std::nth_element(draws.begin(), draws.begin() + draws.size() / 2, draws.end());
    CHECK(std::abs(draws[draws.size() / 2] - 10.0) <= 1.0);
  }
  SUBCASE("draws stay within the extreme knots") {
    Rng rng = make_rng(3);
    std::vector<int> s{2, 3, 3, 8, 15, 40};
    auto q = quantile_vector(s);
    for (int i = 0; i < 5000; ++i) {
      const double d = sample_dos(q, rng);
      CHECK(d >= q.front());
      CHECK(d <= q.back());
    }
  }
  SUBCASE("seeded determinism") {
    auto q = quantile_vector(iota_samples(3, 30));
    Rng a = make_rng(9), b = make_rng(9);
    for (int i = 0; i < 50; ++i) CHECK(sample_dos(q, a) == sample_dos(q, b));
  }
}

TEST_CASE("WarehouseDosDistribution") {
  WarehouseDosDistribution w({1.0, 0.0, 3.0, 0.0}, 1.0);
  CHECK(w.max_dos() == 3);
  CHECK(w.z(1) == 0.25);
  CHECK(w.z(3) == 0.75);
  CHECK(w.z(9) == 0.0);
  CHECK(w.cumulative(0.5) == 0.0);
  CHECK(w.cumulative(1) == 0.25);
  CHECK(w.cumulative(2.9) == 0.25);
  CHECK(w.cumulative(3) == 1.0);
  CHECK(w.cumulative(1e9) == 1.0);
  CHECK_THROWS_AS(WarehouseDosDistribution({0.0, 0.0}, 0.5), DomainError);
  CHECK_THROWS_AS(WarehouseDosDistribution({1.0}, 0.0), DomainError);
  CHECK_THROWS_AS(WarehouseDosDistribution({1.0}, 1.5), DomainError);
  CHECK_THROWS_AS(WarehouseDosDistribution({-1.0, 2.0}, 0.5), DomainError);
}

TEST_CASE("debias_warehouse_distribution") {
  const Date d0 = make_date(2017, 1, 1);
  SUBCASE("hand-normalized weights") {
    std::vector<PalletRecord> rs{stay(d0, 1), stay(d0, 1), stay(d0, 2), stay(d0, 2)};
    auto w = debias_warehouse_distribution(rs, 10);
    CHECK(w.cumulative(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(w.cumulative(2) == 1.0);
    // Four pallets resident on the only arrival day.
    CHECK(w.r_hat() == doctest::Approx(0.4));
  }
  SUBCASE("single atom is unaffected by debiasing") {
    for (int k : {1, 4, 17}) {
      std::vector<PalletRecord> rs(5, stay(d0, k));
      auto w = debias_warehouse_distribution(rs, 3);
      CHECK(w.cumulative(k - 0.5) == 0.0);
      CHECK(w.cumulative(k) == 1.0);
      CHECK(w.r_hat() == 1.0);  // clamped
    }
  }
  SUBCASE("duplicating every record leaves z and W unchanged") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> dos(1, 30), day(0, 100);
    std::vector<PalletRecord> rs;
    for (int i = 0; i < 500; ++i) rs.push_back(stay(add_days(d0, day(rng)), dos(rng)));
    std::vector<PalletRecord> twice = rs;
    twice.insert(twice.end(), rs.begin(), rs.end());
    auto a = debias_warehouse_distribution(rs, 1000);
    auto b = debias_warehouse_distribution(twice, 1000);
    REQUIRE(a.max_dos() == b.max_dos());
    for (int p = 1; p <= a.max_dos(); ++p) {
      CHECK(std::abs(a.z(p) - b.z(p)) <= 1e-12);
      CHECK(std::abs(a.cumulative(p) - b.cumulative(p)) <= 1e-12);
    }
  }
  SUBCASE("size-biased sample recovers z") {
    const std::vector<double> z{0.5, 0.3, 0.2};
    std::discrete_distribution<int> biased{1 * z[0], 2 * z[1], 3 * z[2]};
    std::mt19937_64 rng(77);
    std::vector<int> observed(100000);
    for (int& p : observed) p = biased(rng) + 1;
    auto recovered = debias_dos_masses(observed);
    REQUIRE(recovered.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(recovered[i] - z[i]) <= 0.02);
  }
  SUBCASE("errors") {
    std::vector<PalletRecord> none;
    CHECK_THROWS_AS(debias_warehouse_distribution(none, 5), DomainError);
    std::vector<PalletRecord> one{stay(d0, 2)};
    CHECK_THROWS_AS(debias_warehouse_distribution(one, 0), DomainError);
  }
}

TEST_CASE("occupancy_series") {
  const Date d0 = make_date(2017, 1, 1);
  SUBCASE("one record") {
    std::vector<PalletRecord> rs{stay(d0, 3)};
    auto s = occupancy_series(rs, 3, {d0, add_days(d0, 5)});
    CHECK(s == std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0, 0.0});
  }
  SUBCASE("no records in window") {
    std::vector<PalletRecord> rs{stay(d0, 3)};
    auto s = occupancy_series(rs, 3, {add_days(d0, 10), add_days(d0, 14)});
    CHECK(s == std::vector<double>(4, 0.0));
  }
  SUBCASE("balanced arrivals flatten after the longest stay") {
    // One DoS-1 and one DoS-3 pallet every day: 4 residents once warm.
    std::vector<PalletRecord> rs;
    for (int t = 0; t < 40; ++t) {
      rs.push_back(stay(add_days(d0, t), 1));
      rs.push_back(stay(add_days(d0, t), 3));
    }
    auto s = occupancy_series(rs, 8, {d0, add_days(d0, 40)});
    CHECK(s[0] == 0.25);
    CHECK(s[1] == 0.375);
    for (std::size_t t = 2; t < s.size(); ++t) CHECK(s[t] == 0.5);
  }
  SUBCASE("capacity must be positive") {
    std::vector<PalletRecord> rs{stay(d0, 3)};
    CHECK_THROWS_AS(occupancy_series(rs, 0, {d0, add_days(d0, 5)}), DomainError);
  }
}
