#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tlsnoise/dielectric.hpp"
#include "tlsnoise/errors.hpp"

using namespace tlsnoise;
using namespace tlsnoise::dielectric;

TEST_CASE("filling factor") {
  FieldSampleSet s;
  s.samples = {{1.0, 1.0426, 2.0, Region::helium},
               {2.0, 9.4, 1.0, Region::substrate},
               {4.0, 1.0, 0.5, Region::other}};
  const double he = 1.0426 * 2.0;
  const double total = he + 9.4 * 2.0 + 2.0;
  CHECK(filling_factor(s) == doctest::Approx(he / total));
  CHECK(filling_factor(s) + filling_factor(s, Region::substrate) + filling_factor(s, Region::other) ==
        doctest::Approx(1.0));

  FieldSampleSet none;
  none.samples = {{1.0, 9.4, 1.0, Region::substrate}};
  CHECK_THROWS_AS(filling_factor(none), DomainError);
  FieldSampleSet zero;
  zero.samples = {{0.0, 1.0, 1.0, Region::helium}};
  CHECK_THROWS_AS(filling_factor(zero), DomainError);
  CHECK_THROWS_AS(filling_factor(FieldSampleSet{}), DomainError);
}

TEST_CASE("frequency shifts") {
  CHECK(fill_freq_shift(5.839e9, 0.10, 1.0426) == doctest::Approx(-12.43707e6).epsilon(1e-6));
  CHECK(fill_freq_shift(5.839e9, 0.10, 1.0) == 0.0);
  CHECK_THROWS_AS(fill_freq_shift(5.839e9, 0.0, 1.04), DomainError);
  CHECK_THROWS_AS(fill_freq_shift(5.839e9, 0.1, 0.9), DomainError);
  CHECK(film_freq_shift(-12.44e6, 0.037) == doctest::Approx(-460.28e3).epsilon(1e-4));
  CHECK_THROWS_AS(film_freq_shift(-1.0, -0.1), DomainError);

  CHECK(pressure_eps(1.0426, 1.0) == doctest::Approx(1.0426));
  const double e = pressure_eps(1.0426, 1.3);
  CHECK((e - 1.0) / (e + 2.0) == doctest::Approx(1.3 * 0.0426 / 3.0426));
  CHECK_THROWS_AS(pressure_eps(1.0426, 0.0), DomainError);
  CHECK_THROWS_AS(pressure_eps(2.0, 10.0), DomainError);
}

TEST_CASE("loss tangent and T1 bounds") {
  const auto b = loss_tangent_bound(2.5e4, 3.0e4, 0.1);
  CHECK(b.f_tan_delta == doctest::Approx(1.0 / 2.5e4 - 1.0 / 3.0e4));
  CHECK(b.tan_delta == doctest::Approx(b.f_tan_delta / 0.1));
  CHECK(loss_tangent_bound(3.0e4, 2.5e4, 0.1).f_tan_delta == doctest::Approx(b.f_tan_delta));
  CHECK_THROWS_AS(loss_tangent_bound(0.0, 1.0, 0.1), DomainError);

  const double q[] = {2e4, 4e4};
  CHECK(mean_q(q) == doctest::Approx(2.0 / (1.0 / 2e4 + 1.0 / 4e4)));
  CHECK_THROWS_AS(mean_q(std::span<const double>{}), DomainError);

  CHECK(t1_bound(6e9, 0.1, 1.5e-5) == doctest::Approx(111.11e-6).epsilon(1e-4));
  CHECK(t1_bound(6e9, 0.1, 0.75e-5) == doctest::Approx(2.0 * t1_bound(6e9, 0.1, 1.5e-5)));
  CHECK(t1_bound(6e9, 1.0, 1.5e-5) == doctest::Approx(11.111e-6).epsilon(1e-4));
  CHECK(t1_bound(6e9, 0.1, 1.5e-5) * 6e9 * 0.1 * 1.5e-5 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(t1_bound(6e9, 0.1, 0.0), DomainError);
}

TEST_CASE("hyperfine ESR thermometry") {
  const HyperfineModel m;
  const double ta = m.equivalent_temperature();
  CHECK(ta == doctest::Approx(0.06815).epsilon(1e-4));
  CHECK(esr_peak_ratio(ta).ratio == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(esr_peak_ratio(ta).normalized == doctest::Approx(1.0 / (1.0 + std::exp(1.0))));
  CHECK(esr_peak_ratio(1e-4).ratio < 1e-43);
  CHECK(esr_peak_ratio(1e3).ratio == doctest::Approx(1.0).epsilon(1e-3));
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double r = esr_peak_ratio(1e-3 * i).ratio;
    CHECK(r > prev);
    prev = r;
  }
  CHECK_THROWS_AS(esr_peak_ratio(0.0), DomainError);
  CHECK_THROWS_AS(esr_peak_ratio(1.0, HyperfineModel{0.0}), DomainError);
}

TEST_CASE("3He BCS gap") {
  const auto g0 = he3_bcs_gap(0.0);
  CHECK_FALSE(g0.normal_state);
  CHECK(g0.gap == doctest::Approx(3.06 * 0.9e-3 * 1.380649e-23 / 6.62607015e-34));
  CHECK(he3_bcs_gap(0.675e-3).gap == doctest::Approx(0.5 * g0.gap));
  CHECK(he3_bcs_gap(0.9e-3).gap == 0.0);
  CHECK(he3_bcs_gap(1.0e-3).normal_state);
  CHECK_THROWS_AS(he3_bcs_gap(-1.0), DomainError);
}

TEST_CASE("participation table") {
  ParticipationTable t{{1.0, 4.0, 10.0}, {0.01, 0.037, 0.09}};
  CHECK(t.at(4.0) == doctest::Approx(0.037));
  CHECK(t.at(2.5) == doctest::Approx(0.0235));
  CHECK(t.at(0.1) == 0.01);
  CHECK(t.at(50.0) == 0.09);
  ParticipationTable bad{{2.0, 1.0}, {0.1, 0.2}};
  CHECK_THROWS_AS(bad.at(1.5), DomainError);
}

TEST_CASE("csv readers") {
  std::istringstream f("e2,eps,dv,region\n1,1.0426,2,helium\n2,9.4,1,substrate\n");
  const auto s = read_field_samples_csv(f);
  REQUIRE(s.samples.size() == 2);
  CHECK(s.samples[1].region == Region::substrate);
  std::istringstream bad("e2,eps,dv,region\n1,1,1,vacuum\n");
  CHECK_THROWS_AS(read_field_samples_csv(bad), UsageError);

  std::istringstream p("thickness_nm,participation\n1,0.01\n4,0.037\n");
  const auto t = read_participation_csv(p);
  CHECK(t.at(4.0) == doctest::Approx(0.037));

  CHECK(parse_region("helium") == Region::helium);
  CHECK(to_string(Region::other) == "other");
}
