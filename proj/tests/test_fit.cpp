#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "tlsnoise/errors.hpp"
#include "tlsnoise/fit.hpp"
#include "tlsnoise/rng.hpp"

using namespace tlsnoise;
using namespace tlsnoise::fit;

namespace {

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, i / double(n - 1)));
  return v;
}

NllsProblem exp_decay(const std::vector<double>& t, const std::vector<double>& y) {
  NllsProblem p;
  p.n_residuals = t.size();
  p.names = {"amp", "rate"};
  p.residuals = [t, y](std::span<const double> q, std::span<double> r) {
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = q[0] * std::exp(-q[1] * t[i]) - y[i];
  };
  return p;
}

}  // namespace

TEST_CASE("Levenberg-Marquardt on Rosenbrock residuals") {
  NllsProblem p;
  p.n_residuals = 2;
  p.names = {"x", "y"};
  p.residuals = [](std::span<const double> q, std::span<double> r) {
    r[0] = 10.0 * (q[1] - q[0] * q[0]);
    r[1] = 1.0 - q[0];
  };
  const auto res = nlls_minimize(p, {-1.2, 1.0});
  CHECK(res.converged);
  CHECK(res.param("x") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.param("y") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.residual_norm < 1e-12);
  CHECK_THROWS_AS(res.param("z"), UsageError);
}

TEST_CASE("exponential fit, analytic and numerical Jacobians") {
  std::vector<double> t, y;
  for (int i = 0; i < 30; ++i) {
    t.push_back(0.1 * i);
    y.push_back(2.5 * std::exp(-1.3 * t.back()));
  }
  NllsProblem p = exp_decay(t, y);
  const std::vector<double> q{2.0, 1.0};
  const auto num = jacobian(p, q);
  NllsProblem pa = p;
  pa.jacobian = [t](std::span<const double> q, std::span<double> j) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      j[2 * i] = std::exp(-q[1] * t[i]);
      j[2 * i + 1] = -q[0] * t[i] * std::exp(-q[1] * t[i]);
    }
  };
  const auto ana = jacobian(pa, q);
  REQUIRE(num.size() == ana.size());
  for (std::size_t i = 0; i < num.size(); ++i) CHECK(num[i] == doctest::Approx(ana[i]).epsilon(1e-6));

  const auto res = nlls_minimize(pa, {1.0, 0.5});
  CHECK(res.converged);
  CHECK(res.param("amp") == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(res.param("rate") == doctest::Approx(1.3).epsilon(1e-8));
  for (double g : gradient(pa, res.params)) CHECK(std::abs(g) < 1e-10);
}

TEST_CASE("least-squares input errors") {
  NllsProblem p;
  CHECK_THROWS_AS(nlls_minimize(p, {1.0}), UsageError);
  p.n_residuals = 1;
  p.residuals = [](std::span<const double>, std::span<double> r) { r[0] = 0.0; };
  CHECK_THROWS_AS(nlls_minimize(p, {1.0, 2.0}), UsageError);
  p.residuals = [](std::span<const double>, std::span<double> r) {
    r[0] = std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(nlls_minimize(p, {1.0}), DomainError);
}

TEST_CASE("non-finite trial steps") {
  // Finite only for q < 1; the optimum at q = 3 is out of reach.
  NllsProblem p;
  p.n_residuals = 1;
  p.names = {"q"};
  p.residuals = [](std::span<const double> q, std::span<double> r) {
    r[0] = q[0] < 1.0 ? 1e6 * (q[0] - 3.0) : std::numeric_limits<double>::infinity();
  };
  try {
    const auto res = nlls_minimize(p, {0.0});
    CHECK(res.param("q") < 1.0);
  } catch (const NonFiniteResidualError& e) {
    REQUIRE(e.last_good_params.size() == 1);
    CHECK(e.last_good_params[0] < 1.0);
  }
}

TEST_CASE("power-law fit") {
  const auto x = logspace(1e-3, 1e3, 25);
  std::vector<double> y;
  for (double v : x) y.push_back(4.2e-17 * std::pow(v, -1.5));
  const auto r = fit_powerlaw(x, y, {}, 1e-3, 1e3);
  CHECK(std::abs(r.param("beta") + 1.5) < 1e-12);
  CHECK(std::abs(r.param("prefactor") / 4.2e-17 - 1.0) < 1e-12);

  // Window selection ignores data outside [lo, hi].
  std::vector<double> y2 = y;
  y2[0] = 1.0;
  y2[24] = -1.0;
  const auto w = fit_powerlaw(x, y2, {}, 2e-3, 5e2);
  CHECK(w.param("beta") == doctest::Approx(-1.5).epsilon(1e-12));

  CHECK_THROWS_AS(fit_powerlaw(x, y2, {}, 1e-3, 1e3), DomainError);
  CHECK_THROWS_AS(fit_powerlaw(x, y, {}, 1.0, 1.5), UsageError);
  CHECK_THROWS_AS(fit_powerlaw(x, std::vector<double>(3, 1.0), {}, 1e-3, 1e3), UsageError);

  // Weighted fit with noise: the error bar covers the truth.
  CounterRng rng(4, 0, 10);
  std::normal_distribution<double> z(0.0, 0.05);
  std::vector<double> yn, en;
  for (double v : y) {
    yn.push_back(v * std::exp(z(rng)));
    en.push_back(0.05 * v);
  }
  const auto n = fit_powerlaw(x, yn, en, 1e-3, 1e3);
  CHECK(std::abs(n.param("beta") + 1.5) < 4.0 * n.error("beta"));
  CHECK(n.error("beta") > 0.0);
}

TEST_CASE("Q model labels") {
  CHECK(parse_qi_model("gtm") == QiModel::gtm);
  CHECK(parse_qi_model("empirical") == QiModel::empirical);
  CHECK_THROWS_AS(parse_qi_model("linear"), UsageError);
}

TEST_CASE("GTM Q(N) round trip") {
  const double p1 = 3e-5, cnc = 2.0;
  const auto n = logspace(1e-8, 1e-2, 20);
  CounterRng rng(21, 0, 10);
  std::normal_distribution<double> z(0.0, 0.01);
  std::vector<double> q;
  for (double v : n) q.push_back(1.0 / (p1 * std::log(std::sqrt(cnc / v))) * std::exp(z(rng)));
  const auto r = fit_qi_vs_n(n, q, QiModel::gtm);
  CHECK(r.converged);
  CHECK(r.param("c_nc") == doctest::Approx(cnc).epsilon(0.05));
  CHECK(r.param("p_gamma_f_tan_delta") == doctest::Approx(p1).epsilon(0.02));

  CHECK_THROWS_AS(fit_qi_vs_n(std::vector<double>(n.begin(), n.begin() + 4),
                              std::vector<double>(q.begin(), q.begin() + 4), QiModel::gtm),
                  UsageError);
  CHECK_THROWS_AS(fit_qi_vs_n(logspace(1.0, 10.0, 8), std::vector<double>(8, 1e4), QiModel::gtm),
                  UsageError);
}

TEST_CASE("empirical Q(N) round trip") {
  const double f = 3e-5, nc = 1e-5, alpha = 0.4;
  const auto n = logspace(1e-9, 1e-1, 30);
  std::vector<double> q;
  for (double v : n) q.push_back(std::pow(1.0 + v / nc, alpha) / f);
  const auto r = fit_qi_vs_n(n, q, QiModel::empirical);
  CHECK(r.converged);
  CHECK(r.param("f_tan_delta") == doctest::Approx(f).epsilon(1e-6));
  CHECK(r.param("n_c") == doctest::Approx(nc).epsilon(1e-5));
  CHECK(r.param("alpha") == doctest::Approx(alpha).epsilon(1e-6));
}

TEST_CASE("noise versus photon number") {
  const double s0 = 4e-17, nc = 5.0;
  const auto n = logspace(1e-2, 1e4, 30);
  std::vector<double> s;
  for (double v : n) s.push_back(s0 / std::sqrt(1.0 + v / nc));
  const auto r = fit_noise_vs_n(n, s, {});
  CHECK(r.param("plateau") == doctest::Approx(s0).epsilon(1e-8));
  CHECK(r.param("n_c") == doctest::Approx(nc).epsilon(1e-8));
  CHECK_FALSE(r.has_flag("n_c_unidentifiable"));

  // All data far below N_c: nothing constrains it.
  const auto low = logspace(1e-4, 1e-2, 10);
  std::vector<double> flat;
  for (double v : low) flat.push_back(s0 / std::sqrt(1.0 + v / 1e3));
  CHECK(fit_noise_vs_n(low, flat, {}).has_flag("n_c_unidentifiable"));

  CHECK_THROWS_AS(fit_noise_vs_n(std::vector<double>(3, 1.0), std::vector<double>(3, 1.0), {}),
                  UsageError);
  CHECK_THROWS_AS(fit_noise_vs_n(n, std::vector<double>(5, 1.0), {}), UsageError);
}

TEST_CASE("fit report") {
  FitResult r;
  r.names = {"beta"};
  r.params = {-1.5};
  r.std_error = {0.01};
  r.converged = true;
  r.flags = {"example_flag"};
  std::ostringstream os;
  write_fit_report(os, r);
  CHECK(os.str().find("beta -1.5 0.01") != std::string::npos);
  CHECK(os.str().find("example_flag") != std::string::npos);
}
