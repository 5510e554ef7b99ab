#include <doctest.h>

#include <cmath>
#include <functional>

#include "wpolab/flow.hpp"
#include "wpolab/rng.hpp"

using namespace wpolab;

namespace {

double l1_distance(const GridDensity& a, const GridDensity& b) {
  double s = 0.0;
  for (int i = 0; i < a.cells; ++i) s += std::abs(a.values[i] - b.values[i]);
  return s * a.spacing();
}

double left_mass(const GridDensity& d) {
  double s = 0.0;
  for (int i = 0; i < d.cells / 2; ++i) s += d.values[i];
  return s * d.spacing();
}

}  // namespace

TEST_SUITE("flow_oracle") {

TEST_CASE("grid construction and gaussian discretization") {
  GridDensity g = make_grid_density(-2.0, 2.0, 8);
  CHECK(g.spacing() == doctest::Approx(0.5));
  CHECK(g.center(0) == doctest::Approx(-1.75));
  CHECK(g.center(7) == doctest::Approx(1.75));
  CHECK(g.mass() == doctest::Approx(0.0));
  CHECK_THROWS(make_grid_density(1.0, -1.0, 8));

  GridDensity d = discretize_gaussian(1.0, 1.0, -15.0, 15.0, 4096);
  CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(grid_mean(d) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(grid_stddev(d) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("expected functional on simple densities") {
  // uniform on [0,1]
  GridDensity u = make_grid_density(0.0, 1.0, 100);
  for (double& v : u.values) v = 1.0;
  CHECK(u.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expected_functional(u, [](double a) { return a; }) ==
        doctest::Approx(0.5).epsilon(1e-12));

  GridDensity g = discretize_gaussian(0.0, 1.0, -15.0, 15.0, 4096);
  CHECK(expected_functional(g, [](double a) { return a * a; }) ==
        doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("constant potential leaves the transport flow fixed") {
  GridDensity d = discretize_gaussian(0.5, 1.2, -15.0, 15.0, 512);
  const GridDensity after = wasserstein_flow_step(d, [](double) { return 3.0; }, 1e-3);
  CHECK(after.values == d.values);
}

TEST_CASE("transport step rejects a cfl violation") {
  GridDensity d = discretize_gaussian(0.0, 1.0, -15.0, 15.0, 512);
  // |dQ/da| reaches 15 on the domain; spacing is about 0.0586
  CHECK_THROWS(wasserstein_flow_step(d, [](double a) { return -0.5 * a * a; }, 0.01));
  CHECK_THROWS(wasserstein_flow_step(d, [](double a) { return a; }, -1e-3));
}

TEST_CASE("quadratic transport follows the contracting characteristics") {
  // dQ/da = -a moves mass along a(t) = a0 exp(-t); after t = 0.5 the density
  // is the gaussian with mean and stddev shrunk by exp(-0.5). The upwind
  // scheme is first order, so the l1 error must roughly halve when the grid
  // and the step are refined together.
  auto q = [](double a) { return -0.5 * a * a; };
  const double shrink = std::exp(-0.5);
  auto l1_error_at = [&](int cells, double dt, double moment_eps) {
    GridDensity d = discretize_gaussian(1.0, 1.0, -15.0, 15.0, cells);
    const int steps = static_cast<int>(std::lround(0.5 / dt));
    for (int i = 0; i < steps; ++i) d = wasserstein_flow_step(d, q, dt);
    const GridDensity want = discretize_gaussian(shrink, shrink, -15.0, 15.0, cells);
    CHECK(grid_mean(d) == doctest::Approx(shrink).epsilon(moment_eps));
    CHECK(grid_stddev(d) == doctest::Approx(shrink).epsilon(moment_eps));
    return l1_distance(d, want);
  };
  const double coarse = l1_error_at(2048, 4e-4, 1.5e-2);
  const double fine = l1_error_at(4096, 2e-4, 5e-3);
  CAPTURE(coarse);
  CAPTURE(fine);
  CHECK(fine < 0.65 * coarse);
  CHECK(fine < 5e-3);
}

TEST_CASE("transport conserves mass to rounding") {
  GridDensity d = discretize_gaussian(0.0, 2.0, -15.0, 15.0, 1024);
  auto q = [](double a) { return -std::pow(a, 4) / 100.0 + a * a; };
  const double dt = 0.25 * d.spacing();  // safe under the unit tanh bound
  for (int i = 0; i < 200; ++i) {
    const GridDensity next = wasserstein_flow_step(d, q, dt, SquashKind::tanh_scaled, 1.0);
    REQUIRE(std::abs(next.mass() - d.mass()) <= 1e-10);
    d = next;
  }
  CHECK(std::abs(d.mass() - 1.0) <= 1e-9);
}

TEST_CASE("expected potential never decreases along the transport flow") {
  Rng rng(606);
  for (int c = 0; c < 10; ++c) {
    const double c4 = rng.uniform(-0.05, 0.0);
    const double c3 = rng.uniform(-0.1, 0.1);
    const double c2 = rng.uniform(-1.0, 1.0);
    const double c1 = rng.uniform(-2.0, 2.0);
    auto q = [=](double a) {
      return ((c4 * a + c3) * a + c2) * a * a + c1 * a;
    };
    GridDensity d = discretize_gaussian(rng.uniform(-2.0, 2.0), rng.uniform(0.5, 2.0),
                                        -15.0, 15.0, 512);
    const double dt = 0.4 * d.spacing();
    double e = expected_functional(d, q);
    for (int i = 0; i < 100; ++i) {
      d = wasserstein_flow_step(d, q, dt, SquashKind::tanh_scaled, 1.0);
      const double e2 = expected_functional(d, q);
      REQUIRE(e2 >= e - 1e-9);
      e = e2;
    }
  }
}

TEST_CASE("projected rates recover the analytic gaussian updates within two percent") {
  struct Case {
    double mu, sigma, sign;
  };
  for (const Case& k : {Case{1.0, 1.0, -1.0}, Case{1.0, 1.0, 1.0},
                        Case{-0.7, 1.3, -1.0}, Case{0.5, 0.8, -1.0}}) {
    GridDensity d = discretize_gaussian(k.mu, k.sigma, -15.0, 15.0, 4096);
    auto q = [=](double a) { return k.sign * 0.5 * a * a; };
    const double dt = 1e-4;
    const GridDensity after = wasserstein_flow_step(d, q, dt);
    const GaussianRates rates = project_flow_to_gaussian(d, after, dt);
    // dQ/da = sign*a gives mean rate sign*mu and stddev rate sign*sigma
    CHECK(rates.d_mean == doctest::Approx(k.sign * k.mu).epsilon(0.02));
    CHECK(rates.d_stddev == doctest::Approx(k.sign * k.sigma).epsilon(0.02));
  }
}

TEST_CASE("projection of identical densities is exactly zero") {
  const GridDensity d = discretize_gaussian(0.3, 1.1, -15.0, 15.0, 256);
  const GaussianRates r = project_flow_to_gaussian(d, d, 0.1);
  CHECK(r.d_mean == 0.0);
  CHECK(r.d_stddev == 0.0);
}

TEST_CASE("quartic transport concentrates mass on both maxima") {
  auto q = [](double a) { return -std::pow(a, 4) / 100.0 + a * a; };
  GridDensity d = discretize_gaussian(0.0, 3.0, -15.0, 15.0, 4096);
  const double dt = 0.2 * d.spacing();  // squash scale 2 caps |v| at 2
  const int steps = int(8.0 / dt);
  for (int i = 0; i < steps; ++i)
    d = wasserstein_flow_step(d, q, dt, SquashKind::tanh_scaled, 2.0);
  const double root = std::sqrt(50.0);
  double near = 0.0;
  for (int i = 0; i < d.cells; ++i) {
    const double a = d.center(i);
    if (std::abs(a - root) < 0.5 || std::abs(a + root) < 0.5) near += d.values[i];
  }
  near *= d.spacing();
  CHECK(near > 0.95);
}

TEST_CASE("growth flow keeps a constant potential fixed") {
  GridDensity d = discretize_gaussian(-0.4, 0.9, -15.0, 15.0, 512);
  const GridDensity after = fisher_rao_flow_step(d, [](double) { return 2.0; }, 0.05);
  for (int i = 0; i < d.cells; ++i)
    CHECK(after.values[i] == doctest::Approx(d.values[i]).epsilon(1e-13));
}

TEST_CASE("growth flow shifts mass toward the better mode") {
  auto q = [](double a) { return a; };
  GridDensity d = make_grid_density(-15.0, 15.0, 1024);
  const GridDensity l = discretize_gaussian(-2.0, 0.5, -15.0, 15.0, 1024);
  const GridDensity r = discretize_gaussian(2.0, 0.5, -15.0, 15.0, 1024);
  for (int i = 0; i < d.cells; ++i) d.values[i] = 0.5 * (l.values[i] + r.values[i]);
  const double before_right = 1.0 - left_mass(d);
  GridDensity cur = d;
  for (int i = 0; i < 50; ++i) cur = fisher_rao_flow_step(cur, q, 0.02);
  CHECK(1.0 - left_mass(cur) > before_right + 0.05);
  CHECK(std::abs(cur.mass() - 1.0) <= 1e-12);
}

TEST_CASE("expected potential never decreases along the growth flow") {
  Rng rng(607);
  for (int c = 0; c < 100; ++c) {
    const double c2 = rng.uniform(-0.5, 0.5);
    const double c1 = rng.uniform(-2.0, 2.0);
    auto q = [=](double a) { return c2 * a * a + c1 * a; };
    GridDensity d = discretize_gaussian(rng.uniform(-2.0, 2.0), rng.uniform(0.5, 2.0),
                                        -15.0, 15.0, 256);
    double e = expected_functional(d, q);
    for (int i = 0; i < 20; ++i) {
      d = fisher_rao_flow_step(d, q, 1e-3);
      const double e2 = expected_functional(d, q);
      REQUIRE(e2 >= e - 1e-9);
      e = e2;
    }
  }
}

TEST_CASE("growth flow rejects steps that would create negative mass") {
  GridDensity d = discretize_gaussian(0.0, 1.0, -15.0, 15.0, 256);
  CHECK_THROWS(fisher_rao_flow_step(d, [](double a) { return a; }, 10.0));
}

TEST_CASE("transport and growth move mass differently under a symmetric potential") {
  // symmetric Q with a face exactly at zero: transport cannot push mass across
  // the origin, growth reweights the halves toward the higher average
  auto q = [](double a) { return -0.5 * a * a; };
  const GridDensity d0 = discretize_gaussian(0.5, 1.0, -12.0, 12.0, 1024);

  GridDensity w = d0;
  const double before = left_mass(w);
  for (int i = 0; i < 100; ++i) w = wasserstein_flow_step(w, q, 5e-4);
  CHECK(std::abs(left_mass(w) - before) <= 1e-12);

  GridDensity f = d0;
  for (int i = 0; i < 50; ++i) f = fisher_rao_flow_step(f, q, 1e-3);
  CHECK(std::abs(left_mass(f) - before) > 1e-4);
}

TEST_CASE("finite-difference projection recovers a constructed drift") {
  const double h = 1e-4;
  const GridDensity before = discretize_gaussian(1.0, 1.0, -15.0, 15.0, 4096);
  const GridDensity after =
      discretize_gaussian(1.0 - h, 1.0 - h, -15.0, 15.0, 4096);
  const GaussianRates r = project_flow_to_gaussian(before, after, h);
  CHECK(r.d_mean == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(r.d_stddev == doctest::Approx(-1.0).epsilon(1e-3));
}

}  // TEST_SUITE
