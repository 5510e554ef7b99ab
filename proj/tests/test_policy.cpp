#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "wpolab/policy.hpp"
#include "wpolab/quadrature.hpp"
#include "wpolab/rng.hpp"

using namespace wpolab;

namespace {

DiagGaussianParams random_gaussian(Rng& rng, std::size_t n) {
  DiagGaussianParams p;
  for (std::size_t i = 0; i < n; ++i) {
    p.mean.push_back(rng.uniform(-2.0, 2.0));
    p.stddev.push_back(rng.uniform(0.3, 2.0));
  }
  return p;
}

MixtureParams random_mixture(Rng& rng, std::size_t K, std::size_t n) {
  MixtureParams p;
  for (std::size_t k = 0; k < K; ++k) {
    p.logits.push_back(rng.uniform(-1.0, 1.0));
    Vec m, s;
    for (std::size_t i = 0; i < n; ++i) {
      m.push_back(rng.uniform(-2.0, 2.0));
      s.push_back(rng.uniform(0.3, 1.5));
    }
    p.means.push_back(m);
    p.stddevs.push_back(s);
  }
  return p;
}

Vec action_near(const DiagGaussianParams& p, Rng& rng) {
  Vec a(p.mean.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = p.mean[i] + p.stddev[i] * rng.uniform(-2.0, 2.0);
  return a;
}

// |got - want| <= tol * max(1, |want|)
bool close(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

}  // namespace

TEST_SUITE("policy_core") {

TEST_CASE("standard normal log density at zero") {
  DiagGaussianParams p{{0.0}, {1.0}};
  CHECK(log_prob(p, {0.0}) == doctest::Approx(-0.91893853320467267).epsilon(1e-14));
}

TEST_CASE("diagonal gaussian log density sums per-dimension terms") {
  DiagGaussianParams p{{1.0, -1.0}, {2.0, 0.5}};
  CHECK(log_prob(p, {0.0, 0.0}) == doctest::Approx(-3.9628770664093453).epsilon(1e-14));
}

TEST_CASE("symmetric two-component mixture log density at the midpoint") {
  MixtureParams p{{0.0, 0.0}, {{-1.0}, {1.0}}, {{1.0}, {1.0}}};
  CHECK(log_prob(p, {0.0}) == doctest::Approx(-1.4189385332046727).epsilon(1e-14));
}

TEST_CASE("exponential log density closed form and support edge") {
  ExponentialParams p1{{1.0}};
  CHECK(log_prob(p1, {2.0}) == doctest::Approx(-2.0).epsilon(1e-14));
  ExponentialParams p2{{2.0}};
  CHECK(log_prob(p2, {1.0}) == doctest::Approx(-1.1931471805599454).epsilon(1e-14));
  CHECK(log_prob(p2, {-0.1}) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("densities integrate to one") {
  DiagGaussianParams g{{0.3}, {0.7}};
  const double zg = trapezoid(0.3 - 8 * 0.7, 0.3 + 8 * 0.7, 20000,
                              [&](double a) { return std::exp(log_prob(g, {a})); });
  CHECK(zg == doctest::Approx(1.0).epsilon(1e-6));

  MixtureParams m{{std::log(0.3), std::log(0.7)}, {{-1.0}, {2.0}}, {{0.5}, {1.5}}};
  const double zm = trapezoid(-20.0, 20.0, 40000,
                              [&](double a) { return std::exp(log_prob(m, {a})); });
  CHECK(zm == doctest::Approx(1.0).epsilon(1e-6));

  ExponentialParams e{{1.7}};
  const double ze = trapezoid(0.0, 60.0, 60000,
                              [&](double a) { return std::exp(log_prob(e, {a})); });
  CHECK(ze == doctest::Approx(1.0).epsilon(1e-6));

  // two-dimensional diagonal gaussian via a nested trapezoid
  DiagGaussianParams g2{{0.5, -0.5}, {1.0, 0.8}};
  const double z2 = trapezoid(0.5 - 8.0, 0.5 + 8.0, 400, [&](double a0) {
    return trapezoid(-0.5 - 6.4, -0.5 + 6.4, 400,
                     [&](double a1) { return std::exp(log_prob(g2, {a0, a1})); });
  });
  CHECK(z2 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gaussian sampling matches the requested moments") {
  Rng rng(101);
  DiagGaussianParams p{{2.0}, {0.5}};
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = sample(p, rng)[0];
    s += a;
    s2 += a * a;
  }
  const double mean = s / n;
  CHECK(std::abs(mean - 2.0) < 5.0 * 0.5 / std::sqrt(double(n)));
  CHECK(std::sqrt(s2 / n - mean * mean) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("mixture sampling hits the blended mean") {
  Rng rng(102);
  MixtureParams p{{std::log(0.3), std::log(0.7)}, {{-1.0}, {2.0}}, {{0.5}, {1.5}}};
  const int n = 200000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += sample(p, rng)[0];
  CHECK(s / n == doctest::Approx(0.3 * -1.0 + 0.7 * 2.0).epsilon(0.02));
}

TEST_CASE("exponential sampling is nonnegative with the right mean") {
  Rng rng(103);
  ExponentialParams p{{2.0}};
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = sample(p, rng)[0];
    REQUIRE(a >= 0.0);
    s += a;
    s2 += a * a;
  }
  CHECK(s / n == doctest::Approx(2.0).epsilon(0.01));
  CHECK(s2 / n == doctest::Approx(8.0).epsilon(0.03));
}

TEST_CASE("sampling is reproducible per seed") {
  DiagGaussianParams g{{0.0, 1.0}, {1.0, 0.5}};
  Rng a(55), b(55);
  CHECK(sample(g, a) == sample(g, b));
  MixtureParams m{{0.1, -0.1}, {{-1.0}, {1.0}}, {{1.0}, {1.0}}};
  CHECK(sample(m, a) == sample(m, b));
}

TEST_CASE("action gradient closed forms") {
  DiagGaussianParams g{{0.0}, {1.0}};
  CHECK(grad_action_log_prob(g, {1.0})[0] == doctest::Approx(-1.0).epsilon(1e-14));
  ExponentialParams e{{2.0}};
  CHECK(grad_action_log_prob(e, {0.7})[0] == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("action gradients match finite differences across families") {
  Rng rng(2001);
  const double h = 1e-5;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 1 + rng.uniform_index(3);
    const DiagGaussianParams g = random_gaussian(rng, n);
    Vec a = action_near(g, rng);
    const Vec an = grad_action_log_prob(g, a);
    for (std::size_t i = 0; i < n; ++i) {
      Vec ap = a, am = a;
      ap[i] += h;
      am[i] -= h;
      const double fd = (log_prob(g, ap) - log_prob(g, am)) / (2 * h);
      REQUIRE(close(an[i], fd, 1e-5));
    }
  }
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 1 + rng.uniform_index(2);
    const MixtureParams m = random_mixture(rng, 1 + rng.uniform_index(3), n);
    Vec a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = rng.uniform(-3.0, 3.0);
    const Vec an = grad_action_log_prob(m, a);
    for (std::size_t i = 0; i < n; ++i) {
      Vec ap = a, am = a;
      ap[i] += h;
      am[i] -= h;
      const double fd = (log_prob(m, ap) - log_prob(m, am)) / (2 * h);
      REQUIRE(close(an[i], fd, 1e-5));
    }
  }
  for (int c = 0; c < 100; ++c) {
    ExponentialParams e{{rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0)}};
    Vec a{rng.uniform(0.5, 4.0), rng.uniform(0.5, 4.0)};
    const Vec an = grad_action_log_prob(e, a);
    for (std::size_t i = 0; i < 2; ++i) {
      Vec ap = a, am = a;
      ap[i] += h;
      am[i] -= h;
      const double fd = (log_prob(e, ap) - log_prob(e, am)) / (2 * h);
      REQUIRE(close(an[i], fd, 1e-5));
    }
  }
}

TEST_CASE("score gradients match finite differences") {
  Rng rng(2002);
  const double h = 1e-5;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 1 + rng.uniform_index(3);
    DiagGaussianParams g = random_gaussian(rng, n);
    const Vec a = action_near(g, rng);
    const DiagGaussianGrads an = grad_params_log_prob(g, a);
    for (std::size_t i = 0; i < n; ++i) {
      DiagGaussianParams gp = g, gm = g;
      gp.mean[i] += h;
      gm.mean[i] -= h;
      REQUIRE(close(an.d_mean[i], (log_prob(gp, a) - log_prob(gm, a)) / (2 * h), 1e-5));
      gp = g;
      gm = g;
      gp.stddev[i] += h;
      gm.stddev[i] -= h;
      REQUIRE(close(an.d_stddev[i], (log_prob(gp, a) - log_prob(gm, a)) / (2 * h), 1e-5));
    }
  }
  for (int c = 0; c < 100; ++c) {
    const std::size_t K = 1 + rng.uniform_index(3);
    MixtureParams m = random_mixture(rng, K, 1);
    const Vec a{rng.uniform(-3.0, 3.0)};
    const MixtureGrads an = grad_params_log_prob(m, a);
    for (std::size_t k = 0; k < K; ++k) {
      MixtureParams mp = m, mm = m;
      mp.logits[k] += h;
      mm.logits[k] -= h;
      REQUIRE(close(an.d_logits[k], (log_prob(mp, a) - log_prob(mm, a)) / (2 * h), 1e-5));
      mp = m;
      mm = m;
      mp.means[k][0] += h;
      mm.means[k][0] -= h;
      REQUIRE(close(an.d_means[k][0], (log_prob(mp, a) - log_prob(mm, a)) / (2 * h), 1e-5));
      mp = m;
      mm = m;
      mp.stddevs[k][0] += h;
      mm.stddevs[k][0] -= h;
      REQUIRE(close(an.d_stddevs[k][0], (log_prob(mp, a) - log_prob(mm, a)) / (2 * h), 1e-5));
    }
  }
  for (int c = 0; c < 100; ++c) {
    ExponentialParams e{{rng.uniform(0.2, 3.0)}};
    const Vec a{rng.uniform(0.1, 4.0)};
    const ExponentialGrads an = grad_params_log_prob(e, a);
    ExponentialParams ep = e, em = e;
    ep.scales[0] += h;
    em.scales[0] -= h;
    REQUIRE(close(an.d_scales[0], (log_prob(ep, a) - log_prob(em, a)) / (2 * h), 1e-5));
  }
}

TEST_CASE("gaussian mean score equals minus the action gradient") {
  Rng rng(2003);
  for (int c = 0; c < 100; ++c) {
    const DiagGaussianParams g = random_gaussian(rng, 1 + rng.uniform_index(3));
    const Vec a = action_near(g, rng);
    const Vec ga = grad_action_log_prob(g, a);
    const DiagGaussianGrads sc = grad_params_log_prob(g, a);
    for (std::size_t i = 0; i < ga.size(); ++i)
      CHECK(sc.d_mean[i] == doctest::Approx(-ga[i]).epsilon(1e-12));
  }
}

TEST_CASE("mixed contraction closed-form entries for a gaussian") {
  DiagGaussianParams p{{0.5}, {2.0}};
  // d/dmean of dlogpi/da is 1/sigma^2 regardless of the action
  DiagGaussianGrads at_mean = mixed_contraction(p, {0.5}, {1.0});
  CHECK(at_mean.d_mean[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(at_mean.d_stddev[0] == doctest::Approx(0.0).epsilon(1e-14));
  // one stddev away: d/dsigma of -(a-mu)/sigma^2 = 2(a-mu)/sigma^3
  DiagGaussianGrads off = mixed_contraction(p, {2.5}, {1.0});
  CHECK(off.d_stddev[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("mixed contraction matches finite differences of the contracted action gradient") {
  Rng rng(2004);
  const double h = 1e-5;
  auto contract = [](const Vec& g, const Vec& v) { return dot(g, v); };
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 1 + rng.uniform_index(3);
    DiagGaussianParams g = random_gaussian(rng, n);
    const Vec a = action_near(g, rng);
    Vec v(n);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    const DiagGaussianGrads an = mixed_contraction(g, a, v);
    for (std::size_t i = 0; i < n; ++i) {
      DiagGaussianParams gp = g, gm = g;
      gp.mean[i] += h;
      gm.mean[i] -= h;
      double fd = (contract(grad_action_log_prob(gp, a), v) -
                   contract(grad_action_log_prob(gm, a), v)) / (2 * h);
      REQUIRE(close(an.d_mean[i], fd, 1e-4));
      gp = g;
      gm = g;
      gp.stddev[i] += h;
      gm.stddev[i] -= h;
      fd = (contract(grad_action_log_prob(gp, a), v) -
            contract(grad_action_log_prob(gm, a), v)) / (2 * h);
      REQUIRE(close(an.d_stddev[i], fd, 1e-4));
    }
  }
  for (int c = 0; c < 100; ++c) {
    const std::size_t K = 1 + rng.uniform_index(3);
    MixtureParams m = random_mixture(rng, K, 1);
    const Vec a{rng.uniform(-3.0, 3.0)};
    const Vec v{rng.uniform(-2.0, 2.0)};
    const MixtureGrads an = mixed_contraction(m, a, v);
    for (std::size_t k = 0; k < K; ++k) {
      MixtureParams mp = m, mm = m;
      mp.logits[k] += h;
      mm.logits[k] -= h;
      double fd = (contract(grad_action_log_prob(mp, a), v) -
                   contract(grad_action_log_prob(mm, a), v)) / (2 * h);
      REQUIRE(close(an.d_logits[k], fd, 1e-4));
      mp = m;
      mm = m;
      mp.means[k][0] += h;
      mm.means[k][0] -= h;
      fd = (contract(grad_action_log_prob(mp, a), v) -
            contract(grad_action_log_prob(mm, a), v)) / (2 * h);
      REQUIRE(close(an.d_means[k][0], fd, 1e-4));
      mp = m;
      mm = m;
      mp.stddevs[k][0] += h;
      mm.stddevs[k][0] -= h;
      fd = (contract(grad_action_log_prob(mp, a), v) -
            contract(grad_action_log_prob(mm, a), v)) / (2 * h);
      REQUIRE(close(an.d_stddevs[k][0], fd, 1e-4));
    }
  }
  for (int c = 0; c < 100; ++c) {
    ExponentialParams e{{rng.uniform(0.2, 3.0)}};
    const Vec a{rng.uniform(0.1, 4.0)};
    const Vec v{rng.uniform(-2.0, 2.0)};
    const ExponentialGrads an = mixed_contraction(e, a, v);
    ExponentialParams ep = e, em = e;
    ep.scales[0] += h;
    em.scales[0] -= h;
    const double fd = (contract(grad_action_log_prob(ep, a), v) -
                       contract(grad_action_log_prob(em, a), v)) / (2 * h);
    REQUIRE(close(an.d_scales[0], fd, 1e-4));
  }
}

TEST_CASE("single-component mixture reduces to the gaussian") {
  DiagGaussianParams g{{0.4, -0.2}, {0.9, 1.3}};
  MixtureParams m{{0.7}, {g.mean}, {g.stddev}};
  const Vec a{1.0, -1.5};
  CHECK(log_prob(m, a) == doctest::Approx(log_prob(g, a)).epsilon(1e-13));
  const Vec v{0.3, -0.8};
  const DiagGaussianGrads gg = mixed_contraction(g, a, v);
  const MixtureGrads mg = mixed_contraction(m, a, v);
  CHECK(mg.d_logits[0] == doctest::Approx(0.0).epsilon(1e-13));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(mg.d_means[0][i] == doctest::Approx(gg.d_mean[i]).epsilon(1e-13));
    CHECK(mg.d_stddevs[0][i] == doctest::Approx(gg.d_stddev[i]).epsilon(1e-13));
  }
}

TEST_CASE("fisher rescaling applies the documented diagonal factors") {
  DiagGaussianParams g{{0.0}, {2.0}};
  DiagGaussianGrads gg{{1.0}, {1.0}};
  fisher_rescale(g, gg);
  CHECK(gg.d_mean[0] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(gg.d_stddev[0] == doctest::Approx(2.0).epsilon(1e-15));

  ExponentialParams e{{3.0}};
  ExponentialGrads eg{{1.0}};
  fisher_rescale(e, eg);
  CHECK(eg.d_scales[0] == doctest::Approx(9.0).epsilon(1e-15));

  MixtureParams m{{0.0, 0.0}, {{0.0}, {0.0}}, {{1.0}, {2.0}}};
  MixtureGrads mg{{1.0, 1.0}, {{1.0}, {1.0}}, {{1.0}, {1.0}}};
  fisher_rescale(m, mg);
  CHECK(mg.d_means[0][0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mg.d_means[1][0] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(mg.d_stddevs[1][0] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(mg.d_logits[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mg.d_logits[1] == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("fisher rescaling inverts the diagonal fisher blocks") {
  Rng rng(2005);
  for (int c = 0; c < 50; ++c) {
    const std::size_t n = 1 + rng.uniform_index(3);
    const DiagGaussianParams g = random_gaussian(rng, n);
    DiagGaussianGrads raw;
    for (std::size_t i = 0; i < n; ++i) {
      raw.d_mean.push_back(rng.uniform(-2.0, 2.0));
      raw.d_stddev.push_back(rng.uniform(-2.0, 2.0));
    }
    DiagGaussianGrads r = raw;
    fisher_rescale(g, r);
    for (std::size_t i = 0; i < n; ++i) {
      const double s2 = g.stddev[i] * g.stddev[i];
      // multiply back by the fisher diagonal (1/sigma^2, 2/sigma^2)
      CHECK(r.d_mean[i] / s2 == doctest::Approx(raw.d_mean[i]).epsilon(1e-12));
      CHECK(r.d_stddev[i] * 2.0 / s2 == doctest::Approx(raw.d_stddev[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("kl closed-form examples") {
  DiagGaussianParams p{{0.0}, {1.0}};
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-15));
  DiagGaussianParams q1{{1.0}, {1.0}};
  CHECK(kl_divergence(p, q1) == doctest::Approx(0.5).epsilon(1e-14));
  DiagGaussianParams q2{{0.0}, {2.0}};
  CHECK(kl_divergence(p, q2) == doctest::Approx(0.31814718055994529).epsilon(1e-14));
}

TEST_CASE("kl split sums exactly to the total and stays nonnegative") {
  Rng rng(2006);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 1 + rng.uniform_index(3);
    const DiagGaussianParams p = random_gaussian(rng, n);
    const DiagGaussianParams q = random_gaussian(rng, n);
    const double total = kl_divergence(p, q);
    REQUIRE(total >= 0.0);
    REQUIRE(kl_mean_only(p, q) >= 0.0);
    REQUIRE(std::abs(kl_mean_only(p, q) + kl_stddev_only(p, q) - total) <= 1e-12 * std::max(1.0, total));
  }
}

TEST_CASE("kl matches the quadrature definition") {
  Rng rng(2007);
  for (int c = 0; c < 20; ++c) {
    const DiagGaussianParams p = random_gaussian(rng, 1);
    const DiagGaussianParams q = random_gaussian(rng, 1);
    const double direct = kl_divergence(p, q);
    const double quad = gauss_expectation(p.mean[0], p.stddev[0], 40, [&](double a) {
      return log_prob(p, {a}) - log_prob(q, {a});
    });
    REQUIRE(std::abs(direct - quad) <= 1e-6 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("kl part gradients with respect to the current policy match finite differences") {
  Rng rng(2008);
  const double h = 1e-5;
  for (int c = 0; c < 50; ++c) {
    const std::size_t n = 1 + rng.uniform_index(2);
    const DiagGaussianParams p = random_gaussian(rng, n);
    DiagGaussianParams q = random_gaussian(rng, n);
    const DiagGaussianGrads gm = kl_mean_only_grad_q(p, q);
    const DiagGaussianGrads gs = kl_stddev_only_grad_q(p, q);
    for (std::size_t i = 0; i < n; ++i) {
      DiagGaussianParams qp = q, qm = q;
      qp.mean[i] += h;
      qm.mean[i] -= h;
      REQUIRE(close(gm.d_mean[i], (kl_mean_only(p, qp) - kl_mean_only(p, qm)) / (2 * h), 1e-5));
      qp = q;
      qm = q;
      qp.stddev[i] += h;
      qm.stddev[i] -= h;
      REQUIRE(close(gm.d_stddev[i], (kl_mean_only(p, qp) - kl_mean_only(p, qm)) / (2 * h), 1e-5));
      REQUIRE(close(gs.d_stddev[i], (kl_stddev_only(p, qp) - kl_stddev_only(p, qm)) / (2 * h), 1e-5));
    }
  }
}

TEST_CASE("stddev head map stays above the floor and round-trips") {
  for (double raw : {-50.0, -5.0, 0.0, 1.0, 30.0}) {
    CHECK(stddev_from_raw(raw) >= kSigmaMin);
  }
  for (double s : {0.0011, 0.01, 0.5, 1.0, 5.0}) {
    CHECK(stddev_from_raw(raw_from_stddev(s)) == doctest::Approx(s).epsilon(1e-12));
  }
  const double h = 1e-6;
  for (double raw : {-2.0, -0.3, 0.0, 0.8, 3.0}) {
    const double fd = (stddev_from_raw(raw + h) - stddev_from_raw(raw - h)) / (2 * h);
    CHECK(stddev_from_raw_derivative(raw) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("validation rejects malformed parameters") {
  CHECK_THROWS_AS(validate(DiagGaussianParams{{0.0}, {0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(DiagGaussianParams{{0.0}, {1.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(MixtureParams{{0.0}, {{0.0}}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(ExponentialParams{{-1.0}}), std::invalid_argument);
  DiagGaussianParams g{{0.0}, {1.0}};
  CHECK_THROWS_AS(log_prob(g, Vec{0.0, 0.0}), std::invalid_argument);
}

}  // TEST_SUITE
