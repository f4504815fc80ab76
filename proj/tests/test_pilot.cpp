#include "doctest.h"
#include "ristrack/baselines.hpp"
#include "ristrack/pilot.hpp"

using namespace ristrack;

namespace {

// small synthetic pilot-block channels with CN(0,1) entries
BlockChannels synthetic_block(uword m, uword nr, uword k, RngStream& rng) {
  BlockChannels ch;
  ch.G = rng.cnormal_mat(m, nr);
  ch.beta_G = 1.0;
  ch.beta_d = vec(k, arma::fill::ones);
  ch.beta_r = vec(k, arma::fill::ones);
  ch.h_d.resize(k);
  ch.h_r.resize(k);
  ch.A.resize(k);
  for (uword i = 0; i < k; ++i) {
    ch.h_d[i] = rng.cnormal_vec(m);
    ch.h_r[i] = rng.cnormal_vec(nr);
    ch.A[i].set_size(m, nr + 1);
    ch.A[i].col(0) = ch.h_d[i];
    ch.A[i].cols(1, nr) = ch.G * arma::diagmat(ch.h_r[i]);
  }
  return ch;
}

SensingMatrix random_sensing(uword nr, uword l, RngStream& rng) {
  return fixed_sensing_matrix(FixedSensingMode::random, nr, l, &rng);
}

}  // namespace

TEST_CASE("lift_sensing") {
  RngStream rng(1);
  const cx_vec v = random_reflection(rng, 16);
  const cx_vec lifted = lift_sensing(v);
  CHECK(lifted.n_elem == 17);
  CHECK(lifted(0) == cx_double(1.0, 0.0));
  CHECK(arma::norm(lifted.subvec(1, 16) - v) == 0.0);

  const cx_vec ones(8, arma::fill::ones);
  CHECK(arma::norm(lift_sensing(ones) - cx_vec(9, arma::fill::ones)) == 0.0);

  cx_vec bad = v;
  bad(3) *= 2.0;
  CHECK_THROWS_AS(lift_sensing(bad), std::invalid_argument);
}

TEST_CASE("noiseless pilots reproduce A V exactly") {
  RngStream rng(2);
  const BlockChannels ch = synthetic_block(4, 8, 2, rng);
  const SensingMatrix sensing = random_sensing(8, 3, rng);
  PilotConfig cfg{3, 2, 4, 1.0, 0.0};
  const auto y = receive_pilots(ch, sensing, cfg, rng);
  for (uword k = 0; k < 2; ++k)
    CHECK(arma::norm(y[k] - ch.A[k] * sensing.lifted, "fro") == 0.0);
}

TEST_CASE("pilot noise variance matches sigma^2/(tau P_u)") {
  // paper powers: P_u = 5 dBm, sigma_u^2 = -84 dBm, K = tau = 3
  PilotConfig cfg{1, 3, 10, dbm_to_mw(5.0), dbm_to_mw(-84.0)};
  CHECK(cfg.ybar_noise_var() == doctest::Approx(4.196e-10).epsilon(1e-3));

  // all-zero channels leave pure noise with that variance
  RngStream rng(3);
  BlockChannels ch = synthetic_block(4, 8, 1, rng);
  ch.A[0].zeros();
  const SensingMatrix sensing = random_sensing(8, 1, rng);
  double p = 0.0;
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    const auto y = receive_pilots(ch, sensing, cfg, rng);
    p += arma::accu(arma::square(arma::abs(y[0])));
  }
  const double var = p / (draws * 4.0);
  CHECK(var == doctest::Approx(cfg.ybar_noise_var()).epsilon(0.05));
}

TEST_CASE("doubling the pilot power halves the noise variance") {
  RngStream rng(4);
  BlockChannels ch = synthetic_block(2, 4, 1, rng);
  ch.A[0].zeros();
  const SensingMatrix sensing = random_sensing(4, 1, rng);
  auto measure = [&](double pu) {
    PilotConfig cfg{1, 1, 1, pu, 1e-3};
    double p = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
      const auto y = receive_pilots(ch, sensing, cfg, rng);
      p += arma::accu(arma::square(arma::abs(y[0])));
    }
    return p / (draws * 2.0);
  };
  const double v1 = measure(1.0);
  const double v2 = measure(2.0);
  CHECK(v1 / v2 == doctest::Approx(2.0).epsilon(0.06));
}

TEST_CASE("noiseless observation is column-linear in the sensing matrix") {
  RngStream rng(5);
  const BlockChannels ch = synthetic_block(4, 8, 2, rng);
  const SensingMatrix s2 = random_sensing(8, 2, rng);
  SensingMatrix c1{cx_mat(s2.lifted.col(0))};
  SensingMatrix c2{cx_mat(s2.lifted.col(1))};
  PilotConfig cfg{2, 2, 4, 1.0, 0.0};
  const auto y12 = receive_pilots(ch, s2, cfg, rng);
  PilotConfig cfg1{1, 2, 4, 1.0, 0.0};
  const auto ya = receive_pilots(ch, c1, cfg1, rng);
  const auto yb = receive_pilots(ch, c2, cfg1, rng);
  for (uword k = 0; k < 2; ++k) {
    const double scale = arma::norm(y12[k], "fro");
    CHECK(arma::norm(y12[k].col(0) - ya[k]) < 1e-13 * scale);
    CHECK(arma::norm(y12[k].col(1) - yb[k]) < 1e-13 * scale);
  }
}

// Oracle for the decorrelated synthesis: simulate the explicit pilot protocol
// with orthogonal DFT sequences and decorrelate at the AP.
TEST_CASE("explicit-pilot decorrelation equals direct synthesis") {
  const uword m = 2, nr = 4, k = 2, tau = 2, ell = 3;
  RngStream rng(6);
  const BlockChannels ch = synthetic_block(m, nr, k, rng);
  const SensingMatrix sensing = random_sensing(nr, ell, rng);
  const double pu = 2.5;

  // DFT pilot sequences: x_i^H x_j = tau P_u delta_ij
  cx_mat X(tau, k);
  for (uword t = 0; t < tau; ++t)
    for (uword i = 0; i < k; ++i) {
      const double ang = -2.0 * kPi * double(t) * double(i) / double(tau);
      X(t, i) = std::sqrt(pu) * cx_double(std::cos(ang), std::sin(ang));
    }
  CHECK(std::abs(arma::cdot(X.col(0), X.col(1))) < 1e-12);

  SUBCASE("noiseless signal part matches to machine precision") {
    for (uword l = 0; l < ell; ++l) {
      cx_mat yhat(m, tau, arma::fill::zeros);
      for (uword i = 0; i < k; ++i)
        yhat += (ch.A[i] * sensing.lifted.col(l)) * X.col(i).t();
      for (uword i = 0; i < k; ++i) {
        const cx_vec ybar = yhat * X.col(i) / (double(tau) * pu);
        CHECK(arma::norm(ybar - ch.A[i] * sensing.lifted.col(l)) < 1e-12);
      }
    }
  }

  SUBCASE("decorrelated noise has the synthesized variance") {
    const double sigma2 = 0.3;
    double p = 0.0;
    const int draws = 20000;
    for (int d = 0; d < draws; ++d) {
      const cx_mat z = std::sqrt(sigma2) * rng.cnormal_mat(m, tau);
      const cx_vec zbar = z * X.col(0) / (double(tau) * pu);
      p += arma::accu(arma::square(arma::abs(zbar)));
    }
    const double var = p / (draws * m);
    CHECK(var == doctest::Approx(sigma2 / (tau * pu)).epsilon(0.05));
  }
}

TEST_CASE("effective channel estimate noise scales with tau_w") {
  RngStream rng(7);
  const BlockChannels ch = synthetic_block(4, 8, 2, rng);
  const cx_vec w = random_reflection(rng, 8);

  PilotConfig noiseless{1, 2, 5, 1.0, 0.0};
  const auto exact = estimate_effective_channel(ch, w, noiseless, rng);
  for (uword k = 0; k < 2; ++k)
    CHECK(arma::norm(exact[k] - ch.A[k] * lift_sensing(w)) == 0.0);

  PilotConfig cfg5{1, 2, 5, 1.0, 1e-2};
  PilotConfig cfg10{1, 2, 10, 1.0, 1e-2};
  CHECK(cfg5.hc_noise_var() == doctest::Approx(2.0 * cfg10.hc_noise_var()));

  // Monte-Carlo estimation MSE matches the closed form within 5%
  double mse = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto est = estimate_effective_channel(ch, w, cfg10, rng);
    mse += arma::accu(arma::square(arma::abs(est[0] - exact[0])));
  }
  mse /= draws * 4.0;
  CHECK(mse == doctest::Approx(cfg10.hc_noise_var()).epsilon(0.05));
}
