#include "doctest.h"
#include "ristrack/channel.hpp"

using namespace ristrack;

TEST_CASE("steering_ris basics") {
  const cx_vec ones = steering_ris(0.0, 0.0, 100, 10, 0.15, 0.3);
  for (uword u = 0; u < 100; ++u) CHECK(ones(u) == cx_double(1.0, 0.0));

  // element u = 12 (1-based) -> i1 = 1, i2 = 1 in a 10-column array;
  // with half-wavelength spacing and direction cosines (0.5, -0.5) the phase
  // cancels exactly
  const cx_vec a = steering_ris(0.5, -0.5, 100, 10, 0.15, 0.3);
  CHECK(std::abs(a(11) - cx_double(1.0, 0.0)) < 1e-14);

  for (uword u = 0; u < 100; ++u)
    CHECK(std::abs(std::abs(a(u)) - 1.0) < 1e-15);

  CHECK_THROWS_AS(steering_ris(0.0, 0.0, 100, 7, 0.15, 0.3), ConfigError);
}

TEST_CASE("steering_ap basics") {
  const cx_vec broadside = steering_ap(kPi / 2.0, 8, 0.15, 0.3);
  for (uword m = 0; m < 8; ++m)
    CHECK(std::abs(broadside(m) - cx_double(1.0, 0.0)) < 1e-14);

  const cx_vec single = steering_ap(0.7, 1, 0.15, 0.3);
  CHECK(single(0) == cx_double(1.0, 0.0));

  const cx_vec endfire = steering_ap(0.0, 2, 0.15, 0.3);
  CHECK(endfire(0) == cx_double(1.0, 0.0));
  CHECK(std::abs(endfire(1) - cx_double(-1.0, 0.0)) < 1e-14);
}

TEST_CASE("pathloss amplitudes") {
  const ChannelParams p;
  // direct, 100 m: 32 + 43.3*2 = 118.6 dB
  CHECK(pathloss_amplitude(PathlossKind::direct, 100.0, p) ==
        doctest::Approx(std::pow(10.0, -118.6 / 20.0)).epsilon(1e-12));
  // ris segment, 10 m: 28 + 16.9 = 44.9 dB
  CHECK(pathloss_amplitude(PathlossKind::ris_segment, 10.0, p) ==
        doctest::Approx(std::pow(10.0, -44.9 / 20.0)).epsilon(1e-12));
  // 1 m leaves only the constant term
  CHECK(pathloss_amplitude(PathlossKind::direct, 1.0, p) ==
        doctest::Approx(std::pow(10.0, -32.0 / 20.0)).epsilon(1e-12));
  CHECK(pathloss_amplitude(PathlossKind::ris_segment, 1.0, p) ==
        doctest::Approx(std::pow(10.0, -28.0 / 20.0)).epsilon(1e-12));

  CHECK_THROWS_AS(pathloss_amplitude(PathlossKind::direct, 0.0, p),
                  std::domain_error);

  double prev = pathloss_amplitude(PathlossKind::direct, 1.0, p);
  for (double l = 2.0; l < 300.0; l *= 1.5) {
    const double a = pathloss_amplitude(PathlossKind::direct, l, p);
    CHECK(a < prev);
    prev = a;
  }
}

TEST_CASE("sample_static_paths structure") {
  const SystemGeometry g = default_geometry(10, 1.0e9);
  ChannelParams p;
  RngStream rng(4);

  p.num_paths = 8;
  const StaticPaths s8 = sample_static_paths(rng, g, 8, 100, p);
  CHECK(s8.los_sum.n_rows == 8);
  CHECK(s8.los_sum.n_cols == 100);
  CHECK(arma::rank(s8.los_sum) <= 8);
  for (uword i = 0; i < 8; ++i) {
    CHECK(s8.ris_elevations(i) == 0.0);
    CHECK(s8.ris_aods(i) <= 0.0);
    CHECK(s8.ris_aods(i) >= -kPi / 2.0);
  }

  p.num_paths = 1;
  const StaticPaths s1 = sample_static_paths(rng, g, 8, 100, p);
  CHECK(arma::rank(s1.los_sum) == 1);
  // single outer product of unit-modulus steering vectors
  for (uword m = 0; m < 8; ++m)
    for (uword u = 0; u < 100; ++u)
      CHECK(std::abs(std::abs(s1.los_sum(m, u)) - 1.0) < 1e-12);
}

TEST_CASE("evolve_nlos degenerate correlation values") {
  RngStream init_rng(5);
  const NlosState s = init_nlos(init_rng, 4, 16, 2, 1.0);

  RngStream rng(6);
  const NlosState same = evolve_nlos(s, rng);
  CHECK(arma::approx_equal(arma::abs(same.g_tilde - s.g_tilde),
                           arma::zeros(4, 16), "absdiff", 0.0));

  NlosState s0 = s;
  s0.rho = 0.0;
  const NlosState fresh = evolve_nlos(s0, rng);
  // full refresh: correlation with the previous state is near zero
  cx_double acc = 0.0;
  double p_old = 0.0, p_new = 0.0;
  for (uword i = 0; i < 4; ++i)
    for (uword j = 0; j < 16; ++j) {
      acc += fresh.g_tilde(i, j) * std::conj(s.g_tilde(i, j));
      p_old += std::norm(s.g_tilde(i, j));
      p_new += std::norm(fresh.g_tilde(i, j));
    }
  CHECK(std::abs(acc) / std::sqrt(p_old * p_new) < 0.35);
}

TEST_CASE("gauss-markov lag-1 autocorrelation matches rho") {
  RngStream init_rng(7);
  NlosState s = init_nlos(init_rng, 1, 1, 0, 0.9995);
  RngStream rng(8);
  const int n = 100000;
  cx_double prev = s.g_tilde(0, 0);
  cx_double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < n; ++i) {
    s = evolve_nlos(s, rng);
    const cx_double cur = s.g_tilde(0, 0);
    num += cur * std::conj(prev);
    den += std::norm(prev);
    prev = cur;
  }
  const double rho_hat = std::real(num) / den;
  CHECK(std::abs(rho_hat - 0.9995) < 0.005);
}

TEST_CASE("gauss-markov preserves the unit marginal variance") {
  RngStream init_rng(9);
  NlosState s = init_nlos(init_rng, 320, 320, 0, 0.9995);
  RngStream rng(10);
  for (int i = 0; i < 50; ++i) s = evolve_nlos(s, rng);
  double p = 0.0;
  for (uword i = 0; i < s.g_tilde.n_elem; ++i) p += std::norm(s.g_tilde(i));
  CHECK(std::abs(p / s.g_tilde.n_elem - 1.0) < 0.02);
}

TEST_CASE("assemble_channels composes Rician pieces") {
  const SystemGeometry g = default_geometry(4, 1.0e9);
  ChannelParams params;
  params.num_paths = 4;
  RngStream rng(11);
  const StaticPaths paths = sample_static_paths(rng, g, 4, 16, params);
  const NlosState nlos = init_nlos(rng, 4, 16, 2, params.rho);
  TrajectoryState traj;
  traj.positions = mat{{25.0, 0.0}, {10.0, -12.0}};
  traj.headings = vec{0.0, 1.0};

  const BlockChannels ch = assemble_channels(traj, -20.0, paths, nlos, g, params);
  CHECK(ch.G.n_rows == 4);
  CHECK(ch.G.n_cols == 16);
  CHECK(ch.A.size() == 2);
  CHECK(ch.A[0].n_cols == 17);

  // A_k = [h_d,k, G diag(h_r,k)] exactly, checked term by term
  RngStream wrng(12);
  for (uword k = 0; k < 2; ++k) {
    cx_vec w(16);
    for (uword u = 0; u < 16; ++u) w(u) = wrng.cnormal();
    cx_vec lifted(17);
    lifted(0) = 1.0;
    lifted.subvec(1, 16) = w;
    const cx_vec via_A = ch.A[k] * lifted;
    cx_vec direct = ch.h_d[k];
    for (uword u = 0; u < 16; ++u) direct += ch.G.col(u) * ch.h_r[k](u) * w(u);
    CHECK(arma::norm(via_A - direct) / arma::norm(direct) < 1e-13);
  }

  // rician weight: with eps = 10 the LOS share of G is sqrt(10/11)
  const double los_w = std::sqrt(10.0 / 11.0);
  CHECK(los_w == doctest::Approx(0.9535).epsilon(1e-4));
  const cx_mat expected_G =
      ch.beta_G * (los_w * paths.los_sum + std::sqrt(1.0 / 11.0) * nlos.g_tilde);
  CHECK(arma::norm(ch.G - expected_G, "fro") < 1e-18);
}

TEST_CASE("assemble_channels rician limits") {
  const SystemGeometry g = default_geometry(4, 1.0e9);
  ChannelParams params;
  params.num_paths = 2;
  RngStream rng(13);
  StaticPaths paths = sample_static_paths(rng, g, 4, 16, params);
  NlosState nlos = init_nlos(rng, 4, 16, 1, params.rho);
  TrajectoryState traj;
  traj.positions = mat{{25.0, 5.0}};
  traj.headings = vec{0.0};

  // eps = 0: pure NLOS
  paths.rician_factor = 0.0;
  const BlockChannels rayleigh =
      assemble_channels(traj, -20.0, paths, nlos, g, params);
  CHECK(arma::norm(rayleigh.G - rayleigh.beta_G * nlos.g_tilde, "fro") < 1e-18);

  // eps -> inf with zero NLOS: unit-modulus steering scaled by beta_r
  paths.rician_factor = 1e12;
  nlos.h_r_tilde[0].zeros();
  nlos.g_tilde.zeros();
  const BlockChannels los = assemble_channels(traj, -20.0, paths, nlos, g, params);
  for (uword u = 0; u < 16; ++u)
    CHECK(std::abs(los.h_r[0](u)) ==
          doctest::Approx(los.beta_r(0)).epsilon(1e-6));
}
