#include "ristrack/channel.hpp"

namespace ristrack {

cx_vec steering_ris(double dircos_y, double dircos_z, uword n_elements,
                    uword columns, double spacing, double wavelength) {
  if (columns == 0 || n_elements % columns != 0)
    throw ConfigError("steering_ris: column count must divide the element count");
  cx_vec a(n_elements);
  const double scale = 2.0 * kPi * spacing / wavelength;
  for (uword u = 0; u < n_elements; ++u) {
    const double i1 = static_cast<double>(u % columns);
    const double i2 = static_cast<double>(u / columns);
    const double phase = scale * (i1 * dircos_y + i2 * dircos_z);
    a(u) = cx_double(std::cos(phase), std::sin(phase));
  }
  return a;
}

cx_vec steering_ap(double azimuth, uword n_antennas, double spacing,
                   double wavelength) {
  cx_vec a(n_antennas);
  const double scale = 2.0 * kPi * spacing / wavelength * std::cos(azimuth);
  for (uword m = 0; m < n_antennas; ++m) {
    const double phase = scale * static_cast<double>(m);
    a(m) = cx_double(std::cos(phase), std::sin(phase));
  }
  return a;
}

double pathloss_amplitude(PathlossKind kind, double distance_m,
                          const ChannelParams& params) {
  if (!(distance_m > 0.0))
    throw std::domain_error("pathloss_amplitude: distance must be positive");
  const double pl_db =
      kind == PathlossKind::direct
          ? params.direct_const_db + params.direct_slope_db * std::log10(distance_m)
          : params.ris_const_db + params.ris_slope_db * std::log10(distance_m);
  return std::pow(10.0, -pl_db / 20.0);
}

StaticPaths sample_static_paths(RngStream& rng, const SystemGeometry& geometry,
                                uword n_antennas, uword n_elements,
                                const ChannelParams& params) {
  if (params.num_paths < 1) throw ConfigError("static paths: N_G must be >= 1");
  StaticPaths p;
  p.num_paths = params.num_paths;
  p.rician_factor = params.rician_factor;
  p.ap_aoas.set_size(p.num_paths);
  p.ris_aods.set_size(p.num_paths);
  p.ris_elevations.zeros(p.num_paths);
  p.los_sum.zeros(n_antennas, n_elements);
  const double lambda_c = geometry.wavelength();
  for (uword i = 0; i < p.num_paths; ++i) {
    p.ap_aoas(i) = rng.uniform(0.0, 2.0 * kPi);
    p.ris_aods(i) = rng.uniform(-kPi / 2.0, 0.0);
    const cx_vec a_ap =
        steering_ap(p.ap_aoas(i), n_antennas, geometry.ap_spacing, lambda_c);
    // theta_2i = 0: the RIS-side direction cosines are (sin(phi), 0)
    const cx_vec a_ris =
        steering_ris(std::sin(p.ris_aods(i)), 0.0, n_elements,
                     geometry.ris_columns, geometry.ris_spacing, lambda_c);
    p.los_sum += a_ap * a_ris.t();
  }
  return p;
}

NlosState init_nlos(RngStream& rng, uword n_antennas, uword n_elements,
                    uword num_users, double rho) {
  if (!(rho > 0.0) || rho > 1.0)
    throw ConfigError("nlos: correlation coefficient must lie in (0, 1]");
  NlosState s;
  s.rho = rho;
  s.g_tilde = rng.cnormal_mat(n_antennas, n_elements);
  s.h_d_tilde.resize(num_users);
  s.h_r_tilde.resize(num_users);
  for (uword k = 0; k < num_users; ++k) {
    s.h_d_tilde[k] = rng.cnormal_vec(n_antennas);
    s.h_r_tilde[k] = rng.cnormal_vec(n_elements);
  }
  return s;
}

namespace {

void gm_step(cx_mat& x, double rho, double q, RngStream& rng) {
  for (uword j = 0; j < x.n_cols; ++j)
    for (uword i = 0; i < x.n_rows; ++i)
      x(i, j) = rho * x(i, j) + q * rng.cnormal();
}

void gm_step(cx_vec& x, double rho, double q, RngStream& rng) {
  for (uword i = 0; i < x.n_elem; ++i) x(i) = rho * x(i) + q * rng.cnormal();
}

}  // namespace

NlosState evolve_nlos(const NlosState& state, RngStream& rng) {
  NlosState s = state;
  const double q = std::sqrt(1.0 - s.rho * s.rho);
  gm_step(s.g_tilde, s.rho, q, rng);
  for (auto& h : s.h_d_tilde) gm_step(h, s.rho, q, rng);
  for (auto& h : s.h_r_tilde) gm_step(h, s.rho, q, rng);
  return s;
}

BlockChannels assemble_channels(const TrajectoryState& traj, double z_ue,
                                const StaticPaths& paths, const NlosState& nlos,
                                const SystemGeometry& geometry,
                                const ChannelParams& params) {
  const uword n_antennas = nlos.g_tilde.n_rows;
  const uword n_elements = nlos.g_tilde.n_cols;
  const uword num_users = traj.positions.n_rows;
  if (nlos.h_d_tilde.size() != num_users || nlos.h_r_tilde.size() != num_users)
    throw std::invalid_argument("assemble_channels: user count mismatch");
  if (paths.los_sum.n_rows != n_antennas || paths.los_sum.n_cols != n_elements)
    throw std::invalid_argument("assemble_channels: LOS sum shape mismatch");

  const double eps = paths.rician_factor;
  const double los_w = std::sqrt(eps / (1.0 + eps));
  const double nlos_w = std::sqrt(1.0 / (1.0 + eps));
  const double lambda_c = geometry.wavelength();

  BlockChannels ch;
  ch.beta_G = pathloss_amplitude(
      PathlossKind::ris_segment,
      arma::norm(geometry.ap_position - geometry.ris_position), params);
  ch.G = ch.beta_G * (los_w * paths.los_sum + nlos_w * nlos.g_tilde);
  ch.beta_d.set_size(num_users);
  ch.beta_r.set_size(num_users);
  ch.h_d.resize(num_users);
  ch.h_r.resize(num_users);
  ch.A.resize(num_users);
  for (uword k = 0; k < num_users; ++k) {
    const vec pos = ue_position_3d(traj, k, z_ue);
    const LinkDistances d = distances(pos, geometry);
    const RisAngles ang = aoa_to_ris(pos, geometry);
    ch.beta_d(k) = pathloss_amplitude(PathlossKind::direct, d.direct, params);
    ch.beta_r(k) = pathloss_amplitude(PathlossKind::ris_segment, d.ris_ue, params);
    ch.h_d[k] = ch.beta_d(k) * nlos.h_d_tilde[k];
    const cx_vec a_ris =
        steering_ris(ang.dircos_y, ang.dircos_z, n_elements,
                     geometry.ris_columns, geometry.ris_spacing, lambda_c);
    ch.h_r[k] = ch.beta_r(k) * (los_w * a_ris + nlos_w * nlos.h_r_tilde[k]);
    ch.A[k].set_size(n_antennas, n_elements + 1);
    ch.A[k].col(0) = ch.h_d[k];
    ch.A[k].cols(1, n_elements) = ch.G * arma::diagmat(ch.h_r[k]);
  }
  return ch;
}

}  // namespace ristrack
