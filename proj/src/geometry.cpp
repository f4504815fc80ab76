#include "ristrack/geometry.hpp"

namespace ristrack {

SystemGeometry default_geometry(uword ris_columns, double carrier_freq_hz) {
  SystemGeometry g;
  g.ap_position = {100.0, -100.0, 0.0};
  g.ris_position = {0.0, 0.0, 0.0};
  const double lambda_c = kSpeedOfLight / carrier_freq_hz;
  g.ap_spacing = lambda_c / 2.0;
  g.ris_spacing = lambda_c / 2.0;
  g.ris_columns = ris_columns;
  g.carrier_freq_hz = carrier_freq_hz;
  return g;
}

void MobilityConfig::validate() const {
  if (!(x_min <= x_max) || !(y_min <= y_max))
    throw ConfigError("mobility: service area bounds are inverted");
  if (speed_mps < 0.0) throw ConfigError("mobility: negative speed");
  if (!(step_length_m >= 0.0)) throw ConfigError("mobility: invalid step length");
  if (heading_perturb_rad < 0.0)
    throw ConfigError("mobility: negative heading perturbation");
}

MobilityConfig make_mobility_config(double x_min, double x_max, double y_min,
                                    double y_max, double z_ue, double speed_mps,
                                    double carrier_freq_hz,
                                    double heading_perturb_rad) {
  if (carrier_freq_hz <= 0.0)
    throw ConfigError("mobility: carrier frequency must be positive");
  MobilityConfig c;
  c.x_min = x_min;
  c.x_max = x_max;
  c.y_min = y_min;
  c.y_max = y_max;
  c.z_ue = z_ue;
  c.speed_mps = speed_mps;
  c.max_doppler_hz = speed_mps * carrier_freq_hz / kSpeedOfLight;
  c.block_duration_s =
      c.max_doppler_hz > 0.0 ? 1.0 / (2.0 * c.max_doppler_hz) : 0.0;
  c.step_length_m = speed_mps * c.block_duration_s;
  c.heading_perturb_rad = heading_perturb_rad;
  c.validate();
  return c;
}

TrajectoryState init_episode(uword num_users, const MobilityConfig& config,
                             RngStream& rng) {
  config.validate();
  if (num_users < 1) throw ConfigError("mobility: need at least one user");
  TrajectoryState s;
  s.positions.set_size(num_users, 2);
  s.headings.set_size(num_users);
  for (uword k = 0; k < num_users; ++k) {
    s.positions(k, 0) = rng.uniform(config.x_min, config.x_max);
    s.positions(k, 1) = rng.uniform(config.y_min, config.y_max);
    s.headings(k) = rng.uniform(0.0, 2.0 * kPi);
  }
  s.block_index = 0;
  return s;
}

namespace {

double wrap_2pi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

// Reflects x into [lo, hi] and flips the matching heading component each
// time a boundary is crossed. Repeats until inside (a step can never cross
// the same boundary twice in practice, but folding is cheap and exact).
void mirror_axis(double& x, double lo, double hi, bool flip_x_axis, double& heading) {
  if (hi <= lo) {
    x = lo;
    return;
  }
  while (x < lo || x > hi) {
    if (x < lo) {
      x = 2.0 * lo - x;
    } else {
      x = 2.0 * hi - x;
    }
    // x-boundary: gamma -> pi - gamma; y-boundary: gamma -> -gamma
    heading = flip_x_axis ? kPi - heading : -heading;
  }
}

}  // namespace

TrajectoryState step_block(const TrajectoryState& state,
                           const MobilityConfig& config, RngStream& rng) {
  config.validate();
  TrajectoryState s = state;
  const double step = config.step_length_m;
  for (uword k = 0; k < s.positions.n_rows; ++k) {
    double heading = s.headings(k);
    double x = s.positions(k, 0) + step * std::cos(heading);
    double y = s.positions(k, 1) + step * std::sin(heading);
    mirror_axis(x, config.x_min, config.x_max, /*flip_x_axis=*/true, heading);
    mirror_axis(y, config.y_min, config.y_max, /*flip_x_axis=*/false, heading);
    const double dgamma = rng.uniform(-config.heading_perturb_rad,
                                      config.heading_perturb_rad);
    s.positions(k, 0) = x;
    s.positions(k, 1) = y;
    s.headings(k) = wrap_2pi(heading + dgamma);
  }
  s.block_index = state.block_index + 1;
  return s;
}

RisAngles aoa_to_ris(const vec& position, const SystemGeometry& geometry) {
  const vec rel = position - geometry.ris_position;
  const double l = arma::norm(rel);
  if (l <= 0.0) throw std::domain_error("aoa_to_ris: point coincides with the RIS");
  return {rel(1) / l, rel(2) / l, l};
}

LinkDistances distances(const vec& position, const SystemGeometry& geometry) {
  LinkDistances d;
  d.direct = arma::norm(position - geometry.ap_position);
  d.ris_ue = arma::norm(position - geometry.ris_position);
  d.ap_ris = arma::norm(geometry.ap_position - geometry.ris_position);
  return d;
}

}  // namespace ristrack
