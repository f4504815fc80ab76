#include "ristrack/pilot.hpp"

namespace ristrack {

void PilotConfig::validate() const {
  if (num_subblocks < 1) throw ConfigError("pilot: L must be >= 1");
  if (pilot_len < 1) throw ConfigError("pilot: tau must be >= 1");
  if (refine_pilot_len < 1) throw ConfigError("pilot: tau_w must be >= 1");
  if (!(uplink_power_mw > 0.0)) throw ConfigError("pilot: P_u must be positive");
  if (!(uplink_noise_mw >= 0.0)) throw ConfigError("pilot: negative noise power");
}

void SensingMatrix::validate() const {
  if (lifted.n_rows < 1 || lifted.n_cols < 1)
    throw std::invalid_argument("sensing matrix: empty");
  for (uword l = 0; l < lifted.n_cols; ++l) {
    if (lifted(0, l) != cx_double(1.0, 0.0))
      throw std::invalid_argument("sensing matrix: leading entry must be exactly 1");
    for (uword u = 1; u < lifted.n_rows; ++u)
      if (std::abs(std::abs(lifted(u, l)) - 1.0) > 1e-12)
        throw std::invalid_argument("sensing matrix: entries must be unit modulus");
  }
}

cx_vec lift_sensing(const cx_vec& v) {
  for (uword i = 0; i < v.n_elem; ++i)
    if (std::abs(std::abs(v(i)) - 1.0) > 1e-12)
      throw std::invalid_argument("lift_sensing: input must be unit modulus");
  cx_vec lifted(v.n_elem + 1);
  lifted(0) = cx_double(1.0, 0.0);
  if (v.n_elem > 0) lifted.subvec(1, v.n_elem) = v;
  return lifted;
}

std::vector<cx_mat> receive_pilots(const BlockChannels& pilot_block,
                                   const SensingMatrix& sensing,
                                   const PilotConfig& config, RngStream& rng) {
  config.validate();
  const double sd = std::sqrt(config.ybar_noise_var());
  std::vector<cx_mat> noise(pilot_block.A.size());
  for (auto& z : noise)
    z = sd * rng.cnormal_mat(pilot_block.A[0].n_rows, sensing.num_columns());
  return receive_pilots_with_noise(pilot_block, sensing, noise);
}

std::vector<cx_mat> receive_pilots_with_noise(
    const BlockChannels& pilot_block, const SensingMatrix& sensing,
    const std::vector<cx_mat>& noise) {
  const uword num_users = pilot_block.A.size();
  if (noise.size() != num_users)
    throw std::invalid_argument("receive_pilots: noise/user count mismatch");
  std::vector<cx_mat> y_bar(num_users);
  for (uword k = 0; k < num_users; ++k) {
    if (pilot_block.A[k].n_cols != sensing.lifted.n_rows)
      throw std::invalid_argument("receive_pilots: sensing dimension mismatch");
    y_bar[k] = pilot_block.A[k] * sensing.lifted + noise[k];
  }
  return y_bar;
}

std::vector<cx_vec> estimate_effective_channel(const BlockChannels& pilot_block,
                                               const cx_vec& w,
                                               const PilotConfig& config,
                                               RngStream& rng) {
  config.validate();
  const double sd = std::sqrt(config.hc_noise_var());
  std::vector<cx_vec> noise(pilot_block.A.size());
  for (auto& z : noise) z = sd * rng.cnormal_vec(pilot_block.A[0].n_rows);
  return estimate_effective_channel_with_noise(pilot_block, w, noise);
}

std::vector<cx_vec> estimate_effective_channel_with_noise(
    const BlockChannels& pilot_block, const cx_vec& w,
    const std::vector<cx_vec>& noise) {
  const cx_vec w_tilde = lift_sensing(w);
  const uword num_users = pilot_block.A.size();
  if (noise.size() != num_users)
    throw std::invalid_argument("estimate_effective_channel: noise count mismatch");
  std::vector<cx_vec> h_c_hat(num_users);
  for (uword k = 0; k < num_users; ++k)
    h_c_hat[k] = pilot_block.A[k] * w_tilde + noise[k];
  return h_c_hat;
}

}  // namespace ristrack
