#pragma once

#include <vector>

#include "ristrack/channel.hpp"
#include "ristrack/common.hpp"
#include "ristrack/rng.hpp"

namespace ristrack {

struct PilotConfig {
  uword num_subblocks;      // L
  uword pilot_len;          // tau, equals the user count K
  uword refine_pilot_len;   // tau_w
  double uplink_power_mw;   // P_u
  double uplink_noise_mw;   // sigma_u^2

  // effective per-entry noise variance of the decorrelated observations
  double ybar_noise_var() const {
    return uplink_noise_mw / (static_cast<double>(pilot_len) * uplink_power_mw);
  }
  double hc_noise_var() const {
    return uplink_noise_mw /
           (static_cast<double>(refine_pilot_len) * uplink_power_mw);
  }
  void validate() const;
};

// The L lifted sensing vectors of one frame's pilot stage, columns
// v_tilde = [1, v^T]^T with unit-modulus entries.
struct SensingMatrix {
  cx_mat lifted;  // (N_r + 1) x L

  uword num_columns() const { return lifted.n_cols; }
  void validate() const;
};

// Prepend the exact 1 of the static direct path.
cx_vec lift_sensing(const cx_vec& v);

// Per-user decorrelated pilot matrices Ybar_k = A_k V + Zbar_k with
// i.i.d. CN(0, sigma_u^2/(tau P_u)) entries in Zbar. Synthesizing directly in
// decorrelated form is exact because the per-user pilot sequences are
// orthogonal; see the tests for the explicit-pilot equivalence oracle.
std::vector<cx_mat> receive_pilots(const BlockChannels& pilot_block,
                                   const SensingMatrix& sensing,
                                   const PilotConfig& config, RngStream& rng);

// Same observation model with pre-drawn noise (training rollouts pre-draw all
// noise so that gradient checks evaluate a fixed function).
std::vector<cx_mat> receive_pilots_with_noise(
    const BlockChannels& pilot_block, const SensingMatrix& sensing,
    const std::vector<cx_mat>& noise);

// tau_w-pilot estimate of the effective channel h_c,k = A_k [1; w].
std::vector<cx_vec> estimate_effective_channel(const BlockChannels& pilot_block,
                                               const cx_vec& w,
                                               const PilotConfig& config,
                                               RngStream& rng);

std::vector<cx_vec> estimate_effective_channel_with_noise(
    const BlockChannels& pilot_block, const cx_vec& w,
    const std::vector<cx_vec>& noise);

struct PilotObservation {
  std::vector<cx_mat> y_bar;   // K of M x L
  std::vector<cx_vec> h_c_hat; // K of M
  double ybar_noise_var;
  double hc_noise_var;
};

}  // namespace ristrack
