#pragma once

#include <vector>

#include "ristrack/channel.hpp"
#include "ristrack/common.hpp"

namespace ristrack {

// Downlink decision set for one frame.
struct BeamSolution {
  cx_vec w;        // N_r reflection coefficients, unit modulus
  cx_mat B;        // M x K beamformers
  vec p;           // K primal downlink powers, mW
  vec lambda;      // K virtual uplink powers, mW
  double tau_star; // balanced SINR level
  double power_budget_mw;
  double noise_mw;
};

struct RateReport {
  mat sinr;        // K x N
  mat rate;        // K x N, log2(1 + sinr)
  vec min_rate;    // N, min over users per block
  double avg_min_rate = 0.0;
};

struct FixedPointResult {
  vec lambda;      // K
  vec p;           // K
  double tau_star;
  uword sweeps;
  double residual;
};

// h_c,k = A_k [1; w].
cx_vec effective_channel(const cx_mat& A_k, const cx_vec& w);

// Duality-structured beamformers:
// b_k = sqrt(p_k) * unit((I + sum_{i != k} lambda_i/sigma^2 h_i h_i^H)^{-1} h_k).
cx_mat beamformers_from_duality(const std::vector<cx_vec>& h_c,
                                const vec& lambda, const vec& p,
                                double noise_mw);

// Downlink SINR/rate of every user in every provided block given fixed (w, B).
RateReport sinr_and_rate(const std::vector<BlockChannels>& blocks,
                         const cx_vec& w, const cx_mat& B, double noise_mw);

// Per-user SINRs for a single block.
vec sinr_block(const std::vector<cx_mat>& A, const cx_vec& w, const cx_mat& B,
               double noise_mw);

// Max-min SINR balancing power allocation: the unique positive fixed point of
// lambda_k = tau / f_k(lambda) with tau = P_d / sum_k f_k^{-1}, followed by
// the primal powers from the balanced linear system.
FixedPointResult fixed_point_power(const std::vector<cx_vec>& h_c,
                                   double power_budget_mw, double noise_mw,
                                   double tol = 1e-10, uword max_iter = 500);

// Convenience: fixed point + beamformers in one call.
BeamSolution solve_beams(const std::vector<cx_vec>& h_c, const cx_vec& w,
                         double power_budget_mw, double noise_mw);

}  // namespace ristrack
