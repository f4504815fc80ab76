#pragma once

#include <vector>

#include "ristrack/beamforming.hpp"
#include "ristrack/channel.hpp"
#include "ristrack/common.hpp"
#include "ristrack/pilot.hpp"
#include "ristrack/rng.hpp"

namespace ristrack {

struct BcdOptions {
  uword max_outer_iters = 30;
  uword rcg_iters = 60;          // RCG iterations per reflection update
  double softmin_temperature = 10.0;
  double outer_tol = 1e-4;       // relative change of the true min rate
  std::uint64_t w_init_seed = 1;
  uword num_restarts = 1;        // independent w inits; best run is kept
  // fixed-point budget for the inner power step; small antenna counts can
  // couple users strongly and need more sweeps than the default contract
  double fp_tol = 1e-10;
  uword fp_max_iter = 2000;
};

struct RcgResult {
  cx_vec w;
  double objective;     // softmin of the rates at the returned point
  vec objective_trace;  // surrogate value after every accepted step
  uword iters;
  bool stagnated;       // line search failed before the iteration budget
};

// Smooth surrogate of the minimum: -(1/mu) ln sum_k exp(-mu x_k).
double softmin(const vec& x, double mu);

// Maximizes softmin_mu of the per-user rates over the unit-modulus reflection
// vector with the beamformers held fixed, by Riemannian conjugate gradient on
// the product-of-circles manifold (Polak-Ribiere, Armijo backtracking,
// retraction x/|x|).
RcgResult rcg_optimize_w(const std::vector<cx_mat>& A, const cx_mat& B,
                         const cx_vec& w0, double noise_mw,
                         const BcdOptions& opts);

struct BcdResult {
  BeamSolution solution;
  vec objective_trace;   // true min rate after every outer iteration
};

// Perfect-CSI block coordinate descent on the first data block: alternates
// the max-min fixed-point power allocation (optimal for fixed w) with RCG on
// w (fixed B); a candidate w is kept only if the true objective does not
// decrease, so the trace is monotone.
BcdResult bcd_perfect_csi(const BlockChannels& data_block,
                          double power_budget_mw, double noise_mw,
                          const BcdOptions& opts);

// i.i.d. uniform phases, exact unit modulus.
cx_vec random_reflection(RngStream& rng, uword n_elements);

enum class FixedSensingMode { random, learned_constant };

// Non-adaptive sensing matrices: fresh random phases per call, or a constant
// matrix built from a trained phase tensor (N_r x L).
SensingMatrix fixed_sensing_matrix(FixedSensingMode mode, uword n_elements,
                                   uword num_subblocks, RngStream* rng,
                                   const mat* learned_phases = nullptr);

}  // namespace ristrack
