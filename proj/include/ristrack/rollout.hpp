#pragma once

#include "ristrack/beamforming.hpp"
#include "ristrack/episode.hpp"
#include "ristrack/nn.hpp"

namespace ristrack {

// train:        all decisions and rates live on one tape; beamformers use the
//               GNN powers (the fixed point is not differentiable-friendly)
// eval_refined: streaming inference; powers replaced by the fixed point on
//               the estimated effective channels
// eval_raw:     streaming inference with the raw GNN decisions
enum class RolloutMode { train, eval_refined, eval_raw };

struct FrameTrace {
  vec min_rate_per_block;  // N
  double avg_min_rate = 0.0;
  mat rates;               // K x N
  cx_vec w;
  vec p, lambda;
};

struct RolloutResult {
  double loss = 0.0;  // -(1/U) sum_t (1/N) sum_n min_k R_k
  std::vector<FrameTrace> frames;
  ad::Var loss_var;   // set in train mode only
};

RolloutResult rollout_episode(const ControllerParams& params,
                              const EpisodeData& episode,
                              const ExperimentConfig& cfg, RolloutMode mode,
                              ad::Tape* tape = nullptr);

// ---- streaming inference ----

struct InferenceState {
  mat h, c;          // d x K
  cx_mat v_lifted;   // (N_r + 1) x L sensing for the upcoming frame
  uword next_frame = 0;
};

// Runs the frame-0 convention (zero states, all-ones dummy pilots) and
// produces the first frame's sensing matrix.
InferenceState init_inference(const ControllerParams& params,
                              const ExperimentConfig& cfg,
                              std::uint64_t episode_seed);

struct FrameDecision {
  cx_vec w;
  vec p, lambda;   // powers actually used to build B
  cx_mat B;
  std::vector<cx_vec> h_c_hat;
  bool refined = false;
};

FrameDecision infer_frame(const ControllerParams& params,
                          const ExperimentConfig& cfg, InferenceState& state,
                          const FrameData& frame, std::uint64_t episode_seed,
                          bool refine);

// fixed-point budget used for inference-time power refinement
inline constexpr double kRefineTol = 1e-10;
inline constexpr uword kRefineMaxIter = 2000;

// tape-level building blocks shared with the training path
std::vector<ad::CVar> duality_beams_fwd(ad::Tape& tape,
                                        const std::vector<ad::CVar>& h_c,
                                        ad::Var p, ad::Var lambda,
                                        double noise_mw);

struct BlockRatesVar {
  ad::Var min_rate;
  std::vector<ad::Var> rates;
};
BlockRatesVar block_rates_fwd(ad::Tape& tape, const std::vector<cx_mat>& A,
                              ad::CVar w_lifted,
                              const std::vector<ad::CVar>& beams,
                              double noise_mw);

ad::CVar lift_cvar(ad::Tape& tape, ad::CVar v);

}  // namespace ristrack
