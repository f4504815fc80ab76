#pragma once

#include <vector>

#include "ristrack/channel.hpp"
#include "ristrack/config.hpp"

namespace ristrack {

// Everything one frame of simulation needs: channels at the pilot block and
// the N data blocks, UE positions per block, and all pre-drawn receiver
// noise. Pre-drawing the noise makes a rollout a deterministic function of
// the controller parameters (finite-difference checks and paired method
// comparisons rely on this).
struct FrameData {
  FrameChannels channels;                 // blocks[0] pilot, blocks[1..N] data
  std::vector<TrajectoryState> traj;      // per block
  std::vector<cx_mat> pilot_noise;        // K of M x L, scaled
  std::vector<cx_vec> hc_noise;           // K of M, scaled
};

struct EpisodeData {
  std::uint64_t seed = 0;
  StaticPaths paths;
  std::vector<FrameData> frames;
};

// Generates a full episode of `num_frames` frames. The Gauss-Markov chain and
// the mobility advance once per block across the whole episode, including
// every frame's pilot block; the first frame's pilot block uses the initial
// draws directly.
EpisodeData make_episode(const ExperimentConfig& cfg, std::uint64_t episode_seed,
                         uword num_frames);

}  // namespace ristrack
