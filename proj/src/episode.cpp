#include "ristrack/episode.hpp"

namespace ristrack {

EpisodeData make_episode(const ExperimentConfig& cfg, std::uint64_t episode_seed,
                         uword num_frames) {
  EpisodeData ep;
  ep.seed = episode_seed;

  RngStream mobility_rng = derive_stream(episode_seed, {seed_tag::kMobility});
  RngStream paths_rng = derive_stream(episode_seed, {seed_tag::kStaticPaths});
  RngStream nlos_rng = derive_stream(episode_seed, {seed_tag::kNlosInit});

  ep.paths = sample_static_paths(paths_rng, cfg.geometry, cfg.n_antennas,
                                 cfg.n_elements, cfg.channel);
  NlosState nlos = init_nlos(nlos_rng, cfg.n_antennas, cfg.n_elements,
                             cfg.num_users, cfg.channel.rho);
  TrajectoryState traj = init_episode(cfg.num_users, cfg.mobility, mobility_rng);

  const PilotConfig pilot = cfg.pilot_config();
  const double ybar_sd = std::sqrt(pilot.ybar_noise_var());
  const double hc_sd = std::sqrt(pilot.hc_noise_var());

  ep.frames.resize(num_frames);
  bool first_block = true;
  for (uword t = 0; t < num_frames; ++t) {
    FrameData& fr = ep.frames[t];
    fr.channels.blocks.resize(cfg.data_blocks + 1);
    fr.traj.resize(cfg.data_blocks + 1);
    for (uword n = 0; n <= cfg.data_blocks; ++n) {
      if (!first_block) {
        RngStream evolve_rng = derive_stream(
            episode_seed, {seed_tag::kNlosEvolve, t, n});
        traj = step_block(traj, cfg.mobility, mobility_rng);
        nlos = evolve_nlos(nlos, evolve_rng);
      }
      first_block = false;
      fr.traj[n] = traj;
      fr.channels.blocks[n] = assemble_channels(traj, cfg.mobility.z_ue,
                                                ep.paths, nlos, cfg.geometry,
                                                cfg.channel);
    }

    RngStream pilot_rng =
        derive_stream(episode_seed, {seed_tag::kPilotNoise, t});
    RngStream hc_rng = derive_stream(episode_seed, {seed_tag::kHcNoise, t});
    fr.pilot_noise.resize(cfg.num_users);
    fr.hc_noise.resize(cfg.num_users);
    for (uword k = 0; k < cfg.num_users; ++k) {
      fr.pilot_noise[k] =
          ybar_sd * pilot_rng.cnormal_mat(cfg.n_antennas, cfg.num_subblocks);
      fr.hc_noise[k] = hc_sd * hc_rng.cnormal_vec(cfg.n_antennas);
    }
  }
  return ep;
}

}  // namespace ristrack
