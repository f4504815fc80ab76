#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ristrack/channel.hpp"
#include "ristrack/geometry.hpp"
#include "ristrack/nn.hpp"
#include "ristrack/pilot.hpp"

namespace ristrack {

struct TrainSchedule {
  uword episodes_per_epoch = 2000;
  uword minibatch = 64;
  double learning_rate = 1e-4;
  uword max_epochs = 50;
  uword early_stop_patience = 30;
  double lr_decay_factor = 0.5;
  uword lr_decay_patience = 10;
  uword validation_episodes = 128;
  uword threads = 1;
};

struct EvalPlan {
  uword episodes = 100;
  uword frames = 8;
  std::vector<std::string> methods{"bcd", "random_w"};
  uword grid_resolution = 101;
  std::vector<uword> interpret_frames{1, 5, 10};
  bool frozen_nlos_maps = true;
};

struct ExperimentConfig {
  std::string profile = "desk_scale";

  // physical deployment
  SystemGeometry geometry;
  MobilityConfig mobility;
  ChannelParams channel;

  // dimensions
  uword n_antennas = 4;     // M
  uword n_elements = 16;    // N_r
  uword num_users = 2;      // K
  uword num_subblocks = 2;  // L
  uword refine_pilot_len = 4;  // tau_w
  uword data_blocks = 3;    // N
  uword train_frames = 8;   // U

  // powers (dBm at the boundary, mW internally)
  double uplink_power_dbm = 15.0;
  double downlink_power_dbm = 10.0;
  double noise_density_ap_dbm_hz = -154.0;
  double noise_density_ue_dbm_hz = -160.0;
  double bandwidth_hz = 1.0e7;
  double uplink_power_mw = 0.0;
  double downlink_power_mw = 0.0;
  double uplink_noise_mw = 0.0;
  double downlink_noise_mw = 0.0;

  // network
  uword hidden_dim = 64;
  uword gnn_layers = 2;
  Variant variant;
  GnnInputKind gnn_input = GnnInputKind::cell;
  std::string pilot_scaling = "noise_normalized";

  TrainSchedule training;
  EvalPlan evaluation;
  std::uint64_t root_seed = 1;

  NetArch arch() const {
    return NetArch{n_antennas, n_elements, num_subblocks, hidden_dim,
                   gnn_layers, variant.use_lstm};
  }
  PilotConfig pilot_config() const {
    return PilotConfig{num_subblocks, num_users, refine_pilot_len,
                       uplink_power_mw, uplink_noise_mw};
  }
  // fixed input normalization of the pilot encodings fed to the network
  double pilot_input_scale() const;

  void derive_linear_powers();
  void validate() const;
};

// profiles
ExperimentConfig desk_scale_config();
ExperimentConfig paper_scale_config();

// JSON config file: empty file or missing path entries fall back to the
// selected profile; unknown keys are rejected by name.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);

// canonical snapshot (sorted keys) and its stable hash
std::string config_to_json(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

inline constexpr const char* kCodeVersion = "ristrack 1.0.0";

}  // namespace ristrack
