#pragma once

#include <vector>

#include "ristrack/common.hpp"
#include "ristrack/geometry.hpp"
#include "ristrack/rng.hpp"

namespace ristrack {

// Static multipath geometry of the AP-RIS link, fixed for an episode.
struct StaticPaths {
  uword num_paths;        // N_G
  vec ap_aoas;            // phi_{1,i}, radians
  vec ris_aods;           // phi_{2,i}, radians
  vec ris_elevations;     // theta_{2,i}, all zero in this deployment
  cx_mat los_sum;         // sum_i a_AP(phi_1i) a_RIS(theta_2i, phi_2i)^H, M x N_r
  double rician_factor;   // epsilon
};

// Gauss-Markov NLOS state shared by all links; every entry is marginally
// CN(0,1) and evolves with the same correlation coefficient.
struct NlosState {
  cx_mat g_tilde;                 // M x N_r
  std::vector<cx_vec> h_d_tilde;  // K vectors of length M
  std::vector<cx_vec> h_r_tilde;  // K vectors of length N_r
  double rho;
};

// Fully assembled channels of one block.
struct BlockChannels {
  cx_mat G;                    // M x N_r
  std::vector<cx_vec> h_d;     // K of M
  std::vector<cx_vec> h_r;     // K of N_r
  std::vector<cx_mat> A;       // K of M x (N_r + 1), A_k = [h_d,k, G diag(h_r,k)]
  double beta_G;
  vec beta_d;                  // K
  vec beta_r;                  // K
};

// One frame: blocks[0] is the pilot block, blocks[1..N] carry data.
struct FrameChannels {
  std::vector<BlockChannels> blocks;
};

struct ChannelParams {
  uword num_paths = 8;          // N_G
  double rician_factor = 10.0;  // epsilon
  double rho = 0.9995;
  // path loss in dB: a + b*log10(distance_m)
  double direct_const_db = 32.0;
  double direct_slope_db = 43.3;
  double ris_const_db = 28.0;
  double ris_slope_db = 16.9;
};

enum class PathlossKind { direct, ris_segment };

// RIS steering vector, Eq.-(22) layout: element u has row/column indices
// i1 = mod(u-1, v), i2 = floor((u-1)/v) in the v-column rectangular array.
cx_vec steering_ris(double dircos_y, double dircos_z, uword n_elements,
                    uword columns, double spacing, double wavelength);

// Uniform linear array steering at the AP.
cx_vec steering_ap(double azimuth, uword n_antennas, double spacing,
                   double wavelength);

// Amplitude factor 10^(-PL_dB/20) for the given link kind.
double pathloss_amplitude(PathlossKind kind, double distance_m,
                          const ChannelParams& params);

StaticPaths sample_static_paths(RngStream& rng, const SystemGeometry& geometry,
                                uword n_antennas, uword n_elements,
                                const ChannelParams& params);

NlosState init_nlos(RngStream& rng, uword n_antennas, uword n_elements,
                    uword num_users, double rho);

// One Gauss-Markov step x' = rho x + sqrt(1-rho^2) mu applied entrywise.
NlosState evolve_nlos(const NlosState& state, RngStream& rng);

BlockChannels assemble_channels(const TrajectoryState& traj, double z_ue,
                                const StaticPaths& paths, const NlosState& nlos,
                                const SystemGeometry& geometry,
                                const ChannelParams& params);

}  // namespace ristrack
