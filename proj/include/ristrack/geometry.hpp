#pragma once

#include <vector>

#include "ristrack/common.hpp"
#include "ristrack/rng.hpp"

namespace ristrack {

// Static deployment geometry: AP position, RIS position, array spacings.
struct SystemGeometry {
  vec ap_position;          // 3-vector, meters
  vec ris_position;         // 3-vector, meters
  double ap_spacing;        // d_AP, meters
  double ris_spacing;       // d_RIS, meters
  uword ris_columns;        // v, columns of the RIS rectangular array
  double carrier_freq_hz;   // f_c
  double wavelength() const { return kSpeedOfLight / carrier_freq_hz; }
};

SystemGeometry default_geometry(uword ris_columns, double carrier_freq_hz);

// Mobility model: constant-speed random-heading walk inside a rectangle.
// max_doppler_hz = v f_c / c, block_duration_s = 1/(2 f_max) and
// step_length_m = v T_b; use make_mobility_config to derive them.
struct MobilityConfig {
  double x_min, x_max;             // service area, meters
  double y_min, y_max;
  double z_ue;                     // fixed UE height, meters
  double speed_mps;                // v_UE
  double max_doppler_hz;           // f_max
  double block_duration_s;         // T_b
  double step_length_m;            // lambda_step
  double heading_perturb_rad;      // half-width of the uniform heading step

  void validate() const;
};

MobilityConfig make_mobility_config(double x_min, double x_max, double y_min,
                                    double y_max, double z_ue, double speed_mps,
                                    double carrier_freq_hz,
                                    double heading_perturb_rad);

// Positions and headings of the K users at one block.
struct TrajectoryState {
  mat positions;      // K x 2 (x, y); z is fixed in MobilityConfig
  vec headings;       // K, radians in [0, 2pi)
  long block_index = 0;
};

// Uniform positions/headings inside the service area (block_index = 0).
TrajectoryState init_episode(uword num_users, const MobilityConfig& config,
                             RngStream& rng);

// One block of motion: advance along the current heading by the fixed step,
// mirror at boundaries, then perturb the heading.
TrajectoryState step_block(const TrajectoryState& state,
                           const MobilityConfig& config, RngStream& rng);

// Direction cosines and distance of a point seen from the RIS:
// dircos_y = y/l, dircos_z = z/l in RIS-centered coordinates.
struct RisAngles {
  double dircos_y;
  double dircos_z;
  double distance;
};
RisAngles aoa_to_ris(const vec& position, const SystemGeometry& geometry);

// Euclidean link distances for one UE position.
struct LinkDistances {
  double direct;   // UE -> AP
  double ris_ue;   // UE -> RIS
  double ap_ris;   // AP -> RIS
};
LinkDistances distances(const vec& position, const SystemGeometry& geometry);

inline vec ue_position_3d(const TrajectoryState& s, uword k, double z_ue) {
  return {s.positions(k, 0), s.positions(k, 1), z_ue};
}

}  // namespace ristrack
