#pragma once

#include <string>
#include <vector>

#include "ristrack/autodiff.hpp"
#include "ristrack/common.hpp"
#include "ristrack/rng.hpp"

namespace ristrack {

// Weight-shape metadata. The controller is independent of the user count K:
// the LSTM weights are shared across users and the GNN pools over them.
struct NetArch {
  uword n_antennas;      // M
  uword n_elements;      // N_r
  uword num_subblocks;   // L
  uword hidden_dim;      // d
  uword gnn_layers;      // D
  bool use_lstm = true;  // false: raw pilot encodings feed the GNN encoders

  uword pilot_input_dim() const { return 2 * n_antennas * num_subblocks; }
  uword encoder_input_dim() const {
    return use_lstm ? hidden_dim : pilot_input_dim();
  }
  bool operator==(const NetArch&) const = default;
};

enum class SensingScheme { active, fixed_random, fixed_learned, reuse_w };
enum class BeamformerSource { duality_powers, direct_head };

// Wiring switches distinguishing the proposed controller from its benchmark
// ablations.
struct Variant {
  std::string name = "full_active";
  bool use_lstm = true;
  SensingScheme sensing = SensingScheme::active;
  BeamformerSource beam = BeamformerSource::duality_powers;
  bool refine = true;  // replace GNN powers by the fixed point at inference

  static Variant preset(const std::string& name);
};

enum class GnnInputKind { cell, hidden };

struct Dense {
  mat W;
  mat b;
};

// two dense layers, ReLU after each
struct Mlp {
  Dense l1, l2;
};

struct LstmParams {
  Dense u_c, u_q, u_i, u_o;  // input maps 2ML -> d
  mat w_c, w_q, w_i, w_o;    // recurrent maps d -> d
};

struct GnnParams {
  Mlp f1, f2, f3;          // encoders: enc_in -> 2d -> d
  Mlp f4, f6, f8, fw, fV;  // node transforms: d -> d -> d
  Mlp f5;                  // user update: 4d -> d -> d
  Mlp f7, f9;              // RIS-node updates: 2d -> d -> d
  Dense g1;                // power head: d -> 2
  Dense g2;                // reflection head: d -> 2 N_r
  Dense g3;                // sensing head: d -> 2 N_r L
  Dense g1b;               // per-user direct beamformer head: d -> 2M
};

struct ControllerParams {
  NetArch arch;
  LstmParams lstm;
  GnnParams gnn;
  mat sensing_phases;  // N_r x L, the trainable constant sensing variant

  // canonical flat enumeration (order is the contract for checkpoints,
  // optimizer state and gradient extraction)
  std::vector<std::pair<std::string, mat*>> flat();
  std::vector<std::pair<std::string, const mat*>> flat() const;
  uword num_weights() const;
};

ControllerParams init_controller(const NetArch& arch, std::uint64_t seed);

// ---- tape-side mirror ----

struct TapeDense {
  ad::Var W, b;
};
struct TapeMlp {
  TapeDense l1, l2;
};
struct TapeLstm {
  TapeDense u_c, u_q, u_i, u_o;
  ad::Var w_c, w_q, w_i, w_o;
};
struct TapeGnn {
  TapeMlp f1, f2, f3, f4, f6, f8, fw, fV, f5, f7, f9;
  TapeDense g1, g2, g3, g1b;
};
struct TapeController {
  NetArch arch;
  TapeLstm lstm;
  TapeGnn gnn;
  ad::Var sensing_phases;
  std::vector<ad::Var> ordered;  // same order as ControllerParams::flat()
};

TapeController register_controller(ad::Tape& tape, const ControllerParams& p,
                                   bool trainable);

// gradients in ControllerParams::flat() order (zeros where unreached)
std::vector<mat> extract_gradients(const ad::Tape& tape,
                                   const TapeController& c);

// ---- forward passes (define-by-run on a tape) ----

ad::Var dense_fwd(const TapeDense& d, ad::Var x);
ad::Var mlp_fwd(const TapeMlp& m, ad::Var x);

struct LstmStateVar {
  ad::Var h, c;
};
LstmStateVar lstm_step_fwd(const TapeLstm& lstm, ad::Var x, LstmStateVar prev);

struct GnnOutputsVar {
  ad::CVar w;                     // N_r x 1, unit modulus
  ad::CVar v_next;                // N_r x L, unit modulus (not lifted)
  ad::Var p, lambda;              // K x 1 each, sum to the power budget
  std::vector<ad::CVar> b_direct; // per-user M x 1 (only when requested)
  bool degenerate_pair = false;   // a zero complex pair hit the phase fallback
};
GnnOutputsVar gnn_forward_fwd(ad::Tape& tape, const TapeGnn& gnn,
                              const NetArch& arch,
                              const std::vector<ad::Var>& node_states,
                              double power_budget_mw, bool want_direct_b);

// pilot encoding: interleaved (re, im) of vec(Ybar), optionally scaled
ad::Var encode_pilot_fwd(ad::Tape& tape, ad::CVar y_bar, double input_scale);

// normalization of an interleaved head output into unit-modulus complex pairs
ad::CVar unit_modulus_pairs(ad::Tape& tape, ad::Var interleaved, uword n_rows,
                            uword n_cols, bool* degenerate_flag);

// ---- plain-value wrappers (scratch tape inside) ----

struct LstmStepResult {
  vec h, c;
};
LstmStepResult lstm_step(const ControllerParams& p, const cx_mat& y_bar_k,
                         const vec& h_prev, const vec& c_prev,
                         double input_scale);

struct GnnDecisions {
  cx_vec w;
  cx_mat v_next;  // N_r x L
  vec p, lambda;
  cx_mat b_direct;  // M x K, empty unless requested
  bool degenerate_pair = false;
};
GnnDecisions gnn_forward(const ControllerParams& p, const mat& node_states,
                         double power_budget_mw, bool want_direct_b = false);

}  // namespace ristrack
