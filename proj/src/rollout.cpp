#include "ristrack/rollout.hpp"

#include "ristrack/baselines.hpp"

namespace ristrack {

using namespace ad;

CVar lift_cvar(ad::Tape& tape, CVar v) {
  const uword cols = tape.val(v.re).n_cols;
  const Var one_row = tape.constant(mat(1, cols, arma::fill::ones));
  const Var zero_row = tape.constant(mat(1, cols, arma::fill::zeros));
  return {vconcat({one_row, v.re}), vconcat({zero_row, v.im})};
}

std::vector<CVar> duality_beams_fwd(ad::Tape& tape,
                                    const std::vector<CVar>& h_c, Var p,
                                    Var lambda, double noise_mw) {
  const uword num_users = h_c.size();
  const uword m = tape.val(h_c[0].re).n_rows;
  const CVar eye = cconst(tape, cx_mat(arma::eye(m, m), mat(m, m)));
  std::vector<CVar> beams(num_users);
  for (uword k = 0; k < num_users; ++k) {
    CVar reg = eye;
    for (uword i = 0; i < num_users; ++i) {
      if (i == k) continue;
      const Var coef = scale(rows(lambda, i, i), 1.0 / noise_mw);
      reg = cadd(reg, cscale_real(coef, cmatmul(h_c[i], cherm(h_c[i]))));
    }
    const CVar dir = csolve(reg, h_c[k]);
    const Var norm = sqrt_(sum_all(cabs2(dir)));
    const Var gain = divide(sqrt_(rows(p, k, k)), norm);
    beams[k] = cscale_real(gain, dir);
  }
  return beams;
}

BlockRatesVar block_rates_fwd(ad::Tape& tape, const std::vector<cx_mat>& A,
                              CVar w_lifted, const std::vector<CVar>& beams,
                              double noise_mw) {
  const uword num_users = A.size();
  BlockRatesVar out;
  out.rates.resize(num_users);
  for (uword k = 0; k < num_users; ++k) {
    const CVar h_c = cmatmul(cconst(tape, A[k]), w_lifted);
    const CVar h_herm = cherm(h_c);
    Var signal;
    std::vector<Var> interference;
    for (uword j = 0; j < beams.size(); ++j) {
      const Var gain = cabs2(cmatmul(h_herm, beams[j]));
      if (j == k)
        signal = gain;
      else
        interference.push_back(gain);
    }
    Var denom = interference.empty()
                    ? scalar(tape, noise_mw)
                    : offset(addn(interference), noise_mw);
    const Var sinr = divide(signal, denom);
    out.rates[k] = scale(log_(offset(sinr, 1.0)), 1.0 / std::log(2.0));
  }
  out.min_rate = smin(out.rates);
  return out;
}

namespace {

struct NetStep {
  std::vector<Var> nodes;          // GNN inputs per user
  GnnOutputsVar gnn;
};

// one controller step on the tape: encode pilots, update the LSTM states (if
// present) and run the GNN
NetStep net_step(ad::Tape& tape, const TapeController& tc,
                 const ExperimentConfig& cfg, const std::vector<CVar>& pilots,
                 std::vector<LstmStateVar>* state, double input_scale,
                 bool want_direct_b) {
  const uword num_users = pilots.size();
  NetStep step;
  step.nodes.resize(num_users);
  for (uword k = 0; k < num_users; ++k) {
    const Var x = encode_pilot_fwd(tape, pilots[k], input_scale);
    if (cfg.variant.use_lstm) {
      (*state)[k] = lstm_step_fwd(tc.lstm, x, (*state)[k]);
      step.nodes[k] = cfg.gnn_input == GnnInputKind::cell ? (*state)[k].c
                                                          : (*state)[k].h;
    } else {
      step.nodes[k] = x;
    }
  }
  step.gnn = gnn_forward_fwd(tape, tc.gnn, tc.arch, step.nodes,
                             cfg.downlink_power_mw, want_direct_b);
  return step;
}

CVar replicate_columns(ad::Tape& tape, CVar col, uword n) {
  std::vector<Var> res(n, col.re), ims(n, col.im);
  return {hconcat(res), hconcat(ims)};
}

cx_mat draw_fixed_sensing(const ExperimentConfig& cfg,
                          std::uint64_t episode_seed, uword frame) {
  RngStream rng =
      derive_stream(episode_seed, {seed_tag::kFixedSensing, frame});
  const SensingMatrix s = fixed_sensing_matrix(
      FixedSensingMode::random, cfg.n_elements, cfg.num_subblocks, &rng);
  return s.lifted.rows(1, cfg.n_elements);  // unlifted
}

// sensing for the given upcoming frame, on the tape
CVar next_sensing(ad::Tape& tape, const TapeController& tc,
                  const ExperimentConfig& cfg, const GnnOutputsVar& gnn,
                  const CVar* learned_v, std::uint64_t episode_seed,
                  uword upcoming_frame) {
  switch (cfg.variant.sensing) {
    case SensingScheme::active:
      return gnn.v_next;
    case SensingScheme::reuse_w:
      return replicate_columns(tape, gnn.w, cfg.num_subblocks);
    case SensingScheme::fixed_learned:
      return *learned_v;
    case SensingScheme::fixed_random:
      return cconst(tape, draw_fixed_sensing(cfg, episode_seed, upcoming_frame));
  }
  throw std::logic_error("unreachable sensing scheme");
}

std::vector<CVar> const_pilots(ad::Tape& tape, const cx_mat& value, uword k) {
  return std::vector<CVar>(k, cconst(tape, value));
}

}  // namespace

RolloutResult rollout_episode(const ControllerParams& params,
                              const EpisodeData& episode,
                              const ExperimentConfig& cfg, RolloutMode mode,
                              ad::Tape* tape) {
  if (!(params.arch == cfg.arch()))
    throw std::invalid_argument("rollout: controller/config architecture mismatch");

  if (mode != RolloutMode::train) {
    // streaming inference over the episode
    RolloutResult out;
    InferenceState st = init_inference(params, cfg, episode.seed);
    std::vector<Var> unused;
    std::vector<double> frame_losses;
    for (const FrameData& fr : episode.frames) {
      const FrameDecision d = infer_frame(params, cfg, st, fr, episode.seed,
                                          mode == RolloutMode::eval_refined);
      std::vector<BlockChannels> data_blocks(fr.channels.blocks.begin() + 1,
                                             fr.channels.blocks.end());
      const RateReport r =
          sinr_and_rate(data_blocks, d.w, d.B, cfg.downlink_noise_mw);
      FrameTrace tr;
      tr.min_rate_per_block = r.min_rate;
      tr.avg_min_rate = r.avg_min_rate;
      tr.rates = r.rate;
      tr.w = d.w;
      tr.p = d.p;
      tr.lambda = d.lambda;
      out.frames.push_back(std::move(tr));
      frame_losses.push_back(r.avg_min_rate);
    }
    out.loss = -arma::mean(vec(frame_losses));
    return out;
  }

  if (tape == nullptr)
    throw std::invalid_argument("rollout: train mode needs a tape");
  ad::Tape& t = *tape;
  const TapeController tc = register_controller(t, params, true);
  const uword num_users = cfg.num_users;
  const uword d = cfg.hidden_dim;
  const double input_scale = cfg.pilot_input_scale();
  const bool direct_b = cfg.variant.beam == BeamformerSource::direct_head;

  CVar learned_v;
  if (cfg.variant.sensing == SensingScheme::fixed_learned)
    learned_v = {cos_(tc.sensing_phases), sin_(tc.sensing_phases)};

  std::vector<LstmStateVar> state(num_users);
  for (auto& s : state)
    s = {t.constant(mat(d, 1, arma::fill::zeros)),
         t.constant(mat(d, 1, arma::fill::zeros))};

  // frame-0 convention: zero states, all-ones dummy pilots, no scaling
  const cx_mat dummy(cx_mat(mat(cfg.n_antennas, cfg.num_subblocks,
                                arma::fill::ones),
                            mat(cfg.n_antennas, cfg.num_subblocks,
                                arma::fill::zeros)));
  const NetStep warmup = net_step(t, tc, cfg, const_pilots(t, dummy, num_users),
                                  &state, 1.0, direct_b);
  CVar v_cur = next_sensing(t, tc, cfg, warmup.gnn, &learned_v, episode.seed, 0);

  RolloutResult out;
  std::vector<Var> frame_objs;
  for (uword f = 0; f < episode.frames.size(); ++f) {
    const FrameData& fr = episode.frames[f];
    const BlockChannels& pilot_block = fr.channels.blocks[0];

    // decorrelated pilots under the current sensing matrix
    const CVar v_lifted = lift_cvar(t, v_cur);
    std::vector<CVar> pilots(num_users);
    for (uword k = 0; k < num_users; ++k)
      pilots[k] = cadd(cmatmul(cconst(t, pilot_block.A[k]), v_lifted),
                       cconst(t, fr.pilot_noise[k]));

    const NetStep step = net_step(t, tc, cfg, pilots, &state, input_scale,
                                  direct_b);

    // tau_w refinement pilots estimate the effective channel under w
    const CVar w_lifted = lift_cvar(t, step.gnn.w);
    std::vector<CVar> h_hat(num_users);
    for (uword k = 0; k < num_users; ++k)
      h_hat[k] = cadd(cmatmul(cconst(t, pilot_block.A[k]), w_lifted),
                      cconst(t, cx_mat(fr.hc_noise[k])));

    const std::vector<CVar> beams =
        direct_b ? step.gnn.b_direct
                 : duality_beams_fwd(t, h_hat, step.gnn.p, step.gnn.lambda,
                                     cfg.downlink_noise_mw);

    std::vector<Var> block_mins;
    FrameTrace tr;
    tr.rates.set_size(num_users, cfg.data_blocks);
    tr.min_rate_per_block.set_size(cfg.data_blocks);
    for (uword n = 1; n <= cfg.data_blocks; ++n) {
      const BlockRatesVar br = block_rates_fwd(t, fr.channels.blocks[n].A,
                                               w_lifted, beams,
                                               cfg.downlink_noise_mw);
      block_mins.push_back(br.min_rate);
      for (uword k = 0; k < num_users; ++k)
        tr.rates(k, n - 1) = t.val(br.rates[k])(0, 0);
      tr.min_rate_per_block(n - 1) = t.val(br.min_rate)(0, 0);
    }
    frame_objs.push_back(
        scale(addn(block_mins), 1.0 / static_cast<double>(cfg.data_blocks)));
    tr.avg_min_rate = arma::mean(tr.min_rate_per_block);
    tr.w = cx_vec(cval(step.gnn.w));
    tr.p = vec(t.val(step.gnn.p));
    tr.lambda = vec(t.val(step.gnn.lambda));
    out.frames.push_back(std::move(tr));

    v_cur = next_sensing(t, tc, cfg, step.gnn, &learned_v, episode.seed, f + 1);
  }

  out.loss_var = neg(
      scale(addn(frame_objs), 1.0 / static_cast<double>(episode.frames.size())));
  out.loss = t.val(out.loss_var)(0, 0);
  return out;
}

InferenceState init_inference(const ControllerParams& params,
                              const ExperimentConfig& cfg,
                              std::uint64_t episode_seed) {
  const uword num_users = cfg.num_users;
  InferenceState st;
  st.h.zeros(cfg.hidden_dim, num_users);
  st.c.zeros(cfg.hidden_dim, num_users);
  st.next_frame = 0;

  ad::Tape tape;
  const TapeController tc = register_controller(tape, params, false);
  std::vector<LstmStateVar> state(num_users);
  for (auto& s : state)
    s = {tape.constant(mat(cfg.hidden_dim, 1, arma::fill::zeros)),
         tape.constant(mat(cfg.hidden_dim, 1, arma::fill::zeros))};
  const cx_mat dummy(mat(cfg.n_antennas, cfg.num_subblocks, arma::fill::ones),
                     mat(cfg.n_antennas, cfg.num_subblocks, arma::fill::zeros));
  CVar learned_v;
  if (cfg.variant.sensing == SensingScheme::fixed_learned)
    learned_v = {cos_(tc.sensing_phases), sin_(tc.sensing_phases)};
  const NetStep warmup =
      net_step(tape, tc, cfg, const_pilots(tape, dummy, num_users), &state, 1.0,
               cfg.variant.beam == BeamformerSource::direct_head);
  if (cfg.variant.use_lstm) {
    for (uword k = 0; k < num_users; ++k) {
      st.h.col(k) = tape.val(state[k].h);
      st.c.col(k) = tape.val(state[k].c);
    }
  }
  const CVar v0 = next_sensing(tape, tc, cfg, warmup.gnn, &learned_v,
                               episode_seed, 0);
  cx_vec dummy_w;  // lift expects unit modulus; v0 satisfies it by construction
  cx_mat v0_val = cval(v0);
  st.v_lifted.set_size(cfg.n_elements + 1, cfg.num_subblocks);
  st.v_lifted.row(0).fill(cx_double(1.0, 0.0));
  st.v_lifted.rows(1, cfg.n_elements) = v0_val;
  return st;
}

FrameDecision infer_frame(const ControllerParams& params,
                          const ExperimentConfig& cfg, InferenceState& state,
                          const FrameData& frame, std::uint64_t episode_seed,
                          bool refine) {
  const uword num_users = cfg.num_users;
  const BlockChannels& pilot_block = frame.channels.blocks[0];

  SensingMatrix sensing{state.v_lifted};
  const std::vector<cx_mat> y_bar =
      receive_pilots_with_noise(pilot_block, sensing, frame.pilot_noise);

  ad::Tape tape;
  const TapeController tc = register_controller(tape, params, false);
  std::vector<LstmStateVar> lstm_state(num_users);
  for (uword k = 0; k < num_users; ++k)
    lstm_state[k] = {tape.constant(mat(state.h.col(k))),
                     tape.constant(mat(state.c.col(k)))};
  std::vector<CVar> pilots(num_users);
  for (uword k = 0; k < num_users; ++k) pilots[k] = cconst(tape, y_bar[k]);
  CVar learned_v;
  if (cfg.variant.sensing == SensingScheme::fixed_learned)
    learned_v = {cos_(tc.sensing_phases), sin_(tc.sensing_phases)};

  const bool direct_b = cfg.variant.beam == BeamformerSource::direct_head;
  const NetStep step = net_step(tape, tc, cfg, pilots, &lstm_state,
                                cfg.pilot_input_scale(), direct_b);
  if (cfg.variant.use_lstm) {
    for (uword k = 0; k < num_users; ++k) {
      state.h.col(k) = tape.val(lstm_state[k].h);
      state.c.col(k) = tape.val(lstm_state[k].c);
    }
  }

  FrameDecision d;
  d.w = cx_vec(cval(step.gnn.w));
  d.p = vec(tape.val(step.gnn.p));
  d.lambda = vec(tape.val(step.gnn.lambda));
  d.h_c_hat =
      estimate_effective_channel_with_noise(pilot_block, d.w, frame.hc_noise);

  if (refine) {
    const FixedPointResult fp =
        fixed_point_power(d.h_c_hat, cfg.downlink_power_mw,
                          cfg.downlink_noise_mw, kRefineTol, kRefineMaxIter);
    d.p = fp.p;
    d.lambda = fp.lambda;
    d.B = beamformers_from_duality(d.h_c_hat, d.lambda, d.p,
                                   cfg.downlink_noise_mw);
    d.refined = true;
  } else if (direct_b) {
    d.B.set_size(cfg.n_antennas, num_users);
    for (uword k = 0; k < num_users; ++k)
      d.B.col(k) = cx_vec(cval(step.gnn.b_direct[k]));
  } else {
    d.B = beamformers_from_duality(d.h_c_hat, d.lambda, d.p,
                                   cfg.downlink_noise_mw);
  }

  // sensing for the next frame
  const CVar v_next = next_sensing(tape, tc, cfg, step.gnn, &learned_v,
                                   episode_seed, state.next_frame + 1);
  const cx_mat v_val = cval(v_next);
  state.v_lifted.row(0).fill(cx_double(1.0, 0.0));
  state.v_lifted.rows(1, cfg.n_elements) = v_val;
  state.next_frame += 1;
  return d;
}

}  // namespace ristrack
