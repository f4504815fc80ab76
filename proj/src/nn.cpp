#include "ristrack/nn.hpp"

namespace ristrack {

using namespace ad;

Variant Variant::preset(const std::string& name) {
  Variant v;
  v.name = name;
  if (name == "full_active") {
  } else if (name == "no_lstm_gnn_only") {
    v.use_lstm = false;
    v.sensing = SensingScheme::fixed_random;
  } else if (name == "fixed_sensing_random") {
    v.sensing = SensingScheme::fixed_random;
  } else if (name == "fixed_sensing_learned") {
    v.sensing = SensingScheme::fixed_learned;
  } else if (name == "reuse_w_sensing") {
    v.sensing = SensingScheme::reuse_w;
  } else if (name == "direct_B_head") {
    v.beam = BeamformerSource::direct_head;
  } else if (name == "no_refinement") {
    v.refine = false;
  } else {
    throw ConfigError("unknown controller variant: " + name);
  }
  return v;
}

namespace {

// single source of the canonical tensor order
template <typename Self, typename F>
void enumerate_tensors(Self& self, F&& f) {
  auto dense = [&](const std::string& prefix, auto& d) {
    f(prefix + ".W", d.W);
    f(prefix + ".b", d.b);
  };
  auto mlp = [&](const std::string& prefix, auto& m) {
    dense(prefix + ".l1", m.l1);
    dense(prefix + ".l2", m.l2);
  };
  dense("lstm.u_c", self.lstm.u_c);
  dense("lstm.u_q", self.lstm.u_q);
  dense("lstm.u_i", self.lstm.u_i);
  dense("lstm.u_o", self.lstm.u_o);
  f("lstm.w_c", self.lstm.w_c);
  f("lstm.w_q", self.lstm.w_q);
  f("lstm.w_i", self.lstm.w_i);
  f("lstm.w_o", self.lstm.w_o);
  mlp("gnn.f1", self.gnn.f1);
  mlp("gnn.f2", self.gnn.f2);
  mlp("gnn.f3", self.gnn.f3);
  mlp("gnn.f4", self.gnn.f4);
  mlp("gnn.f5", self.gnn.f5);
  mlp("gnn.f6", self.gnn.f6);
  mlp("gnn.f7", self.gnn.f7);
  mlp("gnn.f8", self.gnn.f8);
  mlp("gnn.f9", self.gnn.f9);
  mlp("gnn.fw", self.gnn.fw);
  mlp("gnn.fV", self.gnn.fV);
  dense("gnn.g1", self.gnn.g1);
  dense("gnn.g2", self.gnn.g2);
  dense("gnn.g3", self.gnn.g3);
  dense("gnn.g1b", self.gnn.g1b);
  f("sensing_phases", self.sensing_phases);
}

}  // namespace

std::vector<std::pair<std::string, mat*>> ControllerParams::flat() {
  std::vector<std::pair<std::string, mat*>> out;
  enumerate_tensors(*this, [&](const std::string& n, mat& m) {
    out.emplace_back(n, &m);
  });
  return out;
}

std::vector<std::pair<std::string, const mat*>> ControllerParams::flat() const {
  std::vector<std::pair<std::string, const mat*>> out;
  enumerate_tensors(*this, [&](const std::string& n, const mat& m) {
    out.emplace_back(n, &m);
  });
  return out;
}

uword ControllerParams::num_weights() const {
  uword n = 0;
  for (const auto& [name, m] : flat()) n += m->n_elem;
  return n;
}

namespace {

mat glorot(uword rows, uword cols, RngStream& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  mat m(rows, cols);
  for (auto& v : m) v = rng.uniform(-a, a);
  return m;
}

Dense make_dense(uword out, uword in, RngStream& rng) {
  return {glorot(out, in, rng), mat(out, 1, arma::fill::zeros)};
}

Mlp make_mlp(uword in, uword hid, uword out, RngStream& rng) {
  return {make_dense(hid, in, rng), make_dense(out, hid, rng)};
}

// head biases start at random unit-modulus pairs so the phase normalization
// sees O(1) magnitudes from the first update
mat unit_pair_bias(uword pairs, RngStream& rng) {
  mat b(2 * pairs, 1);
  for (uword i = 0; i < pairs; ++i) {
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    b(2 * i, 0) = std::cos(phase);
    b(2 * i + 1, 0) = std::sin(phase);
  }
  return b;
}

}  // namespace

ControllerParams init_controller(const NetArch& arch, std::uint64_t seed) {
  if (arch.hidden_dim < 1 || arch.gnn_layers < 1)
    throw ConfigError("controller: hidden_dim and gnn_layers must be >= 1");
  RngStream rng(derive_seed(seed, {seed_tag::kWeightInit}));
  ControllerParams p;
  p.arch = arch;
  const uword d = arch.hidden_dim;
  const uword in = arch.pilot_input_dim();

  p.lstm.u_c = make_dense(d, in, rng);
  p.lstm.u_q = make_dense(d, in, rng);
  p.lstm.u_i = make_dense(d, in, rng);
  p.lstm.u_o = make_dense(d, in, rng);
  p.lstm.w_c = glorot(d, d, rng);
  p.lstm.w_q = glorot(d, d, rng);
  p.lstm.w_i = glorot(d, d, rng);
  p.lstm.w_o = glorot(d, d, rng);

  const uword enc_in = arch.encoder_input_dim();
  p.gnn.f1 = make_mlp(enc_in, 2 * d, d, rng);
  p.gnn.f2 = make_mlp(enc_in, 2 * d, d, rng);
  p.gnn.f3 = make_mlp(enc_in, 2 * d, d, rng);
  p.gnn.f4 = make_mlp(d, d, d, rng);
  p.gnn.f5 = make_mlp(4 * d, d, d, rng);
  p.gnn.f6 = make_mlp(d, d, d, rng);
  p.gnn.f7 = make_mlp(2 * d, d, d, rng);
  p.gnn.f8 = make_mlp(d, d, d, rng);
  p.gnn.f9 = make_mlp(2 * d, d, d, rng);
  p.gnn.fw = make_mlp(d, d, d, rng);
  p.gnn.fV = make_mlp(d, d, d, rng);

  p.gnn.g1 = make_dense(2, d, rng);
  p.gnn.g2 = make_dense(2 * arch.n_elements, d, rng);
  p.gnn.g2.b = unit_pair_bias(arch.n_elements, rng);
  p.gnn.g3 = make_dense(2 * arch.n_elements * arch.num_subblocks, d, rng);
  p.gnn.g3.b = unit_pair_bias(arch.n_elements * arch.num_subblocks, rng);
  p.gnn.g1b = make_dense(2 * arch.n_antennas, d, rng);
  p.gnn.g1b.b = unit_pair_bias(arch.n_antennas, rng);

  p.sensing_phases.set_size(arch.n_elements, arch.num_subblocks);
  for (auto& v : p.sensing_phases) v = rng.uniform(0.0, 2.0 * kPi);
  return p;
}

TapeController register_controller(ad::Tape& tape, const ControllerParams& p,
                                   bool trainable) {
  TapeController c;
  c.arch = p.arch;
  auto reg = [&](const mat& m) {
    const Var v = trainable ? tape.param(m) : tape.constant(m);
    c.ordered.push_back(v);
    return v;
  };
  auto dense = [&](const Dense& d) { return TapeDense{reg(d.W), reg(d.b)}; };
  auto mlp = [&](const Mlp& m) { return TapeMlp{dense(m.l1), dense(m.l2)}; };

  // must mirror enumerate_tensors() order exactly (pinned by a unit test)
  c.lstm.u_c = dense(p.lstm.u_c);
  c.lstm.u_q = dense(p.lstm.u_q);
  c.lstm.u_i = dense(p.lstm.u_i);
  c.lstm.u_o = dense(p.lstm.u_o);
  c.lstm.w_c = reg(p.lstm.w_c);
  c.lstm.w_q = reg(p.lstm.w_q);
  c.lstm.w_i = reg(p.lstm.w_i);
  c.lstm.w_o = reg(p.lstm.w_o);
  c.gnn.f1 = mlp(p.gnn.f1);
  c.gnn.f2 = mlp(p.gnn.f2);
  c.gnn.f3 = mlp(p.gnn.f3);
  c.gnn.f4 = mlp(p.gnn.f4);
  c.gnn.f5 = mlp(p.gnn.f5);
  c.gnn.f6 = mlp(p.gnn.f6);
  c.gnn.f7 = mlp(p.gnn.f7);
  c.gnn.f8 = mlp(p.gnn.f8);
  c.gnn.f9 = mlp(p.gnn.f9);
  c.gnn.fw = mlp(p.gnn.fw);
  c.gnn.fV = mlp(p.gnn.fV);
  c.gnn.g1 = dense(p.gnn.g1);
  c.gnn.g2 = dense(p.gnn.g2);
  c.gnn.g3 = dense(p.gnn.g3);
  c.gnn.g1b = dense(p.gnn.g1b);
  c.sensing_phases = reg(p.sensing_phases);
  return c;
}

std::vector<mat> extract_gradients(const ad::Tape& tape,
                                   const TapeController& c) {
  std::vector<mat> grads;
  grads.reserve(c.ordered.size());
  for (Var v : c.ordered) grads.push_back(tape.grad(v));
  return grads;
}

Var dense_fwd(const TapeDense& d, Var x) { return add(matmul(d.W, x), d.b); }

Var mlp_fwd(const TapeMlp& m, Var x) {
  return relu(dense_fwd(m.l2, relu(dense_fwd(m.l1, x))));
}

LstmStateVar lstm_step_fwd(const TapeLstm& lstm, Var x, LstmStateVar prev) {
  auto gate = [&](const TapeDense& u, Var w_rec) {
    return sigmoid(add(dense_fwd(u, x), matmul(w_rec, prev.h)));
  };
  const Var q = gate(lstm.u_q, lstm.w_q);
  const Var i = gate(lstm.u_i, lstm.w_i);
  const Var o = gate(lstm.u_o, lstm.w_o);
  const Var cand =
      tanh_(add(dense_fwd(lstm.u_c, x), matmul(lstm.w_c, prev.h)));
  LstmStateVar next;
  next.c = add(mul(q, prev.c), mul(i, cand));
  next.h = mul(o, tanh_(next.c));
  return next;
}

Var encode_pilot_fwd(ad::Tape& tape, CVar y_bar, double input_scale) {
  const Var re = reshape_to_col(y_bar.re);
  const Var im = reshape_to_col(y_bar.im);
  const uword n = tape.val(re).n_rows;
  const Var stacked = vconcat({re, im});
  uvec idx(2 * n);
  for (uword i = 0; i < n; ++i) {
    idx(2 * i) = i;
    idx(2 * i + 1) = n + i;
  }
  Var out = gather_rows(stacked, idx);
  if (input_scale != 1.0) out = scale(out, input_scale);
  return out;
}

CVar unit_modulus_pairs(ad::Tape& tape, Var interleaved, uword n_rows,
                        uword n_cols, bool* degenerate_flag) {
  CVar z = from_interleaved(interleaved);
  Var re = reshape(z.re, n_rows, n_cols);
  Var im = reshape(z.im, n_rows, n_cols);
  Var norm2 = add(mul(re, re), mul(im, im));
  if (tape.val(norm2).min() == 0.0) {
    // zero pair: fall back to phase 0 on the affected entries
    if (degenerate_flag != nullptr) *degenerate_flag = true;
    mat mask = arma::conv_to<mat>::from(tape.val(norm2) == 0.0);
    const Var mask_c = tape.constant(mask);
    norm2 = emax({norm2, mask_c});
    re = add(re, mask_c);
  } else if (degenerate_flag != nullptr) {
    *degenerate_flag = false;
  }
  const Var inv_norm = divide(tape.constant(mat(n_rows, n_cols, arma::fill::ones)),
                              sqrt_(norm2));
  return {mul(re, inv_norm), mul(im, inv_norm)};
}

GnnOutputsVar gnn_forward_fwd(ad::Tape& tape, const TapeGnn& gnn,
                              const NetArch& arch,
                              const std::vector<Var>& node_states,
                              double power_budget_mw, bool want_direct_b) {
  const uword num_users = node_states.size();
  if (num_users < 1) throw std::invalid_argument("gnn_forward: no users");

  // initialization layer, the RIS nodes see the mean-pooled user states
  std::vector<Var> s_user(num_users);
  for (uword k = 0; k < num_users; ++k)
    s_user[k] = mlp_fwd(gnn.f1, node_states[k]);
  const Var pooled0 =
      scale(addn(node_states), 1.0 / static_cast<double>(num_users));
  Var s_w = mlp_fwd(gnn.f2, pooled0);
  Var s_v = mlp_fwd(gnn.f3, pooled0);

  for (uword layer = 0; layer < arch.gnn_layers; ++layer) {
    const Var fv = mlp_fwd(gnn.fV, s_v);
    const Var fw = mlp_fwd(gnn.fw, s_w);
    std::vector<Var> f4_img(num_users), f6_img(num_users), f8_img(num_users);
    for (uword k = 0; k < num_users; ++k) {
      f4_img[k] = mlp_fwd(gnn.f4, s_user[k]);
      f6_img[k] = mlp_fwd(gnn.f6, s_user[k]);
      f8_img[k] = mlp_fwd(gnn.f8, s_user[k]);
    }
    std::vector<Var> next_user(num_users);
    for (uword k = 0; k < num_users; ++k) {
      std::vector<Var> others;
      for (uword j = 0; j < num_users; ++j)
        if (j != k) others.push_back(f4_img[j]);
      if (others.empty()) {
        // single user: the only non-k nodes are the RIS nodes
        others.push_back(mlp_fwd(gnn.f4, s_w));
        others.push_back(mlp_fwd(gnn.f4, s_v));
      }
      const Var pooled_others = emax(others);
      next_user[k] =
          mlp_fwd(gnn.f5, vconcat({s_user[k], fv, fw, pooled_others}));
    }
    const double inv_k = 1.0 / static_cast<double>(num_users);
    const Var s_w_next = mlp_fwd(gnn.f7, vconcat({fw, scale(addn(f6_img), inv_k)}));
    const Var s_v_next = mlp_fwd(gnn.f9, vconcat({fv, scale(addn(f8_img), inv_k)}));
    s_user = std::move(next_user);
    s_w = s_w_next;
    s_v = s_v_next;
  }

  GnnOutputsVar out;
  bool degen_w = false, degen_v = false;
  out.w = unit_modulus_pairs(tape, dense_fwd(gnn.g2, s_w), arch.n_elements, 1,
                             &degen_w);
  out.v_next = unit_modulus_pairs(tape, dense_fwd(gnn.g3, s_v),
                                  arch.n_elements, arch.num_subblocks, &degen_v);

  std::vector<Var> p_raw(num_users), l_raw(num_users);
  for (uword k = 0; k < num_users; ++k) {
    const Var head = dense_fwd(gnn.g1, s_user[k]);
    p_raw[k] = rows(head, 0, 0);
    l_raw[k] = rows(head, 1, 1);
  }
  out.p = scale(softmax(vconcat(p_raw)), power_budget_mw);
  out.lambda = scale(softmax(vconcat(l_raw)), power_budget_mw);

  if (want_direct_b) {
    // raw complex beamformers, then a global rescale onto the power budget
    std::vector<CVar> raw(num_users);
    std::vector<Var> powers(num_users);
    for (uword k = 0; k < num_users; ++k) {
      raw[k] = from_interleaved(dense_fwd(gnn.g1b, s_user[k]));
      powers[k] = sum_all(cabs2(raw[k]));
    }
    const Var total = addn(powers);
    const Var gain = sqrt_(divide(scalar(tape, power_budget_mw), total));
    out.b_direct.resize(num_users);
    for (uword k = 0; k < num_users; ++k)
      out.b_direct[k] = cscale_real(gain, raw[k]);
  }
  out.degenerate_pair = degen_w || degen_v;
  return out;
}

// ---- plain wrappers ----

LstmStepResult lstm_step(const ControllerParams& p, const cx_mat& y_bar_k,
                         const vec& h_prev, const vec& c_prev,
                         double input_scale) {
  ad::Tape tape;
  const TapeController c = register_controller(tape, p, false);
  const Var x = encode_pilot_fwd(
      tape, cconst(tape, y_bar_k), input_scale);
  LstmStateVar prev{tape.constant(h_prev), tape.constant(c_prev)};
  const LstmStateVar next = lstm_step_fwd(c.lstm, x, prev);
  return {vec(tape.val(next.h)), vec(tape.val(next.c))};
}

GnnDecisions gnn_forward(const ControllerParams& p, const mat& node_states,
                         double power_budget_mw, bool want_direct_b) {
  ad::Tape tape;
  const TapeController c = register_controller(tape, p, false);
  std::vector<Var> states(node_states.n_cols);
  for (uword k = 0; k < node_states.n_cols; ++k)
    states[k] = tape.constant(mat(node_states.col(k)));
  const GnnOutputsVar o = gnn_forward_fwd(tape, c.gnn, p.arch, states,
                                          power_budget_mw, want_direct_b);
  GnnDecisions d;
  d.w = cx_vec(cval(o.w));
  d.v_next = cval(o.v_next);
  d.p = vec(tape.val(o.p));
  d.lambda = vec(tape.val(o.lambda));
  if (want_direct_b) {
    d.b_direct.set_size(p.arch.n_antennas, node_states.n_cols);
    for (uword k = 0; k < node_states.n_cols; ++k)
      d.b_direct.col(k) = cx_vec(cval(o.b_direct[k]));
  }
  d.degenerate_pair = o.degenerate_pair;
  return d;
}

}  // namespace ristrack
