#include "ristrack/baselines.hpp"

namespace ristrack {

double softmin(const vec& x, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("softmin: temperature must be positive");
  const double m = x.min();
  return m - std::log(arma::sum(arma::exp(-mu * (x - m)))) / mu;
}

namespace {

struct RateContext {
  const std::vector<cx_mat>& A;
  const cx_mat& B;
  double noise_mw;
  double mu;
};

// cross gains u_kj = (A_k w_tilde)^H b_j and the resulting rates
struct RateEval {
  cx_mat u;      // K x K
  vec rates;     // K
  double value;  // softmin of rates
};

RateEval evaluate(const RateContext& ctx, const cx_vec& w_tilde) {
  const uword num_users = ctx.A.size();
  RateEval e;
  e.u.set_size(num_users, ctx.B.n_cols);
  e.rates.set_size(num_users);
  for (uword k = 0; k < num_users; ++k) {
    const cx_vec h_c = ctx.A[k] * w_tilde;
    for (uword j = 0; j < ctx.B.n_cols; ++j) e.u(k, j) = arma::cdot(h_c, ctx.B.col(j));
    double signal = std::norm(e.u(k, k));
    double interference = ctx.noise_mw;
    for (uword j = 0; j < ctx.B.n_cols; ++j)
      if (j != k) interference += std::norm(e.u(k, j));
    e.rates(k) = std::log2(1.0 + signal / interference);
  }
  e.value = softmin(e.rates, ctx.mu);
  return e;
}

// Wirtinger gradient d(softmin)/d(conj(w)) dropping the fixed leading entry.
cx_vec euclidean_gradient(const RateContext& ctx, const cx_vec& w_tilde,
                          const RateEval& e) {
  const uword num_users = ctx.A.size();
  const uword n = w_tilde.n_elem - 1;
  const vec shifted = arma::exp(-ctx.mu * (e.rates - e.rates.min()));
  const vec weights = shifted / arma::sum(shifted);
  cx_vec grad_lifted(n + 1, arma::fill::zeros);
  for (uword k = 0; k < num_users; ++k) {
    // g_kj = A_k^H b_j so that u_kj = w_tilde^H g_kj
    const cx_mat g = ctx.A[k].t() * ctx.B;
    double signal = std::norm(e.u(k, k));
    double interference = ctx.noise_mw;
    for (uword j = 0; j < ctx.B.n_cols; ++j)
      if (j != k) interference += std::norm(e.u(k, j));
    cx_vec d_signal = g.col(k) * std::conj(e.u(k, k));
    cx_vec d_interf(n + 1, arma::fill::zeros);
    for (uword j = 0; j < ctx.B.n_cols; ++j)
      if (j != k) d_interf += g.col(j) * std::conj(e.u(k, j));
    const double sinr = signal / interference;
    const double scale = weights(k) / (std::log(2.0) * (1.0 + sinr));
    grad_lifted += scale * (d_signal / interference -
                            (signal / (interference * interference)) * d_interf);
  }
  return grad_lifted.subvec(1, n);
}

cx_vec tangent_project(const cx_vec& g, const cx_vec& w) {
  return g - arma::real(g % arma::conj(w)) % w;
}

cx_vec retract(const cx_vec& w, const cx_vec& direction, double step) {
  cx_vec x = w + step * direction;
  return x / arma::abs(x);
}

double tangent_inner(const cx_vec& a, const cx_vec& b) {
  return std::real(arma::cdot(a, b));
}

}  // namespace

RcgResult rcg_optimize_w(const std::vector<cx_mat>& A, const cx_mat& B,
                         const cx_vec& w0, double noise_mw,
                         const BcdOptions& opts) {
  for (uword i = 0; i < w0.n_elem; ++i)
    if (std::abs(std::abs(w0(i)) - 1.0) > 1e-9)
      throw std::invalid_argument("rcg_optimize_w: w0 must be unit modulus");

  const RateContext ctx{A, B, noise_mw, opts.softmin_temperature};
  cx_vec w = w0 / arma::abs(w0);
  RateEval eval = evaluate(ctx, lift_sensing(w));
  cx_vec rgrad = tangent_project(euclidean_gradient(ctx, lift_sensing(w), eval), w);

  RcgResult out;
  out.stagnated = false;
  out.iters = 0;
  const double grad_tol = 1e-12 * std::sqrt(static_cast<double>(w.n_elem));

  std::vector<double> trace{eval.value};
  cx_vec direction = rgrad;
  double step = 1.0;
  constexpr double kArmijo = 1e-4;
  for (uword it = 0; it < opts.rcg_iters; ++it) {
    if (arma::norm(rgrad) <= grad_tol) break;
    double slope = tangent_inner(rgrad, direction);
    if (slope <= 0.0) {  // not an ascent direction; restart with the gradient
      direction = rgrad;
      slope = tangent_inner(rgrad, direction);
    }
    bool accepted = false;
    double alpha = step;
    cx_vec w_next;
    RateEval eval_next;
    for (int bt = 0; bt < 40; ++bt) {
      w_next = retract(w, direction, alpha);
      eval_next = evaluate(ctx, lift_sensing(w_next));
      if (eval_next.value >= eval.value + kArmijo * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.stagnated = true;
      break;
    }
    const cx_vec rgrad_next = tangent_project(
        euclidean_gradient(ctx, lift_sensing(w_next), eval_next), w_next);
    // Polak-Ribiere conjugation with tangent transport of the previous data
    const cx_vec prev_grad_t = tangent_project(rgrad, w_next);
    const double denom = tangent_inner(rgrad, rgrad);
    double beta = 0.0;
    if (denom > 0.0)
      beta = std::max(0.0, tangent_inner(rgrad_next, rgrad_next - prev_grad_t) / denom);
    direction = rgrad_next + beta * tangent_project(direction, w_next);
    w = w_next;
    eval = eval_next;
    rgrad = rgrad_next;
    step = std::min(alpha * 2.0, 1e8);
    trace.push_back(eval.value);
    ++out.iters;
  }
  out.w = w;
  out.objective = eval.value;
  out.objective_trace = vec(trace);
  return out;
}

namespace {

struct InnerSolution {
  cx_mat B;
  vec p, lambda;
  double tau_star;
  double min_rate;
};

InnerSolution inner_power_step(const BlockChannels& block, const cx_vec& w,
                               double power_budget_mw, double noise_mw,
                               const BcdOptions& opts) {
  std::vector<cx_vec> h_c(block.A.size());
  for (size_t k = 0; k < block.A.size(); ++k)
    h_c[k] = effective_channel(block.A[k], w);
  const FixedPointResult fp = fixed_point_power(h_c, power_budget_mw, noise_mw,
                                                opts.fp_tol, opts.fp_max_iter);
  InnerSolution s;
  s.B = beamformers_from_duality(h_c, fp.lambda, fp.p, noise_mw);
  s.p = fp.p;
  s.lambda = fp.lambda;
  s.tau_star = fp.tau_star;
  const vec sinr = sinr_block(block.A, w, s.B, noise_mw);
  s.min_rate = arma::log2(1.0 + sinr).min();
  return s;
}

}  // namespace

namespace {

BcdResult bcd_single_run(const BlockChannels& data_block, double power_budget_mw,
                         double noise_mw, const BcdOptions& opts,
                         std::uint64_t seed) {
  RngStream rng(seed);
  cx_vec w = random_reflection(rng, data_block.G.n_cols);
  InnerSolution cur =
      inner_power_step(data_block, w, power_budget_mw, noise_mw, opts);

  std::vector<double> trace{cur.min_rate};
  for (uword it = 0; it < opts.max_outer_iters; ++it) {
    const RcgResult rcg = rcg_optimize_w(data_block.A, cur.B, w, noise_mw, opts);
    const InnerSolution cand =
        inner_power_step(data_block, rcg.w, power_budget_mw, noise_mw, opts);
    if (cand.min_rate < cur.min_rate) {  // reject; deterministic restart is futile
      trace.push_back(cur.min_rate);
      break;
    }
    const double gain = cand.min_rate - cur.min_rate;
    w = rcg.w;
    cur = cand;
    trace.push_back(cur.min_rate);
    if (gain < opts.outer_tol * std::max(std::abs(cur.min_rate), 1e-12)) break;
  }

  BcdResult out;
  out.solution.w = w;
  out.solution.B = cur.B;
  out.solution.p = cur.p;
  out.solution.lambda = cur.lambda;
  out.solution.tau_star = cur.tau_star;
  out.solution.power_budget_mw = power_budget_mw;
  out.solution.noise_mw = noise_mw;
  out.objective_trace = vec(trace);
  return out;
}

}  // namespace

BcdResult bcd_perfect_csi(const BlockChannels& data_block,
                          double power_budget_mw, double noise_mw,
                          const BcdOptions& opts) {
  if (opts.num_restarts < 1)
    throw std::invalid_argument("bcd_perfect_csi: need at least one start");
  BcdResult best;
  for (uword r = 0; r < opts.num_restarts; ++r) {
    const std::uint64_t seed =
        r == 0 ? opts.w_init_seed
               : derive_seed(opts.w_init_seed, {seed_tag::kBaseline, r});
    BcdResult run =
        bcd_single_run(data_block, power_budget_mw, noise_mw, opts, seed);
    if (r == 0 ||
        run.objective_trace.back() > best.objective_trace.back())
      best = std::move(run);
  }
  return best;
}

cx_vec random_reflection(RngStream& rng, uword n_elements) {
  if (n_elements < 1) throw std::invalid_argument("random_reflection: empty vector");
  cx_vec w(n_elements);
  for (uword i = 0; i < n_elements; ++i) {
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    w(i) = cx_double(std::cos(phase), std::sin(phase));
  }
  return w;
}

SensingMatrix fixed_sensing_matrix(FixedSensingMode mode, uword n_elements,
                                   uword num_subblocks, RngStream* rng,
                                   const mat* learned_phases) {
  SensingMatrix s;
  s.lifted.set_size(n_elements + 1, num_subblocks);
  for (uword l = 0; l < num_subblocks; ++l) {
    s.lifted(0, l) = cx_double(1.0, 0.0);
    for (uword u = 0; u < n_elements; ++u) {
      double phase = 0.0;
      if (mode == FixedSensingMode::random) {
        if (rng == nullptr)
          throw std::invalid_argument("fixed_sensing_matrix: random mode needs an rng");
        phase = rng->uniform(0.0, 2.0 * kPi);
      } else {
        if (learned_phases == nullptr ||
            learned_phases->n_rows != n_elements ||
            learned_phases->n_cols != num_subblocks)
          throw std::invalid_argument(
              "fixed_sensing_matrix: learned mode needs an N_r x L phase tensor");
        phase = (*learned_phases)(u, l);
      }
      s.lifted(u + 1, l) = cx_double(std::cos(phase), std::sin(phase));
    }
  }
  return s;
}

}  // namespace ristrack
