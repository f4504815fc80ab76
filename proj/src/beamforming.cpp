#include "ristrack/beamforming.hpp"

#include "ristrack/pilot.hpp"

namespace ristrack {

cx_vec effective_channel(const cx_mat& A_k, const cx_vec& w) {
  if (A_k.n_cols != w.n_elem + 1)
    throw std::invalid_argument("effective_channel: shape mismatch");
  return A_k * lift_sensing(w);
}

namespace {

void check_users(const std::vector<cx_vec>& h_c, double power_budget_mw) {
  if (h_c.empty()) throw std::invalid_argument("no user channels");
  const double floor = 1e-15 * std::sqrt(power_budget_mw);
  for (size_t k = 0; k < h_c.size(); ++k)
    if (arma::norm(h_c[k]) < floor)
      throw DegenerateUserError("user " + std::to_string(k) +
                                " has a numerically zero effective channel");
}

// f_k(lambda) = h_k^H (sum_{i != k} lambda_i h_i h_i^H + sigma^2 I)^{-1} h_k
double uplink_quality(const std::vector<cx_vec>& h_c, const vec& lambda,
                      double noise_mw, uword k) {
  const uword m = h_c[k].n_elem;
  cx_mat cov(m, m, arma::fill::eye);
  cov *= noise_mw;
  for (uword i = 0; i < h_c.size(); ++i)
    if (i != k) cov += lambda(i) * (h_c[i] * h_c[i].t());
  const cx_vec x = arma::solve(cov, h_c[k], arma::solve_opts::likely_sympd);
  return std::real(arma::cdot(h_c[k], x));
}

}  // namespace

cx_mat beamformers_from_duality(const std::vector<cx_vec>& h_c,
                                const vec& lambda, const vec& p,
                                double noise_mw) {
  const uword num_users = h_c.size();
  if (lambda.n_elem != num_users || p.n_elem != num_users)
    throw std::invalid_argument("beamformers_from_duality: power length mismatch");
  check_users(h_c, arma::sum(p) + noise_mw);
  const uword m = h_c[0].n_elem;
  cx_mat B(m, num_users);
  for (uword k = 0; k < num_users; ++k) {
    cx_mat reg(m, m, arma::fill::eye);
    for (uword i = 0; i < num_users; ++i)
      if (i != k) reg += (lambda(i) / noise_mw) * (h_c[i] * h_c[i].t());
    cx_vec dir = arma::solve(reg, h_c[k], arma::solve_opts::likely_sympd);
    B.col(k) = std::sqrt(p(k)) * (dir / arma::norm(dir));
  }
  return B;
}

vec sinr_block(const std::vector<cx_mat>& A, const cx_vec& w, const cx_mat& B,
               double noise_mw) {
  const uword num_users = A.size();
  const cx_vec w_tilde = lift_sensing(w);
  vec sinr(num_users);
  for (uword k = 0; k < num_users; ++k) {
    const cx_vec h_c = A[k] * w_tilde;
    double signal = 0.0, interference = 0.0;
    for (uword j = 0; j < B.n_cols; ++j) {
      const double c = std::norm(arma::cdot(h_c, B.col(j)));
      if (j == k)
        signal = c;
      else
        interference += c;
    }
    sinr(k) = signal / (interference + noise_mw);
  }
  return sinr;
}

RateReport sinr_and_rate(const std::vector<BlockChannels>& blocks,
                         const cx_vec& w, const cx_mat& B, double noise_mw) {
  if (blocks.empty()) throw std::invalid_argument("sinr_and_rate: no blocks");
  const uword num_users = blocks[0].A.size();
  RateReport r;
  r.sinr.set_size(num_users, blocks.size());
  r.rate.set_size(num_users, blocks.size());
  r.min_rate.set_size(blocks.size());
  for (uword n = 0; n < blocks.size(); ++n) {
    r.sinr.col(n) = sinr_block(blocks[n].A, w, B, noise_mw);
    r.rate.col(n) = arma::log2(1.0 + r.sinr.col(n));
    r.min_rate(n) = r.rate.col(n).min();
  }
  r.avg_min_rate = arma::mean(r.min_rate);
  return r;
}

FixedPointResult fixed_point_power(const std::vector<cx_vec>& h_c,
                                   double power_budget_mw, double noise_mw,
                                   double tol, uword max_iter) {
  if (!(power_budget_mw > 0.0))
    throw std::invalid_argument("fixed_point_power: power budget must be positive");
  check_users(h_c, power_budget_mw);
  const uword num_users = h_c.size();

  vec lambda(num_users);
  lambda.fill(power_budget_mw / static_cast<double>(num_users));
  vec f(num_users);
  double tau = 0.0;
  double residual = arma::datum::inf;
  uword sweep = 0;
  for (; sweep < max_iter; ++sweep) {
    for (uword k = 0; k < num_users; ++k)
      f(k) = uplink_quality(h_c, lambda, noise_mw, k);
    tau = power_budget_mw / arma::sum(1.0 / f);
    const vec next = tau / f;
    residual = arma::abs((next - lambda) / lambda).max();
    lambda = next;
    if (residual < tol) break;
  }
  if (residual >= tol)
    throw IterationLimitError(
        "fixed_point_power: no convergence after " + std::to_string(max_iter) +
            " sweeps (residual " + std::to_string(residual) + ")",
        residual);

  // Unit-power beam directions at the converged dual powers, then the primal
  // powers from the SINR-balanced linear system
  // (I - tau D F) p = tau sigma^2 D 1 with F_(k,i) = |h_k^H b_i|^2 (k != i).
  vec ones_p(num_users, arma::fill::ones);
  const cx_mat B_dir = beamformers_from_duality(h_c, lambda, ones_p, noise_mw);
  mat cross(num_users, num_users, arma::fill::zeros);
  vec diag_gain(num_users);
  for (uword k = 0; k < num_users; ++k) {
    for (uword i = 0; i < num_users; ++i) {
      const double g = std::norm(arma::cdot(h_c[k], B_dir.col(i)));
      if (i == k)
        diag_gain(k) = g;
      else
        cross(k, i) = g;
    }
  }
  const mat D = arma::diagmat(1.0 / diag_gain);
  const mat lhs = arma::eye(num_users, num_users) - tau * D * cross;
  const vec p = arma::solve(lhs, tau * noise_mw * D * ones_p);

  FixedPointResult out;
  out.lambda = lambda;
  out.p = p;
  out.tau_star = tau;
  out.sweeps = sweep + 1;
  out.residual = residual;
  return out;
}

BeamSolution solve_beams(const std::vector<cx_vec>& h_c, const cx_vec& w,
                         double power_budget_mw, double noise_mw) {
  const FixedPointResult fp = fixed_point_power(h_c, power_budget_mw, noise_mw);
  BeamSolution s;
  s.w = w;
  s.B = beamformers_from_duality(h_c, fp.lambda, fp.p, noise_mw);
  s.p = fp.p;
  s.lambda = fp.lambda;
  s.tau_star = fp.tau_star;
  s.power_budget_mw = power_budget_mw;
  s.noise_mw = noise_mw;
  return s;
}

}  // namespace ristrack
