#include <functional>

#include "doctest.h"
#include "ristrack/autodiff.hpp"
#include "ristrack/rng.hpp"

using namespace ristrack;
using namespace ristrack::ad;

namespace {

// Checks the tape gradient of a scalar-valued graph against central finite
// differences over every entry of every parameter.
void fd_check(const std::vector<mat>& inputs,
              const std::function<Var(Tape&, const std::vector<Var>&)>& build,
              double h = 1e-6, double tol = 2e-6) {
  Tape tape;
  std::vector<Var> params;
  params.reserve(inputs.size());
  for (const mat& x : inputs) params.push_back(tape.param(x));
  Var out = build(tape, params);
  REQUIRE(tape.val(out).n_elem == 1);
  tape.backward(out);

  std::vector<mat> grads;
  for (Var p : params) grads.push_back(tape.grad(p));

  auto value_at = [&](const std::vector<mat>& xs) {
    Tape t2;
    std::vector<Var> ps;
    for (const mat& x : xs) ps.push_back(t2.param(x));
    return t2.val(build(t2, ps))(0, 0);
  };

  for (size_t pi = 0; pi < inputs.size(); ++pi) {
    for (uword e = 0; e < inputs[pi].n_elem; ++e) {
      std::vector<mat> xs = inputs;
      xs[pi](e) += h;
      const double fp = value_at(xs);
      xs[pi](e) -= 2.0 * h;
      const double fm = value_at(xs);
      const double fd = (fp - fm) / (2.0 * h);
      const double ad = grads[pi](e);
      CHECK(std::abs(fd - ad) <= tol * std::max({1.0, std::abs(fd), std::abs(ad)}));
    }
  }
}

// random weights to fold a matrix output into a scalar, exercising all entries
Var weigh(Tape& t, Var x, RngStream& rng) {
  mat w(t.val(x).n_rows, t.val(x).n_cols);
  for (auto& v : w) v = rng.uniform(-1.0, 1.0);
  return sum_all(mul(x, t.constant(w)));
}

mat randm(uword r, uword c, RngStream& rng, double lo = -1.0, double hi = 1.0) {
  mat m(r, c);
  for (auto& v : m) v = rng.uniform(lo, hi);
  return m;
}

}  // namespace

TEST_CASE("arithmetic primitives differentiate correctly") {
  RngStream rng(1);
  const mat a = randm(3, 2, rng), b = randm(3, 2, rng);

  fd_check({a, b}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(11);
    return weigh(t, add(p[0], p[1]), wr);
  });
  fd_check({a, b}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(12);
    return weigh(t, sub(p[0], p[1]), wr);
  });
  fd_check({a, b}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(13);
    return weigh(t, mul(p[0], p[1]), wr);
  });
  const mat bpos = randm(3, 2, rng, 0.5, 2.0);
  fd_check({a, bpos}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(14);
    return weigh(t, divide(p[0], p[1]), wr);
  });
  fd_check({a}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(15);
    return weigh(t, scale(neg(offset(p[0], 0.3)), 1.7), wr);
  });
}

TEST_CASE("matrix primitives differentiate correctly") {
  RngStream rng(2);
  const mat a = randm(3, 4, rng), b = randm(4, 2, rng);
  fd_check({a, b}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(21);
    return weigh(t, matmul(p[0], p[1]), wr);
  });
  fd_check({a}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(22);
    return weigh(t, transpose(p[0]), wr);
  });
  const mat s = randm(1, 1, rng);
  fd_check({s, a}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(23);
    return weigh(t, bmul(p[0], p[1]), wr);
  });
  fd_check({a, b}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(24);
    return weigh(t, vconcat({p[0], transpose(p[1])}), wr);
  });
  fd_check({a}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(25);
    return weigh(t, rows(p[0], 1, 2), wr);
  });
  fd_check({a}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(26);
    return weigh(t, gather_rows(p[0], uvec{2, 0, 2}), wr);
  });
  fd_check({a}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(27);
    return weigh(t, reshape_to_col(p[0]), wr);
  });
}

TEST_CASE("solve differentiates correctly") {
  RngStream rng(3);
  mat a = randm(4, 4, rng);
  a = a + a.t() + 8.0 * arma::eye(4, 4);  // well conditioned
  const mat b = randm(4, 2, rng);
  fd_check(
      {a, b},
      [&](Tape& t, const std::vector<Var>& p) {
        RngStream wr(31);
        return weigh(t, solve(p[0], p[1]), wr);
      },
      1e-6, 5e-6);
}

TEST_CASE("elementwise nonlinearities differentiate correctly") {
  RngStream rng(4);
  const mat a = randm(3, 3, rng);
  auto check_unary = [&](auto op, const mat& x, int seed) {
    fd_check({x}, [&, seed](Tape& t, const std::vector<Var>& p) {
      RngStream wr(seed);
      return weigh(t, op(p[0]), wr);
    });
  };
  check_unary([](Var v) { return sigmoid(v); }, a, 41);
  check_unary([](Var v) { return tanh_(v); }, a, 42);
  check_unary([](Var v) { return exp_(v); }, a, 43);
  check_unary([](Var v) { return sin_(v); }, a, 44);
  check_unary([](Var v) { return cos_(v); }, a, 45);
  // keep relu inputs away from the kink
  mat off = a;
  off.transform([](double x) { return std::abs(x) < 0.05 ? x + 0.2 : x; });
  check_unary([](Var v) { return relu(v); }, off, 46);
  const mat pos = randm(3, 3, rng, 0.2, 2.0);
  check_unary([](Var v) { return log_(v); }, pos, 47);
  check_unary([](Var v) { return sqrt_(v); }, pos, 48);
}

TEST_CASE("reductions and selections differentiate correctly") {
  RngStream rng(5);
  const mat a = randm(3, 2, rng), b = randm(3, 2, rng), c = randm(3, 2, rng);
  fd_check({a, b, c}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(51);
    return weigh(t, emax({p[0], p[1], p[2]}), wr);
  });
  const mat s1 = randm(1, 1, rng), s2 = randm(1, 1, rng), s3 = randm(1, 1, rng);
  fd_check({s1, s2, s3}, [&](Tape& t, const std::vector<Var>& p) {
    return smin({p[0], p[1], p[2]});
  });
  const mat col = randm(5, 1, rng);
  fd_check({col}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(52);
    return weigh(t, softmax(p[0]), wr);
  });
  fd_check({a}, [&](Tape& t, const std::vector<Var>& p) {
    return sum_all(p[0]);
  });
}

TEST_CASE("complex composites differentiate correctly") {
  RngStream rng(6);
  const mat ar = randm(3, 3, rng), ai = randm(3, 3, rng);
  const mat br = randm(3, 2, rng), bi = randm(3, 2, rng);

  fd_check({ar, ai, br, bi}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(61);
    CVar prod = cmatmul(CVar{p[0], p[1]}, CVar{p[2], p[3]});
    return weigh(t, add(prod.re, prod.im), wr);
  });
  fd_check({ar, ai}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(62);
    return weigh(t, cabs2(cherm(CVar{p[0], p[1]})), wr);
  });
  // complex solve against a diagonally-dominant system
  mat add_eye = ar + 6.0 * arma::eye(3, 3);
  fd_check(
      {add_eye, ai, br, bi},
      [&](Tape& t, const std::vector<Var>& p) {
        RngStream wr(63);
        CVar x = csolve(CVar{p[0], p[1]}, CVar{p[2], p[3]});
        return weigh(t, add(x.re, x.im), wr);
      },
      1e-6, 5e-6);

  const mat inter = randm(6, 1, rng);
  fd_check({inter}, [&](Tape& t, const std::vector<Var>& p) {
    RngStream wr(64);
    CVar z = from_interleaved(p[0]);
    return weigh(t, cabs2(z), wr);
  });
}

TEST_CASE("complex solve matches armadillo forward values") {
  RngStream rng(7);
  cx_mat A = rng.cnormal_mat(4, 4) + 5.0 * cx_mat(arma::eye(4, 4), mat(4, 4));
  cx_mat B = rng.cnormal_mat(4, 2);
  Tape t;
  CVar x = csolve(cconst(t, A), cconst(t, B));
  const cx_mat expected = arma::solve(A, B);
  CHECK(arma::norm(cval(x) - expected, "fro") < 1e-12);
}

TEST_CASE("constants do not accumulate gradients") {
  Tape t;
  Var c = t.constant(mat(2, 2, arma::fill::ones));
  Var p = t.param(mat(2, 2, arma::fill::ones));
  Var out = sum_all(mul(c, p));
  t.backward(out);
  CHECK(arma::accu(t.grad(p)) == doctest::Approx(4.0));
  CHECK(arma::accu(t.grad(c)) == 0.0);
}
