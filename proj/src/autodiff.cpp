#include "ristrack/autodiff.hpp"

namespace ristrack::ad {

Var Tape::emit(mat value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::set_back(int id, std::function<void(Tape&)> back) {
  nodes_[id].back = std::move(back);
}

void Tape::accumulate(int id, const mat& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (!n.has_adj) {
    n.adj = g;
    n.has_adj = true;
  } else {
    n.adj += g;
  }
}

void Tape::backward(Var root) {
  Node& r = nodes_[root.id];
  if (r.value.n_elem != 1)
    throw std::invalid_argument("backward: root must be a scalar");
  if (!r.requires_grad)
    throw std::invalid_argument("backward: root does not depend on any parameter");
  r.adj = mat(1, 1, arma::fill::ones);
  r.has_adj = true;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.has_adj && n.back) n.back(*this);
  }
}

namespace {

Tape& tape_of(Var a) { return *a.tape; }

void check_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw std::invalid_argument("vars from different tapes");
}

// Emits a node whose backward rule needs the node's own value (sigmoid etc.).
template <typename Back>
Var emit_self_op(Tape& t, mat value, bool rg, Back&& back) {
  Var v = t.emit(std::move(value), rg);
  if (rg)
    t.set_back(v.id, [f = std::forward<Back>(back), self = v.id](Tape& tape) {
      f(tape, tape.adj(self), tape.val(Var{&tape, self}));
    });
  return v;
}

// Creates the result node and, when gradients are needed, installs a backward
// closure that receives this node's adjoint.
template <typename Back>
Var emit_op(Tape& t, mat value, bool rg, Back&& back) {
  Var v = t.emit(std::move(value), rg);
  if (rg)
    t.set_back(v.id, [f = std::forward<Back>(back), self = v.id](Tape& tape) {
      f(tape, tape.adj(self));
    });
  return v;
}

template <typename Fwd, typename Dfn>
Var unary_elementwise(Var a, Fwd&& fwd, Dfn&& local_grad) {
  Tape& t = tape_of(a);
  const bool rg = t.requires_grad(a);
  mat value = fwd(t.val(a));
  return emit_op(t, std::move(value), rg,
                 [ia = a.id, g = local_grad](Tape& t, const mat& adj) {
                   t.accumulate(ia, adj % g(t));
                 });
}

}  // namespace

Var add(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = tape_of(a);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return emit_op(t, t.val(a) + t.val(b), rg,
                 [ia = a.id, ib = b.id](Tape& t, const mat& adj) {
                   t.accumulate(ia, adj);
                   t.accumulate(ib, adj);
                 });
}

Var addn(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("addn: empty list");
  Tape& t = tape_of(xs[0]);
  bool rg = false;
  mat value = t.val(xs[0]);
  std::vector<int> ids{xs[0].id};
  rg = t.requires_grad(xs[0]);
  for (size_t i = 1; i < xs.size(); ++i) {
    check_same_tape(xs[0], xs[i]);
    value += t.val(xs[i]);
    ids.push_back(xs[i].id);
    rg = rg || t.requires_grad(xs[i]);
  }
  return emit_op(t, std::move(value), rg, [ids](Tape& t, const mat& adj) {
    for (int id : ids) t.accumulate(id, adj);
  });
}

Var sub(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = tape_of(a);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return emit_op(t, t.val(a) - t.val(b), rg,
                 [ia = a.id, ib = b.id](Tape& t, const mat& adj) {
                   t.accumulate(ia, adj);
                   t.accumulate(ib, -adj);
                 });
}

Var neg(Var a) {
  Tape& t = tape_of(a);
  return emit_op(t, -t.val(a), t.requires_grad(a),
                 [ia = a.id](Tape& t, const mat& adj) { t.accumulate(ia, -adj); });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  return emit_op(t, s * t.val(a), t.requires_grad(a),
                 [ia = a.id, s](Tape& t, const mat& adj) {
                   t.accumulate(ia, s * adj);
                 });
}

Var offset(Var a, double c) {
  Tape& t = tape_of(a);
  return emit_op(t, t.val(a) + c, t.requires_grad(a),
                 [ia = a.id](Tape& t, const mat& adj) { t.accumulate(ia, adj); });
}

Var mul(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = tape_of(a);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return emit_op(t, t.val(a) % t.val(b), rg,
                 [ia = a.id, ib = b.id](Tape& t, const mat& adj) {
                   t.accumulate(ia, adj % t.val(Var{&t, ib}));
                   t.accumulate(ib, adj % t.val(Var{&t, ia}));
                 });
}

Var divide(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = tape_of(a);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return emit_op(t, t.val(a) / t.val(b), rg,
                 [ia = a.id, ib = b.id](Tape& t, const mat& adj) {
                   const mat& bv = t.val(Var{&t, ib});
                   t.accumulate(ia, adj / bv);
                   t.accumulate(ib, -(adj % t.val(Var{&t, ia})) / (bv % bv));
                 });
}

Var matmul(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = tape_of(a);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return emit_op(t, t.val(a) * t.val(b), rg,
                 [ia = a.id, ib = b.id](Tape& t, const mat& adj) {
                   t.accumulate(ia, adj * t.val(Var{&t, ib}).t());
                   t.accumulate(ib, t.val(Var{&t, ia}).t() * adj);
                 });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  return emit_op(t, t.val(a).t(), t.requires_grad(a),
                 [ia = a.id](Tape& t, const mat& adj) {
                   t.accumulate(ia, adj.t());
                 });
}

Var bmul(Var s, Var a) {
  check_same_tape(s, a);
  Tape& t = tape_of(a);
  if (t.val(s).n_elem != 1) throw std::invalid_argument("bmul: scalar must be 1x1");
  const bool rg = t.requires_grad(s) || t.requires_grad(a);
  return emit_op(t, t.val(s)(0, 0) * t.val(a), rg,
                 [is = s.id, ia = a.id](Tape& t, const mat& adj) {
                   t.accumulate(is, mat(1, 1, arma::fill::value(
                                            arma::accu(adj % t.val(Var{&t, ia})))));
                   t.accumulate(ia, t.val(Var{&t, is})(0, 0) * adj);
                 });
}

Var vconcat(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("vconcat: empty list");
  Tape& t = tape_of(xs[0]);
  uword total = 0;
  bool rg = false;
  for (Var v : xs) {
    check_same_tape(xs[0], v);
    total += t.val(v).n_rows;
    rg = rg || t.requires_grad(v);
  }
  const uword cols = t.val(xs[0]).n_cols;
  mat value(total, cols);
  std::vector<std::pair<int, uword>> spans;  // (id, first row)
  uword r = 0;
  for (Var v : xs) {
    const mat& m = t.val(v);
    if (m.n_cols != cols) throw std::invalid_argument("vconcat: column mismatch");
    value.rows(r, r + m.n_rows - 1) = m;
    spans.emplace_back(v.id, r);
    r += m.n_rows;
  }
  return emit_op(t, std::move(value), rg, [spans](Tape& t, const mat& adj) {
    for (auto [id, first] : spans) {
      const uword n = t.val(Var{&t, id}).n_rows;
      t.accumulate(id, adj.rows(first, first + n - 1));
    }
  });
}

Var hconcat(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("hconcat: empty list");
  Tape& t = tape_of(xs[0]);
  uword total = 0;
  bool rg = false;
  for (Var v : xs) {
    check_same_tape(xs[0], v);
    total += t.val(v).n_cols;
    rg = rg || t.requires_grad(v);
  }
  const uword rows_n = t.val(xs[0]).n_rows;
  mat value(rows_n, total);
  std::vector<std::pair<int, uword>> spans;
  uword c = 0;
  for (Var v : xs) {
    const mat& m = t.val(v);
    if (m.n_rows != rows_n) throw std::invalid_argument("hconcat: row mismatch");
    value.cols(c, c + m.n_cols - 1) = m;
    spans.emplace_back(v.id, c);
    c += m.n_cols;
  }
  return emit_op(t, std::move(value), rg, [spans](Tape& t, const mat& adj) {
    for (auto [id, first] : spans) {
      const uword n = t.val(Var{&t, id}).n_cols;
      t.accumulate(id, adj.cols(first, first + n - 1));
    }
  });
}

Var rows(Var a, uword r0, uword r1) {
  Tape& t = tape_of(a);
  const mat& m = t.val(a);
  return emit_op(t, mat(m.rows(r0, r1)), t.requires_grad(a),
                 [ia = a.id, r0, r1](Tape& t, const mat& adj) {
                   const mat& src = t.val(Var{&t, ia});
                   mat g(src.n_rows, src.n_cols, arma::fill::zeros);
                   g.rows(r0, r1) = adj;
                   t.accumulate(ia, g);
                 });
}

Var gather_rows(Var a, const uvec& idx) {
  Tape& t = tape_of(a);
  const mat& m = t.val(a);
  mat value(idx.n_elem, m.n_cols);
  for (uword i = 0; i < idx.n_elem; ++i) value.row(i) = m.row(idx(i));
  return emit_op(t, std::move(value), t.requires_grad(a),
                 [ia = a.id, idx](Tape& t, const mat& adj) {
                   const mat& src = t.val(Var{&t, ia});
                   mat g(src.n_rows, src.n_cols, arma::fill::zeros);
                   for (uword i = 0; i < idx.n_elem; ++i)
                     g.row(idx(i)) += adj.row(i);
                   t.accumulate(ia, g);
                 });
}

Var reshape_to_col(Var a) {
  Tape& t = tape_of(a);
  const mat& m = t.val(a);
  return emit_op(t, mat(arma::vectorise(m)), t.requires_grad(a),
                 [ia = a.id](Tape& t, const mat& adj) {
                   const mat& src = t.val(Var{&t, ia});
                   t.accumulate(ia, arma::reshape(adj, src.n_rows, src.n_cols));
                 });
}

Var reshape(Var a, uword r, uword c) {
  Tape& t = tape_of(a);
  const mat& m = t.val(a);
  if (m.n_elem != r * c) throw std::invalid_argument("reshape: element count mismatch");
  return emit_op(t, arma::reshape(m, r, c), t.requires_grad(a),
                 [ia = a.id](Tape& t, const mat& adj) {
                   const mat& src = t.val(Var{&t, ia});
                   t.accumulate(ia, arma::reshape(adj, src.n_rows, src.n_cols));
                 });
}

Var solve(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = tape_of(a);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  Var v = t.emit(arma::solve(t.val(a), t.val(b)), rg);
  if (rg)
    t.set_back(v.id, [ia = a.id, ib = b.id, self = v.id](Tape& t) {
      // x = a^-1 b:  b_adj = a^-T adj,  a_adj = -b_adj x^T
      const mat badj = arma::solve(t.val(Var{&t, ia}).t(), t.adj(self));
      t.accumulate(ib, badj);
      t.accumulate(ia, mat(-badj * t.val(Var{&t, self}).t()));
    });
  return v;
}

Var sigmoid(Var a) {
  Tape& t = tape_of(a);
  mat s = 1.0 / (1.0 + arma::exp(-t.val(a)));
  return emit_self_op(t, std::move(s), t.requires_grad(a),
                      [ia = a.id](Tape& t, const mat& adj, const mat& y) {
                        t.accumulate(ia, adj % y % (1.0 - y));
                      });
}

Var tanh_(Var a) {
  Tape& t = tape_of(a);
  return emit_self_op(t, arma::tanh(t.val(a)), t.requires_grad(a),
                      [ia = a.id](Tape& t, const mat& adj, const mat& y) {
                        t.accumulate(ia, adj % (1.0 - y % y));
                      });
}

Var relu(Var a) {
  return unary_elementwise(
      a, [](const mat& x) { return arma::max(x, arma::zeros<mat>(arma::size(x))); },
      [ia = a.id](Tape& t) {
        return arma::conv_to<mat>::from(t.val(Var{&t, ia}) > 0.0);
      });
}

Var exp_(Var a) {
  Tape& t = tape_of(a);
  return emit_self_op(t, arma::exp(t.val(a)), t.requires_grad(a),
                      [ia = a.id](Tape& t, const mat& adj, const mat& y) {
                        t.accumulate(ia, adj % y);
                      });
}

Var log_(Var a) {
  return unary_elementwise(
      a, [](const mat& x) { return arma::log(x); },
      [ia = a.id](Tape& t) { return mat(1.0 / t.val(Var{&t, ia})); });
}

Var sqrt_(Var a) {
  Tape& t = tape_of(a);
  return emit_self_op(t, arma::sqrt(t.val(a)), t.requires_grad(a),
                      [ia = a.id](Tape& t, const mat& adj, const mat& y) {
                        t.accumulate(ia, adj / (2.0 * y));
                      });
}

Var sin_(Var a) {
  return unary_elementwise(
      a, [](const mat& x) { return arma::sin(x); },
      [ia = a.id](Tape& t) { return arma::cos(t.val(Var{&t, ia})); });
}

Var cos_(Var a) {
  return unary_elementwise(
      a, [](const mat& x) { return arma::cos(x); },
      [ia = a.id](Tape& t) { return mat(-arma::sin(t.val(Var{&t, ia}))); });
}

Var sum_all(Var a) {
  Tape& t = tape_of(a);
  return emit_op(t, mat(1, 1, arma::fill::value(arma::accu(t.val(a)))),
                 t.requires_grad(a), [ia = a.id](Tape& t, const mat& adj) {
                   const mat& src = t.val(Var{&t, ia});
                   t.accumulate(ia, mat(src.n_rows, src.n_cols,
                                        arma::fill::value(adj(0, 0))));
                 });
}

Var emax(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("emax: empty list");
  if (xs.size() == 1) return xs[0];
  Tape& t = tape_of(xs[0]);
  bool rg = false;
  mat value = t.val(xs[0]);
  arma::umat winner(arma::size(value), arma::fill::zeros);
  std::vector<int> ids;
  for (size_t i = 0; i < xs.size(); ++i) {
    check_same_tape(xs[0], xs[i]);
    ids.push_back(xs[i].id);
    rg = rg || t.requires_grad(xs[i]);
    if (i == 0) continue;
    const mat& m = t.val(xs[i]);
    if (arma::size(m) != arma::size(value))
      throw std::invalid_argument("emax: shape mismatch");
    for (uword e = 0; e < value.n_elem; ++e)
      if (m(e) > value(e)) {
        value(e) = m(e);
        winner(e) = i;
      }
  }
  return emit_op(t, std::move(value), rg,
                 [ids, winner](Tape& t, const mat& adj) {
                   for (size_t i = 0; i < ids.size(); ++i) {
                     const mat& src = t.val(Var{&t, ids[i]});
                     mat g(arma::size(src), arma::fill::zeros);
                     bool touched = false;
                     for (uword e = 0; e < src.n_elem; ++e)
                       if (winner(e) == i) {
                         g(e) = adj(e);
                         touched = true;
                       }
                     if (touched) t.accumulate(ids[i], g);
                   }
                 });
}

Var smin(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("smin: empty list");
  Tape& t = tape_of(xs[0]);
  size_t arg = 0;
  double best = t.val(xs[0])(0, 0);
  bool rg = t.requires_grad(xs[0]);
  for (size_t i = 1; i < xs.size(); ++i) {
    check_same_tape(xs[0], xs[i]);
    rg = rg || t.requires_grad(xs[i]);
    const double v = t.val(xs[i])(0, 0);
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  return emit_op(t, mat(1, 1, arma::fill::value(best)), rg,
                 [id = xs[arg].id](Tape& t, const mat& adj) {
                   t.accumulate(id, adj);
                 });
}

Var softmax(Var col) {
  Tape& t = tape_of(col);
  const double shift = t.val(col).max();  // constant shift, gradient-neutral
  Var e = exp_(offset(col, -shift));
  Var s = sum_all(e);
  Var inv = divide(scalar(t, 1.0), s);
  return bmul(inv, e);
}

// ---- complex composites ----

CVar cconst(Tape& t, const cx_mat& z) {
  return {t.constant(arma::real(z)), t.constant(arma::imag(z))};
}

CVar cadd(CVar a, CVar b) { return {add(a.re, b.re), add(a.im, b.im)}; }
CVar csub(CVar a, CVar b) { return {sub(a.re, b.re), sub(a.im, b.im)}; }

CVar cmatmul(CVar a, CVar b) {
  return {sub(matmul(a.re, b.re), matmul(a.im, b.im)),
          add(matmul(a.re, b.im), matmul(a.im, b.re))};
}

CVar cherm(CVar a) { return {transpose(a.re), neg(transpose(a.im))}; }

Var cabs2(CVar a) { return add(mul(a.re, a.re), mul(a.im, a.im)); }

CVar csolve(CVar a, CVar b) {
  // [ar -ai; ai ar] [xr; xi] = [br; bi]
  Tape& t = tape_of(a.re);
  Var top = vconcat({a.re, a.im});
  Var bottom = vconcat({neg(a.im), a.re});
  // assemble the 2n x 2n system by column blocks: hconcat via transpose trick
  Var lhs = transpose(vconcat({transpose(top), transpose(bottom)}));
  Var rhs = vconcat({b.re, b.im});
  Var x = solve(lhs, rhs);
  const uword n = t.val(b.re).n_rows;
  return {rows(x, 0, n - 1), rows(x, n, 2 * n - 1)};
}

CVar cscale_real(Var s, CVar a) { return {bmul(s, a.re), bmul(s, a.im)}; }

CVar cvconcat(CVar top, CVar bottom) {
  return {vconcat({top.re, bottom.re}), vconcat({top.im, bottom.im})};
}

CVar crows(CVar a, uword r0, uword r1) {
  return {rows(a.re, r0, r1), rows(a.im, r0, r1)};
}

CVar from_interleaved(Var col) {
  Tape& t = tape_of(col);
  const uword n2 = t.val(col).n_rows;
  if (n2 % 2 != 0) throw std::invalid_argument("from_interleaved: odd length");
  uvec even(n2 / 2), odd(n2 / 2);
  for (uword i = 0; i < n2 / 2; ++i) {
    even(i) = 2 * i;
    odd(i) = 2 * i + 1;
  }
  return {gather_rows(col, even), gather_rows(col, odd)};
}

cx_mat cval(const CVar& a) {
  Tape& t = *a.re.tape;
  return cx_mat(t.val(a.re), t.val(a.im));
}

}  // namespace ristrack::ad
