#pragma once

#include <functional>
#include <vector>

#include "ristrack/common.hpp"

namespace ristrack::ad {

class Tape;

// Handle into a tape node. Cheap to copy; valid as long as the tape lives.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Complex matrix as a (real, imaginary) pair of tape nodes.
struct CVar {
  Var re, im;
};

// Define-by-run reverse-mode tape over dense real matrices. Each op records a
// backward closure; backward() runs them in reverse creation order. Complex
// arithmetic is built from real primitives (see the c* helpers below), so the
// whole training pipeline (including the complex solve in the duality
// beamformer) differentiates with real-valued calculus only.
class Tape {
 public:
  Var constant(mat value) { return emit(std::move(value), false); }
  Var param(mat value) { return emit(std::move(value), true); }

  const mat& val(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  // Adjoint of a node after backward(); zeros if the node was never reached.
  mat grad(Var v) const {
    const Node& n = nodes_[v.id];
    if (n.has_adj) return n.adj;
    return arma::zeros<mat>(n.value.n_rows, n.value.n_cols);
  }

  void backward(Var root);

  size_t num_nodes() const { return nodes_.size(); }

  // internal: used by the op implementations
  Var emit(mat value, bool requires_grad);
  void set_back(int id, std::function<void(Tape&)> back);
  void accumulate(int id, const mat& g);
  const mat& adj(int id) const { return nodes_[id].adj; }

 private:
  struct Node {
    mat value;
    mat adj;
    std::function<void(Tape&)> back;
    bool requires_grad = false;
    bool has_adj = false;
  };
  std::vector<Node> nodes_;
};

// ---- real primitives ----
Var add(Var a, Var b);
Var addn(const std::vector<Var>& xs);
Var sub(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double s);
Var offset(Var a, double c);
Var mul(Var a, Var b);               // elementwise
Var divide(Var a, Var b);            // elementwise
Var matmul(Var a, Var b);
Var transpose(Var a);
Var bmul(Var s, Var a);              // 1x1 scalar times matrix
Var vconcat(const std::vector<Var>& xs);
Var hconcat(const std::vector<Var>& xs);
Var rows(Var a, uword r0, uword r1);
Var gather_rows(Var a, const uvec& idx);
Var reshape_to_col(Var a);           // vectorise (column-major)
Var reshape(Var a, uword r, uword c);  // column-major reshape
Var solve(Var a, Var b);             // a \ b
Var sigmoid(Var a);
Var tanh_(Var a);
Var relu(Var a);
Var exp_(Var a);
Var log_(Var a);
Var sqrt_(Var a);
Var sin_(Var a);
Var cos_(Var a);
Var sum_all(Var a);                  // 1x1
Var emax(const std::vector<Var>& xs);  // elementwise max across same-shape mats
Var smin(const std::vector<Var>& xs);  // min of 1x1 scalars

// softmax over a column vector (composite, shift-stabilized)
Var softmax(Var col);

inline Var square(Var a) { return mul(a, a); }

// convenience scalar constant
inline Var scalar(Tape& t, double v) { return t.constant(mat(1, 1, arma::fill::value(v))); }

// ---- complex composites ----
CVar cconst(Tape& t, const cx_mat& z);
CVar cadd(CVar a, CVar b);
CVar csub(CVar a, CVar b);
CVar cmatmul(CVar a, CVar b);
CVar cherm(CVar a);                  // conjugate transpose
Var cabs2(CVar a);                   // elementwise squared modulus
CVar csolve(CVar a, CVar b);         // complex solve via the 2x2 real embedding
CVar cscale_real(Var s, CVar a);     // 1x1 real scalar times complex matrix
CVar cvconcat(CVar top, CVar bottom);
CVar crows(CVar a, uword r0, uword r1);

// interpret consecutive (re, im) row pairs of a 2n x 1 column as n complex
CVar from_interleaved(Var col);

// value extraction
cx_mat cval(const CVar& a);

}  // namespace ristrack::ad
