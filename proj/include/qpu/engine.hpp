#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qpu/quat.hpp"

namespace qpu {

class ThreadPool;

/// Parameters of one quaternion product unit: one angle weight per input plus
/// a single angle bias shared across the unit's inputs. Both unconstrained reals.
struct QpuParams {
  std::vector<double> w;
  double b = 0.0;
};

/// Forward-pass record of a chain of Hamilton products. `weighted` holds the
/// angle-weighted inputs p_1..p_N, `cumulative` their running prefix products
/// c_k = p_1 ⊗ ... ⊗ p_k. The backward pass reads prefixes directly and builds
/// suffixes as c_k* ⊗ c_N, so nothing else needs to be stored.
struct ChainTape {
  std::vector<Quaternion> weighted;
  std::vector<Quaternion> cumulative;

  std::size_t size() const { return weighted.size(); }

  /// Raw chain output c_N (not renormalized).
  const Quaternion& output() const { return cumulative.back(); }

  /// B_k = p_1 ⊗ ... ⊗ p_{k-1} (identity for k = 0). Zero-based k.
  Quaternion prefix_before(std::size_t k) const {
    return k == 0 ? Quaternion::identity() : cumulative[k - 1];
  }

  /// A_k = p_{k+1} ⊗ ... ⊗ p_N via c_k* ⊗ c_N (identity for k = N-1). Zero-based k.
  Quaternion suffix_after(std::size_t k) const {
    return k + 1 == size() ? Quaternion::identity()
                           : hamilton(conjugate(cumulative[k]), cumulative.back());
  }
};

/// Gradients of a scalar loss through one QPU: per-input quaternion-shaped
/// gradients, per-input weight gradients, and the shared bias gradient
/// (summed over the unit's inputs).
struct QpuGradients {
  std::vector<Quaternion> dq;
  std::vector<double> dw;
  double db = 0.0;
};

/// Gradients of one weighting function application.
struct QpowBackward {
  Quaternion dq{0.0, {0.0, 0.0, 0.0}};
  double dw = 0.0;
  double db = 0.0;
};

/// Angle weighting of one input rotation:
/// [cos(w·phi), (v/|v|)·sin(w·phi)] with phi = arccos(clamp(s)) + b.
/// Degenerate axis (|v| ≤ kAxisTol) yields the identity regardless of b.
/// Output is unit by construction.
Quaternion qpow_biased(const Quaternion& q, double w, double b);

/// Chain-rule contraction of `upstream` with the Jacobians of qpow_biased at
/// (q, w, b). On a degenerate axis the imaginary block of dq is zero and dw/db
/// come from the scalar-branch formulas at the clamped angle. The arccos
/// derivative is the clamped-region one: zero when s sits outside the clamp
/// interval.
QpowBackward qpow_biased_backward(const Quaternion& q, double w, double b,
                                  const Quaternion& upstream);

/// Left-to-right chain of Hamilton products p_1 ⊗ ... ⊗ p_N with the
/// cumulative-product tape filled. Returns the raw fold; the enclosing unit
/// renormalizes once at its output. Throws on an empty chain.
ChainTape chain_forward(std::span<const Quaternion> ps);

struct TreeResult {
  Quaternion y;
  int depth = 0;  // number of pairwise-product levels executed
};

/// Same product as chain_forward, evaluated level by level: elements at odd
/// positions multiply their even-position successors, halving the chain each
/// level (ceil(log2 N) levels). Products within a level are independent; when
/// a pool is given, large levels fan out across its workers. Any execution of
/// the schedule, serial or parallel, is bit-identical.
TreeResult chain_forward_tree(std::span<const Quaternion> ps, ThreadPool* pool = nullptr);

/// Gradient of the raw chain product w.r.t. every chain element:
/// grads[k] = M_Rᵀ(A_k) · M_Lᵀ(B_k) · upstream, with B_k/A_k the prefix/suffix
/// products around k read off the tape.
std::vector<Quaternion> chain_backward(const ChainTape& tape, const Quaternion& upstream);

struct QpuForwardResult {
  Quaternion y;     // renormalized unit output
  ChainTape tape;   // raw chain record for the backward pass
};

/// One quaternion product unit: weight every input's angle, chain the results,
/// renormalize once. Throws if inputs and weights disagree in count or the
/// input set is empty.
QpuForwardResult qpu_forward(std::span<const Quaternion> qs, const QpuParams& params);

/// Full QPU gradients for the given upstream 4-vector. Differentiates exactly
/// what qpu_forward computes, including the final renormalization. Passing a
/// tape reuses the stored cumulative products; passing nullptr recomputes them
/// from (qs, params) — same gradients, no stored feature map.
QpuGradients qpu_backward(std::span<const Quaternion> qs, const QpuParams& params,
                          const ChainTape* tape, const Quaternion& upstream);

/// Central finite differences (f(x+h·e_i) − f(x−h·e_i)) / 2h. The independent
/// oracle every analytic gradient in this project is checked against.
std::vector<double> finite_diff_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h);

}  // namespace qpu
