#include "qpu/engine.hpp"

#include <cmath>
#include <stdexcept>

#include "qpu/threadpool.hpp"

namespace qpu {

Quaternion qpow_biased(const Quaternion& q, double w, double b) {
  const double r = norm(q.v);
  if (r <= kAxisTol) return Quaternion::identity();
  const double phi = std::acos(clamp_arccos_input(q.s)) + b;
  const double angle = w * phi;
  return {std::cos(angle), q.v * (std::sin(angle) / r)};
}

QpowBackward qpow_biased_backward(const Quaternion& q, double w, double b,
                                  const Quaternion& upstream) {
  const double sc = clamp_arccos_input(q.s);
  const double phi = std::acos(sc) + b;
  const double angle = w * phi;
  const double cos_a = std::cos(angle);
  const double sin_a = std::sin(angle);
  // Zero outside the clamp interval, the clamped-region arccos derivative inside.
  const bool inside = q.s > -1.0 + kArccosClamp && q.s < 1.0 - kArccosClamp;
  const double dphi_ds = inside ? -1.0 / std::sqrt(1.0 - sc * sc) : 0.0;

  QpowBackward out;
  const double r = norm(q.v);
  if (r <= kAxisTol) {
    // Degenerate axis: forward emits the identity; by convention the scalar
    // branch still differentiates through cos(w·phi).
    const double scalar_pull = -upstream.s * sin_a;
    out.dw = phi * scalar_pull;
    out.db = w * scalar_pull;
    out.dq.s = w * dphi_ds * scalar_pull;
    return out;
  }

  const Vec3 u = q.v * (1.0 / r);
  // d(out)/d(angle) contracted with upstream: out = [cos(angle), u sin(angle)].
  const double along_axis = dot(upstream.v, u);
  const double dangle = -upstream.s * sin_a + along_axis * cos_a;

  out.dw = phi * dangle;
  out.db = w * dangle;
  out.dq.s = w * dphi_ds * dangle;
  // Normalization Jacobian (I - uuᵀ)/r scaled by sin(angle).
  out.dq.v = (upstream.v - u * along_axis) * (sin_a / r);
  return out;
}

ChainTape chain_forward(std::span<const Quaternion> ps) {
  if (ps.empty()) throw std::invalid_argument("chain_forward: empty chain");
  ChainTape tape;
  tape.weighted.assign(ps.begin(), ps.end());
  tape.cumulative.resize(ps.size());
  tape.cumulative[0] = ps[0];
  for (std::size_t k = 1; k < ps.size(); ++k) {
    tape.cumulative[k] = hamilton(tape.cumulative[k - 1], ps[k]);
  }
  return tape;
}

TreeResult chain_forward_tree(std::span<const Quaternion> ps, ThreadPool* pool) {
  if (ps.empty()) throw std::invalid_argument("chain_forward_tree: empty chain");
  std::vector<Quaternion> cur(ps.begin(), ps.end());
  std::vector<Quaternion> next;
  next.reserve((cur.size() + 1) / 2);
  int depth = 0;
  // Threads only pay off for wide levels; below this the level runs inline.
  constexpr std::size_t kParallelCutoff = 4096;
  while (cur.size() > 1) {
    const std::size_t pairs = cur.size() / 2;
    const bool odd = (cur.size() & 1) != 0;
    next.resize(pairs + (odd ? 1 : 0));
    const Quaternion* src = cur.data();
    Quaternion* dst = next.data();
    if (pool != nullptr && pool->size() > 1 && pairs >= kParallelCutoff) {
      pool->parallel_for(pairs, [src, dst](std::size_t i) {
        dst[i] = hamilton(src[2 * i], src[2 * i + 1]);
      });
    } else {
      for (std::size_t i = 0; i < pairs; ++i) {
        dst[i] = hamilton(src[2 * i], src[2 * i + 1]);
      }
    }
    if (odd) next[pairs] = cur.back();
    cur.swap(next);
    ++depth;
  }
  return {cur[0], depth};
}

std::vector<Quaternion> chain_backward(const ChainTape& tape, const Quaternion& upstream) {
  if (tape.cumulative.size() != tape.weighted.size() || tape.size() == 0) {
    throw std::invalid_argument("chain_backward: tape does not match a forward pass");
  }
  const std::size_t n = tape.size();
  std::vector<Quaternion> grads(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Quaternion tmp = left_matrix(tape.prefix_before(k)).apply_transposed(upstream);
    grads[k] = right_matrix(tape.suffix_after(k)).apply_transposed(tmp);
  }
  return grads;
}

QpuForwardResult qpu_forward(std::span<const Quaternion> qs, const QpuParams& params) {
  if (qs.empty()) throw std::invalid_argument("qpu_forward: empty input set");
  if (qs.size() != params.w.size()) {
    throw std::invalid_argument("qpu_forward: input count does not match weight count");
  }
  std::vector<Quaternion> weighted(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    weighted[i] = qpow_biased(qs[i], params.w[i], params.b);
  }
  QpuForwardResult out;
  out.tape = chain_forward(weighted);
  const Quaternion& raw = out.tape.output();
  out.y = raw * (1.0 / norm(raw));  // absorb float drift once per unit
  return out;
}

QpuGradients qpu_backward(std::span<const Quaternion> qs, const QpuParams& params,
                          const ChainTape* tape, const Quaternion& upstream) {
  if (qs.size() != params.w.size()) {
    throw std::invalid_argument("qpu_backward: input count does not match weight count");
  }
  ChainTape recomputed;
  if (tape == nullptr) {
    std::vector<Quaternion> weighted(qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
      weighted[i] = qpow_biased(qs[i], params.w[i], params.b);
    }
    recomputed = chain_forward(weighted);
    tape = &recomputed;
  }
  if (tape->size() != qs.size()) {
    throw std::invalid_argument("qpu_backward: tape length does not match inputs");
  }

  // Renormalization y = c_N / |c_N|: pull upstream through (I - y yᵀ)/|c_N|.
  const Quaternion& raw = tape->output();
  const double n = norm(raw);
  const Quaternion y = raw * (1.0 / n);
  const Quaternion g = (upstream - y * dot(upstream, y)) * (1.0 / n);

  const std::vector<Quaternion> dp = chain_backward(*tape, g);

  QpuGradients grads;
  grads.dq.resize(qs.size());
  grads.dw.resize(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const QpowBackward bw = qpow_biased_backward(qs[i], params.w[i], params.b, dp[i]);
    grads.dq[i] = bw.dq;
    grads.dw[i] = bw.dw;
    grads.db += bw.db;  // one bias shared across the unit's inputs
  }
  return grads;
}

std::vector<double> finite_diff_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_gradient: h must be positive");
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + h;
    const double fp = f(point);
    point[i] = saved - h;
    const double fm = f(point);
    point[i] = saved;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace qpu
