#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "rassoc/model/matrix.hpp"
#include "rassoc/model/params.hpp"

namespace rassoc {

// One-layer, single-head, pre-norm (RMSNorm) encoder-decoder. The forward pass
// is a template so that tests can rerun it in extended precision; the
// production scalar is double and only double has a backward pass.

inline constexpr double kRmsEps = 1e-6;

template <typename T>
struct EncoderCache {
  Matrix<T> x;   // token embeddings (+ noise): the attribution target
  Matrix<T> h0;  // x + positions
  std::vector<T> inv_rms1;
  Matrix<T> a, q, k, v, p, ctx, h1;
  std::vector<T> inv_rms2;
  Matrix<T> b, u, g, h2;
  std::vector<T> inv_rms3;
  Matrix<T> memory;
};

template <typename T>
struct DecoderCache {
  std::vector<int> inputs;  // BOS followed by previously emitted tokens
  Matrix<T> z0;
  std::vector<T> inv_rms1;
  Matrix<T> a, q, k, v;
  std::vector<std::vector<T>> p;  // causal attention rows, row t has t+1 entries
  Matrix<T> ctx, z1;
  std::vector<T> inv_rms2;
  Matrix<T> b, cq;
  Matrix<T> ck, cv;  // projections of the encoder memory
  Matrix<T> cp, cctx, z2;
  std::vector<T> inv_rms3;
  Matrix<T> dd, u, g, z3;
  std::vector<T> inv_rms4;
  Matrix<T> f, logits;
};

namespace detail {

template <typename T>
T gelu(T x) {
  const T c = T(0.7978845608028654);  // sqrt(2/pi)
  return T(0.5) * x * (T(1) + std::tanh(c * (x + T(0.044715) * x * x * x)));
}

inline double gelu_grad(double x) {
  const double c = 0.7978845608028654;
  const double t = std::tanh(c * (x + 0.044715 * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * c * (1.0 + 3.0 * 0.044715 * x * x);
}

template <typename T>
T position_value(std::size_t pos, std::size_t j, std::size_t d) {
  const T exponent = T(2 * (j / 2)) / T(d);
  const T angle = T(pos) / std::pow(T(10000), exponent);
  return (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
}

// out = gain * x / rms(x); returns 1/rms.
template <typename T>
T rms_norm(const T* x, const T* gain, T* out, std::size_t d) {
  T ss = T(0);
  for (std::size_t j = 0; j < d; ++j) ss += x[j] * x[j];
  const T inv = T(1) / std::sqrt(ss / T(d) + T(kRmsEps));
  for (std::size_t j = 0; j < d; ++j) out[j] = gain[j] * x[j] * inv;
  return inv;
}

template <typename T>
void softmax_inplace(T* s, std::size_t n) {
  T mx = s[0];
  for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, s[j]);
  T sum = T(0);
  for (std::size_t j = 0; j < n; ++j) {
    s[j] = std::exp(s[j] - mx);
    sum += s[j];
  }
  for (std::size_t j = 0; j < n; ++j) s[j] /= sum;
}

}  // namespace detail

// Weights viewed as scalar T (double in production, long double in oracles).
template <typename T>
struct Weights {
  const ParamLayout& layout;
  const ModelConfig& config;
  const T* base;
  const T* operator[](const Slot& s) const { return base + s.offset; }
};

// Looks up token embeddings; `noise`, when given, is added entrywise.
template <typename T>
Matrix<T> embed_tokens(const Weights<T>& w, std::span<const int> ids, const Matrix<T>* noise = nullptr) {
  const auto d = static_cast<std::size_t>(w.config.d_model);
  Matrix<T> x(ids.size(), d);
  const T* table = w[w.layout.embed];
  const T scale = static_cast<T>(w.config.source_embed_scale);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const T* e = table + static_cast<std::size_t>(ids[i]) * d;
    T* r = x.row(i);
    for (std::size_t j = 0; j < d; ++j) r[j] = scale * e[j];
    if (noise) {
      const T* nz = noise->row(i);
      for (std::size_t j = 0; j < d; ++j) r[j] += nz[j];
    }
  }
  return x;
}

// Runs the encoder on an explicit input embedding matrix.
template <typename T>
EncoderCache<T> encode(const Weights<T>& w, Matrix<T> x) {
  const auto& L = w.layout;
  const auto d = static_cast<std::size_t>(w.config.d_model);
  const auto f = static_cast<std::size_t>(w.config.d_ff);
  const std::size_t n = x.rows;
  EncoderCache<T> c;
  c.x = std::move(x);
  c.h0 = c.x;
  if (w.config.use_positions) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) c.h0(i, j) += detail::position_value<T>(i, j, d);
  }
  c.a = Matrix<T>(n, d);
  c.inv_rms1.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.inv_rms1[i] = detail::rms_norm(c.h0.row(i), w[L.enc_norm1], c.a.row(i), d);
  c.q = Matrix<T>(n, d);
  c.k = Matrix<T>(n, d);
  c.v = Matrix<T>(n, d);
  gemm_nn(c.a.data.data(), w[L.enc_wq], c.q.data.data(), n, d, d, false);
  gemm_nn(c.a.data.data(), w[L.enc_wk], c.k.data.data(), n, d, d, false);
  gemm_nn(c.a.data.data(), w[L.enc_wv], c.v.data.data(), n, d, d, false);
  const T scale = T(1) / std::sqrt(T(d));
  c.p = Matrix<T>(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    T* pr = c.p.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      T s = T(0);
      for (std::size_t t = 0; t < d; ++t) s += c.q(i, t) * c.k(j, t);
      pr[j] = s * scale;
    }
    detail::softmax_inplace(pr, n);
  }
  c.ctx = Matrix<T>(n, d);
  gemm_nn(c.p.data.data(), c.v.data.data(), c.ctx.data.data(), n, n, d, false);
  c.h1 = c.h0;
  gemm_nn(c.ctx.data.data(), w[L.enc_wo], c.h1.data.data(), n, d, d, true);

  c.b = Matrix<T>(n, d);
  c.inv_rms2.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.inv_rms2[i] = detail::rms_norm(c.h1.row(i), w[L.enc_norm2], c.b.row(i), d);
  c.u = Matrix<T>(n, f);
  gemm_nn(c.b.data.data(), w[L.enc_w1], c.u.data.data(), n, d, f, false);
  c.g = Matrix<T>(n, f);
  const T* b1 = w[L.enc_b1];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) {
      c.u(i, j) += b1[j];
      c.g(i, j) = detail::gelu(c.u(i, j));
    }
  c.h2 = c.h1;
  gemm_nn(c.g.data.data(), w[L.enc_w2], c.h2.data.data(), n, f, d, true);
  const T* b2 = w[L.enc_b2];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) c.h2(i, j) += b2[j];

  c.memory = Matrix<T>(n, d);
  c.inv_rms3.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    c.inv_rms3[i] = detail::rms_norm(c.h2.row(i), w[L.enc_norm_out], c.memory.row(i), d);
  return c;
}

// Prepares an empty decoder cache attached to an encoder memory.
template <typename T>
DecoderCache<T> start_decoder(const Weights<T>& w, const EncoderCache<T>& enc) {
  const auto& L = w.layout;
  const auto d = static_cast<std::size_t>(w.config.d_model);
  const auto f = static_cast<std::size_t>(w.config.d_ff);
  const auto v = static_cast<std::size_t>(w.config.vocab_size);
  const std::size_t n = enc.memory.rows;
  DecoderCache<T> c;
  for (auto* m : {&c.z0, &c.a, &c.q, &c.k, &c.v, &c.ctx, &c.z1, &c.b, &c.cq, &c.cctx, &c.z2, &c.dd,
                  &c.z3, &c.f}) {
    *m = Matrix<T>(0, d);
  }
  c.u = Matrix<T>(0, f);
  c.g = Matrix<T>(0, f);
  c.cp = Matrix<T>(0, n);
  c.logits = Matrix<T>(0, v);
  c.ck = Matrix<T>(n, d);
  c.cv = Matrix<T>(n, d);
  gemm_nn(enc.memory.data.data(), w[L.dec_cross_wk], c.ck.data.data(), n, d, d, false);
  gemm_nn(enc.memory.data.data(), w[L.dec_cross_wv], c.cv.data.data(), n, d, d, false);
  return c;
}

// Feeds one decoder input token; appends one row of logits.
template <typename T>
const T* decoder_step(const Weights<T>& w, DecoderCache<T>& c, int token) {
  const auto& L = w.layout;
  const auto d = static_cast<std::size_t>(w.config.d_model);
  const auto f = static_cast<std::size_t>(w.config.d_ff);
  const auto nv = static_cast<std::size_t>(w.config.vocab_size);
  const std::size_t t = c.inputs.size();
  const std::size_t n = c.ck.rows;
  const T scale = T(1) / std::sqrt(T(d));
  c.inputs.push_back(token);

  T* z0 = c.z0.append_row();
  const T* e = w[L.embed] + static_cast<std::size_t>(token) * d;
  for (std::size_t j = 0; j < d; ++j) {
    z0[j] = e[j];
    if (w.config.use_positions) z0[j] += detail::position_value<T>(t, j, d);
  }
  T* a = c.a.append_row();
  c.inv_rms1.push_back(detail::rms_norm(z0, w[L.dec_norm1], a, d));
  T* q = c.q.append_row();
  T* k = c.k.append_row();
  T* v = c.v.append_row();
  gemm_nn(a, w[L.dec_self_wq], q, 1, d, d, false);
  gemm_nn(a, w[L.dec_self_wk], k, 1, d, d, false);
  gemm_nn(a, w[L.dec_self_wv], v, 1, d, d, false);
  std::vector<T> p(t + 1);
  for (std::size_t j = 0; j <= t; ++j) {
    const T* kj = c.k.row(j);
    T s = T(0);
    for (std::size_t r = 0; r < d; ++r) s += q[r] * kj[r];
    p[j] = s * scale;
  }
  detail::softmax_inplace(p.data(), t + 1);
  T* ctx = c.ctx.append_row();
  for (std::size_t j = 0; j <= t; ++j) {
    const T* vj = c.v.row(j);
    for (std::size_t r = 0; r < d; ++r) ctx[r] += p[j] * vj[r];
  }
  c.p.push_back(std::move(p));
  T* z1 = c.z1.append_row();
  for (std::size_t j = 0; j < d; ++j) z1[j] = z0[j];
  gemm_nn(ctx, w[L.dec_self_wo], z1, 1, d, d, true);

  T* b = c.b.append_row();
  c.inv_rms2.push_back(detail::rms_norm(z1, w[L.dec_norm2], b, d));
  T* cq = c.cq.append_row();
  gemm_nn(b, w[L.dec_cross_wq], cq, 1, d, d, false);
  T* cp = c.cp.append_row();
  for (std::size_t j = 0; j < n; ++j) {
    const T* kj = c.ck.row(j);
    T s = T(0);
    for (std::size_t r = 0; r < d; ++r) s += cq[r] * kj[r];
    cp[j] = s * scale;
  }
  detail::softmax_inplace(cp, n);
  T* cctx = c.cctx.append_row();
  for (std::size_t j = 0; j < n; ++j) {
    const T* vj = c.cv.row(j);
    for (std::size_t r = 0; r < d; ++r) cctx[r] += cp[j] * vj[r];
  }
  T* z2 = c.z2.append_row();
  for (std::size_t j = 0; j < d; ++j) z2[j] = z1[j];
  gemm_nn(cctx, w[L.dec_cross_wo], z2, 1, d, d, true);

  T* dd = c.dd.append_row();
  c.inv_rms3.push_back(detail::rms_norm(z2, w[L.dec_norm3], dd, d));
  T* u = c.u.append_row();
  gemm_nn(dd, w[L.dec_w1], u, 1, d, f, false);
  T* g = c.g.append_row();
  const T* b1 = w[L.dec_b1];
  for (std::size_t j = 0; j < f; ++j) {
    u[j] += b1[j];
    g[j] = detail::gelu(u[j]);
  }
  T* z3 = c.z3.append_row();
  for (std::size_t j = 0; j < d; ++j) z3[j] = z2[j] + w[L.dec_b2][j];
  gemm_nn(g, w[L.dec_w2], z3, 1, f, d, true);

  T* fo = c.f.append_row();
  c.inv_rms4.push_back(detail::rms_norm(z3, w[L.dec_norm_out], fo, d));
  T* logits = c.logits.append_row();
  for (std::size_t j = 0; j < nv; ++j) logits[j] = w[L.out_b][j];
  gemm_nn(fo, w[L.out_w], logits, 1, d, nv, true);
  return logits;
}

// Teacher-forced decoder pass: feeds BOS then targets[0..m-2]; logits row t
// scores targets[t].
template <typename T>
DecoderCache<T> decode_teacher_forced(const Weights<T>& w, const EncoderCache<T>& enc,
                                      std::span<const int> targets) {
  auto c = start_decoder(w, enc);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    decoder_step(w, c, t == 0 ? Vocab::kBos : targets[t - 1]);
  }
  return c;
}

// Gradient buffers for one backward pass.
struct Gradients {
  std::vector<double> params;  // empty when parameter gradients are not wanted
  Matrix<double> input;        // d(objective)/d(encoder input embeddings)
};

// Backpropagates d(objective)/d(logits) through a cached forward pass.
// `dlogits` has one row per decoder position.
Gradients backward(const ModelParams& params, const EncoderCache<double>& enc,
                   const DecoderCache<double>& dec, const Matrix<double>& dlogits,
                   std::span<const int> source_ids, bool want_param_grads);

inline Weights<double> weights_of(const ModelParams& p, const ParamLayout& layout) {
  return Weights<double>{layout, p.config, p.values.data()};
}

}  // namespace rassoc
