#include "rassoc/model/transformer.hpp"

#include "rassoc/errors.hpp"

namespace rassoc {

namespace {

// dx += d(gain * x / rms(x))/dx applied to dy; dgain += dy * x / rms(x).
void rms_backward(const double* x, double inv, const double* gain, const double* dy, double* dx,
                  double* dgain, std::size_t d) {
  double dot = 0.0;
  for (std::size_t j = 0; j < d; ++j) dot += dy[j] * gain[j] * x[j] * inv;
  const double mean = dot / static_cast<double>(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double nj = x[j] * inv;
    if (dgain) dgain[j] += dy[j] * nj;
    dx[j] += (dy[j] * gain[j] - nj * mean) * inv;
  }
}

// In place: dp <- p * (dp - <p, dp>) * scale.
void softmax_backward(const double* p, double* dp, std::size_t n, double scale) {
  double dot = 0.0;
  for (std::size_t j = 0; j < n; ++j) dot += p[j] * dp[j];
  for (std::size_t j = 0; j < n; ++j) dp[j] = p[j] * (dp[j] - dot) * scale;
}

void colsum_acc(const Matrix<double>& m, double* out) {
  if (!out) return;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += m(i, j);
}

class Backprop {
 public:
  Backprop(const ModelParams& params, const ParamLayout& layout, bool want)
      : w_(weights_of(params, layout)), L_(layout),
        d_(static_cast<std::size_t>(params.config.d_model)),
        f_(static_cast<std::size_t>(params.config.d_ff)),
        v_(static_cast<std::size_t>(params.config.vocab_size)) {
    if (want) grads_.assign(layout.total, 0.0);
  }

  double* g(const Slot& s) { return grads_.empty() ? nullptr : grads_.data() + s.offset; }
  const double* w(const Slot& s) const { return w_[s]; }

  // Returns d/d(encoder memory).
  Matrix<double> decoder(const EncoderCache<double>& enc, const DecoderCache<double>& c,
                         const Matrix<double>& dlogits) {
    const std::size_t m = c.logits.rows;
    const std::size_t n = enc.memory.rows;
    const std::size_t d = d_, f = f_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));

    Matrix<double> df(m, d);
    gemm_nt_acc(dlogits.data.data(), w(L_.out_w), df.data.data(), m, v_, d);
    if (auto* gw = g(L_.out_w)) gemm_tn_acc(c.f.data.data(), dlogits.data.data(), gw, m, d, v_);
    colsum_acc(dlogits, g(L_.out_b));

    Matrix<double> dz3(m, d);
    for (std::size_t i = 0; i < m; ++i)
      rms_backward(c.z3.row(i), c.inv_rms4[i], w(L_.dec_norm_out), df.row(i), dz3.row(i),
                   g(L_.dec_norm_out), d);

    // feed-forward block
    Matrix<double> dz2 = dz3;
    Matrix<double> dg(m, f);
    gemm_nt_acc(dz3.data.data(), w(L_.dec_w2), dg.data.data(), m, d, f);
    if (auto* gw = g(L_.dec_w2)) gemm_tn_acc(c.g.data.data(), dz3.data.data(), gw, m, f, d);
    colsum_acc(dz3, g(L_.dec_b2));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < f; ++j) dg(i, j) *= detail::gelu_grad(c.u(i, j));
    if (auto* gw = g(L_.dec_w1)) gemm_tn_acc(c.dd.data.data(), dg.data.data(), gw, m, d, f);
    colsum_acc(dg, g(L_.dec_b1));
    Matrix<double> ddd(m, d);
    gemm_nt_acc(dg.data.data(), w(L_.dec_w1), ddd.data.data(), m, f, d);
    for (std::size_t i = 0; i < m; ++i)
      rms_backward(c.z2.row(i), c.inv_rms3[i], w(L_.dec_norm3), ddd.row(i), dz2.row(i),
                   g(L_.dec_norm3), d);

    // cross-attention block
    Matrix<double> dz1 = dz2;
    Matrix<double> dcctx(m, d);
    gemm_nt_acc(dz2.data.data(), w(L_.dec_cross_wo), dcctx.data.data(), m, d, d);
    if (auto* gw = g(L_.dec_cross_wo)) gemm_tn_acc(c.cctx.data.data(), dz2.data.data(), gw, m, d, d);
    Matrix<double> dcp(m, n);
    gemm_nt_acc(dcctx.data.data(), c.cv.data.data(), dcp.data.data(), m, d, n);
    Matrix<double> dcv(n, d);
    gemm_tn_acc(c.cp.data.data(), dcctx.data.data(), dcv.data.data(), m, n, d);
    for (std::size_t i = 0; i < m; ++i) softmax_backward(c.cp.row(i), dcp.row(i), n, scale);
    Matrix<double> dcq(m, d);
    gemm_nn(dcp.data.data(), c.ck.data.data(), dcq.data.data(), m, n, d, false);
    Matrix<double> dck(n, d);
    gemm_tn_acc(dcp.data.data(), c.cq.data.data(), dck.data.data(), m, n, d);
    if (auto* gw = g(L_.dec_cross_wq)) gemm_tn_acc(c.b.data.data(), dcq.data.data(), gw, m, d, d);
    Matrix<double> db(m, d);
    gemm_nt_acc(dcq.data.data(), w(L_.dec_cross_wq), db.data.data(), m, d, d);
    for (std::size_t i = 0; i < m; ++i)
      rms_backward(c.z1.row(i), c.inv_rms2[i], w(L_.dec_norm2), db.row(i), dz1.row(i),
                   g(L_.dec_norm2), d);
    Matrix<double> dmemory(n, d);
    gemm_nt_acc(dck.data.data(), w(L_.dec_cross_wk), dmemory.data.data(), n, d, d);
    gemm_nt_acc(dcv.data.data(), w(L_.dec_cross_wv), dmemory.data.data(), n, d, d);
    if (auto* gw = g(L_.dec_cross_wk)) gemm_tn_acc(enc.memory.data.data(), dck.data.data(), gw, n, d, d);
    if (auto* gw = g(L_.dec_cross_wv)) gemm_tn_acc(enc.memory.data.data(), dcv.data.data(), gw, n, d, d);

    // causal self-attention block
    Matrix<double> dz0 = dz1;
    Matrix<double> dctx(m, d);
    gemm_nt_acc(dz1.data.data(), w(L_.dec_self_wo), dctx.data.data(), m, d, d);
    if (auto* gw = g(L_.dec_self_wo)) gemm_tn_acc(c.ctx.data.data(), dz1.data.data(), gw, m, d, d);
    Matrix<double> dq(m, d), dk(m, d), dv(m, d);
    std::vector<double> dp;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& p = c.p[i];
      dp.assign(i + 1, 0.0);
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
          s += dctx(i, r) * c.v(j, r);
          dv(j, r) += p[j] * dctx(i, r);
        }
        dp[j] = s;
      }
      softmax_backward(p.data(), dp.data(), i + 1, scale);
      for (std::size_t j = 0; j <= i; ++j)
        for (std::size_t r = 0; r < d; ++r) {
          dq(i, r) += dp[j] * c.k(j, r);
          dk(j, r) += dp[j] * c.q(i, r);
        }
    }
    Matrix<double> da(m, d);
    gemm_nt_acc(dq.data.data(), w(L_.dec_self_wq), da.data.data(), m, d, d);
    gemm_nt_acc(dk.data.data(), w(L_.dec_self_wk), da.data.data(), m, d, d);
    gemm_nt_acc(dv.data.data(), w(L_.dec_self_wv), da.data.data(), m, d, d);
    if (auto* gw = g(L_.dec_self_wq)) gemm_tn_acc(c.a.data.data(), dq.data.data(), gw, m, d, d);
    if (auto* gw = g(L_.dec_self_wk)) gemm_tn_acc(c.a.data.data(), dk.data.data(), gw, m, d, d);
    if (auto* gw = g(L_.dec_self_wv)) gemm_tn_acc(c.a.data.data(), dv.data.data(), gw, m, d, d);
    for (std::size_t i = 0; i < m; ++i)
      rms_backward(c.z0.row(i), c.inv_rms1[i], w(L_.dec_norm1), da.row(i), dz0.row(i),
                   g(L_.dec_norm1), d);
    if (auto* ge = g(L_.embed)) {
      for (std::size_t i = 0; i < m; ++i) {
        double* row = ge + static_cast<std::size_t>(c.inputs[i]) * d;
        for (std::size_t r = 0; r < d; ++r) row[r] += dz0(i, r);
      }
    }
    return dmemory;
  }

  // Returns d/d(encoder input embeddings).
  Matrix<double> encoder(const EncoderCache<double>& c, const Matrix<double>& dmemory) {
    const std::size_t n = c.memory.rows;
    const std::size_t d = d_, f = f_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));

    Matrix<double> dh2(n, d);
    for (std::size_t i = 0; i < n; ++i)
      rms_backward(c.h2.row(i), c.inv_rms3[i], w(L_.enc_norm_out), dmemory.row(i), dh2.row(i),
                   g(L_.enc_norm_out), d);

    Matrix<double> dh1 = dh2;
    Matrix<double> dg(n, f);
    gemm_nt_acc(dh2.data.data(), w(L_.enc_w2), dg.data.data(), n, d, f);
    if (auto* gw = g(L_.enc_w2)) gemm_tn_acc(c.g.data.data(), dh2.data.data(), gw, n, f, d);
    colsum_acc(dh2, g(L_.enc_b2));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < f; ++j) dg(i, j) *= detail::gelu_grad(c.u(i, j));
    if (auto* gw = g(L_.enc_w1)) gemm_tn_acc(c.b.data.data(), dg.data.data(), gw, n, d, f);
    colsum_acc(dg, g(L_.enc_b1));
    Matrix<double> db(n, d);
    gemm_nt_acc(dg.data.data(), w(L_.enc_w1), db.data.data(), n, f, d);
    for (std::size_t i = 0; i < n; ++i)
      rms_backward(c.h1.row(i), c.inv_rms2[i], w(L_.enc_norm2), db.row(i), dh1.row(i),
                   g(L_.enc_norm2), d);

    Matrix<double> dh0 = dh1;
    Matrix<double> dctx(n, d);
    gemm_nt_acc(dh1.data.data(), w(L_.enc_wo), dctx.data.data(), n, d, d);
    if (auto* gw = g(L_.enc_wo)) gemm_tn_acc(c.ctx.data.data(), dh1.data.data(), gw, n, d, d);
    Matrix<double> dp(n, n);
    gemm_nt_acc(dctx.data.data(), c.v.data.data(), dp.data.data(), n, d, n);
    Matrix<double> dv(n, d);
    gemm_tn_acc(c.p.data.data(), dctx.data.data(), dv.data.data(), n, n, d);
    for (std::size_t i = 0; i < n; ++i) softmax_backward(c.p.row(i), dp.row(i), n, scale);
    Matrix<double> dq(n, d), dk(n, d);
    gemm_nn(dp.data.data(), c.k.data.data(), dq.data.data(), n, n, d, false);
    gemm_tn_acc(dp.data.data(), c.q.data.data(), dk.data.data(), n, n, d);
    Matrix<double> da(n, d);
    gemm_nt_acc(dq.data.data(), w(L_.enc_wq), da.data.data(), n, d, d);
    gemm_nt_acc(dk.data.data(), w(L_.enc_wk), da.data.data(), n, d, d);
    gemm_nt_acc(dv.data.data(), w(L_.enc_wv), da.data.data(), n, d, d);
    if (auto* gw = g(L_.enc_wq)) gemm_tn_acc(c.a.data.data(), dq.data.data(), gw, n, d, d);
    if (auto* gw = g(L_.enc_wk)) gemm_tn_acc(c.a.data.data(), dk.data.data(), gw, n, d, d);
    if (auto* gw = g(L_.enc_wv)) gemm_tn_acc(c.a.data.data(), dv.data.data(), gw, n, d, d);
    for (std::size_t i = 0; i < n; ++i)
      rms_backward(c.h0.row(i), c.inv_rms1[i], w(L_.enc_norm1), da.row(i), dh0.row(i),
                   g(L_.enc_norm1), d);
    return dh0;  // positions are constants, so d/dx == d/dh0
  }

  std::vector<double> take_grads() { return std::move(grads_); }

 private:
  Weights<double> w_;
  const ParamLayout& L_;
  std::size_t d_, f_, v_;
  std::vector<double> grads_;
};

}  // namespace

Gradients backward(const ModelParams& params, const EncoderCache<double>& enc,
                   const DecoderCache<double>& dec, const Matrix<double>& dlogits,
                   std::span<const int> source_ids, bool want_param_grads) {
  if (dlogits.rows != dec.logits.rows || dlogits.cols != dec.logits.cols) {
    throw SpanError("dlogits shape does not match the decoder trace");
  }
  const ParamLayout layout = params.layout();
  Backprop bp(params, layout, want_param_grads);
  Matrix<double> dmemory = bp.decoder(enc, dec, dlogits);
  Gradients out;
  out.input = bp.encoder(enc, dmemory);
  if (want_param_grads) {
    if (source_ids.size() != out.input.rows) throw SpanError("source ids do not match the trace");
    double* ge = bp.g(layout.embed);
    const std::size_t d = out.input.cols;
    for (std::size_t i = 0; i < source_ids.size(); ++i) {
      double* row = ge + static_cast<std::size_t>(source_ids[i]) * d;
      for (std::size_t r = 0; r < d; ++r) row[r] += params.config.source_embed_scale * out.input(i, r);
    }
    out.params = bp.take_grads();
  }
  return out;
}

}  // namespace rassoc
