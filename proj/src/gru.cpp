#include "dida/gru.hpp"

#include <cmath>

namespace dida {

namespace {

Vec sigmoid(const Vec& v) {
  return v.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

Mat glorot(int rows, int cols, std::mt19937_64& rng) {
  double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> uni(-r, r);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = uni(rng);
  return m;
}

}  // namespace

GruWeights GruWeights::zeros(int d_in, int d_h) {
  GruWeights w;
  w.Wz = w.Wr = w.Wh = Mat::Zero(d_h, d_in);
  w.Uz = w.Ur = w.Uh = Mat::Zero(d_h, d_h);
  w.bz = w.br = w.bh = Vec::Zero(d_h);
  return w;
}

GruWeights GruWeights::init(int d_in, int d_h, std::mt19937_64& rng) {
  GruWeights w;
  w.Wz = glorot(d_h, d_in, rng);
  w.Wr = glorot(d_h, d_in, rng);
  w.Wh = glorot(d_h, d_in, rng);
  w.Uz = glorot(d_h, d_h, rng);
  w.Ur = glorot(d_h, d_h, rng);
  w.Uh = glorot(d_h, d_h, rng);
  w.bz = w.br = w.bh = Vec::Zero(d_h);
  return w;
}

Mat gru_forward(const GruWeights& w, const Mat& seq, GruTrace* trace) {
  int L = static_cast<int>(seq.rows());
  int d_h = w.d_h();
  Mat hidden(L, d_h);
  Vec h = Vec::Zero(d_h);
  for (int t = 0; t < L; ++t) {
    Vec x = seq.row(t);
    if (!x.allFinite()) throw RuntimeError("non-finite GRU input");
    Vec z = sigmoid(w.Wz * x + w.Uz * h + w.bz);
    Vec r = sigmoid(w.Wr * x + w.Ur * h + w.br);
    Vec c = (w.Wh * x + w.Uh * (r.cwiseProduct(h)) + w.bh).array().tanh();
    Vec h_next = (Vec::Ones(d_h) - z).cwiseProduct(h) + z.cwiseProduct(c);
    if (trace) {
      trace->x.push_back(x);
      trace->h_prev.push_back(h);
      trace->z.push_back(z);
      trace->r.push_back(r);
      trace->c.push_back(c);
      trace->h.push_back(h_next);
    }
    hidden.row(t) = h_next;
    h = h_next;
  }
  return hidden;
}

void gru_backward(const GruWeights& w, const GruTrace& trace, const Mat& d_hidden,
                  GruWeights& grads, Mat* d_seq) {
  int L = static_cast<int>(trace.x.size());
  int d_h = w.d_h();
  if (d_seq) d_seq->setZero(L, w.d_in());
  Vec dh_next = Vec::Zero(d_h);
  for (int t = L - 1; t >= 0; --t) {
    Vec dh = dh_next + Vec(d_hidden.row(t).transpose());
    const Vec& z = trace.z[t];
    const Vec& r = trace.r[t];
    const Vec& c = trace.c[t];
    const Vec& h_prev = trace.h_prev[t];
    const Vec& x = trace.x[t];

    Vec dz = dh.cwiseProduct(c - h_prev);
    Vec dc = dh.cwiseProduct(z);
    Vec dh_prev = dh.cwiseProduct(Vec::Ones(d_h) - z);

    // candidate: c = tanh(ac), ac = Wh x + Uh (r .* h_prev) + bh
    Vec dac = dc.cwiseProduct(Vec::Ones(d_h) - c.cwiseProduct(c));
    grads.Wh += dac * x.transpose();
    Vec rh = r.cwiseProduct(h_prev);
    grads.Uh += dac * rh.transpose();
    grads.bh += dac;
    Vec drh = w.Uh.transpose() * dac;
    Vec dr = drh.cwiseProduct(h_prev);
    dh_prev += drh.cwiseProduct(r);

    // gates: z = sigma(az), r = sigma(ar)
    Vec daz = dz.cwiseProduct(z.cwiseProduct(Vec::Ones(d_h) - z));
    Vec dar = dr.cwiseProduct(r.cwiseProduct(Vec::Ones(d_h) - r));
    grads.Wz += daz * x.transpose();
    grads.Uz += daz * h_prev.transpose();
    grads.bz += daz;
    grads.Wr += dar * x.transpose();
    grads.Ur += dar * h_prev.transpose();
    grads.br += dar;

    dh_prev += w.Uz.transpose() * daz + w.Ur.transpose() * dar;
    if (d_seq) {
      d_seq->row(t) = (w.Wh.transpose() * dac + w.Wz.transpose() * daz +
                       w.Wr.transpose() * dar).transpose();
    }
    dh_next = dh_prev;
  }
}

BiGruWeights BiGruWeights::zeros(int d_in, int d_h) {
  return {GruWeights::zeros(d_in, d_h), GruWeights::zeros(d_in, d_h)};
}

BiGruWeights BiGruWeights::init(int d_in, int d_h, std::mt19937_64& rng) {
  BiGruWeights w;
  w.fwd = GruWeights::init(d_in, d_h, rng);
  w.bwd = GruWeights::init(d_in, d_h, rng);
  return w;
}

Mat bigru_forward(const BiGruWeights& w, const Mat& seq, BiGruTrace* trace) {
  int L = static_cast<int>(seq.rows());
  int d_h = w.fwd.d_h();
  Mat out(L, 2 * d_h);
  if (L == 0) return out;
  Mat fwd = gru_forward(w.fwd, seq, trace ? &trace->fwd : nullptr);
  Mat rev = seq.colwise().reverse();
  Mat bwd = gru_forward(w.bwd, rev, trace ? &trace->bwd : nullptr);
  out.leftCols(d_h) = fwd;
  out.rightCols(d_h) = bwd.colwise().reverse();
  return out;
}

void bigru_backward(const BiGruWeights& w, const BiGruTrace& trace, const Mat& d_hidden,
                    BiGruWeights& grads, Mat* d_seq) {
  int L = static_cast<int>(d_hidden.rows());
  int d_h = w.fwd.d_h();
  if (L == 0) {
    if (d_seq) d_seq->setZero(0, w.fwd.d_in());
    return;
  }
  Mat d_fwd = d_hidden.leftCols(d_h);
  Mat d_bwd_rev = Mat(d_hidden.rightCols(d_h)).colwise().reverse();
  Mat d_seq_fwd, d_seq_bwd;
  gru_backward(w.fwd, trace.fwd, d_fwd, grads.fwd, d_seq ? &d_seq_fwd : nullptr);
  gru_backward(w.bwd, trace.bwd, d_bwd_rev, grads.bwd, d_seq ? &d_seq_bwd : nullptr);
  if (d_seq) *d_seq = d_seq_fwd + d_seq_bwd.colwise().reverse();
}

}  // namespace dida
