#include "dida/attention.hpp"

#include <cmath>

namespace dida {

CoAttentionResult co_attention(const Mat& target, const Mat& context, const Mat& W, double b) {
  int T = static_cast<int>(target.rows());
  if (T == 0) throw RuntimeError("co_attention requires a non-empty target sequence");
  if (W.rows() != target.cols() || (context.rows() > 0 && W.cols() != context.cols()))
    throw RuntimeError("co_attention weight shape mismatch");

  CoAttentionResult res;
  res.cbar = context.rows() > 0 ? Vec(context.colwise().mean()) : Vec::Zero(W.cols());
  Vec v = W * res.cbar;  // w
  res.scores.resize(T);
  for (int i = 0; i < T; ++i) res.scores[i] = std::tanh(target.row(i).dot(v) + b);
  // Stable softmax.
  double mx = res.scores.maxCoeff();
  Vec ex = (res.scores.array() - mx).exp();
  res.alpha = ex / ex.sum();
  res.attended = target.transpose() * res.alpha;
  return res;
}

void co_attention_backward(const Mat& target, const Mat& context, const Mat& W, double b,
                           const CoAttentionResult& res, const Vec& d_attended,
                           CoAttentionGrads& grads) {
  (void)b;
  int T = static_cast<int>(target.rows());
  int C = static_cast<int>(context.rows());
  grads.d_target = Mat::Zero(T, target.cols());
  grads.d_context = Mat::Zero(C, context.cols());
  if (grads.d_W.rows() != W.rows() || grads.d_W.cols() != W.cols())
    grads.d_W = Mat::Zero(W.rows(), W.cols());

  // attended = target^T alpha
  Vec d_alpha = target * d_attended;                       // T
  for (int i = 0; i < T; ++i) grads.d_target.row(i) += res.alpha[i] * d_attended.transpose();

  // softmax
  double dot = res.alpha.dot(d_alpha);
  Vec d_score = res.alpha.cwiseProduct(d_alpha) - res.alpha * dot;

  // score_i = tanh(u_i), u_i = target_i . v + b, v = W cbar
  Vec d_u = d_score.cwiseProduct((1.0 - res.scores.array().square()).matrix());
  grads.d_b += d_u.sum();
  Vec v = W * res.cbar;
  Vec d_v = Vec::Zero(target.cols());
  for (int i = 0; i < T; ++i) {
    grads.d_target.row(i) += d_u[i] * v.transpose();
    d_v += d_u[i] * Vec(target.row(i));
  }
  grads.d_W += d_v * res.cbar.transpose();
  if (C > 0) {
    Vec d_cbar = W.transpose() * d_v;
    for (int j = 0; j < C; ++j) grads.d_context.row(j) = d_cbar.transpose() / C;
  }
}

}  // namespace dida
