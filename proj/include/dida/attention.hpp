#ifndef DIDA_ATTENTION_HPP
#define DIDA_ATTENTION_HPP

#include "dida/types.hpp"

namespace dida {

// Interactive co-attention over one direction:
//   cbar    = column-wise mean of context rows (zeros when context is empty)
//   score_i = tanh(target_i . (W cbar) + b)
//   alpha   = softmax(score)
//   attended = sum_i alpha_i target_i
// The opposite direction is obtained by swapping target and context.
struct CoAttentionResult {
  Vec alpha;     // T, nonnegative, sums to 1
  Vec attended;  // w
  Vec scores;    // cached for backprop
  Vec cbar;      // w_c
};

// target is T x w with T >= 1 (fatal otherwise), context is C x w_c (C = 0
// permitted), W is w x w_c.
CoAttentionResult co_attention(const Mat& target, const Mat& context, const Mat& W, double b);

struct CoAttentionGrads {
  Mat d_W;
  double d_b = 0;
  Mat d_target;
  Mat d_context;
};

// Accumulates into grads given d(attended).
void co_attention_backward(const Mat& target, const Mat& context, const Mat& W, double b,
                           const CoAttentionResult& res, const Vec& d_attended,
                           CoAttentionGrads& grads);

}  // namespace dida

#endif
