#ifndef DIDA_GRU_HPP
#define DIDA_GRU_HPP

#include <random>
#include <vector>

#include "dida/types.hpp"

namespace dida {

// Gate parameters for one direction.  Update/reset/candidate follow the
// standard recurrence:
//   z = sigma(Wz x + Uz h + bz)
//   r = sigma(Wr x + Ur h + br)
//   c = tanh(Wh x + Uh (r .* h) + bh)
//   h' = (1 - z) .* h + z .* c
struct GruWeights {
  Mat Wz, Wr, Wh;  // d_h x d_in
  Mat Uz, Ur, Uh;  // d_h x d_h
  Vec bz, br, bh;  // d_h

  int d_in() const { return static_cast<int>(Wz.cols()); }
  int d_h() const { return static_cast<int>(Wz.rows()); }

  static GruWeights zeros(int d_in, int d_h);
  // Glorot-uniform weights, zero biases.
  static GruWeights init(int d_in, int d_h, std::mt19937_64& rng);
};

// Per-step activations cached for backprop.
struct GruTrace {
  std::vector<Vec> x, h_prev, z, r, c, h;
};

// seq is L x d_in; returns L x d_h hidden states, caching into trace when
// given.
Mat gru_forward(const GruWeights& w, const Mat& seq, GruTrace* trace = nullptr);

// d_hidden is L x d_h upstream gradient; accumulates into grads and
// optionally returns d(seq).
void gru_backward(const GruWeights& w, const GruTrace& trace, const Mat& d_hidden,
                  GruWeights& grads, Mat* d_seq = nullptr);

struct BiGruWeights {
  GruWeights fwd, bwd;

  static BiGruWeights zeros(int d_in, int d_h);
  static BiGruWeights init(int d_in, int d_h, std::mt19937_64& rng);
};

struct BiGruTrace {
  GruTrace fwd, bwd;
};

// Forward pass over seq plus backward pass over the reversed sequence,
// concatenated per position into L x 2d_h.  L = 0 yields an empty matrix.
Mat bigru_forward(const BiGruWeights& w, const Mat& seq, BiGruTrace* trace = nullptr);

void bigru_backward(const BiGruWeights& w, const BiGruTrace& trace, const Mat& d_hidden,
                    BiGruWeights& grads, Mat* d_seq = nullptr);

}  // namespace dida

#endif
