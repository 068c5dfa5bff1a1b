#ifndef DIDA_MODEL_HPP
#define DIDA_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dida/attention.hpp"
#include "dida/corpus.hpp"
#include "dida/emotion.hpp"
#include "dida/gru.hpp"
#include "dida/resources.hpp"
#include "dida/types.hpp"

namespace dida {

struct ModelConfig {
  int d_g = 0;        // embedding width
  int d_emotion = 0;  // emotion feature width
  int d_h = 32;       // GRU hidden width per direction
  int max_text_len = 50;
  int max_comments = 345;
  double l2 = 0.01;
  bool use_coattention = true;  // off reproduces the unattended-pooling variant
  bool use_temporal = true;     // off zeroes the chronological emotion feature

  // Fused feature width: v_sn + v_sc + a_en + a_ec + e_tc + e_dual.
  int x_dim() const { return 3 * (2 * d_h) + 7 * d_emotion; }
};

std::uint64_t config_hash(const ModelConfig& cfg);

struct ModelParams {
  BiGruWeights semantic;  // shared by news and comment texts
  BiGruWeights temporal;  // chronological comment-emotion encoder
  Mat W_S;                // 2d_h x 2d_h, semantic co-attention
  Vec b_S;                // scalar
  Mat W_E;                // d x d, emotion co-attention
  Vec b_E;                // scalar
  Mat W_X;                // 2 x x_dim classifier
  Vec b_X;                // 2
};

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);
ModelParams zero_params(const ModelConfig& cfg);

// Flat parameter vector in a fixed block order; the layout names each block
// for diagnostics and the finite-difference harness.
struct ParamBlock {
  std::string name;
  int offset;
  int size;
};
std::vector<ParamBlock> param_layout(const ModelConfig& cfg);
Vec flatten_params(const ModelParams& p);
ModelParams unflatten_params(const Vec& flat, const ModelConfig& cfg);

// Throws naming the offending block.
void check_finite(const ModelParams& grads, const ModelConfig& cfg, const std::string& what);

// --- batching / embedding --------------------------------------------------

struct SequenceBatch {
  std::vector<std::vector<int>> token_ids;  // B x L, padded with the OOV row id
  std::vector<std::vector<char>> mask;      // true = real token (prefix form)
};

SequenceBatch make_batch(const std::vector<std::string>& texts, const EmbeddingTable& table,
                         int max_len);

// Row lookup per sequence; masked positions map to the zero row no matter
// what id they carry.  Out-of-range ids are fatal.
std::vector<Mat> embed(const SequenceBatch& batch, const EmbeddingTable& table);

// Masked BiGRU: runs over the unmasked prefix, zeros elsewhere.
Mat bigru_masked(const BiGruWeights& w, const Mat& seq, const std::vector<char>& mask);

// --- record encoding -------------------------------------------------------

// Tokenized, truncated, embedded inputs for one record.
struct PreparedRecord {
  std::string id;
  Mat news_emb;                  // L_n x d_g
  std::vector<Mat> comment_emb;  // per comment, L_j x d_g
  Mat e_c;                       // M x d, capped comment emotion matrix
  Vec e_news;                    // d
  Vec e_dual;                    // 5d
  int label = -1;                // -1 = unlabeled
  bool pseudo = false;
};

PreparedRecord prepare_record(const NewsRecord& record, const EmbeddingTable& table,
                              const EmotionLexicon& lex, const EmotionConfig& emo_cfg,
                              const ModelConfig& cfg);

struct EncodedBundle {
  Vec v_sn;    // 2d_h
  Vec v_sc;    // 2d_h
  Vec a_en;    // d
  Vec a_ec;    // d
  Vec e_tc;    // 2d_h
  Vec e_dual;  // 5d
  Vec x_nc;    // concatenation, x_dim
};

struct EncodeTrace {
  Mat h_sn;
  std::vector<Mat> h_sc;
  Mat h_sc_all;
  BiGruTrace news_trace;
  std::vector<BiGruTrace> comment_traces;
  CoAttentionResult att_sn;
  std::vector<CoAttentionResult> att_sc;
  std::vector<int> sc_argmax;  // winning comment per component of v_sc
  CoAttentionResult att_en, att_ec;
  Mat h_tc;
  BiGruTrace temporal_trace;
};

EncodedBundle encode_record(const PreparedRecord& rec, const ModelParams& params,
                            const ModelConfig& cfg, EncodeTrace* trace = nullptr);

// softmax(W_X x + b_X); strictly positive entries summing to 1.
Vec classify(const Vec& x_nc, const ModelParams& params);

constexpr double kProbEps = 1e-7;

// Binary cross entropy on the clamped fake-class probability.
double supervised_loss(int y_true, double p_fake);

// Mean cross entropy over the batch plus l2 * sum of squared weight-matrix
// norms (biases excluded).  Unlabeled records are rejected.
double batch_loss_and_gradients(const std::vector<PreparedRecord>& batch,
                                const ModelParams& params, const ModelConfig& cfg,
                                ModelParams* grads);

double batch_loss(const std::vector<PreparedRecord>& batch, const ModelParams& params,
                  const ModelConfig& cfg);

// --- checkpoints -----------------------------------------------------------

void save_checkpoint(const std::string& path, const ModelParams& params, const ModelConfig& cfg);
// Refuses a checkpoint whose stored config hash mismatches cfg.
ModelParams load_checkpoint(const std::string& path, const ModelConfig& cfg);

}  // namespace dida

#endif
