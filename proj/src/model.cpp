#include "dida/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "dida/tokenize.hpp"

namespace dida {

std::uint64_t config_hash(const ModelConfig& cfg) {
  // FNV-1a over the shape-relevant fields.
  char buf[256];
  int n = std::snprintf(buf, sizeof(buf), "dg=%d;de=%d;dh=%d;len=%d;cm=%d;att=%d;tmp=%d",
                        cfg.d_g, cfg.d_emotion, cfg.d_h, cfg.max_text_len, cfg.max_comments,
                        cfg.use_coattention ? 1 : 0, cfg.use_temporal ? 1 : 0);
  std::uint64_t h = 1469598103934665603ull;
  for (int i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(buf[i]);
    h *= 1099511628211ull;
  }
  return h;
}

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.semantic = BiGruWeights::init(cfg.d_g, cfg.d_h, rng);
  p.temporal = BiGruWeights::init(cfg.d_emotion, cfg.d_h, rng);
  auto glorot = [&](int rows, int cols) {
    double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> uni(-r, r);
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = uni(rng);
    return m;
  };
  p.W_S = glorot(2 * cfg.d_h, 2 * cfg.d_h);
  p.b_S = Vec::Zero(1);
  p.W_E = glorot(cfg.d_emotion, cfg.d_emotion);
  p.b_E = Vec::Zero(1);
  p.W_X = glorot(2, cfg.x_dim());
  p.b_X = Vec::Zero(2);
  return p;
}

ModelParams zero_params(const ModelConfig& cfg) {
  ModelParams p;
  p.semantic = BiGruWeights::zeros(cfg.d_g, cfg.d_h);
  p.temporal = BiGruWeights::zeros(cfg.d_emotion, cfg.d_h);
  p.W_S = Mat::Zero(2 * cfg.d_h, 2 * cfg.d_h);
  p.b_S = Vec::Zero(1);
  p.W_E = Mat::Zero(cfg.d_emotion, cfg.d_emotion);
  p.b_E = Vec::Zero(1);
  p.W_X = Mat::Zero(2, cfg.x_dim());
  p.b_X = Vec::Zero(2);
  return p;
}

namespace {

// Fixed enumeration of parameter arrays; flattening, Adam, checkpoints and
// the finite-difference harness all walk the same order.
template <class P, class F>
void visit(P& p, F&& f) {
  auto gru = [&](const std::string& prefix, auto& g) {
    f(prefix + ".Wz", g.Wz);
    f(prefix + ".Wr", g.Wr);
    f(prefix + ".Wh", g.Wh);
    f(prefix + ".Uz", g.Uz);
    f(prefix + ".Ur", g.Ur);
    f(prefix + ".Uh", g.Uh);
    f(prefix + ".bz", g.bz);
    f(prefix + ".br", g.br);
    f(prefix + ".bh", g.bh);
  };
  gru("semantic.fwd", p.semantic.fwd);
  gru("semantic.bwd", p.semantic.bwd);
  gru("temporal.fwd", p.temporal.fwd);
  gru("temporal.bwd", p.temporal.bwd);
  f("W_S", p.W_S);
  f("b_S", p.b_S);
  f("W_E", p.W_E);
  f("b_E", p.b_E);
  f("W_X", p.W_X);
  f("b_X", p.b_X);
}

}  // namespace

std::vector<ParamBlock> param_layout(const ModelConfig& cfg) {
  ModelParams p = zero_params(cfg);
  std::vector<ParamBlock> blocks;
  int offset = 0;
  visit(p, [&](const std::string& name, auto& m) {
    int sz = static_cast<int>(m.size());
    blocks.push_back({name, offset, sz});
    offset += sz;
  });
  return blocks;
}

Vec flatten_params(const ModelParams& p) {
  int total = 0;
  visit(const_cast<ModelParams&>(p), [&](const std::string&, auto& m) { total += m.size(); });
  Vec flat(total);
  int offset = 0;
  visit(const_cast<ModelParams&>(p), [&](const std::string&, auto& m) {
    std::memcpy(flat.data() + offset, m.data(), m.size() * sizeof(double));
    offset += static_cast<int>(m.size());
  });
  return flat;
}

ModelParams unflatten_params(const Vec& flat, const ModelConfig& cfg) {
  ModelParams p = zero_params(cfg);
  int offset = 0;
  visit(p, [&](const std::string&, auto& m) {
    if (offset + static_cast<int>(m.size()) > flat.size())
      throw RuntimeError("parameter vector too short for config");
    std::memcpy(m.data(), flat.data() + offset, m.size() * sizeof(double));
    offset += static_cast<int>(m.size());
  });
  if (offset != flat.size()) throw RuntimeError("parameter vector size mismatch");
  return p;
}

void check_finite(const ModelParams& grads, const ModelConfig& cfg, const std::string& what) {
  (void)cfg;
  visit(const_cast<ModelParams&>(grads), [&](const std::string& name, auto& m) {
    if (!m.allFinite()) throw RuntimeError("non-finite " + what + " in block " + name);
  });
}

// --- batching / embedding --------------------------------------------------

SequenceBatch make_batch(const std::vector<std::string>& texts, const EmbeddingTable& table,
                         int max_len) {
  SequenceBatch batch;
  std::size_t longest = 1;
  std::vector<std::vector<int>> raw;
  for (const auto& text : texts) {
    std::vector<int> ids;
    for (const auto& tok : tokenize(text)) {
      if (static_cast<int>(ids.size()) >= max_len) break;
      ids.push_back(table.row_of(tok.text));
    }
    longest = std::max(longest, ids.size());
    raw.push_back(std::move(ids));
  }
  for (auto& ids : raw) {
    std::vector<char> mask(longest, 0);
    for (std::size_t i = 0; i < ids.size(); ++i) mask[i] = 1;
    ids.resize(longest, table.oov_row);
    batch.token_ids.push_back(std::move(ids));
    batch.mask.push_back(std::move(mask));
  }
  return batch;
}

std::vector<Mat> embed(const SequenceBatch& batch, const EmbeddingTable& table) {
  std::vector<Mat> out;
  for (std::size_t b = 0; b < batch.token_ids.size(); ++b) {
    const auto& ids = batch.token_ids[b];
    const auto& mask = batch.mask[b];
    Mat m = Mat::Zero(static_cast<int>(ids.size()), table.dim);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!mask[i]) continue;
      if (ids[i] < 0 || ids[i] >= table.vectors.rows())
        throw RuntimeError("token id out of range: " + std::to_string(ids[i]));
      m.row(i) = table.vectors.row(ids[i]);
    }
    out.push_back(std::move(m));
  }
  return out;
}

Mat bigru_masked(const BiGruWeights& w, const Mat& seq, const std::vector<char>& mask) {
  int L = static_cast<int>(seq.rows());
  int real = 0;
  while (real < L && mask[real]) ++real;
  for (int i = real; i < L; ++i)
    if (mask[i]) throw RuntimeError("mask must be a true-prefix");
  Mat out = Mat::Zero(L, 2 * w.fwd.d_h());
  out.topRows(real) = bigru_forward(w, seq.topRows(real));
  return out;
}

// --- record encoding -------------------------------------------------------

PreparedRecord prepare_record(const NewsRecord& record, const EmbeddingTable& table,
                              const EmotionLexicon& lex, const EmotionConfig& emo_cfg,
                              const ModelConfig& cfg) {
  PreparedRecord out;
  out.id = record.id;
  out.label = record.label ? *record.label : -1;

  NewsRecord capped = record;
  if (static_cast<int>(capped.comments.size()) > cfg.max_comments)
    capped.comments.resize(cfg.max_comments);  // keep the earliest comments

  std::vector<std::string> texts;
  texts.push_back(capped.news_text);
  for (const auto& c : capped.comments) texts.push_back(c.text);
  SequenceBatch batch = make_batch(texts, table, cfg.max_text_len);
  std::vector<Mat> embedded = embed(batch, table);

  auto trim = [&](std::size_t idx) {
    int real = 0;
    while (real < static_cast<int>(batch.mask[idx].size()) && batch.mask[idx][real]) ++real;
    return Mat(embedded[idx].topRows(real));
  };
  out.news_emb = trim(0);
  if (out.news_emb.rows() == 0) throw RuntimeError("record " + record.id + " has no news tokens");
  for (std::size_t j = 1; j < embedded.size(); ++j) {
    Mat m = trim(j);
    if (m.rows() > 0) out.comment_emb.push_back(std::move(m));
  }

  out.e_news = emotion_vector(capped.news_text, lex, emo_cfg);
  out.e_c = comment_emotion_matrix(capped, lex, emo_cfg);
  PooledEmotion pooled = pooled_comment_emotion(out.e_c);
  out.e_dual = dual_emotion(out.e_news, pooled.comment,
                            gap_emotion(out.e_news, pooled.mean, pooled.max));
  return out;
}

EncodedBundle encode_record(const PreparedRecord& rec, const ModelParams& params,
                            const ModelConfig& cfg, EncodeTrace* trace) {
  const int dh2 = 2 * cfg.d_h;
  const int d = cfg.d_emotion;
  const int M = static_cast<int>(rec.e_c.rows());
  EncodeTrace local;
  EncodeTrace& tr = trace ? *trace : local;

  // Semantic encoders (shared weights).
  tr.h_sn = bigru_forward(params.semantic, rec.news_emb, &tr.news_trace);
  int total_sc = 0;
  tr.comment_traces.resize(rec.comment_emb.size());
  for (std::size_t j = 0; j < rec.comment_emb.size(); ++j) {
    tr.h_sc.push_back(bigru_forward(params.semantic, rec.comment_emb[j], &tr.comment_traces[j]));
    total_sc += static_cast<int>(tr.h_sc.back().rows());
  }
  tr.h_sc_all.resize(total_sc, dh2);
  int row = 0;
  for (const auto& h : tr.h_sc) {
    tr.h_sc_all.middleRows(row, h.rows()) = h;
    row += static_cast<int>(h.rows());
  }

  EncodedBundle bundle;
  bundle.e_dual = rec.e_dual;

  if (cfg.use_coattention) {
    tr.att_sn = co_attention(tr.h_sn, tr.h_sc_all, params.W_S, params.b_S[0]);
    bundle.v_sn = tr.att_sn.attended;
    bundle.v_sc = Vec::Zero(dh2);
    tr.sc_argmax.assign(dh2, -1);
    tr.att_sc.resize(tr.h_sc.size());
    for (std::size_t j = 0; j < tr.h_sc.size(); ++j) {
      tr.att_sc[j] = co_attention(tr.h_sc[j], tr.h_sn, params.W_S, params.b_S[0]);
      const Vec& a = tr.att_sc[j].attended;
      for (int k = 0; k < dh2; ++k) {
        if (tr.sc_argmax[k] < 0 || a[k] > bundle.v_sc[k]) {
          bundle.v_sc[k] = a[k];
          tr.sc_argmax[k] = static_cast<int>(j);
        }
      }
    }
    if (tr.h_sc.empty()) bundle.v_sc.setZero();

    Mat e_news_seq = rec.e_news.transpose();
    tr.att_en = co_attention(e_news_seq, rec.e_c, params.W_E, params.b_E[0]);
    bundle.a_en = tr.att_en.attended;
    if (M > 0) {
      tr.att_ec = co_attention(rec.e_c, e_news_seq, params.W_E, params.b_E[0]);
      bundle.a_ec = tr.att_ec.attended;
    } else {
      bundle.a_ec = Vec::Zero(d);
    }
  } else {
    // Ablated interaction: plain pooled features in place of attended ones.
    bundle.v_sn = tr.h_sn.colwise().mean();
    bundle.v_sc = Vec::Zero(dh2);
    tr.sc_argmax.assign(dh2, -1);
    for (std::size_t j = 0; j < tr.h_sc.size(); ++j) {
      Vec mean_j = tr.h_sc[j].colwise().mean();
      for (int k = 0; k < dh2; ++k) {
        if (tr.sc_argmax[k] < 0 || mean_j[k] > bundle.v_sc[k]) {
          bundle.v_sc[k] = mean_j[k];
          tr.sc_argmax[k] = static_cast<int>(j);
        }
      }
    }
    bundle.a_en = rec.e_news;
    bundle.a_ec = M > 0 ? Vec(rec.e_c.colwise().mean()) : Vec::Zero(d);
  }

  if (cfg.use_temporal && M > 0) {
    tr.h_tc = bigru_forward(params.temporal, rec.e_c, &tr.temporal_trace);
    bundle.e_tc = tr.h_tc.colwise().mean();
  } else {
    bundle.e_tc = Vec::Zero(dh2);
  }

  bundle.x_nc.resize(cfg.x_dim());
  bundle.x_nc << bundle.v_sn, bundle.v_sc, bundle.a_en, bundle.a_ec, bundle.e_tc, bundle.e_dual;
  return bundle;
}

Vec classify(const Vec& x_nc, const ModelParams& params) {
  Vec logits = params.W_X * x_nc + params.b_X;
  if (!logits.allFinite()) throw RuntimeError("non-finite classifier logits");
  double mx = logits.maxCoeff();
  Vec ex = (logits.array() - mx).exp();
  return ex / ex.sum();
}

double supervised_loss(int y_true, double p_fake) {
  double p = std::clamp(p_fake, kProbEps, 1.0 - kProbEps);
  return -(y_true * std::log(p) + (1 - y_true) * std::log(1.0 - p));
}

namespace {

// Backprop one record.  d_x is the already-scaled gradient of the loss with
// respect to x_nc; parameter gradients accumulate into grads.
void backprop_record(const PreparedRecord& rec, const ModelParams& params,
                     const ModelConfig& cfg, const EncodeTrace& tr, const Vec& d_x,
                     ModelParams& grads) {
  const int dh2 = 2 * cfg.d_h;
  const int d = cfg.d_emotion;
  const int M = static_cast<int>(rec.e_c.rows());

  int off = 0;
  Vec d_v_sn = d_x.segment(off, dh2); off += dh2;
  Vec d_v_sc = d_x.segment(off, dh2); off += dh2;
  Vec d_a_en = d_x.segment(off, d);   off += d;
  Vec d_a_ec = d_x.segment(off, d);   off += d;
  Vec d_e_tc = d_x.segment(off, dh2); off += dh2;
  // e_dual is a raw input feature; nothing upstream.

  Mat d_h_sn = Mat::Zero(tr.h_sn.rows(), dh2);
  std::vector<Mat> d_h_sc;
  for (const auto& h : tr.h_sc) d_h_sc.push_back(Mat::Zero(h.rows(), dh2));

  if (cfg.use_coattention) {
    // v_sn path.
    CoAttentionGrads ag;
    ag.d_W = Mat::Zero(params.W_S.rows(), params.W_S.cols());
    co_attention_backward(tr.h_sn, tr.h_sc_all, params.W_S, params.b_S[0], tr.att_sn, d_v_sn, ag);
    d_h_sn += ag.d_target;
    int row = 0;
    for (auto& dh : d_h_sc) {
      dh += ag.d_context.middleRows(row, dh.rows());
      row += static_cast<int>(dh.rows());
    }
    grads.W_S += ag.d_W;
    grads.b_S[0] += ag.d_b;

    // v_sc path: route each component to its winning comment.
    std::vector<Vec> d_a_sc(tr.h_sc.size(), Vec::Zero(dh2));
    for (int k = 0; k < dh2; ++k) {
      if (tr.sc_argmax[k] >= 0) d_a_sc[tr.sc_argmax[k]][k] += d_v_sc[k];
    }
    for (std::size_t j = 0; j < tr.h_sc.size(); ++j) {
      if (d_a_sc[j].isZero(0)) continue;
      CoAttentionGrads cg;
      cg.d_W = Mat::Zero(params.W_S.rows(), params.W_S.cols());
      co_attention_backward(tr.h_sc[j], tr.h_sn, params.W_S, params.b_S[0], tr.att_sc[j],
                            d_a_sc[j], cg);
      d_h_sc[j] += cg.d_target;
      d_h_sn += cg.d_context;
      grads.W_S += cg.d_W;
      grads.b_S[0] += cg.d_b;
    }

    // Emotion-channel attention touches only W_E/b_E (its inputs are raw
    // features).  The length-1 target direction contributes zero by softmax
    // degeneracy but is kept for uniformity.
    Mat e_news_seq = rec.e_news.transpose();
    {
      CoAttentionGrads eg;
      eg.d_W = Mat::Zero(params.W_E.rows(), params.W_E.cols());
      co_attention_backward(e_news_seq, rec.e_c, params.W_E, params.b_E[0], tr.att_en, d_a_en, eg);
      grads.W_E += eg.d_W;
      grads.b_E[0] += eg.d_b;
    }
    if (M > 0) {
      CoAttentionGrads eg;
      eg.d_W = Mat::Zero(params.W_E.rows(), params.W_E.cols());
      co_attention_backward(rec.e_c, e_news_seq, params.W_E, params.b_E[0], tr.att_ec, d_a_ec, eg);
      grads.W_E += eg.d_W;
      grads.b_E[0] += eg.d_b;
    }
  } else {
    double inv_ln = 1.0 / static_cast<double>(tr.h_sn.rows());
    for (int i = 0; i < d_h_sn.rows(); ++i) d_h_sn.row(i) += inv_ln * d_v_sn.transpose();
    for (int k = 0; k < dh2; ++k) {
      int j = tr.sc_argmax[k];
      if (j < 0) continue;
      double inv_lj = 1.0 / static_cast<double>(tr.h_sc[j].rows());
      for (int i = 0; i < d_h_sc[j].rows(); ++i) d_h_sc[j](i, k) += inv_lj * d_v_sc[k];
    }
    // a_en / a_ec are raw pooled features here; no parameters upstream.
  }

  bigru_backward(params.semantic, tr.news_trace, d_h_sn, grads.semantic);
  for (std::size_t j = 0; j < tr.h_sc.size(); ++j) {
    bigru_backward(params.semantic, tr.comment_traces[j], d_h_sc[j], grads.semantic);
  }

  if (cfg.use_temporal && M > 0) {
    Mat d_h_tc(M, dh2);
    for (int i = 0; i < M; ++i) d_h_tc.row(i) = d_e_tc.transpose() / static_cast<double>(M);
    bigru_backward(params.temporal, tr.temporal_trace, d_h_tc, grads.temporal);
  }
}

}  // namespace

double batch_loss_and_gradients(const std::vector<PreparedRecord>& batch,
                                const ModelParams& params, const ModelConfig& cfg,
                                ModelParams* grads) {
  if (batch.empty()) throw RuntimeError("empty batch");
  double total = 0.0;
  double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& rec : batch) {
    if (rec.label != 0 && rec.label != 1)
      throw RuntimeError("unlabeled record in training batch: " + rec.id);
    EncodeTrace tr;
    EncodedBundle bundle = encode_record(rec, params, cfg, grads ? &tr : nullptr);
    Vec prob = classify(bundle.x_nc, params);
    double p_fake = prob[1];
    total += supervised_loss(rec.label, p_fake);
    if (!grads) continue;

    Vec d_logits = Vec::Zero(2);
    if (p_fake > kProbEps && p_fake < 1.0 - kProbEps) {
      d_logits = prob;
      d_logits[rec.label] -= 1.0;  // softmax cross-entropy
    }
    d_logits *= inv_b;
    grads->W_X += d_logits * bundle.x_nc.transpose();
    grads->b_X += d_logits;
    Vec d_x = params.W_X.transpose() * d_logits;
    backprop_record(rec, params, cfg, tr, d_x, *grads);
  }
  double loss = total * inv_b;

  if (cfg.l2 > 0) {
    // Weight matrices only; biases excluded.
    double reg = 0.0;
    auto add = [&](const Mat& w, Mat* g) {
      reg += w.squaredNorm();
      if (g) *g += 2.0 * cfg.l2 * w;
    };
    auto gru = [&](const GruWeights& w, GruWeights* g) {
      add(w.Wz, g ? &g->Wz : nullptr);
      add(w.Wr, g ? &g->Wr : nullptr);
      add(w.Wh, g ? &g->Wh : nullptr);
      add(w.Uz, g ? &g->Uz : nullptr);
      add(w.Ur, g ? &g->Ur : nullptr);
      add(w.Uh, g ? &g->Uh : nullptr);
    };
    gru(params.semantic.fwd, grads ? &grads->semantic.fwd : nullptr);
    gru(params.semantic.bwd, grads ? &grads->semantic.bwd : nullptr);
    gru(params.temporal.fwd, grads ? &grads->temporal.fwd : nullptr);
    gru(params.temporal.bwd, grads ? &grads->temporal.bwd : nullptr);
    add(params.W_S, grads ? &grads->W_S : nullptr);
    add(params.W_E, grads ? &grads->W_E : nullptr);
    add(params.W_X, grads ? &grads->W_X : nullptr);
    loss += cfg.l2 * reg;
  }
  if (grads) check_finite(*grads, cfg, "gradient");
  return loss;
}

double batch_loss(const std::vector<PreparedRecord>& batch, const ModelParams& params,
                  const ModelConfig& cfg) {
  return batch_loss_and_gradients(batch, params, cfg, nullptr);
}

// --- checkpoints -----------------------------------------------------------

void save_checkpoint(const std::string& path, const ModelParams& params, const ModelConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write checkpoint: " + path);
  const char magic[8] = {'D', 'I', 'D', 'A', 'C', 'K', '0', '1'};
  out.write(magic, sizeof(magic));
  std::uint64_t hash = config_hash(cfg);
  out.write(reinterpret_cast<const char*>(&hash), sizeof(hash));
  Vec flat = flatten_params(params);
  std::uint64_t count = static_cast<std::uint64_t>(flat.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
}

ModelParams load_checkpoint(const std::string& path, const ModelConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, "DIDACK01", 8) != 0) throw RuntimeError("bad checkpoint magic: " + path);
  std::uint64_t hash = 0, count = 0;
  in.read(reinterpret_cast<char*>(&hash), sizeof(hash));
  if (hash != config_hash(cfg))
    throw RuntimeError("checkpoint config hash mismatch: " + path);
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  Vec flat(static_cast<int>(count));
  in.read(reinterpret_cast<char*>(flat.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw RuntimeError("truncated checkpoint: " + path);
  return unflatten_params(flat, cfg);
}

}  // namespace dida
