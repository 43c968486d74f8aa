// Copyright 2026 The mecdt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "model.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "container.h"
#include "parallel.h"
#include "status.h"

namespace mecdt {
namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using CMatMap = Eigen::Map<const Mat>;

constexpr double kLnEps = 1e-5;

struct BlockIndex {
  int ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
};

struct Index {
  int rtg_w, rtg_b, state_w, state_b, action_w, action_b, time, eln_g, eln_b;
  std::vector<BlockIndex> blocks;
  int fln_g, fln_b, head_w, head_b;
};

struct Layout {
  std::vector<TensorSpec> specs;
  Index idx;
  size_t total = 0;

  int Add(std::string name, int rows, int cols) {
    specs.push_back({std::move(name), rows, cols, total});
    total += static_cast<size_t>(rows) * cols;
    return static_cast<int>(specs.size()) - 1;
  }
};

Layout MakeLayout(const ModelConfig& c) {
  Layout l;
  const int d = c.embed_dim;
  const int h = c.embed_dim * c.ffn_mult;
  Index& i = l.idx;
  i.rtg_w = l.Add("embed_rtg.w", 1, d);
  i.rtg_b = l.Add("embed_rtg.b", 1, d);
  i.state_w = l.Add("embed_state.w", c.state_dim, d);
  i.state_b = l.Add("embed_state.b", 1, d);
  i.action_w = l.Add("embed_action.w", c.action_dim, d);
  i.action_b = l.Add("embed_action.b", 1, d);
  i.time = l.Add("embed_time", c.max_timestep, d);
  i.eln_g = l.Add("embed_ln.g", 1, d);
  i.eln_b = l.Add("embed_ln.b", 1, d);
  for (int b = 0; b < c.layers; ++b) {
    const std::string p = "block" + std::to_string(b) + ".";
    BlockIndex bi;
    bi.ln1_g = l.Add(p + "ln1.g", 1, d);
    bi.ln1_b = l.Add(p + "ln1.b", 1, d);
    bi.wq = l.Add(p + "attn.wq", d, d);
    bi.bq = l.Add(p + "attn.bq", 1, d);
    bi.wk = l.Add(p + "attn.wk", d, d);
    bi.bk = l.Add(p + "attn.bk", 1, d);
    bi.wv = l.Add(p + "attn.wv", d, d);
    bi.bv = l.Add(p + "attn.bv", 1, d);
    bi.wo = l.Add(p + "attn.wo", d, d);
    bi.bo = l.Add(p + "attn.bo", 1, d);
    bi.ln2_g = l.Add(p + "ln2.g", 1, d);
    bi.ln2_b = l.Add(p + "ln2.b", 1, d);
    bi.w1 = l.Add(p + "mlp.w1", d, h);
    bi.b1 = l.Add(p + "mlp.b1", 1, h);
    bi.w2 = l.Add(p + "mlp.w2", h, d);
    bi.b2 = l.Add(p + "mlp.b2", 1, d);
    i.blocks.push_back(bi);
  }
  i.fln_g = l.Add("final_ln.g", 1, d);
  i.fln_b = l.Add("final_ln.b", 1, d);
  i.head_w = l.Add("head.w", d, c.action_dim);
  i.head_b = l.Add("head.b", 1, c.action_dim);
  return l;
}

bool IsGain(const std::string& name) {
  return name.ends_with(".g");
}
bool IsBias(const std::string& name) {
  return name.ends_with(".b") || name.ends_with(".bq") ||
         name.ends_with(".bk") || name.ends_with(".bv") ||
         name.ends_with(".bo") || name.ends_with(".b1") || name.ends_with(".b2");
}

// Read-only and writable views over a flat buffer with the model layout.
class View {
 public:
  View(const Layout& l, const double* base) : l_(l), base_(base) {}
  CMatMap M(int t) const {
    const auto& s = l_.specs[t];
    return CMatMap(base_ + s.offset, s.rows, s.cols);
  }

 private:
  const Layout& l_;
  const double* base_;
};

class GradView {
 public:
  GradView(const Layout& l, double* base) : l_(l), base_(base) {}
  MatMap M(int t) const {
    const auto& s = l_.specs[t];
    return MatMap(base_ + s.offset, s.rows, s.cols);
  }

 private:
  const Layout& l_;
  double* base_;
};

double Feature(double x, InputTransform t) {
  if (t == InputTransform::kSymlog) return std::copysign(std::log1p(std::fabs(x)), x);
  return x;
}

struct Inputs {
  Mat rtg;      // n x 1
  Mat states;   // n x state_dim
  Mat actions;  // n x action_dim
  std::vector<int> timesteps;
  int prompt_steps = 0;
  int steps() const { return static_cast<int>(timesteps.size()); }
};

Inputs BuildInputs(const ModelConfig& cfg, const Prompt& prompt,
                   std::span<const SeqStep> context) {
  Inputs in;
  const int np = cfg.use_prompt ? static_cast<int>(prompt.size()) : 0;
  const int n = np + static_cast<int>(context.size());
  Require(n >= 1, "model input has no steps");
  in.prompt_steps = np;
  in.rtg.resize(n, 1);
  in.states.resize(n, cfg.state_dim);
  in.actions.resize(n, cfg.action_dim);
  in.timesteps.resize(n);
  const int u0 = cfg.state_dim - cfg.max_users();
  for (int i = 0; i < n; ++i) {
    const SeqStep& s = i < np ? prompt[i] : context[i - np];
    if (static_cast<int>(s.state.size()) != cfg.state_dim ||
        static_cast<int>(s.action.size()) != cfg.action_dim) {
      Fail(ErrorCode::kInvalidArgument,
           "shape mismatch: step has state/action dims " +
               std::to_string(s.state.size()) + "/" +
               std::to_string(s.action.size()) + ", model expects " +
               std::to_string(cfg.state_dim) + "/" +
               std::to_string(cfg.action_dim));
    }
    in.rtg(i, 0) = Feature(s.rtg / cfg.rtg_scale, cfg.transform);
    for (int j = 0; j < cfg.state_dim; ++j) {
      const bool drop = !cfg.use_user_info && j >= u0;
      in.states(i, j) = drop ? 0.0 : Feature(s.state[j], cfg.transform);
    }
    for (int j = 0; j < cfg.action_dim; ++j) in.actions(i, j) = s.action[j];
    in.timesteps[i] = std::clamp(s.timestep, 0, cfg.max_timestep - 1);
  }
  return in;
}

struct LnCache {
  Mat xhat;
  Eigen::VectorXd inv_std;
};

Mat LayerNorm(const Mat& x, const CMatMap& g, const CMatMap& b, LnCache* cache) {
  const int rows = static_cast<int>(x.rows());
  Mat y(rows, x.cols());
  Mat xhat(rows, x.cols());
  Eigen::VectorXd inv(rows);
  for (int r = 0; r < rows; ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    inv(r) = 1.0 / std::sqrt(var + kLnEps);
    xhat.row(r) = (x.row(r).array() - mu) * inv(r);
    y.row(r) = xhat.row(r).cwiseProduct(g.row(0)) + b.row(0);
  }
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv);
  }
  return y;
}

Mat LayerNormBackward(const Mat& dy, const LnCache& c, const CMatMap& g,
                      MatMap dg, MatMap db) {
  dg.row(0) += dy.cwiseProduct(c.xhat).colwise().sum();
  db.row(0) += dy.colwise().sum();
  Mat dx(dy.rows(), dy.cols());
  for (int r = 0; r < dy.rows(); ++r) {
    const Eigen::RowVectorXd dxhat = dy.row(r).cwiseProduct(g.row(0));
    const double m1 = dxhat.mean();
    const double m2 = dxhat.cwiseProduct(c.xhat.row(r)).mean();
    dx.row(r) = c.inv_std(r) * (dxhat.array() - m1 - c.xhat.row(r).array() * m2);
  }
  return dx;
}

Mat DropoutMask(int rows, int cols, const ModelConfig& cfg,
                const ForwardOptions& opts) {
  if (!opts.training || cfg.dropout <= 0.0) return Mat();
  Require(opts.rng != nullptr, "training with dropout needs an rng");
  std::bernoulli_distribution keep(1.0 - cfg.dropout);
  const double scale = 1.0 / (1.0 - cfg.dropout);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = keep(*opts.rng) ? scale : 0.0;
  }
  return m;
}

void ApplyMask(Mat& x, const Mat& mask) {
  if (mask.size() > 0) x.array() *= mask.array();
}

struct BlockCache {
  LnCache ln1;
  Mat a, q, k, v, p, o;
  Mat mask1;
  LnCache ln2;
  Mat c, hpre;
  Mat mask2;
};

struct Tape {
  Inputs in;
  LnCache eln;
  Mat mask0;
  std::vector<BlockCache> blocks;
  LnCache fln;
  Mat f;     // final normalized activations, all tokens
  Mat pred;  // steps x action_dim
};

// Runs the network; fills 'tape' when it is non-null.
Mat RunForward(const ModelConfig& cfg, const Layout& lay, const View& w,
               const Inputs& in, const ForwardOptions& opts, Tape* tape) {
  const Index& ix = lay.idx;
  const int n = in.steps();
  const int tokens = 3 * n;
  const int d = cfg.embed_dim;

  Mat h0(tokens, d);
  const auto time = w.M(ix.time);
  const auto rtg_w = w.M(ix.rtg_w);
  const Mat state_emb = in.states * w.M(ix.state_w);
  const Mat action_emb = in.actions * w.M(ix.action_w);
  for (int i = 0; i < n; ++i) {
    const auto te = time.row(in.timesteps[i]);
    h0.row(3 * i) = in.rtg(i, 0) * rtg_w.row(0) + w.M(ix.rtg_b).row(0) + te;
    h0.row(3 * i + 1) = state_emb.row(i) + w.M(ix.state_b).row(0) + te;
    h0.row(3 * i + 2) = action_emb.row(i) + w.M(ix.action_b).row(0) + te;
  }
  Mat x = LayerNorm(h0, w.M(ix.eln_g), w.M(ix.eln_b), tape ? &tape->eln : nullptr);
  Mat mask0 = DropoutMask(tokens, d, cfg, opts);
  ApplyMask(x, mask0);
  if (tape) {
    tape->mask0 = std::move(mask0);
    tape->blocks.resize(cfg.layers);
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int l = 0; l < cfg.layers; ++l) {
    const BlockIndex& b = ix.blocks[l];
    BlockCache local;
    BlockCache& bc = tape ? tape->blocks[l] : local;

    bc.a = LayerNorm(x, w.M(b.ln1_g), w.M(b.ln1_b), &bc.ln1);
    bc.q = (bc.a * w.M(b.wq)).rowwise() + w.M(b.bq).row(0);
    bc.k = (bc.a * w.M(b.wk)).rowwise() + w.M(b.bk).row(0);
    bc.v = (bc.a * w.M(b.wv)).rowwise() + w.M(b.bv).row(0);
    bc.p = (bc.q * bc.k.transpose()) * scale;
    // Causal softmax: row i attends to columns 0..i only.
    for (int i = 0; i < tokens; ++i) {
      const double mx = bc.p.row(i).head(i + 1).maxCoeff();
      double sum = 0.0;
      for (int j = 0; j <= i; ++j) {
        const double e = std::exp(bc.p(i, j) - mx);
        bc.p(i, j) = e;
        sum += e;
      }
      bc.p.row(i).head(i + 1) /= sum;
      bc.p.row(i).tail(tokens - i - 1).setZero();
    }
    bc.o = bc.p * bc.v;
    Mat y = (bc.o * w.M(b.wo)).rowwise() + w.M(b.bo).row(0);
    bc.mask1 = DropoutMask(tokens, d, cfg, opts);
    ApplyMask(y, bc.mask1);
    x += y;

    bc.c = LayerNorm(x, w.M(b.ln2_g), w.M(b.ln2_b), &bc.ln2);
    bc.hpre = (bc.c * w.M(b.w1)).rowwise() + w.M(b.b1).row(0);
    const Mat hid = bc.hpre.cwiseMax(0.0);
    Mat z = (hid * w.M(b.w2)).rowwise() + w.M(b.b2).row(0);
    bc.mask2 = DropoutMask(tokens, d, cfg, opts);
    ApplyMask(z, bc.mask2);
    x += z;
  }

  Mat f = LayerNorm(x, w.M(ix.fln_g), w.M(ix.fln_b), tape ? &tape->fln : nullptr);
  Mat pred(n, cfg.action_dim);
  const auto head_w = w.M(ix.head_w);
  const auto head_b = w.M(ix.head_b);
  for (int i = 0; i < n; ++i) {
    const Eigen::RowVectorXd logits = f.row(3 * i + 1) * head_w + head_b.row(0);
    pred.row(i) = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
  }
  if (tape) {
    tape->f = std::move(f);
    tape->pred = pred;
  }
  return pred;
}

// Accumulates d(loss)/d(params) into 'g' given d(loss)/d(pred).
void RunBackward(const ModelConfig& cfg, const Layout& lay, const View& w,
                 const Tape& tape, const Mat& dpred, const GradView& g) {
  const Index& ix = lay.idx;
  const Inputs& in = tape.in;
  const int n = in.steps();
  const int tokens = 3 * n;
  const int d = cfg.embed_dim;

  // Head: pred = sigmoid(f_state * W + b).
  const Mat dlogits = dpred.cwiseProduct(
      tape.pred.cwiseProduct((1.0 - tape.pred.array()).matrix()));
  Mat f_state(n, d);
  for (int i = 0; i < n; ++i) f_state.row(i) = tape.f.row(3 * i + 1);
  g.M(ix.head_w).noalias() += f_state.transpose() * dlogits;
  g.M(ix.head_b).row(0) += dlogits.colwise().sum();
  const Mat df_state = dlogits * w.M(ix.head_w).transpose();
  Mat df = Mat::Zero(tokens, d);
  for (int i = 0; i < n; ++i) df.row(3 * i + 1) = df_state.row(i);

  Mat dx = LayerNormBackward(df, tape.fln, w.M(ix.fln_g), g.M(ix.fln_g),
                             g.M(ix.fln_b));

  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int l = cfg.layers - 1; l >= 0; --l) {
    const BlockIndex& b = ix.blocks[l];
    const BlockCache& bc = tape.blocks[l];

    // MLP branch.
    Mat dz = dx;
    ApplyMask(dz, bc.mask2);
    const Mat hid = bc.hpre.cwiseMax(0.0);
    g.M(b.w2).noalias() += hid.transpose() * dz;
    g.M(b.b2).row(0) += dz.colwise().sum();
    Mat dh = dz * w.M(b.w2).transpose();
    dh.array() *= (bc.hpre.array() > 0.0).cast<double>();
    g.M(b.w1).noalias() += bc.c.transpose() * dh;
    g.M(b.b1).row(0) += dh.colwise().sum();
    const Mat dc = dh * w.M(b.w1).transpose();
    dx += LayerNormBackward(dc, bc.ln2, w.M(b.ln2_g), g.M(b.ln2_g), g.M(b.ln2_b));

    // Attention branch.
    Mat dy = dx;
    ApplyMask(dy, bc.mask1);
    g.M(b.wo).noalias() += bc.o.transpose() * dy;
    g.M(b.bo).row(0) += dy.colwise().sum();
    const Mat d_o = dy * w.M(b.wo).transpose();
    const Mat dp = d_o * bc.v.transpose();
    const Mat dv = bc.p.transpose() * d_o;
    Mat ds = Mat::Zero(tokens, tokens);
    for (int i = 0; i < tokens; ++i) {
      const double dot = dp.row(i).head(i + 1).dot(bc.p.row(i).head(i + 1));
      for (int j = 0; j <= i; ++j) ds(i, j) = bc.p(i, j) * (dp(i, j) - dot);
    }
    ds *= scale;
    const Mat dq = ds * bc.k;
    const Mat dk = ds.transpose() * bc.q;
    g.M(b.wq).noalias() += bc.a.transpose() * dq;
    g.M(b.bq).row(0) += dq.colwise().sum();
    g.M(b.wk).noalias() += bc.a.transpose() * dk;
    g.M(b.bk).row(0) += dk.colwise().sum();
    g.M(b.wv).noalias() += bc.a.transpose() * dv;
    g.M(b.bv).row(0) += dv.colwise().sum();
    const Mat da = dq * w.M(b.wq).transpose() + dk * w.M(b.wk).transpose() +
                   dv * w.M(b.wv).transpose();
    dx += LayerNormBackward(da, bc.ln1, w.M(b.ln1_g), g.M(b.ln1_g), g.M(b.ln1_b));
  }

  ApplyMask(dx, tape.mask0);
  const Mat dh0 = LayerNormBackward(dx, tape.eln, w.M(ix.eln_g), g.M(ix.eln_g),
                                    g.M(ix.eln_b));
  Mat d_state(n, d);
  Mat d_action(n, d);
  auto gtime = g.M(ix.time);
  for (int i = 0; i < n; ++i) {
    const int t = in.timesteps[i];
    g.M(ix.rtg_w).row(0) += in.rtg(i, 0) * dh0.row(3 * i);
    g.M(ix.rtg_b).row(0) += dh0.row(3 * i);
    d_state.row(i) = dh0.row(3 * i + 1);
    d_action.row(i) = dh0.row(3 * i + 2);
    gtime.row(t) += dh0.row(3 * i) + dh0.row(3 * i + 1) + dh0.row(3 * i + 2);
  }
  g.M(ix.state_w).noalias() += in.states.transpose() * d_state;
  g.M(ix.state_b).row(0) += d_state.colwise().sum();
  g.M(ix.action_w).noalias() += in.actions.transpose() * d_action;
  g.M(ix.action_b).row(0) += d_action.colwise().sum();
}

void CheckFinite(const ModelParams& params) {
  if (!params.AllFinite()) {
    Fail(ErrorCode::kInvalidArgument, "model parameters contain non-finite values");
  }
}

std::vector<Action> ToActions(const Mat& pred) {
  std::vector<Action> out(pred.rows());
  for (int i = 0; i < pred.rows(); ++i) {
    out[i].assign(pred.row(i).data(), pred.row(i).data() + pred.cols());
  }
  return out;
}

// Targets and loss mask of one sample, restricted to the steps the model
// actually sees (the prompt is dropped by the no-prompt ablation).
void SampleTargets(const ModelConfig& cfg, const Sample& s, Mat* target,
                   std::vector<double>* mask) {
  const int np = cfg.use_prompt ? static_cast<int>(s.prompt.size()) : 0;
  const int n = np + static_cast<int>(s.context.size());
  const int offset = cfg.use_prompt ? 0 : static_cast<int>(s.prompt.size());
  const size_t full = s.prompt.size() + s.context.size();
  Require(s.mask.empty() || s.mask.size() == full,
          "shape mismatch: loss mask length");
  target->resize(n, cfg.action_dim);
  mask->assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    const SeqStep& st = i < np ? s.prompt[i] : s.context[i - np];
    for (int j = 0; j < cfg.action_dim; ++j) (*target)(i, j) = st.action[j];
    if (!s.mask.empty()) (*mask)[i] = s.mask[i + offset];
  }
}

}  // namespace

void ModelConfig::Validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) Fail(ErrorCode::kConfig, "invalid model config: " + what);
  };
  check(embed_dim >= 1, "embed_dim must be >= 1");
  check(layers >= 1, "layers must be >= 1");
  check(heads == 1, "only single-head attention is supported");
  check(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  check(action_dim >= kActionPerUser && action_dim % kActionPerUser == 0,
        "action_dim must be a positive multiple of 5");
  check(state_dim == StateDim(max_users()),
        "state_dim must be 11*K_max + 2 + K_max (= " +
            std::to_string(StateDim(max_users())) + " for action_dim " +
            std::to_string(action_dim) + ")");
  check(max_timestep >= 1, "max_timestep must be >= 1");
  check(ffn_mult >= 1, "ffn_mult must be >= 1");
  check(init_std > 0, "init_std must be > 0");
  check(prompt_len >= 1 && context_len >= 1, "sequence lengths must be >= 1");
  check(rtg_scale > 0, "rtg_scale must be > 0");
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"embed_dim", embed_dim},
          {"layers", layers},
          {"heads", heads},
          {"dropout", dropout},
          {"state_dim", state_dim},
          {"action_dim", action_dim},
          {"max_timestep", max_timestep},
          {"ffn_mult", ffn_mult},
          {"init_std", init_std},
          {"prompt_len", prompt_len},
          {"context_len", context_len},
          {"rtg_scale", rtg_scale},
          {"transform", transform == InputTransform::kSymlog ? "symlog" : "linear"},
          {"use_prompt", use_prompt},
          {"use_user_info", use_user_info}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  ModelConfig c;
  c.embed_dim = j.at("embed_dim").get<int>();
  c.layers = j.at("layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.state_dim = j.at("state_dim").get<int>();
  c.action_dim = j.at("action_dim").get<int>();
  c.max_timestep = j.at("max_timestep").get<int>();
  c.ffn_mult = j.at("ffn_mult").get<int>();
  c.init_std = j.at("init_std").get<double>();
  c.prompt_len = j.at("prompt_len").get<int>();
  c.context_len = j.at("context_len").get<int>();
  c.rtg_scale = j.at("rtg_scale").get<double>();
  c.transform = j.at("transform").get<std::string>() == "symlog"
                    ? InputTransform::kSymlog
                    : InputTransform::kLinear;
  c.use_prompt = j.at("use_prompt").get<bool>();
  c.use_user_info = j.at("use_user_info").get<bool>();
  return c;
}

std::string ModelConfig::DimensionDiff(const ModelConfig& o) const {
  std::string diff;
  auto cmp = [&](const char* name, int mine, int theirs) {
    if (mine != theirs) {
      if (!diff.empty()) diff += "; ";
      diff += std::string(name) + ": expected " + std::to_string(mine) +
              ", got " + std::to_string(theirs);
    }
  };
  cmp("state_dim", state_dim, o.state_dim);
  cmp("action_dim", action_dim, o.action_dim);
  cmp("embed_dim", embed_dim, o.embed_dim);
  cmp("layers", layers, o.layers);
  cmp("heads", heads, o.heads);
  cmp("max_timestep", max_timestep, o.max_timestep);
  cmp("ffn_mult", ffn_mult, o.ffn_mult);
  return diff;
}

ModelConfig ModelConfigForUsers(int max_users) {
  ModelConfig c;
  c.state_dim = StateDim(max_users);
  c.action_dim = ActionDim(max_users);
  return c;
}

ModelParams::ModelParams(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.Validate();
  Layout l = MakeLayout(cfg_);
  layout_ = std::move(l.specs);
  values_.assign(l.total, 0.0);
}

ModelParams ModelParams::Init(const ModelConfig& cfg, uint64_t seed) {
  ModelParams p(cfg);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, cfg.init_std);
  for (const auto& t : p.layout_) {
    double* base = p.values_.data() + t.offset;
    if (IsGain(t.name)) {
      std::fill(base, base + t.size(), 1.0);
    } else if (IsBias(t.name)) {
      std::fill(base, base + t.size(), 0.0);
    } else {
      for (size_t i = 0; i < t.size(); ++i) base[i] = normal(rng);
    }
  }
  return p;
}

const TensorSpec& ModelParams::Find(const std::string& name) const {
  for (const auto& t : layout_) {
    if (t.name == name) return t;
  }
  Fail(ErrorCode::kInvalidArgument, "no parameter tensor named " + name);
}

bool ModelParams::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

ModelParams ModelParams::WithPromptLen(int prompt_len) const {
  ModelParams out = *this;
  out.cfg_.prompt_len = prompt_len;
  out.cfg_.Validate();
  return out;
}

std::vector<Action> Forward(const ModelParams& params, const Sample& sample,
                            const ForwardOptions& opts) {
  CheckFinite(params);
  const ModelConfig& cfg = params.config();
  const Layout lay = MakeLayout(cfg);
  const View w(lay, params.values().data());
  const Inputs in = BuildInputs(cfg, sample.prompt, sample.context);
  return ToActions(RunForward(cfg, lay, w, in, opts, nullptr));
}

double MseLoss(std::span<const Action> pred, std::span<const Action> target,
               std::span<const double> mask) {
  Require(pred.size() == target.size(), "shape mismatch: pred/target steps");
  Require(mask.empty() || mask.size() == pred.size(),
          "shape mismatch: mask length");
  double sum = 0.0;
  double count = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    Require(pred[i].size() == target[i].size(),
            "shape mismatch: pred/target action dims");
    const double m = mask.empty() ? 1.0 : mask[i];
    if (m == 0.0) continue;
    for (size_t j = 0; j < pred[i].size(); ++j) {
      const double e = pred[i][j] - target[i][j];
      sum += m * e * e;
    }
    count += m * static_cast<double>(pred[i].size());
  }
  return count > 0 ? sum / count : 0.0;
}

LossAndGrad LossGrad(const ModelParams& params, std::span<const Sample> batch,
                     const ForwardOptions& opts, int threads) {
  CheckFinite(params);
  Require(!batch.empty(), "empty batch");
  const ModelConfig& cfg = params.config();
  const Layout lay = MakeLayout(cfg);
  const View w(lay, params.values().data());

  std::vector<Mat> targets(batch.size());
  std::vector<std::vector<double>> masks(batch.size());
  double count = 0.0;
  for (size_t s = 0; s < batch.size(); ++s) {
    SampleTargets(cfg, batch[s], &targets[s], &masks[s]);
    for (double m : masks[s]) count += m * cfg.action_dim;
  }

  LossAndGrad out;
  out.grad.assign(params.size(), 0.0);
  if (count == 0.0) return out;

  // Samples are split into contiguous chunks; chunk buffers are summed in
  // chunk order so the result depends only on the thread count.
  const int n = static_cast<int>(batch.size());
  const int chunks = std::max(1, std::min(threads, n));
  std::vector<ParamVector> grads(chunks);
  std::vector<double> losses(chunks, 0.0);
  std::vector<Rng> rngs;
  for (int c = 0; c < chunks; ++c) {
    rngs.emplace_back(opts.rng ? (*opts.rng)() : 0);
  }
  ParallelFor(chunks, chunks, [&](int c) {
    ParamVector& buf = c == 0 ? out.grad : grads[c];
    if (c != 0) buf.assign(params.size(), 0.0);
    const GradView g(lay, buf.data());
    ForwardOptions local = opts;
    local.rng = &rngs[c];
    const int begin = n * c / chunks;
    const int end = n * (c + 1) / chunks;
    for (int s = begin; s < end; ++s) {
      Tape tape;
      tape.in = BuildInputs(cfg, batch[s].prompt, batch[s].context);
      const Mat pred = RunForward(cfg, lay, w, tape.in, local, &tape);
      Mat diff = pred - targets[s];
      for (int i = 0; i < diff.rows(); ++i) {
        losses[c] += masks[s][i] * diff.row(i).squaredNorm();
        diff.row(i) *= masks[s][i];
      }
      RunBackward(cfg, lay, w, tape, (2.0 / count) * diff, g);
    }
  });
  for (int c = 1; c < chunks; ++c) {
    for (size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += grads[c][i];
  }
  for (double l : losses) out.loss += l;
  out.loss /= count;
  if (!std::isfinite(out.loss)) {
    Fail(ErrorCode::kInvalidArgument, "non-finite loss");
  }
  return out;
}

double BatchLoss(const ModelParams& params, std::span<const Sample> batch) {
  CheckFinite(params);
  const ModelConfig& cfg = params.config();
  const Layout lay = MakeLayout(cfg);
  const View w(lay, params.values().data());
  double sum = 0.0;
  double count = 0.0;
  for (const Sample& s : batch) {
    Mat target;
    std::vector<double> mask;
    SampleTargets(cfg, s, &target, &mask);
    const Mat pred = RunForward(cfg, lay, w, BuildInputs(cfg, s.prompt, s.context),
                                ForwardOptions{}, nullptr);
    for (int i = 0; i < pred.rows(); ++i) {
      sum += mask[i] * (pred.row(i) - target.row(i)).squaredNorm();
      count += mask[i] * cfg.action_dim;
    }
  }
  return count > 0 ? sum / count : 0.0;
}

Action PredictNextAction(const ModelParams& params, const Prompt& prompt,
                         std::span<const SeqStep> context, int active_users) {
  Require(!context.empty(), "prediction needs a non-empty context");
  CheckFinite(params);
  const ModelConfig& cfg = params.config();
  Require(active_users >= 0 && active_users <= cfg.max_users(),
          "active users exceed the model's max_users");
  const size_t keep = std::min<size_t>(context.size(), cfg.context_len);
  std::vector<SeqStep> window(context.end() - keep, context.end());
  // Zero placeholder for the action that is about to be predicted.
  std::fill(window.back().action.begin(), window.back().action.end(), 0.0);

  const Layout lay = MakeLayout(cfg);
  const View w(lay, params.values().data());
  const Inputs in = BuildInputs(cfg, prompt, window);
  const Mat pred = RunForward(cfg, lay, w, in, ForwardOptions{}, nullptr);
  Action out(pred.row(pred.rows() - 1).data(),
             pred.row(pred.rows() - 1).data() + pred.cols());
  std::fill(out.begin() + active_users * kActionPerUser, out.end(), 0.0);
  return out;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  Container c;
  c.kind = "ckpt";
  c.meta["model_config"] = ckpt.params.config().ToJson();
  c.meta["round"] = ckpt.round;
  c.meta["optimizer"] = ckpt.optimizer;
  c.meta["extra"] = ckpt.extra;
  for (const auto& t : ckpt.params.layout()) {
    const double* base = ckpt.params.values().data() + t.offset;
    c.arrays.push_back({t.name, {t.rows, t.cols},
                        std::vector<double>(base, base + t.size())});
  }
  WriteContainer(path, c);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path,
                          const ModelConfig* expected) {
  const Container c = ReadContainer(path, "ckpt");
  Checkpoint out;
  try {
    const ModelConfig cfg = ModelConfig::FromJson(c.meta.at("model_config"));
    if (expected) {
      const std::string diff = expected->DimensionDiff(cfg);
      if (!diff.empty()) {
        Fail(ErrorCode::kIntegrity, "checkpoint dimension mismatch: " + diff);
      }
    }
    out.params = ModelParams(cfg);
    out.round = c.meta.at("round").get<int>();
    out.optimizer = c.meta.at("optimizer");
    out.extra = c.meta.at("extra");
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kIntegrity, std::string("bad checkpoint metadata: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIntegrity) throw;
    Fail(ErrorCode::kIntegrity, std::string("bad checkpoint config: ") + e.what());
  }
  if (c.arrays.size() != out.params.layout().size()) {
    Fail(ErrorCode::kIntegrity, "checkpoint tensor count mismatch");
  }
  for (size_t i = 0; i < c.arrays.size(); ++i) {
    const TensorSpec& t = out.params.layout()[i];
    const NamedArray& a = c.arrays[i];
    if (a.name != t.name || a.shape != std::vector<int64_t>{t.rows, t.cols}) {
      Fail(ErrorCode::kIntegrity, "checkpoint tensor '" + a.name +
                                      "' does not match layout entry '" +
                                      t.name + "'");
    }
    std::copy(a.data.begin(), a.data.end(), out.params.values().begin() + t.offset);
  }
  if (!out.params.AllFinite()) {
    Fail(ErrorCode::kIntegrity, "checkpoint contains non-finite parameters");
  }
  return out;
}

std::string ParamsDigest(const ModelParams& params) {
  return Sha256Hex(params.values().data(), params.values().size() * sizeof(double));
}

}  // namespace mecdt
