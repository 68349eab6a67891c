#include "gvae/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gvae/error.hpp"

namespace gvae {

namespace {

void check_dims(const ModelDims& d) {
  if (d.nodes == 0 || d.features == 0 || d.hidden == 0 || d.latent == 0) {
    throw DimensionError("model dims must all be at least 1");
  }
  if (d.depth < 1) throw DimensionError("conv depth must be at least 1");
}

void glorot_fill(DenseMatrix& m, Rng& rng) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (double& v : m.values()) v = (2.0 * rng.uniform() - 1.0) * bound;
}

double softplus(double x) {
  // log(1 + exp(x)) without overflow.
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// out.row(a) += coef[a] * in.row(a) * w  for each active row a.
void add_scaled_rows_matmul(const DenseMatrix& in, const DenseMatrix& w,
                            std::span<const std::uint32_t> active,
                            std::span<const double> coef, DenseMatrix& out) {
  const std::size_t inner = w.rows();
  const std::size_t cols = w.cols();
  for (auto a : active) {
    const double scale = coef[a];
    if (scale == 0.0) continue;
    const double* irow = in.row_ptr(a);
    double* orow = out.row_ptr(a);
    for (std::size_t k = 0; k < inner; ++k) {
      const double v = scale * irow[k];
      const double* wrow = w.row_ptr(k);
      for (std::size_t j = 0; j < cols; ++j) orow[j] += v * wrow[j];
    }
  }
}

// dw += sum over active rows a of coef[a] * in.row(a)^T * dout.row(a).
void add_scaled_rows_outer(const DenseMatrix& in, const DenseMatrix& dout,
                           std::span<const std::uint32_t> active,
                           std::span<const double> coef, DenseMatrix& dw) {
  const std::size_t rows = dw.rows();
  const std::size_t cols = dw.cols();
  for (auto a : active) {
    const double scale = coef[a];
    if (scale == 0.0) continue;
    const double* irow = in.row_ptr(a);
    const double* drow = dout.row_ptr(a);
    for (std::size_t k = 0; k < rows; ++k) {
      const double v = scale * irow[k];
      double* wrow = dw.row_ptr(k);
      for (std::size_t j = 0; j < cols; ++j) wrow[j] += v * drow[j];
    }
  }
}

// out.row(a) = coef[a] * dout.row(a) * w^T for each active row a.
void scaled_rows_matmul_bt(const DenseMatrix& dout, const DenseMatrix& w,
                           std::span<const std::uint32_t> active,
                           std::span<const double> coef, DenseMatrix& out) {
  const std::size_t cols = w.rows();
  const std::size_t inner = w.cols();
  for (auto a : active) {
    const double scale = coef[a];
    const double* drow = dout.row_ptr(a);
    double* orow = out.row_ptr(a);
    for (std::size_t k = 0; k < cols; ++k) {
      const double* wrow = w.row_ptr(k);
      double acc = 0.0;
      for (std::size_t j = 0; j < inner; ++j) acc += drow[j] * wrow[j];
      orow[k] = scale * acc;
    }
  }
}

std::vector<double> inverse_degrees(const DegreeVector& deg) {
  std::vector<double> inv(deg.size(), 0.0);
  for (std::size_t i = 0; i < deg.size(); ++i) {
    if (deg[i] > 0) inv[i] = 1.0 / static_cast<double>(deg[i]);
  }
  return inv;
}

std::vector<QueryPair> queries_from_edges(std::span<const Edge> edges) {
  std::vector<QueryPair> q;
  q.reserve(edges.size());
  for (const auto& e : edges) q.push_back({e.student, e.course});
  return q;
}

}  // namespace

ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
  check_dims(dims);
  ModelParams p;
  p.dims = dims;
  p.node_features = DenseMatrix(dims.nodes, dims.features);
  p.conv_weights.resize(static_cast<std::size_t>(dims.depth));
  for (int layer = 0; layer < dims.depth; ++layer) {
    const std::size_t in_dim = layer == 0 ? dims.features : dims.hidden;
    for (auto& w : p.conv_weights[static_cast<std::size_t>(layer)]) {
      w = DenseMatrix(in_dim, dims.hidden);
    }
  }
  p.head_mean = DenseMatrix(dims.hidden, dims.latent);
  p.head_log_std = DenseMatrix(dims.hidden, dims.latent);
  for (auto& h : p.channel_weights) h = DenseMatrix(dims.nodes, dims.latent);

  Rng rng = Rng(seed).fork(seed_purpose::kInit);
  for_each_tensor(p, [&](const std::string&, DenseMatrix& t) { glorot_fill(t, rng); });
  return p;
}

Gradients zero_gradients(const ModelParams& params) {
  Gradients g;
  g.node_features = DenseMatrix(params.node_features.rows(), params.node_features.cols());
  g.conv_weights.resize(params.conv_weights.size());
  for (std::size_t l = 0; l < params.conv_weights.size(); ++l) {
    for (int r = 0; r < kNumLevels; ++r) {
      const auto& w = params.conv_weights[l][static_cast<std::size_t>(r)];
      g.conv_weights[l][static_cast<std::size_t>(r)] = DenseMatrix(w.rows(), w.cols());
    }
  }
  g.head_mean = DenseMatrix(params.head_mean.rows(), params.head_mean.cols());
  g.head_log_std = DenseMatrix(params.head_log_std.rows(), params.head_log_std.cols());
  for (int r = 0; r < kNumLevels; ++r) {
    const auto& h = params.channel_weights[static_cast<std::size_t>(r)];
    g.channel_weights[static_cast<std::size_t>(r)] = DenseMatrix(h.rows(), h.cols());
  }
  return g;
}

std::vector<ParamView> param_views(ModelParams& params, const Gradients& grads) {
  std::vector<ParamView> views;
  std::vector<std::pair<std::string, DenseMatrix*>> ps;
  for_each_tensor(params, [&](const std::string& name, DenseMatrix& t) {
    ps.emplace_back(name, &t);
  });
  std::vector<const DenseMatrix*> gs;
  for_each_tensor(grads, [&](const std::string&, const DenseMatrix& t) { gs.push_back(&t); });
  if (ps.size() != gs.size()) throw DimensionError("param/gradient tensor count mismatch");
  views.reserve(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    views.push_back({ps[i].first, ps[i].second, gs[i]});
  }
  return views;
}

DropoutMask no_dropout(std::size_t nodes) {
  return DropoutMask{std::vector<double>(nodes, 1.0)};
}

DropoutMask sample_dropout(std::size_t nodes, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw DataError("dropout rate must lie in [0,1)");
  if (rate == 0.0) return no_dropout(nodes);
  DropoutMask mask;
  mask.row_scale.resize(nodes);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& s : mask.row_scale) s = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

EncodeResult encode(const LevelAdjacency& adj, const DegreeVector& deg,
                    const ModelParams& params, const DropoutMask& mask) {
  const ModelDims& dims = params.dims;
  check_dims(dims);
  if (adj.num_nodes() != dims.nodes || deg.size() != dims.nodes ||
      mask.row_scale.size() != dims.nodes) {
    throw DimensionError("encode: node count mismatch");
  }

  const std::vector<double> inv_deg = inverse_degrees(deg);
  const std::size_t n_nodes = dims.nodes;
  EncodeResult out;
  out.layer_out.reserve(static_cast<std::size_t>(dims.depth));

  const DenseMatrix* input = &params.node_features;
  DenseMatrix messages;  // scratch for M_r * input
  for (int layer = 0; layer < dims.depth; ++layer) {
    DenseMatrix pre(n_nodes, dims.hidden);
    for (int r = 1; r <= kNumLevels; ++r) {
      const auto& sym = adj.symmetric(r);
      if (sym.nnz() == 0) continue;
      messages = DenseMatrix(n_nodes, input->cols());
      spmm_add_into(sym, *input, messages);
      add_scaled_rows_matmul(
          messages,
          params.conv_weights[static_cast<std::size_t>(layer)][static_cast<std::size_t>(r - 1)],
          adj.active_nodes(r), inv_deg, pre);
    }
    for (double& v : pre.values()) v = v > 0.0 ? v : 0.0;
    out.layer_out.push_back(std::move(pre));
    input = &out.layer_out.back();
  }

  out.hidden_dropped = out.layer_out.back();
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double scale = mask.row_scale[i];
    if (scale == 1.0) continue;
    double* row = out.hidden_dropped.row_ptr(i);
    for (std::size_t j = 0; j < dims.hidden; ++j) row[j] *= scale;
  }

  matmul_into(out.hidden_dropped, params.head_mean, out.z_mean);
  matmul_into(out.hidden_dropped, params.head_log_std, out.z_log_std);
  return out;
}

DenseMatrix sample_epsilon(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix eps(rows, cols);
  for (double& v : eps.values()) v = rng.normal();
  return eps;
}

DenseMatrix apply_reparam(const DenseMatrix& z_mean, const DenseMatrix& z_log_std,
                          const DenseMatrix& epsilon) {
  if (!z_mean.same_shape(z_log_std) || !z_mean.same_shape(epsilon)) {
    throw DimensionError("reparameterize: shape mismatch");
  }
  DenseMatrix z(z_mean.rows(), z_mean.cols());
  auto zv = z.values();
  auto mv = z_mean.values();
  auto sv = z_log_std.values();
  auto ev = epsilon.values();
  for (std::size_t i = 0; i < zv.size(); ++i) {
    zv[i] = mv[i] + ev[i] * std::exp(sv[i]);
  }
  return z;
}

Reparam reparameterize(const DenseMatrix& z_mean, const DenseMatrix& z_log_std, Rng& rng) {
  Reparam out;
  out.epsilon = sample_epsilon(z_mean.rows(), z_mean.cols(), rng);
  out.z = apply_reparam(z_mean, z_log_std, out.epsilon);
  return out;
}

double kl_cost(const DenseMatrix& z_mean, const DenseMatrix& z_log_std) {
  if (!z_mean.same_shape(z_log_std)) throw DimensionError("kl_cost: shape mismatch");
  double total = 0.0;
  auto mv = z_mean.values();
  auto sv = z_log_std.values();
  for (std::size_t i = 0; i < mv.size(); ++i) {
    const double mu = mv[i];
    const double s = sv[i];
    total += -0.5 * (1.0 + 2.0 * s - mu * mu - std::exp(2.0 * s));
  }
  return total;
}

PredictionTensor decode(const DenseMatrix& z,
                        const std::array<DenseMatrix, kNumLevels>& channel_weights,
                        std::size_t num_students, std::span<const QueryPair> queries) {
  const std::size_t n_nodes = z.rows();
  const std::size_t latent = z.cols();
  PredictionTensor out;
  out.queries.assign(queries.begin(), queries.end());
  out.logits = DenseMatrix(queries.size(), kNumLevels);
  out.probs = DenseMatrix(queries.size(), kNumLevels);
  out.expected_level.resize(queries.size());
  out.argmax_level.resize(queries.size());

  for (std::size_t t = 0; t < queries.size(); ++t) {
    const auto& q = queries[t];
    const std::size_t course_node = num_students + q.course;
    if (q.student >= num_students || course_node >= n_nodes) {
      throw DataError("decode: query (" + std::to_string(q.student) + "," +
                      std::to_string(q.course) + ") out of range");
    }
    const double* zi = z.row_ptr(q.student);
    const double* zc = z.row_ptr(course_node);
    double* logits = out.logits.row_ptr(t);
    for (int r = 0; r < kNumLevels; ++r) {
      const double* h = channel_weights[static_cast<std::size_t>(r)].row_ptr(q.student);
      double acc = 0.0;
      for (std::size_t k = 0; k < latent; ++k) acc += zi[k] * h[k] * zc[k];
      logits[r] = acc;
    }

    double max_logit = logits[0];
    for (int r = 1; r < kNumLevels; ++r) max_logit = std::max(max_logit, logits[r]);
    double norm = 0.0;
    double* probs = out.probs.row_ptr(t);
    for (int r = 0; r < kNumLevels; ++r) {
      probs[r] = std::exp(logits[r] - max_logit);
      norm += probs[r];
    }
    double expected = 0.0;
    int argmax = 0;
    for (int r = 0; r < kNumLevels; ++r) {
      probs[r] /= norm;
      expected += static_cast<double>(r + 1) * probs[r];
      if (probs[r] > probs[argmax]) argmax = r;
    }
    out.expected_level[t] = expected;
    out.argmax_level[t] = argmax + 1;
  }
  return out;
}

double cross_entropy(const PredictionTensor& pred, std::span<const int> truth_levels) {
  if (truth_levels.size() != pred.queries.size()) {
    throw DimensionError("cross_entropy: one truth level per prediction required");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < truth_levels.size(); ++t) {
    const int level = truth_levels[t];
    if (level < 1 || level > kNumLevels) {
      throw DataError("cross_entropy: level " + std::to_string(level) + " outside 1..10");
    }
    const double* logits = pred.logits.row_ptr(t);
    double max_logit = logits[0];
    for (int r = 1; r < kNumLevels; ++r) max_logit = std::max(max_logit, logits[r]);
    double sum_exp = 0.0;
    for (int r = 0; r < kNumLevels; ++r) sum_exp += std::exp(logits[r] - max_logit);
    const double lse = max_logit + std::log(sum_exp);
    total += lse - logits[level - 1];
  }
  return total;
}

namespace {

// Bitmaps of the symmetric supervised adjacency, one per level.
std::vector<std::vector<std::uint8_t>> supervise_bitmaps(std::size_t n_nodes,
                                                         std::size_t num_students,
                                                         std::span<const Edge> edges) {
  std::vector<std::vector<std::uint8_t>> maps(
      kNumLevels, std::vector<std::uint8_t>(n_nodes * n_nodes, 0));
  for (const auto& e : edges) {
    const std::size_t c = num_students + e.course;
    auto& map = maps[static_cast<std::size_t>(e.level - 1)];
    map[e.student * n_nodes + c] = 1;
    map[c * n_nodes + e.student] = 1;
  }
  return maps;
}

std::vector<int> truth_levels_of(std::span<const Edge> edges) {
  std::vector<int> t;
  t.reserve(edges.size());
  for (const auto& e : edges) t.push_back(e.level);
  return t;
}

// z .* h_r restricted to rows; other rows left zero.
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), a.cols());
  auto ov = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  return out;
}

struct DecodeGrads {
  DenseMatrix dz;
  std::array<DenseMatrix, kNumLevels> dchannel;
};

// Backward of the per-query bilinear decoder given d(loss)/d(logit).
DecodeGrads decode_backward(std::span<const QueryPair> queries, const DenseMatrix& dlogits,
                            const DenseMatrix& z,
                            const std::array<DenseMatrix, kNumLevels>& channel_weights,
                            std::size_t num_students) {
  DecodeGrads out;
  out.dz = DenseMatrix(z.rows(), z.cols());
  for (int r = 0; r < kNumLevels; ++r) {
    out.dchannel[static_cast<std::size_t>(r)] = DenseMatrix(z.rows(), z.cols());
  }
  const std::size_t latent = z.cols();
  for (std::size_t t = 0; t < queries.size(); ++t) {
    const auto& q = queries[t];
    const std::size_t c = num_students + q.course;
    const double* g = dlogits.row_ptr(t);
    const double* zi = z.row_ptr(q.student);
    const double* zc = z.row_ptr(c);
    double* dzi = out.dz.row_ptr(q.student);
    double* dzc = out.dz.row_ptr(c);
    for (std::size_t k = 0; k < latent; ++k) {
      double hsum = 0.0;
      for (int r = 0; r < kNumLevels; ++r) {
        hsum += g[r] * channel_weights[static_cast<std::size_t>(r)](q.student, k);
      }
      dzi[k] += hsum * zc[k];
      dzc[k] += hsum * zi[k];
      const double zz = zi[k] * zc[k];
      for (int r = 0; r < kNumLevels; ++r) {
        out.dchannel[static_cast<std::size_t>(r)](q.student, k) += g[r] * zz;
      }
    }
  }
  return out;
}

// Backward through heads, dropout, ReLU, and the conv stack. dmu/ds are
// gradients at z_mean / z_log_std; fills everything except channel grads.
void encoder_backward(const ModelParams& params, const LevelAdjacency& adj,
                      const DegreeVector& deg, const EncodeResult& enc,
                      const DropoutMask& mask, const DenseMatrix& dmu,
                      const DenseMatrix& ds, Gradients& grads) {
  const ModelDims& dims = params.dims;
  const std::vector<double> inv_deg = inverse_degrees(deg);

  matmul_at_into(enc.hidden_dropped, dmu, grads.head_mean);
  matmul_at_into(enc.hidden_dropped, ds, grads.head_log_std);

  DenseMatrix d_hidden = matmul_bt(dmu, params.head_mean);
  {
    const DenseMatrix d_from_std = matmul_bt(ds, params.head_log_std);
    auto dv = d_hidden.values();
    auto sv = d_from_std.values();
    for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += sv[i];
  }
  // Undo dropout scaling back onto the final conv output.
  for (std::size_t i = 0; i < dims.nodes; ++i) {
    const double scale = mask.row_scale[i];
    if (scale == 1.0) continue;
    double* row = d_hidden.row_ptr(i);
    for (std::size_t j = 0; j < dims.hidden; ++j) row[j] *= scale;
  }

  DenseMatrix d_layer = std::move(d_hidden);  // gradient at layer_out[l]
  DenseMatrix scratch_msg;
  DenseMatrix scratch_dmsg(dims.nodes, dims.hidden);
  for (int layer = dims.depth - 1; layer >= 0; --layer) {
    const DenseMatrix& activated = enc.layer_out[static_cast<std::size_t>(layer)];
    {
      auto dv = d_layer.values();
      auto av = activated.values();
      for (std::size_t i = 0; i < dv.size(); ++i) {
        if (av[i] <= 0.0) dv[i] = 0.0;
      }
    }
    const DenseMatrix& input = layer == 0
                                   ? params.node_features
                                   : enc.layer_out[static_cast<std::size_t>(layer - 1)];
    DenseMatrix d_input(input.rows(), input.cols());
    for (int r = 1; r <= kNumLevels; ++r) {
      const auto& sym = adj.symmetric(r);
      if (sym.nnz() == 0) continue;
      const auto active = adj.active_nodes(r);
      auto& w = params.conv_weights[static_cast<std::size_t>(layer)]
                                   [static_cast<std::size_t>(r - 1)];
      auto& dw = grads.conv_weights[static_cast<std::size_t>(layer)]
                                   [static_cast<std::size_t>(r - 1)];
      // dw += (Dinv * M_r * input)^T * d_layer over active rows.
      scratch_msg = DenseMatrix(dims.nodes, input.cols());
      spmm_add_into(sym, input, scratch_msg);
      add_scaled_rows_outer(scratch_msg, d_layer, active, inv_deg, dw);
      // d_input += M_r^T * (Dinv * d_layer * w^T); M_r is symmetric.
      if (scratch_dmsg.cols() != input.cols() || scratch_dmsg.rows() != dims.nodes) {
        scratch_dmsg = DenseMatrix(dims.nodes, input.cols());
      }
      scaled_rows_matmul_bt(d_layer, w, active, inv_deg, scratch_dmsg);
      spmm_add_into(sym, scratch_dmsg, d_input);
    }
    if (layer == 0) {
      auto gv = grads.node_features.values();
      auto dv = d_input.values();
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += dv[i];
    } else {
      d_layer = std::move(d_input);
    }
  }
}

}  // namespace

ForwardResult forward(const ModelParams& params, const LevelAdjacency& adj,
                      const DegreeVector& deg, std::span<const Edge> supervise,
                      const DenseMatrix& epsilon, const DropoutMask& mask,
                      const ForwardOptions& options) {
  ForwardResult out;
  out.enc = encode(adj, deg, params, mask);
  out.epsilon = epsilon;
  out.z = apply_reparam(out.enc.z_mean, out.enc.z_log_std, epsilon);
  out.kl = kl_cost(out.enc.z_mean, out.enc.z_log_std);

  const std::size_t num_students = adj.num_students();
  if (options.mode == LossMode::kMaskedSoftmaxCe) {
    const auto queries = queries_from_edges(supervise);
    out.pred = decode(out.z, params.channel_weights, num_students, queries);
    out.data_cost = cross_entropy(out.pred, truth_levels_of(supervise));
  } else {
    const std::size_t n_nodes = params.dims.nodes;
    const auto maps = supervise_bitmaps(n_nodes, num_students, supervise);
    out.channel_scores.reserve(kNumLevels);
    double cost = 0.0;
    for (int r = 0; r < kNumLevels; ++r) {
      const DenseMatrix u = hadamard(out.z, params.channel_weights[static_cast<std::size_t>(r)]);
      DenseMatrix scores = matmul_bt(u, out.z);
      const auto& map = maps[static_cast<std::size_t>(r)];
      auto sv = scores.values();
      for (std::size_t i = 0; i < sv.size(); ++i) {
        const double s = sv[i];
        cost += softplus(s) - (map[i] ? s : 0.0);
      }
      out.channel_scores.push_back(std::move(scores));
    }
    out.data_cost = cost;
  }
  out.loss = options.kl_weight * out.kl + out.data_cost;
  return out;
}

Gradients backward(const ModelParams& params, const LevelAdjacency& adj,
                   const DegreeVector& deg, std::span<const Edge> supervise,
                   const ForwardResult& fwd, const DropoutMask& mask,
                   const ForwardOptions& options) {
  Gradients grads = zero_gradients(params);
  const std::size_t num_students = adj.num_students();
  DenseMatrix dz(fwd.z.rows(), fwd.z.cols());

  if (options.mode == LossMode::kMaskedSoftmaxCe) {
    // d(cost)/d(logit) = p - onehot(truth).
    DenseMatrix dlogits = fwd.pred.probs;
    for (std::size_t t = 0; t < supervise.size(); ++t) {
      dlogits(t, static_cast<std::size_t>(supervise[t].level - 1)) -= 1.0;
    }
    DecodeGrads dg = decode_backward(fwd.pred.queries, dlogits, fwd.z,
                                     params.channel_weights, num_students);
    dz = std::move(dg.dz);
    grads.channel_weights = std::move(dg.dchannel);
  } else {
    const std::size_t n_nodes = params.dims.nodes;
    const auto maps = supervise_bitmaps(n_nodes, num_students, supervise);
    DenseMatrix g(n_nodes, n_nodes);
    for (int r = 0; r < kNumLevels; ++r) {
      const auto& scores = fwd.channel_scores.at(static_cast<std::size_t>(r));
      const auto& map = maps[static_cast<std::size_t>(r)];
      auto gv = g.values();
      auto sv = scores.values();
      for (std::size_t i = 0; i < gv.size(); ++i) {
        gv[i] = sigmoid(sv[i]) - (map[i] ? 1.0 : 0.0);
      }
      const auto& h = params.channel_weights[static_cast<std::size_t>(r)];
      const DenseMatrix u = hadamard(fwd.z, h);
      // scores = u * z^T: du = g * z, dz += g^T * u + du .* h, dh = du .* z.
      const DenseMatrix du = matmul(g, fwd.z);
      DenseMatrix dz_right = matmul_at(g, u);
      auto dzv = dz.values();
      auto duv = du.values();
      auto hv = h.values();
      auto zv = fwd.z.values();
      auto drv = dz_right.values();
      auto dhv = grads.channel_weights[static_cast<std::size_t>(r)].values();
      for (std::size_t i = 0; i < dzv.size(); ++i) {
        dzv[i] += duv[i] * hv[i] + drv[i];
        dhv[i] += duv[i] * zv[i];
      }
    }
  }

  // Reparameterization: z = mu + eps .* exp(s).
  DenseMatrix dmu = dz;
  DenseMatrix ds(dz.rows(), dz.cols());
  {
    auto dsv = ds.values();
    auto dzv = dz.values();
    auto ev = fwd.epsilon.values();
    auto sv = fwd.enc.z_log_std.values();
    for (std::size_t i = 0; i < dsv.size(); ++i) {
      dsv[i] = dzv[i] * ev[i] * std::exp(sv[i]);
    }
  }
  // KL term: d/dmu = mu, d/ds = exp(2s) - 1, scaled by kl_weight.
  if (options.kl_weight != 0.0) {
    auto dmv = dmu.values();
    auto dsv = ds.values();
    auto mv = fwd.enc.z_mean.values();
    auto sv = fwd.enc.z_log_std.values();
    for (std::size_t i = 0; i < dmv.size(); ++i) {
      dmv[i] += options.kl_weight * mv[i];
      dsv[i] += options.kl_weight * (std::exp(2.0 * sv[i]) - 1.0);
    }
  }

  encoder_backward(params, adj, deg, fwd.enc, mask, dmu, ds, grads);
  return grads;
}

DenseMatrix expected_level_input_gradient(const ModelParams& params,
                                          const LevelAdjacency& adj,
                                          const DegreeVector& deg, QueryPair query) {
  const DropoutMask mask = no_dropout(params.dims.nodes);
  const EncodeResult enc = encode(adj, deg, params, mask);
  const DenseMatrix& z = enc.z_mean;  // epsilon = 0
  const std::vector<QueryPair> queries{query};
  const PredictionTensor pred = decode(z, params.channel_weights, adj.num_students(), queries);

  // d(expected)/d(logit_r) = p_r * (level_r - expected).
  DenseMatrix dlogits(1, kNumLevels);
  const double expected = pred.expected_level[0];
  for (int r = 0; r < kNumLevels; ++r) {
    dlogits(0, static_cast<std::size_t>(r)) =
        pred.probs(0, static_cast<std::size_t>(r)) * (static_cast<double>(r + 1) - expected);
  }

  DecodeGrads dg =
      decode_backward(queries, dlogits, z, params.channel_weights, adj.num_students());
  Gradients grads = zero_gradients(params);
  const DenseMatrix ds(z.rows(), z.cols());  // epsilon = 0 kills the log-std path
  encoder_backward(params, adj, deg, enc, mask, dg.dz, ds, grads);
  return std::move(grads.node_features);
}

}  // namespace gvae
