#include "posh/encoder.hpp"

#include <bit>
#include <sstream>

#include "posh/binio.hpp"

namespace posh {

namespace {

template <typename T>
Tensor<T> uniform_init(Rng& rng, std::int64_t fan_in, std::int64_t fan_out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor<T> w = Tensor<T>::zeros({fan_in, fan_out});
  for (T& x : w.v) x = static_cast<T>(rng.uniform(-bound, bound));
  return w;
}

template <typename T>
Tensor<T> const_vec(std::int64_t d, T value) {
  Tensor<T> t = Tensor<T>::zeros({d});
  std::fill(t.v.begin(), t.v.end(), value);
  return t;
}

}  // namespace

template <typename T>
EncoderParams<T> init_params(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  EncoderParams<T> p;
  p.config = config;
  auto& st = p.store;
  const std::int64_t h = config.hidden;

  auto add_linear = [&](const std::string& name, std::int64_t in, std::int64_t out, int& w_id,
                        int& b_id) {
    w_id = st.add(name + ".w", uniform_init<T>(rng, in, out));
    b_id = st.add(name + ".b", Tensor<T>::zeros({out}));
  };

  add_linear("node_proj", config.d_v(), h, p.node_proj_w, p.node_proj_b);
  add_linear("edge_proj", config.d_e(), h, p.edge_proj_w, p.edge_proj_b);

  for (int l = 0; l < config.n_layers; ++l) {
    const std::string base = "layers." + std::to_string(l) + ".";
    LayerIds ids{};
    add_linear(base + "node_mlp.0", 3 * h, h, ids.node_w1, ids.node_b1);
    add_linear(base + "node_mlp.1", h, h, ids.node_w2, ids.node_b2);
    add_linear(base + "mlp.0", h, h, ids.mlp_w1, ids.mlp_b1);
    add_linear(base + "mlp.1", h, h, ids.mlp_w2, ids.mlp_b2);
    ids.bn_node_gamma = st.add(base + "bn_node.gamma", const_vec<T>(h, T{1}));
    ids.bn_node_beta = st.add(base + "bn_node.beta", Tensor<T>::zeros({h}));
    add_linear(base + "edge_mlp.0", 3 * h, h, ids.edge_w1, ids.edge_b1);
    add_linear(base + "edge_mlp.1", h, h, ids.edge_w2, ids.edge_b2);
    ids.bn_edge_gamma = st.add(base + "bn_edge.gamma", const_vec<T>(h, T{1}));
    ids.bn_edge_beta = st.add(base + "bn_edge.beta", Tensor<T>::zeros({h}));
    p.layers.push_back(ids);
    p.bn_node_stats.emplace_back(h);
    p.bn_edge_stats.emplace_back(h);
  }

  add_linear("head", h, config.code_length, p.head_w, p.head_b);
  return p;
}

BatchGraphs BatchGraphs::merge(const std::vector<const ProteinGraph*>& graphs) {
  if (graphs.empty()) raise(Errc::EmptyInput, "cannot merge zero graphs");
  std::int64_t total_n = 0, total_m = 0;
  const std::int64_t d_v = graphs[0]->node_feats.cols();
  const std::int64_t d_e = graphs[0]->edge_feats.cols();
  for (const ProteinGraph* g : graphs) {
    if (g->node_feats.cols() != d_v || g->edge_feats.cols() != d_e)
      raise(Errc::ShapeMismatch, "graphs in a batch must share feature dims");
    total_n += g->node_feats.rows();
    total_m += static_cast<std::int64_t>(g->edges.size());
  }
  BatchGraphs b;
  b.node_feats = Tensor<float>::zeros({total_n, d_v});
  b.edge_feats = Tensor<float>::zeros({total_m, d_e});
  b.edges.reserve(static_cast<std::size_t>(total_m));
  b.agg_targets.reserve(static_cast<std::size_t>(total_m));
  std::int64_t node_off = 0, edge_off = 0;
  for (const ProteinGraph* g : graphs) {
    const std::int64_t n = g->node_feats.rows();
    std::copy(g->node_feats.v.begin(), g->node_feats.v.end(),
              b.node_feats.v.begin() + node_off * d_v);
    std::copy(g->edge_feats.v.begin(), g->edge_feats.v.end(),
              b.edge_feats.v.begin() + edge_off * d_e);
    for (const Edge& e : g->edges) {
      const Edge shifted{e.src + static_cast<std::uint32_t>(node_off),
                         e.dst + static_cast<std::uint32_t>(node_off)};
      b.edges.push_back(shifted);
      b.agg_targets.push_back(shifted.src);
    }
    b.segments.push_back(nn::Segment{node_off, node_off + n});
    b.n_residues.push_back(g->n_residues);
    node_off += n;
    edge_off += static_cast<std::int64_t>(g->edges.size());
  }
  return b;
}

namespace {

/// One node+edge layer on the tape. Returns the new (h, e) vars.
template <typename T>
std::pair<nn::Var, nn::Var> layer_forward(nn::Tape<T>& tape, nn::Var h, nn::Var e,
                                          const std::vector<Edge>& edges,
                                          const std::vector<std::uint32_t>& agg_targets,
                                          std::int64_t n_nodes, EncoderParams<T>& params, int l,
                                          nn::Mode mode) {
  const LayerIds& ids = params.layers[static_cast<std::size_t>(l)];
  auto P = [&](int id) { return tape.param(id); };

  nn::Var cat = tape.gather_concat(h, e, edges);
  nn::Var msg = tape.mlp2(cat, P(ids.node_w1), P(ids.node_b1), P(ids.node_w2), P(ids.node_b2));
  nn::Var agg = tape.mean_aggregate(msg, agg_targets, n_nodes);
  nn::Var u = tape.add(h, agg);
  nn::Var t = tape.mlp2(u, P(ids.mlp_w1), P(ids.mlp_b1), P(ids.mlp_w2), P(ids.mlp_b2));
  nn::Var h_new = tape.batchnorm(tape.add(h, t), P(ids.bn_node_gamma), P(ids.bn_node_beta),
                                 params.bn_node_stats[static_cast<std::size_t>(l)], mode);

  nn::Var cat2 = tape.gather_concat(h_new, e, edges);
  nn::Var em = tape.mlp2(cat2, P(ids.edge_w1), P(ids.edge_b1), P(ids.edge_w2), P(ids.edge_b2));
  nn::Var e_new = tape.batchnorm(tape.add(e, em), P(ids.bn_edge_gamma), P(ids.bn_edge_beta),
                                 params.bn_edge_stats[static_cast<std::size_t>(l)], mode);
  return {h_new, e_new};
}

}  // namespace

template <typename T>
nn::Var encode_batch(nn::Tape<T>& tape, const BatchGraphs& batch, EncoderParams<T>& params,
                     nn::Mode mode) {
  if (batch.node_feats.cols() != params.config.d_v() ||
      batch.edge_feats.cols() != params.config.d_e())
    raise(Errc::ShapeMismatch, "graph feature dims do not match encoder config");

  nn::Var xv = tape.input(batch.node_feats.template cast<T>());
  nn::Var xe = tape.input(batch.edge_feats.template cast<T>());
  nn::Var h = tape.linear(xv, tape.param(params.node_proj_w), tape.param(params.node_proj_b));
  nn::Var e = tape.linear(xe, tape.param(params.edge_proj_w), tape.param(params.edge_proj_b));

  const std::int64_t n_nodes = batch.node_feats.rows();
  for (int l = 0; l < params.config.n_layers; ++l) {
    auto [h2, e2] =
        layer_forward(tape, h, e, batch.edges, batch.agg_targets, n_nodes, params, l, mode);
    h = h2;
    e = e2;
  }

  nn::Var pooled = tape.segment_max_pool(h, batch.segments);
  return tape.linear(pooled, tape.param(params.head_w), tape.param(params.head_b));
}

StructureEmbedding encode(const ProteinGraph& graph, EncoderParams<float>& params) {
  nn::Tape<float> tape(&params.store);
  BatchGraphs batch = BatchGraphs::merge({&graph});
  nn::Var y = encode_batch(tape, batch, params, nn::Mode::Infer);
  StructureEmbedding emb;
  const Tensor<float>& yv = tape.val(y);
  emb.y = Tensor<float>::zeros({yv.cols()});
  for (std::int64_t j = 0; j < yv.cols(); ++j)
    emb.y[static_cast<std::size_t>(j)] = yv.at(0, j);
  emb.n_residues = graph.n_residues;
  return emb;
}

std::uint32_t HashCode::popcount() const {
  std::uint32_t c = 0;
  for (std::uint8_t b : bits) c += static_cast<std::uint32_t>(std::popcount(unsigned{b}));
  return c;
}

HashCode binarize(const StructureEmbedding& emb, const std::string& id) {
  check_finite(emb.y, "embedding");
  HashCode code;
  code.n_bits = static_cast<std::uint32_t>(emb.y.numel());
  code.n_residues = emb.n_residues;
  code.id = id;
  code.bits.assign((code.n_bits + 7) / 8, 0);
  for (std::uint32_t k = 0; k < code.n_bits; ++k)
    if (emb.y[k] > 0.0f) code.bits[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
  return code;
}

template <typename T>
Tensor<T> node_update(const Tensor<T>& h, const Tensor<T>& e, const std::vector<Edge>& edges,
                      EncoderParams<T>& params, int layer, nn::Mode mode) {
  nn::Tape<T> tape(&params.store);
  std::vector<std::uint32_t> targets;
  targets.reserve(edges.size());
  for (const Edge& eg : edges) targets.push_back(eg.src);
  const LayerIds& ids = params.layers[static_cast<std::size_t>(layer)];
  auto P = [&](int id) { return tape.param(id); };
  nn::Var hv = tape.input(h);
  nn::Var ev = tape.input(e);
  nn::Var cat = tape.gather_concat(hv, ev, edges);
  nn::Var msg = tape.mlp2(cat, P(ids.node_w1), P(ids.node_b1), P(ids.node_w2), P(ids.node_b2));
  nn::Var agg = tape.mean_aggregate(msg, targets, h.rows());
  nn::Var u = tape.add(hv, agg);
  nn::Var t = tape.mlp2(u, P(ids.mlp_w1), P(ids.mlp_b1), P(ids.mlp_w2), P(ids.mlp_b2));
  nn::Var out = tape.batchnorm(tape.add(hv, t), P(ids.bn_node_gamma), P(ids.bn_node_beta),
                               params.bn_node_stats[static_cast<std::size_t>(layer)], mode);
  return tape.val(out);
}

template <typename T>
Tensor<T> edge_update(const Tensor<T>& h_new, const Tensor<T>& e, const std::vector<Edge>& edges,
                      EncoderParams<T>& params, int layer, nn::Mode mode) {
  nn::Tape<T> tape(&params.store);
  const LayerIds& ids = params.layers[static_cast<std::size_t>(layer)];
  auto P = [&](int id) { return tape.param(id); };
  nn::Var hv = tape.input(h_new);
  nn::Var ev = tape.input(e);
  nn::Var cat = tape.gather_concat(hv, ev, edges);
  nn::Var em = tape.mlp2(cat, P(ids.edge_w1), P(ids.edge_b1), P(ids.edge_w2), P(ids.edge_b2));
  nn::Var out = tape.batchnorm(tape.add(ev, em), P(ids.bn_edge_gamma), P(ids.bn_edge_beta),
                               params.bn_edge_stats[static_cast<std::size_t>(layer)], mode);
  return tape.val(out);
}

namespace {

constexpr std::string_view kCkptMagic = "POSHCKP1";
constexpr std::uint16_t kCkptVersion = 1;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void put_tensor(std::ostream& os, const std::string& name, const Tensor<float>& t) {
  binio::put_str(os, name, "tensor name");
  binio::put_u8(os, static_cast<std::uint8_t>(t.shape.size()));
  for (std::int64_t d : t.shape) binio::put_i64(os, d);
  for (float x : t.v) binio::put_f32(os, x);
}

Tensor<float> get_tensor(binio::Reader& r, std::string& name) {
  name = r.str();
  const int nd = r.u8();
  std::vector<std::int64_t> shape;
  for (int i = 0; i < nd; ++i) shape.push_back(r.i64());
  Tensor<float> t = Tensor<float>::zeros(shape);
  for (float& x : t.v) x = r.f32();
  return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const EncoderParams<float>& params,
                     const std::string& config_text, const nn::AdamState<float>* adam) {
  std::ostringstream os;
  binio::put_bytes(os, kCkptMagic.data(), kCkptMagic.size());
  binio::put_u16(os, kCkptVersion);
  binio::put_u64(os, fnv1a(config_text));
  binio::put_u32(os, static_cast<std::uint32_t>(config_text.size()));
  binio::put_bytes(os, config_text.data(), config_text.size());

  binio::put_u32(os, static_cast<std::uint32_t>(params.store.size()));
  for (const auto& e : params.store.entries) put_tensor(os, e.name, e.value);

  binio::put_u32(os, static_cast<std::uint32_t>(params.bn_node_stats.size()));
  for (std::size_t l = 0; l < params.bn_node_stats.size(); ++l) {
    put_tensor(os, "bn_node.mean", params.bn_node_stats[l].running_mean);
    put_tensor(os, "bn_node.var", params.bn_node_stats[l].running_var);
    put_tensor(os, "bn_edge.mean", params.bn_edge_stats[l].running_mean);
    put_tensor(os, "bn_edge.var", params.bn_edge_stats[l].running_var);
  }

  binio::put_u8(os, adam ? 1 : 0);
  if (adam) {
    binio::put_i64(os, adam->step_count);
    binio::put_f32(os, adam->lr);
    binio::put_f32(os, adam->beta1);
    binio::put_f32(os, adam->beta2);
    binio::put_f32(os, adam->eps);
    for (std::size_t p = 0; p < adam->m.size(); ++p) {
      put_tensor(os, "adam.m", adam->m[p]);
      put_tensor(os, "adam.v", adam->v[p]);
    }
  }
  binio::write_file(path, os.str());
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string buf = binio::read_file(path);
  binio::Reader r(buf);
  r.expect_magic(kCkptMagic, "checkpoint");
  if (r.u16() != kCkptVersion) raise(Errc::VersionMismatch, "unsupported checkpoint version");
  const std::uint64_t digest = r.u64();
  const std::uint32_t cfg_len = r.u32();
  std::string config_text(reinterpret_cast<const char*>(r.bytes(cfg_len)), cfg_len);
  if (fnv1a(config_text) != digest)
    raise(Errc::ChecksumMismatch, "checkpoint config digest mismatch");

  Checkpoint ck;
  ck.config_text = config_text;

  // Layout (layer count, dims) is reconstructed from the embedded config by
  // the caller; here we rebuild the store generically from the named table.
  const std::uint32_t n_params = r.u32();
  std::vector<std::pair<std::string, Tensor<float>>> entries;
  for (std::uint32_t i = 0; i < n_params; ++i) {
    std::string name;
    Tensor<float> t = get_tensor(r, name);
    entries.emplace_back(std::move(name), std::move(t));
  }

  // Infer structural dims from the named tensors.
  EncoderConfig config;
  int n_layers = 0;
  for (const auto& [name, t] : entries) {
    if (name == "node_proj.w") config.hidden = static_cast<int>(t.cols());
    if (name == "edge_proj.w") config.n_rbf = static_cast<int>(t.rows()) / kAtomPairs;
    if (name == "head.w") config.code_length = static_cast<int>(t.cols());
    if (name.rfind("layers.", 0) == 0) {
      const int l = std::stoi(name.substr(7, name.find('.', 7) - 7));
      n_layers = std::max(n_layers, l + 1);
    }
  }
  config.n_layers = n_layers;

  EncoderParams<float> params = init_params<float>(config, 0);
  if (params.store.size() != entries.size())
    raise(Errc::ShapeMismatch, "checkpoint parameter table does not match layout");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& e = params.store.entries[i];
    if (e.name != entries[i].first || e.value.shape != entries[i].second.shape)
      raise(Errc::ShapeMismatch, "checkpoint entry " + entries[i].first + " does not match");
    e.value = std::move(entries[i].second);
  }

  const std::uint32_t n_bn = r.u32();
  if (n_bn != params.bn_node_stats.size())
    raise(Errc::ShapeMismatch, "checkpoint batchnorm layer count mismatch");
  std::string name;
  for (std::uint32_t l = 0; l < n_bn; ++l) {
    params.bn_node_stats[l].running_mean = get_tensor(r, name);
    params.bn_node_stats[l].running_var = get_tensor(r, name);
    params.bn_edge_stats[l].running_mean = get_tensor(r, name);
    params.bn_edge_stats[l].running_var = get_tensor(r, name);
  }

  ck.has_adam = r.u8() != 0;
  if (ck.has_adam) {
    const std::int64_t steps = r.i64();
    ck.adam.lr = r.f32();
    ck.adam.beta1 = r.f32();
    ck.adam.beta2 = r.f32();
    ck.adam.eps = r.f32();
    ck.adam.init(params.store);
    ck.adam.step_count = steps;
    for (std::size_t p = 0; p < params.store.size(); ++p) {
      ck.adam.m[p] = get_tensor(r, name);
      ck.adam.v[p] = get_tensor(r, name);
    }
  }

  ck.params = std::move(params);
  return ck;
}

template EncoderParams<float> init_params<float>(const EncoderConfig&, std::uint64_t);
template EncoderParams<double> init_params<double>(const EncoderConfig&, std::uint64_t);
template nn::Var encode_batch<float>(nn::Tape<float>&, const BatchGraphs&, EncoderParams<float>&,
                                     nn::Mode);
template nn::Var encode_batch<double>(nn::Tape<double>&, const BatchGraphs&,
                                      EncoderParams<double>&, nn::Mode);
template Tensor<float> node_update<float>(const Tensor<float>&, const Tensor<float>&,
                                          const std::vector<Edge>&, EncoderParams<float>&, int,
                                          nn::Mode);
template Tensor<double> node_update<double>(const Tensor<double>&, const Tensor<double>&,
                                            const std::vector<Edge>&, EncoderParams<double>&,
                                            int, nn::Mode);
template Tensor<float> edge_update<float>(const Tensor<float>&, const Tensor<float>&,
                                          const std::vector<Edge>&, EncoderParams<float>&, int,
                                          nn::Mode);
template Tensor<double> edge_update<double>(const Tensor<double>&, const Tensor<double>&,
                                            const std::vector<Edge>&, EncoderParams<double>&,
                                            int, nn::Mode);

}  // namespace posh
