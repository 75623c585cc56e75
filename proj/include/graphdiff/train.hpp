#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "graphdiff/backbone.hpp"
#include "graphdiff/config.hpp"
#include "graphdiff/datasets.hpp"
#include "graphdiff/edm.hpp"
#include "graphdiff/eval.hpp"

namespace graphdiff {

// Everything one experiment needs: optimization settings plus the dataset,
// model, diffusion, and attribute-encoding sections. Parsed from the flat
// config file; `to_config_text` writes the exact schema back out (this is the
// snapshot stored in checkpoints).
struct TrainConfig {
  int epochs = 100;
  int batch_size = 8;
  double lr = 1e-4;
  double ema_decay = 0.999;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 0.0;  // global gradient-norm clip; 0 disables
  double split_ratio = 1.0;
  bool self_conditioning = true;
  int checkpoint_every = 0;  // epochs between periodic saves; 0 = final only
  int max_n = 0;             // 0 = derived from the training set
  std::uint64_t seed = 0;
  std::string out_dir = "run";

  DatasetSpec dataset;
  ModelConfig model;
  EdmConfig edm;
  EncodingScheme encoding;
  bool attributed = false;

  void validate() const {
    require(epochs >= 0, ErrorCategory::config, "train: epochs must be nonnegative");
    require(batch_size >= 1, ErrorCategory::config, "train: batch_size must be positive");
    require(lr > 0.0, ErrorCategory::config, "train: lr must be positive");
    require(ema_decay >= 0.0 && ema_decay < 1.0, ErrorCategory::config,
            "train: ema_decay must be in [0, 1)");
    require(split_ratio > 0.0 && split_ratio <= 1.0, ErrorCategory::config,
            "train: split_ratio must be in (0, 1]");
    dataset.validate();
    model.validate();
    edm.validate();
    if (attributed) encoding.validate();
  }
};

inline TrainConfig train_config_from(const Config& c) {
  TrainConfig t;
  t.epochs = c.get_int("train.epochs", t.epochs);
  t.batch_size = c.get_int("train.batch_size", t.batch_size);
  t.lr = c.get_double("train.lr", t.lr);
  t.ema_decay = c.get_double("train.ema_decay", t.ema_decay);
  t.adam_beta1 = c.get_double("train.adam_beta1", t.adam_beta1);
  t.adam_beta2 = c.get_double("train.adam_beta2", t.adam_beta2);
  t.adam_eps = c.get_double("train.adam_eps", t.adam_eps);
  t.grad_clip = c.get_double("train.grad_clip", t.grad_clip);
  t.split_ratio = c.get_double("train.split_ratio", t.split_ratio);
  t.self_conditioning = c.get_bool("train.self_conditioning", t.self_conditioning);
  t.checkpoint_every = c.get_int("train.checkpoint_every", t.checkpoint_every);
  t.max_n = c.get_int("train.max_n", t.max_n);
  t.seed = c.get_u64("train.seed", t.seed);
  t.out_dir = c.get_str("train.out_dir", t.out_dir);

  t.dataset.kind = c.get_str("dataset.kind", t.dataset.kind);
  t.dataset.count = c.get_int("dataset.count", t.dataset.count);
  t.dataset.rows_lo = c.get_int("dataset.rows_lo", t.dataset.rows_lo);
  t.dataset.rows_hi = c.get_int("dataset.rows_hi", t.dataset.rows_hi);
  t.dataset.cols_lo = c.get_int("dataset.cols_lo", t.dataset.cols_lo);
  t.dataset.cols_hi = c.get_int("dataset.cols_hi", t.dataset.cols_hi);
  t.dataset.p_intra = c.get_double("dataset.p_intra", t.dataset.p_intra);
  t.dataset.p_inter = c.get_double("dataset.p_inter", t.dataset.p_inter);
  t.dataset.path = c.get_str("dataset.path", t.dataset.path);
  t.dataset.seed = c.get_u64("dataset.seed", t.dataset.seed);

  t.model.patch_size = c.get_int("model.patch_size", t.model.patch_size);
  t.model.window_size = c.get_int("model.window_size", t.model.window_size);
  t.model.token_dim = c.get_int("model.token_dim", t.model.token_dim);
  t.model.ff_dim = c.get_int("model.ff_dim", t.model.ff_dim);
  t.model.heads = c.get_int_list("model.heads", t.model.heads);
  t.model.down_blocks = c.get_int_list("model.down_blocks", t.model.down_blocks);
  t.model.up_blocks = c.get_int_list("model.up_blocks", t.model.up_blocks);
  t.model.sigma_embed_dim = c.get_int("model.sigma_embed_dim", t.model.sigma_embed_dim);
  t.model.init_std = c.get_double("model.init_std", t.model.init_std);

  t.edm.sigma_data = c.get_double("edm.sigma_data", t.edm.sigma_data);
  t.edm.p_mean = c.get_double("edm.p_mean", t.edm.p_mean);
  t.edm.p_std = c.get_double("edm.p_std", t.edm.p_std);
  t.edm.sigma_min = c.get_double("edm.sigma_min", t.edm.sigma_min);
  t.edm.sigma_max = c.get_double("edm.sigma_max", t.edm.sigma_max);
  t.edm.rho = c.get_double("edm.rho", t.edm.rho);
  t.edm.s_tmin = c.get_double("edm.s_tmin", t.edm.s_tmin);
  t.edm.s_tmax = c.get_double("edm.s_tmax", t.edm.s_tmax);
  t.edm.s_noise = c.get_double("edm.s_noise", t.edm.s_noise);
  t.edm.s_churn = c.get_double("edm.s_churn", t.edm.s_churn);
  t.edm.steps = c.get_int("edm.steps", t.edm.steps);

  t.attributed = c.get_bool("encoding.enabled", t.attributed);
  t.encoding.kind = encoding_kind_from_name(c.get_str("encoding.kind", "scalar"));
  t.encoding.num_node_types = c.get_int("encoding.num_node_types", t.encoding.num_node_types);
  t.encoding.num_edge_types = c.get_int("encoding.num_edge_types", t.encoding.num_edge_types);
  if (t.attributed) {
    t.model.edge_channels = t.encoding.edge_channels();
    t.model.node_channels = t.encoding.num_node_types > 1 ? t.encoding.node_channels() : 0;
  } else {
    t.model.edge_channels = 1;
    t.model.node_channels = 0;
  }
  c.reject_unknown_keys();
  t.validate();
  return t;
}

namespace detail {

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string fmt_list(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace detail

inline std::string to_config_text(const TrainConfig& t) {
  using detail::fmt_double;
  using detail::fmt_list;
  std::string s;
  s += "train.epochs = " + std::to_string(t.epochs) + "\n";
  s += "train.batch_size = " + std::to_string(t.batch_size) + "\n";
  s += "train.lr = " + fmt_double(t.lr) + "\n";
  s += "train.ema_decay = " + fmt_double(t.ema_decay) + "\n";
  s += "train.adam_beta1 = " + fmt_double(t.adam_beta1) + "\n";
  s += "train.adam_beta2 = " + fmt_double(t.adam_beta2) + "\n";
  s += "train.adam_eps = " + fmt_double(t.adam_eps) + "\n";
  s += "train.grad_clip = " + fmt_double(t.grad_clip) + "\n";
  s += "train.split_ratio = " + fmt_double(t.split_ratio) + "\n";
  s += std::string("train.self_conditioning = ") + (t.self_conditioning ? "true" : "false") + "\n";
  s += "train.checkpoint_every = " + std::to_string(t.checkpoint_every) + "\n";
  s += "train.max_n = " + std::to_string(t.max_n) + "\n";
  s += "train.seed = " + std::to_string(t.seed) + "\n";
  s += "train.out_dir = " + t.out_dir + "\n";
  s += "dataset.kind = " + t.dataset.kind + "\n";
  s += "dataset.count = " + std::to_string(t.dataset.count) + "\n";
  s += "dataset.rows_lo = " + std::to_string(t.dataset.rows_lo) + "\n";
  s += "dataset.rows_hi = " + std::to_string(t.dataset.rows_hi) + "\n";
  s += "dataset.cols_lo = " + std::to_string(t.dataset.cols_lo) + "\n";
  s += "dataset.cols_hi = " + std::to_string(t.dataset.cols_hi) + "\n";
  s += "dataset.p_intra = " + fmt_double(t.dataset.p_intra) + "\n";
  s += "dataset.p_inter = " + fmt_double(t.dataset.p_inter) + "\n";
  if (!t.dataset.path.empty()) s += "dataset.path = " + t.dataset.path + "\n";
  s += "dataset.seed = " + std::to_string(t.dataset.seed) + "\n";
  s += "model.patch_size = " + std::to_string(t.model.patch_size) + "\n";
  s += "model.window_size = " + std::to_string(t.model.window_size) + "\n";
  s += "model.token_dim = " + std::to_string(t.model.token_dim) + "\n";
  s += "model.ff_dim = " + std::to_string(t.model.ff_dim) + "\n";
  s += "model.heads = " + fmt_list(t.model.heads) + "\n";
  s += "model.down_blocks = " + fmt_list(t.model.down_blocks) + "\n";
  s += "model.up_blocks = " + fmt_list(t.model.up_blocks) + "\n";
  s += "model.sigma_embed_dim = " + std::to_string(t.model.sigma_embed_dim) + "\n";
  s += "model.init_std = " + fmt_double(t.model.init_std) + "\n";
  s += "edm.sigma_data = " + fmt_double(t.edm.sigma_data) + "\n";
  s += "edm.p_mean = " + fmt_double(t.edm.p_mean) + "\n";
  s += "edm.p_std = " + fmt_double(t.edm.p_std) + "\n";
  s += "edm.sigma_min = " + fmt_double(t.edm.sigma_min) + "\n";
  s += "edm.sigma_max = " + fmt_double(t.edm.sigma_max) + "\n";
  s += "edm.rho = " + fmt_double(t.edm.rho) + "\n";
  s += "edm.s_tmin = " + fmt_double(t.edm.s_tmin) + "\n";
  s += "edm.s_tmax = " + fmt_double(t.edm.s_tmax) + "\n";
  s += "edm.s_noise = " + fmt_double(t.edm.s_noise) + "\n";
  s += "edm.s_churn = " + fmt_double(t.edm.s_churn) + "\n";
  s += "edm.steps = " + std::to_string(t.edm.steps) + "\n";
  s += std::string("encoding.enabled = ") + (t.attributed ? "true" : "false") + "\n";
  s += std::string("encoding.kind = ") + encoding_kind_name(t.encoding.kind) + "\n";
  s += "encoding.num_node_types = " + std::to_string(t.encoding.num_node_types) + "\n";
  s += "encoding.num_edge_types = " + std::to_string(t.encoding.num_edge_types) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Optimizer and EMA
// ---------------------------------------------------------------------------

// First-order adaptive-moment optimizer with bias correction.
struct Adam {
  double lr = 1e-4, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long t = 0;
  std::vector<nn::Tensor> m, v;

  void init(const std::vector<std::pair<std::string, nn::Value>>& params) {
    m.clear();
    v.clear();
    for (const auto& [name, p] : params) {
      m.push_back(nn::Tensor::zeros(p->value.shape()));
      v.push_back(nn::Tensor::zeros(p->value.shape()));
    }
    t = 0;
  }

  void step(std::vector<std::pair<std::string, nn::Value>>& params) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i].second;
      if (p->grad.numel() != p->value.numel()) continue;  // untouched parameter
      for (std::int64_t k = 0; k < p->value.numel(); ++k) {
        const double g = p->grad[k];
        m[i][k] = beta1 * m[i][k] + (1.0 - beta1) * g;
        v[i][k] = beta2 * v[i][k] + (1.0 - beta2) * g * g;
        p->value[k] -= lr * (m[i][k] / bc1) / (std::sqrt(v[i][k] / bc2) + eps);
      }
    }
  }
};

// ema <- decay * ema + (1 - decay) * params, elementwise.
inline void ema_update(std::vector<nn::Tensor>& ema,
                       const std::vector<std::pair<std::string, nn::Value>>& params, double decay) {
  require(ema.size() == params.size(), ErrorCategory::invalid_argument, "ema_update: size mismatch");
  for (size_t i = 0; i < ema.size(); ++i) {
    require(ema[i].numel() == params[i].second->value.numel(), ErrorCategory::invalid_argument,
            "ema_update: shape mismatch");
    for (std::int64_t k = 0; k < ema[i].numel(); ++k)
      ema[i][k] = decay * ema[i][k] + (1.0 - decay) * params[i].second->value[k];
  }
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

// Binary container: magic, JSON header (epoch, rng state, config snapshot,
// parameter names/shapes, training sizes), then raw little-endian doubles for
// the raw parameters followed by the EMA parameters. Raw bytes round-trip
// bit-identically.
struct Checkpoint {
  int epoch = 0;
  std::string config_text;
  std::string rng_state;
  std::vector<int> train_sizes;
  std::vector<std::pair<std::string, nn::Tensor>> params;
  std::vector<std::pair<std::string, nn::Tensor>> ema;

  static constexpr char kMagic[9] = "GDCKPT01";

  void save(const std::string& path) const {
    namespace fs = std::filesystem;
    if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCategory::io, "cannot write checkpoint: " + path);
    nlohmann::json header;
    header["epoch"] = epoch;
    header["config"] = config_text;
    header["rng_state"] = rng_state;
    header["train_sizes"] = train_sizes;
    auto names = nlohmann::json::array();
    for (const auto& [name, t] : params) names.push_back({{"name", name}, {"shape", t.shape()}});
    header["params"] = names;
    const std::string htext = header.dump();
    out.write(kMagic, 8);
    const std::uint64_t len = htext.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    auto write_all = [&](const std::vector<std::pair<std::string, nn::Tensor>>& ts) {
      for (const auto& [name, t] : ts)
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.numel() * sizeof(double)));
    };
    write_all(params);
    write_all(ema);
    require(out.good(), ErrorCategory::io, "checkpoint write failed: " + path);
  }

  static Checkpoint load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCategory::io, "cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    require(in.good() && std::string(magic, 8) == std::string(kMagic, 8), ErrorCategory::parse,
            path + ": not a checkpoint file");
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string htext(len, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(len));
    require(in.good(), ErrorCategory::parse, path + ": truncated header");
    nlohmann::json header;
    try {
      header = nlohmann::json::parse(htext);
    } catch (const std::exception& e) {
      throw Error(ErrorCategory::parse, path + ": bad header: " + e.what());
    }
    Checkpoint ckpt;
    ckpt.epoch = header.at("epoch").get<int>();
    ckpt.config_text = header.at("config").get<std::string>();
    ckpt.rng_state = header.at("rng_state").get<std::string>();
    ckpt.train_sizes = header.at("train_sizes").get<std::vector<int>>();
    auto read_all = [&](std::vector<std::pair<std::string, nn::Tensor>>& ts) {
      for (const auto& item : header.at("params")) {
        nn::Tensor t(item.at("shape").get<std::vector<int>>());
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.numel() * sizeof(double)));
        ts.emplace_back(item.at("name").get<std::string>(), std::move(t));
      }
      require(in.good(), ErrorCategory::parse, path + ": truncated parameter data");
    };
    read_all(ckpt.params);
    read_all(ckpt.ema);
    return ckpt;
  }

  static Checkpoint capture(const TrainConfig& cfg, const EdgeDenoiser& net,
                            const std::vector<nn::Tensor>& ema_tensors, int epoch,
                            const Rng& rng, const std::vector<int>& train_sizes) {
    Checkpoint c;
    c.epoch = epoch;
    c.config_text = to_config_text(cfg);
    c.rng_state = rng.save_state();
    c.train_sizes = train_sizes;
    const auto& items = net.parameters();
    for (size_t i = 0; i < items.size(); ++i) {
      c.params.emplace_back(items[i].first, items[i].second->value);
      c.ema.emplace_back(items[i].first, ema_tensors[i]);
    }
    return c;
  }

  // Copies stored values into a freshly constructed network by name.
  void apply(EdgeDenoiser& net, bool use_ema) const {
    const auto& source = use_ema ? ema : params;
    auto& items = net.mutable_parameters();
    require(items.size() == source.size(), ErrorCategory::invalid_argument,
            "checkpoint: parameter list size mismatch");
    for (size_t i = 0; i < items.size(); ++i) {
      require(items[i].first == source[i].first &&
                  items[i].second->value.shape() == source[i].second.shape(),
              ErrorCategory::invalid_argument,
              "checkpoint: parameter mismatch at " + items[i].first);
      items[i].second->value = source[i].second;
    }
  }

  TrainConfig train_config() const {
    return train_config_from(Config::from_string(config_text, "<checkpoint>"));
  }
};

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<double> epoch_losses;
  std::vector<Graph> train_set;
  std::vector<Graph> test_set;
};

// Gradient-based minimization of the denoising objective with per-step EMA
// tracking and periodic checkpoints. A non-finite loss aborts with the last
// saved checkpoint retained on disk. `dataset_override` replaces the
// spec-built dataset (used by the permutation experiments).
inline TrainResult train(const TrainConfig& cfg,
                         const std::vector<Graph>* dataset_override = nullptr,
                         const std::function<void(int, double)>& on_epoch = {}) {
  cfg.validate();
  Rng rng(cfg.seed);

  TrainResult result;
  {
    std::vector<Graph> data = dataset_override ? *dataset_override : build_dataset(cfg.dataset);
    require(!data.empty(), ErrorCategory::invalid_argument, "train: dataset is empty");
    if (cfg.split_ratio < 1.0) {
      auto [tr, te] = split(data, cfg.split_ratio, rng);
      result.train_set = std::move(tr);
      result.test_set = std::move(te);
    } else {
      result.train_set = std::move(data);
    }
  }
  require(!result.train_set.empty(), ErrorCategory::invalid_argument, "train: empty training split");

  int max_n = cfg.max_n;
  for (const auto& g : result.train_set) max_n = std::max(max_n, g.n());
  std::vector<int> train_sizes;
  for (const auto& g : result.train_set) train_sizes.push_back(g.n());

  EdgeDenoiser net(cfg.model, rng);
  Adam opt;
  opt.lr = cfg.lr;
  opt.beta1 = cfg.adam_beta1;
  opt.beta2 = cfg.adam_beta2;
  opt.eps = cfg.adam_eps;
  opt.init(net.parameters());
  std::vector<nn::Tensor> ema;
  for (const auto& [name, p] : net.parameters()) ema.push_back(p->value);

  const std::string ckpt_path =
      (std::filesystem::path(cfg.out_dir) / "checkpoint.bin").string();
  const EncodingScheme* scheme = cfg.attributed ? &cfg.encoding : nullptr;

  auto save_now = [&](int epoch) {
    Checkpoint::capture(cfg, net, ema, epoch, rng, train_sizes).save(ckpt_path);
  };
  save_now(0);

  std::vector<size_t> order(result.train_set.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<size_t>(rng.below(i))]);
    double epoch_loss = 0.0;
    int batches = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      std::vector<Graph> chunk;
      for (size_t i = start; i < std::min(order.size(), start + static_cast<size_t>(cfg.batch_size)); ++i)
        chunk.push_back(result.train_set[order[i]]);
      const GraphBatch gb = batch(chunk, max_n, scheme);
      const auto loss = training_loss(net.raw_net(gb.node_mask), gb.clean, rng, cfg.edm,
                                      cfg.self_conditioning, &gb.entry_mask, &gb.node_mask);
      const double value = loss.loss->value[0];
      if (!std::isfinite(value)) {
        throw Error(ErrorCategory::diverged,
                    "train: non-finite loss at epoch " + std::to_string(epoch) +
                        "; last good checkpoint kept at " + ckpt_path);
      }
      for (auto& [name, p] : net.mutable_parameters()) p->zero_grad();
      nn::backward(loss.loss);
      if (cfg.grad_clip > 0.0) {
        double norm2 = 0.0;
        for (const auto& [name, p] : net.parameters())
          for (std::int64_t k = 0; k < p->grad.numel(); ++k) norm2 += p->grad[k] * p->grad[k];
        const double norm = std::sqrt(norm2);
        if (norm > cfg.grad_clip) {
          const double scale = cfg.grad_clip / norm;
          for (auto& [name, p] : net.mutable_parameters())
            for (std::int64_t k = 0; k < p->grad.numel(); ++k) p->grad[k] *= scale;
        }
      }
      opt.step(net.mutable_parameters());
      ema_update(ema, net.parameters(), cfg.ema_decay);
      epoch_loss += value;
      ++batches;
    }
    epoch_loss /= std::max(batches, 1);
    result.epoch_losses.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
    if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) save_now(epoch + 1);
  }

  save_now(cfg.epochs);
  result.checkpoint = Checkpoint::load(ckpt_path);
  return result;
}

// ---------------------------------------------------------------------------
// Permutation-count experiment
// ---------------------------------------------------------------------------

struct ToyRecallResult {
  int l = 1;
  double recall = 0.0;
  std::vector<double> epoch_losses;
  Checkpoint checkpoint;
  std::vector<Graph> toy_graphs;
};

// Trains on the toy regular-graph set expanded with l fixed permutations of
// every matrix (identity first), samples with the EMA weights, and reports
// the fraction of samples isomorphic to a training graph.
inline ToyRecallResult run_toy_recall_experiment(int l, const TrainConfig& base,
                                                 int sample_count = 100,
                                                 const std::function<void(int, double)>& on_epoch = {}) {
  require(l >= 1, ErrorCategory::invalid_argument, "toy recall: l must be >= 1");
  TrainConfig cfg = base;
  cfg.dataset.kind = "regular-toy";
  cfg.split_ratio = 1.0;
  cfg.attributed = false;
  cfg.validate();

  Rng data_rng(cfg.dataset.seed);
  ToyRecallResult result;
  result.l = l;
  result.toy_graphs = generate_regular_toy(data_rng);
  const int n = result.toy_graphs.front().n();

  std::vector<Permutation> perms{Permutation::identity(n)};
  std::set<std::vector<int>> seen{perms.front().mapping()};
  while (static_cast<int>(perms.size()) < l) {
    Permutation p = uniform_random_permutation(n, data_rng);
    if (seen.insert(p.mapping()).second) perms.push_back(std::move(p));
  }

  std::vector<Graph> expanded;
  expanded.reserve(result.toy_graphs.size() * perms.size());
  for (const auto& g : result.toy_graphs)
    for (const auto& p : perms) expanded.push_back(permute(g, p));

  TrainResult trained = train(cfg, &expanded, on_epoch);
  result.epoch_losses = trained.epoch_losses;
  result.checkpoint = trained.checkpoint;

  EdgeDenoiser net(cfg.model, data_rng);
  trained.checkpoint.apply(net, /*use_ema=*/true);
  Rng sample_rng(cfg.seed + 1);
  const auto samples =
      generate_graphs(net.denoiser(cfg.edm), sample_count, n, cfg.edm, sample_rng, false);
  result.recall = recall_isomorphic(samples, result.toy_graphs);
  return result;
}

}  // namespace graphdiff
