// Command-line front end: training, sampling, evaluation, the permutation
// theory verifier, and the toy recall experiment.

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include "graphdiff/config.hpp"
#include "graphdiff/eval.hpp"
#include "graphdiff/graph_io.hpp"
#include "graphdiff/theory_checks.hpp"
#include "graphdiff/train.hpp"

namespace {

using namespace graphdiff;

TrainConfig load_train_config(const std::string& path) {
  Config c = Config::from_file(path);
  c.apply_env_overrides();
  return train_config_from(c);
}

int cmd_train(const std::string& config_path) {
  const TrainConfig cfg = load_train_config(config_path);
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream loss_log(std::filesystem::path(cfg.out_dir) / "loss.txt");
  const TrainResult result = train(cfg, nullptr, [&](int epoch, double loss) {
    std::printf("epoch %d loss %.6f\n", epoch, loss);
    loss_log << epoch << " " << loss << "\n";
    loss_log.flush();
  });
  save_edge_list((std::filesystem::path(cfg.out_dir) / "train_split.txt").string(),
                 result.train_set);
  if (!result.test_set.empty())
    save_edge_list((std::filesystem::path(cfg.out_dir) / "test_split.txt").string(),
                   result.test_set);
  std::printf("checkpoint %s\n",
              (std::filesystem::path(cfg.out_dir) / "checkpoint.bin").string().c_str());
  return 0;
}

int cmd_sample(const std::string& ckpt_path, int count, bool permute_flag, int n_override,
               std::uint64_t seed, const std::string& out_path, bool raw_weights, int batch_size) {
  const Checkpoint ckpt = Checkpoint::load(ckpt_path);
  const TrainConfig cfg = ckpt.train_config();
  Rng build_rng(0);
  EdgeDenoiser net(cfg.model, build_rng);
  ckpt.apply(net, /*use_ema=*/!raw_weights);
  const Denoiser denoiser = net.denoiser(cfg.edm);
  const EncodingScheme* scheme = cfg.attributed ? &cfg.encoding : nullptr;

  Rng rng(seed);
  std::map<int, int> per_size;
  if (n_override > 0) {
    per_size[n_override] = count;
  } else {
    require(!ckpt.train_sizes.empty(), ErrorCategory::invalid_argument,
            "sample: checkpoint has no recorded training sizes; pass --n");
    for (int i = 0; i < count; ++i)
      per_size[ckpt.train_sizes[static_cast<size_t>(rng.below(ckpt.train_sizes.size()))]]++;
  }
  std::vector<Graph> out;
  for (const auto& [n, k] : per_size) {
    auto generated = generate_graphs(denoiser, k, n, cfg.edm, rng, permute_flag, scheme, batch_size);
    for (auto& g : generated) out.push_back(std::move(g));
  }
  save_edge_list(out_path, out);
  std::printf("wrote %zu graphs to %s\n", out.size(), out_path.c_str());
  return 0;
}

std::map<int, int> parse_valence(const std::string& spec) {
  std::map<int, int> table;
  std::istringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    require(colon != std::string::npos, ErrorCategory::usage,
            "valence table entries look like `type:max`, got: " + item);
    table[std::stoi(item.substr(0, colon))] = std::stoi(item.substr(colon + 1));
  }
  return table;
}

int cmd_eval(const std::string& generated_path, const std::string& reference_path, double bandwidth,
             int clustering_bins, const std::string& valence_spec) {
  const auto generated = load_edge_list(generated_path);
  const auto reference = load_edge_list(reference_path);
  const MmdReport r = evaluate_sets(generated, reference, bandwidth, clustering_bins);
  std::printf("%-18s %12s\n", "metric", "value");
  std::printf("%-18s %12.6e\n", "degree mmd", r.degree);
  std::printf("%-18s %12.6e\n", "clustering mmd", r.clustering);
  std::printf("%-18s %12.6e\n", "orbit mmd", r.orbit);
  std::printf("METRIC degree_mmd %.17g\n", r.degree);
  std::printf("METRIC clustering_mmd %.17g\n", r.clustering);
  std::printf("METRIC orbit_mmd %.17g\n", r.orbit);
  if (!valence_spec.empty()) {
    const auto table = parse_valence(valence_spec);
    int valid = 0;
    std::vector<Graph> valid_graphs;
    for (const auto& g : generated)
      if (molecule_validity(g, table)) {
        ++valid;
        valid_graphs.push_back(g);
      }
    const double validity = generated.empty() ? 0.0 : static_cast<double>(valid) / generated.size();
    const double unique = uniqueness(valid_graphs);
    std::printf("%-18s %12.6f\n", "validity", validity);
    std::printf("%-18s %12.6f\n", "uniqueness", unique);
    std::printf("METRIC validity %.17g\n", validity);
    std::printf("METRIC uniqueness %.17g\n", unique);
  }
  return 0;
}

int cmd_verify_theory(std::uint64_t seed) {
  const auto checks = theory::run_all_checks(seed);
  size_t passed = 0;
  std::printf("%-44s %-6s %-22s %s\n", "check", "status", "observed", "expected");
  for (const auto& c : checks) {
    std::printf("%-44s %-6s %-22s %s\n", c.name.c_str(), c.pass ? "pass" : "FAIL",
                c.observed.c_str(), c.expected.c_str());
    passed += c.pass;
  }
  std::printf("%zu/%zu checks passed\n", passed, checks.size());
  for (const auto& c : checks)
    std::printf("RESULT %s %s observed=%s expected=%s\n", c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.observed.c_str(), c.expected.c_str());
  return passed == checks.size() ? 0 : 1;
}

int cmd_toy_recall(const std::string& config_path, int l, int samples) {
  const TrainConfig cfg = load_train_config(config_path);
  const auto result = run_toy_recall_experiment(l, cfg, samples, [](int epoch, double loss) {
    if ((epoch + 1) % 50 == 0) std::printf("epoch %d loss %.6f\n", epoch, loss);
  });
  std::printf("l %d\n", result.l);
  std::printf("RECALL %.6f\n", result.recall);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph generation via shifted-window edge diffusion"};
  app.require_subcommand(1);

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "train a model from a config file");
  train_cmd->add_option("--config", config_path, "key = value config file")->required();

  std::string ckpt_path, out_path;
  int count = 16, n_override = 0, batch_size = 64;
  std::uint64_t seed = 0;
  bool permute_flag = false, raw_weights = false;
  auto* sample_cmd = app.add_subcommand("sample", "generate graphs from a checkpoint");
  sample_cmd->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  sample_cmd->add_option("--count", count, "number of graphs");
  sample_cmd->add_flag("--permute", permute_flag,
                       "apply a fresh uniform random permutation to every sample");
  sample_cmd->add_option("--n", n_override, "node count (default: drawn from training sizes)");
  sample_cmd->add_option("--seed", seed, "sampling seed");
  sample_cmd->add_option("--out", out_path, "output edge-list file")->required();
  sample_cmd->add_flag("--raw-weights", raw_weights, "sample with raw instead of EMA weights");
  sample_cmd->add_option("--batch-size", batch_size, "sampler batch size");

  std::string generated_path, reference_path, valence_spec;
  double bandwidth = 1.0;
  int clustering_bins = 100;
  auto* eval_cmd = app.add_subcommand("eval", "compare two graph-set files");
  eval_cmd->add_option("--generated", generated_path, "generated edge-list file")->required();
  eval_cmd->add_option("--reference", reference_path, "reference edge-list file")->required();
  eval_cmd->add_option("--bandwidth", bandwidth, "kernel bandwidth");
  eval_cmd->add_option("--clustering-bins", clustering_bins, "clustering histogram bins");
  eval_cmd->add_option("--valence", valence_spec,
                       "valence table `type:max,...`; enables molecule metrics");

  std::uint64_t theory_seed = 7;
  auto* verify_cmd = app.add_subcommand("verify-theory", "run the permutation-theory checks");
  verify_cmd->add_option("--seed", theory_seed, "seed for the randomized checks");

  int l = 1, samples = 100;
  std::string toy_config;
  auto* toy_cmd = app.add_subcommand("toy-recall", "permutation-count recall experiment");
  toy_cmd->add_option("--config", toy_config, "training config file")->required();
  toy_cmd->add_option("--l", l, "number of fixed permutations")->required();
  toy_cmd->add_option("--samples", samples, "samples for the recall estimate");

  try {
    app.parse(argc, argv);
    if (*train_cmd) return cmd_train(config_path);
    if (*sample_cmd)
      return cmd_sample(ckpt_path, count, permute_flag, n_override, seed, out_path, raw_weights,
                        batch_size);
    if (*eval_cmd)
      return cmd_eval(generated_path, reference_path, bandwidth, clustering_bins, valence_spec);
    if (*verify_cmd) return cmd_verify_theory(theory_seed);
    if (*toy_cmd) return cmd_toy_recall(toy_config, l, samples);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : error_exit_code(graphdiff::ErrorCategory::usage);
  } catch (const graphdiff::Error& e) {
    std::fprintf(stderr, "ERROR %s: %s\n", e.category_name(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ERROR internal: %s\n", e.what());
    return error_exit_code(graphdiff::ErrorCategory::internal);
  }
  return 0;
}
