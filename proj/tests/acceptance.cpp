// Acceptance suite: one pass/fail line per criterion, exit code 0 only when
// every criterion holds. Heavier criteria print progress on stderr.

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>

#include "graphdiff/oracle.hpp"
#include "graphdiff/theory_checks.hpp"
#include "graphdiff/train.hpp"

using namespace graphdiff;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& what, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: exact total-variation arithmetic of the counterexample cases.
// ---------------------------------------------------------------------------
void criterion_1() {
  const auto start = Clock::now();
  const auto checks = theory::run_case_checks();
  bool all = true;
  std::string first_fail;
  for (const auto& c : checks)
    if (!c.pass && first_fail.empty()) {
      all = false;
      first_fail = c.name + " observed " + c.observed + " expected " + c.expected;
    }
  const std::set<std::string> wanted = {
      "case1.reference_tv",  // 29/16
      "case1.gap",           // 7/48
      "case2.reference_tv",  // 15/8
      "case2.gap",           // 5/24
      "case3.offsupport_tv", // 5/3
      "case4.offsupport_tv", // 5/3
      "case2.bound_rho_lt_5_144",
      "case1.bound_rho_lt_7_48",
  };
  std::set<std::string> seen;
  for (const auto& c : checks)
    if (wanted.count(c.name) && c.pass) seen.insert(c.name);
  const double dt = seconds_since(start);
  const bool pass = all && seen.size() == wanted.size() && dt < 1.0;
  report(1, "theory suite reproduces the reference arithmetic exactly", pass,
         all ? (fmt(dt) + " s, " + std::to_string(checks.size()) + " exact checks") : first_fail);
}

// ---------------------------------------------------------------------------
// Criterion 2: permuted-sampler distribution on 50 random bases, exact.
// ---------------------------------------------------------------------------
void criterion_2() {
  const auto start = Clock::now();
  const auto checks = theory::run_sampler_checks(/*seed=*/2024, /*bases_per_size=*/25);
  bool all = true;
  std::string first_fail;
  for (const auto& c : checks)
    if (!c.pass && first_fail.empty()) {
      all = false;
      first_fail = c.name;
    }
  const double dt = seconds_since(start);
  report(2, "permuted sampler exactly invariant and matching the closed form", all && dt < 30.0,
         all ? (fmt(dt) + " s, 50 random bases at n=3,4") : first_fail);
}

// ---------------------------------------------------------------------------
// Criterion 3: preconditioning identities, loss-form equivalence, target
// variance.
// ---------------------------------------------------------------------------
void criterion_3() {
  EdmConfig cfg;
  Rng rng(3);
  bool ids = true;
  for (int i = 0; i < 1000; ++i) {
    const double sigma = std::exp(rng.uniform(std::log(1e-3), std::log(200.0)));
    const auto c = precondition_coeffs(sigma, cfg);
    const double sd2 = cfg.sigma_data * cfg.sigma_data;
    ids = ids && std::abs(c.c_in * c.c_in * (sigma * sigma + sd2) - 1.0) <= 1e-12;
    ids = ids && std::abs(loss_weight(sigma, cfg) * c.c_out * c.c_out - 1.0) <= 1e-12;
  }

  // Loss-form equivalence on random inputs: the weighted objective equals
  // the plain distance between the raw output and its regression target.
  bool equiv = true;
  {
    const int B = 4, n = 5;
    Field clean;
    clean.edge = nn::Tensor::zeros({B, n, n, 1});
    for (std::int64_t i = 0; i < clean.edge.numel(); ++i)
      clean.edge[i] = rng.bernoulli(0.5) ? 1.0 : -1.0;
    std::vector<double> sigmas;
    for (int b = 0; b < B; ++b) sigmas.push_back(sample_training_sigma(rng, cfg));
    Field eps = Field::randn_like(clean, rng, 1.0);
    nn::Tensor f0 = nn::Tensor::randn({B, n, n, 1}, rng);
    const RawNet net = [&](const Field&, const Field&, const std::vector<double>&) {
      return FieldValue{nn::constant(f0), nullptr};
    };
    Rng lrng(1);
    const double primal =
        training_loss(net, clean, lrng, cfg, false, nullptr, nullptr, &sigmas, nullptr, &eps)
            .loss->value[0];
    double target_form = 0.0;
    const std::int64_t stride = static_cast<std::int64_t>(n) * n;
    for (int b = 0; b < B; ++b) {
      const auto c = precondition_coeffs(sigmas[static_cast<size_t>(b)], cfg);
      for (std::int64_t i = 0; i < stride; ++i) {
        const double noisy =
            clean.edge[b * stride + i] + sigmas[static_cast<size_t>(b)] * eps.edge[b * stride + i];
        const double target = (clean.edge[b * stride + i] - c.c_skip * noisy) / c.c_out;
        const double r = f0[b * stride + i] - target;
        target_form += r * r / B;
      }
    }
    equiv = std::abs(primal - target_form) <= 1e-9 * std::max(1.0, std::abs(target_form));
  }

  // Unit variance of the regression target for data with entry std
  // sigma_data, Monte Carlo over 1e5 draws.
  double var = 0.0;
  {
    const double sigma = 0.7;
    const auto c = precondition_coeffs(sigma, cfg);
    double sum = 0.0, sum2 = 0.0;
    const int reps = 100000;
    for (int i = 0; i < reps; ++i) {
      const double a = rng.normal(0.0, cfg.sigma_data);
      const double noisy = a + sigma * rng.normal();
      const double target = (a - c.c_skip * noisy) / c.c_out;
      sum += target;
      sum2 += target * target;
    }
    var = sum2 / reps - (sum / reps) * (sum / reps);
  }
  const bool var_ok = std::abs(var - 1.0) <= 0.05;
  report(3, "preconditioning identities, loss equivalence, unit-variance target",
         ids && equiv && var_ok,
         "identities " + std::string(ids ? "ok" : "FAIL") + ", equivalence " +
             (equiv ? "ok" : "FAIL") + ", target var " + fmt(var));
}

// ---------------------------------------------------------------------------
// Criterion 4: sampler driven by the analytic optimal denoiser.
// ---------------------------------------------------------------------------
void criterion_4() {
  const auto start = Clock::now();
  Graph a(6);
  a.add_edge(0, 1);
  a.add_edge(1, 2);
  a.add_edge(2, 3);
  a.add_edge(3, 4);
  a.add_edge(4, 5);
  Graph b(6);
  b.add_edge(0, 1);
  b.add_edge(2, 3);
  b.add_edge(4, 5);
  const auto denoiser = make_gmm_denoiser({a, b});
  const std::vector<std::vector<double>> centers{adjacency_channels(a), adjacency_channels(b)};

  EdmConfig cfg;
  cfg.steps = 64;
  Rng rng(4);
  int hits = 0;
  const int runs = 500;
  for (int chunk = 0; chunk < runs / 50; ++chunk) {
    const Field out = sample(denoiser, 50, 6, 1, 0, rng, cfg);
    for (int s = 0; s < 50; ++s) {
      double best = 1e9;
      for (const auto& c : centers) {
        double inf_norm = 0.0;
        for (size_t i = 0; i < c.size(); ++i)
          inf_norm = std::max(inf_norm, std::abs(out.edge[s * 36 + static_cast<std::int64_t>(i)] - c[i]));
        best = std::min(best, inf_norm);
      }
      if (best <= 0.05) ++hits;
    }
  }

  EdmConfig det = cfg;
  det.s_churn = 0.0;
  det.s_noise = 1.0;
  Rng r1(44), r2(44);
  const Field x1 = sample(denoiser, 4, 6, 1, 0, r1, det);
  const Field x2 = sample(denoiser, 4, 6, 1, 0, r2, det);
  bool bitwise = true;
  for (std::int64_t i = 0; i < x1.edge.numel(); ++i) bitwise = bitwise && x1.edge[i] == x2.edge[i];

  const double dt = seconds_since(start);
  const bool pass = hits >= static_cast<int>(0.99 * runs) && bitwise && dt < 120.0;
  report(4, "oracle-driven sampler lands on centers; deterministic mode bitwise", pass,
         std::to_string(hits) + "/500 within 0.05, bitwise " + (bitwise ? "ok" : "FAIL") + ", " +
             fmt(dt) + " s");
}

// ---------------------------------------------------------------------------
// Criterion 5: backbone numerics.
// ---------------------------------------------------------------------------
void criterion_5() {
  bool grad_ok = true;
  {
    ModelConfig mc;
    mc.patch_size = 1;
    mc.window_size = 2;
    mc.token_dim = 8;
    mc.ff_dim = 16;
    mc.heads = {2, 2};
    mc.down_blocks = {1, 1};
    mc.up_blocks = {1, 1};
    mc.sigma_embed_dim = 8;
    Rng rng(5);
    EdgeDenoiser net(mc, rng);
    Field f;
    f.edge = nn::Tensor::randn({2, 4, 4, 1}, rng);
    const Field sc = Field::zeros_like(f);
    const nn::Tensor probe = nn::Tensor::randn({2, 4, 4, 1}, rng);
    auto loss_fn = [&] {
      const auto out = net.forward(f, sc, {0.4, -0.2});
      return nn::sum_all(nn::mul(out.edge, nn::constant(probe)));
    };
    for (auto& [name, p] : net.mutable_parameters()) p->zero_grad();
    auto loss = loss_fn();
    nn::backward(loss);
    Rng pick(55);
    for (auto& [name, p] : net.mutable_parameters()) {
      for (int k = 0; k < 3 && grad_ok; ++k) {
        const std::int64_t i =
            static_cast<std::int64_t>(pick.below(static_cast<std::uint64_t>(p->value.numel())));
        const double saved = p->value[i];
        const double h = 1e-3;
        p->value[i] = saved + h;
        const double up = loss_fn()->value[0];
        p->value[i] = saved - h;
        const double down = loss_fn()->value[0];
        p->value[i] = saved;
        const double fd = (up - down) / (2 * h);
        const double ad = p->grad.numel() ? p->grad[i] : 0.0;
        grad_ok = std::abs(fd - ad) <= 1e-3 * std::max({1.0, std::abs(fd), std::abs(ad)});
      }
      if (!grad_ok) break;
    }
  }

  bool window_ok = true;
  {
    Rng rng(6);
    auto grid = nn::constant(nn::Tensor::randn({2, 8, 8, 5}, rng));
    auto round = window_reverse(window_partition(grid, 4), 2, 8, 8, 4);
    for (std::int64_t i = 0; i < grid->value.numel(); ++i)
      window_ok = window_ok && round->value[i] == grid->value[i];
  }

  bool batch_ok = true;
  {
    Rng rng(7);
    std::vector<Graph> graphs;
    for (int i = 0; i < 6; ++i) {
      const int n = rng.uniform_int(2, 7);
      Graph g(n);
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
          if (rng.bernoulli(0.5)) g.add_edge(u, v);
      graphs.push_back(std::move(g));
    }
    const auto back = unbatch(batch(graphs, 7));
    for (size_t i = 0; i < graphs.size(); ++i) batch_ok = batch_ok && back[i] == graphs[i];
  }

  std::int64_t count = 0;
  {
    ModelConfig mc;
    mc.patch_size = 4;
    mc.window_size = 6;
    mc.token_dim = 60;
    mc.ff_dim = 240;
    mc.heads = {3, 6, 12, 24};
    mc.down_blocks = {1, 1, 3, 1};
    mc.up_blocks = {1, 1, 3, 1};
    mc.sigma_embed_dim = 64;
    Rng rng(8);
    count = EdgeDenoiser(mc, rng).parameter_count();
  }
  const bool count_ok = count >= 0.9 * 15.31e6 && count <= 1.1 * 15.31e6;

  report(5, "backbone gradient check, lossless tilings, reference parameter count",
         grad_ok && window_ok && batch_ok && count_ok,
         std::string("grad ") + (grad_ok ? "ok" : "FAIL") + ", roundtrips " +
             (window_ok && batch_ok ? "ok" : "FAIL") + ", params " + std::to_string(count));
}

// ---------------------------------------------------------------------------
// Criterion 6: desk-scale learning runs (toy recall and grid degree MMD).
// ---------------------------------------------------------------------------
TrainConfig toy_config() {
  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.lr = 3e-3;
  cfg.ema_decay = 0.99;
  cfg.split_ratio = 1.0;
  cfg.seed = 1;
  cfg.out_dir = "acceptance_runs/toy";
  cfg.dataset.kind = "regular-toy";
  cfg.dataset.seed = 11;
  cfg.model.patch_size = 1;
  cfg.model.window_size = 4;
  cfg.model.token_dim = 24;
  cfg.model.ff_dim = 96;
  cfg.model.heads = {4, 8};
  cfg.model.down_blocks = {1, 1};
  cfg.model.up_blocks = {1, 1};
  cfg.model.sigma_embed_dim = 32;
  cfg.model.init_std = 0.1;
  cfg.edm.steps = 64;
  return cfg;
}

int epochs_for_budget(int total_steps, int dataset_size, int batch_size) {
  const int steps_per_epoch = (dataset_size + batch_size - 1) / batch_size;
  return std::max(1, total_steps / steps_per_epoch);
}

void criterion_6() {
  const int step_budget = 3000;

  // Toy recall at l = 1 vs l = 500 under an equal optimization-step budget.
  TrainConfig cfg1 = toy_config();
  cfg1.epochs = epochs_for_budget(step_budget, 10, cfg1.batch_size);
  std::fprintf(stderr, "criterion 6: training toy model (l=1, %d epochs)...\n", cfg1.epochs);
  const auto r1 = run_toy_recall_experiment(1, cfg1, 100, [](int e, double l) {
    if ((e + 1) % 500 == 0) std::fprintf(stderr, "  l=1 epoch %d loss %.4f\n", e + 1, l);
  });

  TrainConfig cfg500 = toy_config();
  cfg500.out_dir = "acceptance_runs/toy_l500";
  cfg500.epochs = epochs_for_budget(step_budget, 10 * 500, cfg500.batch_size);
  std::fprintf(stderr, "criterion 6: training toy model (l=500, %d epochs)...\n", cfg500.epochs);
  const auto r500 = run_toy_recall_experiment(500, cfg500, 100, [](int e, double l) {
    std::fprintf(stderr, "  l=500 epoch %d loss %.4f\n", e + 1, l);
  });

  const bool toy_ok = r1.recall >= 0.9 && r500.recall < r1.recall;
  report(6, "toy recall: l=1 >= 0.9 and l=500 strictly lower", toy_ok,
         "recall(l=1) " + fmt(r1.recall) + ", recall(l=500) " + fmt(r500.recall));

  // Desk-scale grids: degree MMD against the held-out split.
  TrainConfig gcfg;
  gcfg.epochs = 0;  // set below
  gcfg.batch_size = 8;
  gcfg.lr = 3e-3;
  gcfg.ema_decay = 0.99;
  gcfg.split_ratio = 0.8;
  gcfg.seed = 2;
  gcfg.out_dir = "acceptance_runs/grid";
  gcfg.dataset.kind = "grid";
  gcfg.dataset.count = 100;
  gcfg.dataset.rows_lo = 4;
  gcfg.dataset.rows_hi = 6;
  gcfg.dataset.cols_lo = 4;
  gcfg.dataset.cols_hi = 6;
  gcfg.dataset.seed = 21;
  gcfg.model.patch_size = 2;
  gcfg.model.window_size = 3;
  gcfg.model.token_dim = 24;
  gcfg.model.ff_dim = 96;
  gcfg.model.heads = {4, 8};
  gcfg.model.down_blocks = {1, 1};
  gcfg.model.up_blocks = {1, 1};
  gcfg.model.sigma_embed_dim = 32;
  gcfg.model.init_std = 0.1;
  gcfg.edm.steps = 64;
  gcfg.epochs = 250;  // 10 batches per epoch over the 80-graph split
  std::fprintf(stderr, "criterion 6: training grid model (%d epochs)...\n", gcfg.epochs);
  const auto grid_result = train(gcfg, nullptr, [](int e, double l) {
    if ((e + 1) % 50 == 0) std::fprintf(stderr, "  grid epoch %d loss %.4f\n", e + 1, l);
  });

  Rng build_rng(0);
  EdgeDenoiser net(gcfg.model, build_rng);
  grid_result.checkpoint.apply(net, true);
  const Denoiser denoiser = net.denoiser(gcfg.edm);
  Rng srng(31);
  std::map<int, int> sizes;
  for (size_t i = 0; i < grid_result.test_set.size(); ++i)
    sizes[grid_result.checkpoint
              .train_sizes[static_cast<size_t>(srng.below(grid_result.checkpoint.train_sizes.size()))]]++;
  std::vector<Graph> samples;
  for (const auto& [n, k] : sizes) {
    auto part = generate_graphs(denoiser, k, n, gcfg.edm, srng, false);
    for (auto& g : part) samples.push_back(std::move(g));
  }
  const int deg_bins = std::max(max_degree(samples), max_degree(grid_result.test_set)) + 1;
  std::vector<StatHistogram> ha, hb;
  for (const auto& g : samples) ha.push_back(degree_hist(g, deg_bins));
  for (const auto& g : grid_result.test_set) hb.push_back(degree_hist(g, deg_bins));
  const double deg_mmd = mmd_tv(ha, hb);
  report(6, "desk-scale grid training reaches degree MMD <= 0.05", deg_mmd <= 0.05,
         "degree MMD " + fmt(deg_mmd) + " over " + std::to_string(samples.size()) + " samples");
}

// ---------------------------------------------------------------------------
// Criterion 7: the random-permutation trick changes matrices, not classes.
// ---------------------------------------------------------------------------
void criterion_7() {
  Rng data_rng(11);
  const auto toy = generate_regular_toy(data_rng);
  const auto denoiser = make_gmm_denoiser(toy);
  EdmConfig cfg;
  cfg.steps = 64;
  const int n = toy.front().n();
  const int count = 500;

  auto classify = [&](const Graph& g) {
    for (size_t i = 0; i < toy.size(); ++i)
      if (isomorphic(g, toy[i])) return static_cast<int>(i);
    return static_cast<int>(toy.size());
  };

  std::fprintf(stderr, "criterion 7: sampling 3 x %d oracle-driven graphs...\n", count);
  Rng ra(71), rb(71), rc(72);
  const auto plain = generate_graphs(denoiser, count, n, cfg, ra, false);
  const auto permuted_same_seed = generate_graphs(denoiser, count, n, cfg, rb, true);
  const auto permuted_fresh = generate_graphs(denoiser, count, n, cfg, rc, true);

  // Same seed: permutation never leaves the isomorphism class, but the
  // matrices themselves change.
  bool classes_match = true;
  int matrices_differ = 0;
  for (int i = 0; i < count; ++i) {
    classes_match =
        classes_match && classify(plain[static_cast<size_t>(i)]) ==
                             classify(permuted_same_seed[static_cast<size_t>(i)]);
    if (!(plain[static_cast<size_t>(i)] == permuted_same_seed[static_cast<size_t>(i)]))
      ++matrices_differ;
  }

  // Independent seeds: class distributions are statistically identical.
  std::map<int, std::pair<int, int>> counts;
  for (const auto& g : plain) counts[classify(g)].first++;
  for (const auto& g : permuted_fresh) counts[classify(g)].second++;
  double stat = 0.0;
  int dof = -1;
  for (const auto& [cls, c] : counts) {
    const double total = c.first + c.second;
    const double ea = total / 2.0, eb = total / 2.0;
    stat += (c.first - ea) * (c.first - ea) / ea + (c.second - eb) * (c.second - eb) / eb;
    ++dof;
  }
  double p_value = 1.0;
  if (dof >= 1) {
    boost::math::chi_squared chi(dof);
    p_value = 1.0 - boost::math::cdf(chi, stat);
  }

  const bool pass = classes_match && matrices_differ > count / 2 && p_value > 0.001;
  report(7, "random-permutation trick: class distribution unchanged, matrices differ", pass,
         "chi-square p " + fmt(p_value) + ", " + std::to_string(matrices_differ) + "/" +
             std::to_string(count) + " matrices differ, classes " +
             (classes_match ? "preserved" : "CHANGED"));
}

// ---------------------------------------------------------------------------
// Criterion 8: evaluation suite numerics.
// ---------------------------------------------------------------------------
void criterion_8() {
  Rng rng(8);
  auto random_graph = [&](int n, double p) {
    Graph g(n);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (rng.bernoulli(p)) g.add_edge(u, v);
    return g;
  };

  std::vector<StatHistogram> a, b;
  for (int i = 0; i < 8; ++i) {
    a.push_back(degree_hist(random_graph(7, 0.4), 7));
    b.push_back(degree_hist(random_graph(7, 0.6), 7));
  }
  const bool self_zero = std::abs(mmd_tv(a, a)) <= 1e-12;
  const bool symmetric = std::abs(mmd_tv(a, b) - mmd_tv(b, a)) <= 1e-15;

  StatHistogram x{"degree", {1.0, 0.0}};
  StatHistogram y{"degree", {0.0, 1.0}};
  const double two_point = mmd_tv({x}, {y});
  const bool closed_form = std::abs(two_point - 2.0 * (1.0 - std::exp(-0.5))) <= 1e-9;

  // Orbit counting against an independent classification route: the library
  // classifies quadruples by degree signature; the oracle here recounts by
  // explicit shape tests on the induced subgraph.
  bool orbit_ok = true;
  for (int trial = 0; trial < 30 && orbit_ok; ++trial) {
    const Graph g = random_graph(rng.uniform_int(4, 7), 0.5);
    const auto fast = orbit_counts(g);
    std::vector<std::vector<long>> slow(static_cast<size_t>(g.n()),
                                        std::vector<long>(kOrbitCount, 0));
    for (int p1 = 0; p1 < g.n(); ++p1)
      for (int p2 = p1 + 1; p2 < g.n(); ++p2)
        for (int p3 = p2 + 1; p3 < g.n(); ++p3)
          for (int p4 = p3 + 1; p4 < g.n(); ++p4) {
            const int q[4] = {p1, p2, p3, p4};
            // Build the induced subgraph and classify it by brute force:
            // count edges, test connectivity by path existence, and read
            // orbits directly off degrees and triangle membership.
            int adj[4][4] = {};
            int deg[4] = {};
            int edges = 0;
            for (int i = 0; i < 4; ++i)
              for (int j = i + 1; j < 4; ++j)
                if (g.has_edge(q[i], q[j])) {
                  adj[i][j] = adj[j][i] = 1;
                  deg[i]++;
                  deg[j]++;
                  edges++;
                }
            // connectivity via 2-step reachability from node 0
            bool reach[4] = {true, false, false, false};
            for (int it = 0; it < 3; ++it)
              for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                  if (reach[i] && adj[i][j]) reach[j] = true;
            const bool connected = reach[0] && reach[1] && reach[2] && reach[3];
            if (!connected || edges < 3) continue;
            auto in_triangle = [&](int i) {
              for (int j = 0; j < 4; ++j)
                for (int k = j + 1; k < 4; ++k)
                  if (j != i && k != i && adj[i][j] && adj[i][k] && adj[j][k]) return true;
              return false;
            };
            for (int i = 0; i < 4; ++i) {
              int orbit = -1;
              if (edges == 6) orbit = 10;
              else if (edges == 5) orbit = deg[i] == 3 ? 9 : 8;
              else if (edges == 4) {
                const bool has_tri = in_triangle(0) || in_triangle(1) || in_triangle(2) || in_triangle(3);
                if (!has_tri) orbit = 4;                       // 4-cycle
                else if (deg[i] == 1) orbit = 5;               // paw pendant
                else if (deg[i] == 3) orbit = 7;               // paw center
                else orbit = 6;                                // paw rim
              } else {
                int max_deg = 0;
                for (int j = 0; j < 4; ++j) max_deg = std::max(max_deg, deg[j]);
                if (max_deg == 3) orbit = deg[i] == 3 ? 3 : 2;  // star
                else orbit = deg[i] == 1 ? 0 : 1;               // path
              }
              slow[static_cast<size_t>(q[i])][static_cast<size_t>(orbit)]++;
            }
          }
    orbit_ok = fast == slow;
  }

  // Permutation invariance of all metrics.
  bool invariant = true;
  for (int trial = 0; trial < 10 && invariant; ++trial) {
    const int n = rng.uniform_int(4, 8);
    const Graph g = random_graph(n, 0.5);
    const Graph h = permute(g, uniform_random_permutation(n, rng));
    invariant = invariant && degree_hist(g, n).bins == degree_hist(h, n).bins;
    invariant = invariant && clustering_hist(g).bins == clustering_hist(h).bins;
    const auto og = orbit_hist(g).bins;
    const auto oh = orbit_hist(h).bins;
    for (size_t i = 0; i < og.size(); ++i) invariant = invariant && std::abs(og[i] - oh[i]) <= 1e-12;
  }

  report(8, "evaluation suite numerics and invariances",
         self_zero && symmetric && closed_form && orbit_ok && invariant,
         std::string("self-distance ") + (self_zero ? "0" : "FAIL") + ", closed form " +
             fmt(two_point) + ", orbit oracle " + (orbit_ok ? "ok" : "FAIL") + ", invariance " +
             (invariant ? "ok" : "FAIL"));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_8();
  criterion_7();
  criterion_6();
  std::printf("%s\n", g_failures == 0 ? "acceptance: all criteria passed"
                                      : "acceptance: FAILURES present");
  return g_failures == 0 ? 0 : 1;
}
