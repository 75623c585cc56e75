#pragma once

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "graphdiff/invariance.hpp"

namespace graphdiff {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string observed;
  std::string expected;
};

namespace theory {

template <class T>
std::string show(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

template <class T>
void expect_eq(std::vector<CheckResult>& out, const std::string& name, const T& observed,
               const T& expected) {
  out.push_back({name, observed == expected, show(observed), show(expected)});
}

inline void expect_true(std::vector<CheckResult>& out, const std::string& name, bool cond,
                        const std::string& detail = "") {
  out.push_back({name, cond, detail.empty() ? (cond ? "true" : "false") : detail, "true"});
}

// ---------------------------------------------------------------------------
// Two-class counterexample family over opaque labeled atoms.
//
// The family has 32 atoms. Atoms 1..24 form a class whose orbit is full
// (trivial automorphisms); atoms 25..32 complete the reference uniform
// mixture, while the non-uniform and off-support counterexample mixtures
// place weight on the six-atom block 25..30 (orbit size 6, automorphism
// number 4). The constructions are abstract because no 4-node graph
// simultaneously realizes both declared orbit sizes; the arithmetic below is
// what the verification reproduces exactly.
// ---------------------------------------------------------------------------

struct LabeledAtom {
  int id = 0;
  auto operator<=>(const LabeledAtom&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const LabeledAtom& a) { return os << "atom" << a.id; }

using LabeledMixture = DiracMixture<LabeledAtom, Rational>;

namespace twoclass {

inline std::vector<LabeledAtom> range(int lo, int hi) {
  std::vector<LabeledAtom> v;
  for (int i = lo; i <= hi; ++i) v.push_back({i});
  return v;
}

// Data with two atoms of the full-orbit class plus one of the small class.
inline LabeledMixture data_with_duplicates() { return LabeledMixture::uniform({{23}, {24}, {25}}); }

// Data with one atom from each class.
inline LabeledMixture data_without_duplicates() { return LabeledMixture::uniform({{24}, {25}}); }

// Uniform mixture over the full 32-atom family (the reference the
// counterexamples must beat).
inline LabeledMixture reference_uniform() { return LabeledMixture::uniform(range(1, 32)); }

// Invariant but non-uniform: weight rho_a on each full-orbit atom and
// rho_b = (1 - 24 rho_a) / 6 on each atom of the six-atom block.
inline LabeledMixture non_uniform(const Rational& rho_a) {
  const Rational rho_b = (Rational(1) - Rational(24) * rho_a) / 6;
  std::vector<std::pair<LabeledAtom, Rational>> terms;
  for (int i = 1; i <= 24; ++i) terms.emplace_back(LabeledAtom{i}, rho_a);
  if (rho_b > Rational(0))
    for (int i = 25; i <= 30; ++i) terms.emplace_back(LabeledAtom{i}, rho_b);
  return LabeledMixture::from_terms(terms);
}

// Invariant and uniform but with support off the data: the six-atom block.
inline LabeledMixture off_support() { return LabeledMixture::uniform(range(25, 30)); }

}  // namespace twoclass

// Exact total-variation arithmetic of the four counterexample cases
// (unhalved convention). Cases 1-2 show that dropping the uniformity
// constraint admits invariant mixtures strictly closer to the data than the
// uniform reference; cases 3-4 do the same by moving the support off the
// data.
inline std::vector<CheckResult> run_case_checks() {
  using namespace twoclass;
  std::vector<CheckResult> out;

  const auto d_dup = data_with_duplicates();
  const auto d_plain = data_without_duplicates();
  const auto reference = reference_uniform();

  // Case 1: duplicated-class data vs non-uniform invariant mixtures.
  const Rational tv_ref1 = total_variation(reference, d_dup);
  expect_eq(out, "case1.reference_tv", tv_ref1, frac(29, 16));
  for (const Rational rho : {frac(1, 48), frac(1, 100), frac(1, 25)}) {
    expect_eq(out, "case1.nonuniform_tv(rho=" + show(rho) + ")",
              total_variation(non_uniform(rho), d_dup), frac(5, 3) + Rational(4) * rho);
  }
  expect_eq(out, "case1.gap", tv_ref1 - frac(5, 3), frac(7, 48));
  expect_eq(out, "case1.witness_tv", total_variation(non_uniform(frac(1, 48)), d_dup), frac(7, 4));
  expect_true(out, "case1.witness_beats_reference",
              total_variation(non_uniform(frac(1, 48)), d_dup) < tv_ref1, "7/4 < 29/16");
  expect_true(out, "case1.bound_rho_lt_7_48", frac(1, 48) < frac(7, 48));
  expect_true(out, "case1.bound_4rho_lt_gap", Rational(4) * frac(1, 48) < frac(7, 48));
  expect_eq(out, "case1.bound_boundary_tv", total_variation(non_uniform(frac(7, 192)), d_dup), tv_ref1);

  // Case 2: duplicate-free data vs non-uniform invariant mixtures.
  const Rational tv_ref2 = total_variation(reference, d_plain);
  expect_eq(out, "case2.reference_tv", tv_ref2, frac(15, 8));
  for (const Rational rho : {frac(1, 48), frac(1, 100), frac(1, 25)}) {
    expect_eq(out, "case2.nonuniform_tv(rho=" + show(rho) + ")",
              total_variation(non_uniform(rho), d_plain), frac(5, 3) + Rational(6) * rho);
  }
  expect_eq(out, "case2.gap", tv_ref2 - frac(5, 3), frac(5, 24));
  expect_true(out, "case2.bound_rho_lt_5_144", frac(1, 48) < frac(5, 144));
  expect_eq(out, "case2.witness_tv", total_variation(non_uniform(frac(1, 48)), d_plain), frac(43, 24));
  expect_true(out, "case2.witness_beats_reference",
              total_variation(non_uniform(frac(1, 48)), d_plain) < tv_ref2, "43/24 < 15/8");
  expect_eq(out, "case2.bound_boundary_tv", total_variation(non_uniform(frac(5, 144)), d_plain), tv_ref2);

  // Cases 3-4: the off-support uniform mixture beats the reference on both
  // data configurations.
  const Rational tv_beta_dup = total_variation(twoclass::off_support(), d_dup);
  expect_eq(out, "case3.offsupport_tv", tv_beta_dup, frac(5, 3));
  expect_true(out, "case3.offsupport_beats_reference", tv_beta_dup < tv_ref1, "5/3 < 29/16");
  const Rational tv_beta_plain = total_variation(twoclass::off_support(), d_plain);
  expect_eq(out, "case4.offsupport_tv", tv_beta_plain, frac(5, 3));
  expect_true(out, "case4.offsupport_beats_reference", tv_beta_plain < tv_ref2, "5/3 < 15/8");

  return out;
}

// Checks of the closest-uniform-invariant construction on real small graphs:
// the TV formula 2(1 - m/l), the degenerate cases, the l-permuted
// distribution, and exhaustive argmin verification at n = 4.
inline std::vector<CheckResult> run_target_checks() {
  std::vector<CheckResult> out;

  Graph path3(3);
  path3.add_edge(0, 1);
  path3.add_edge(1, 2);
  Graph empty3(3);

  // Uniform-over-class distribution of a single 3-node path: three atoms.
  const auto star3 = closest_invariant_uniform({path3});
  expect_eq(out, "superset.path3_support", static_cast<long long>(star3.size()), 3LL);
  expect_eq(out, "superset.path3_tv", total_variation(star3, empirical_distribution({path3})),
            frac(4, 3));
  const auto e3 = closest_invariant_uniform({empty3});
  expect_eq(out, "superset.empty3_tv", total_variation(e3, empirical_distribution({empty3})),
            Rational(0));

  // TV(p*, p_data) = 2(1 - m/l) with m distinct training matrices and l the
  // size of the class union.
  {
    Graph p4(4);
    p4.add_edge(0, 1);
    p4.add_edge(1, 2);
    p4.add_edge(2, 3);
    Graph c4(4);
    c4.add_edge(0, 1);
    c4.add_edge(1, 2);
    c4.add_edge(2, 3);
    c4.add_edge(3, 0);
    const std::vector<Graph> train{p4, c4};
    const auto pstar = closest_invariant_uniform(train);
    const auto pdata = empirical_distribution(train);
    const long long m = static_cast<long long>(pdata.size());
    const long long l = static_cast<long long>(pstar.size());
    expect_eq(out, "superset.formula_tv", total_variation(pstar, pdata),
              Rational(2) * (Rational(1) - Rational(m, l)));

    // Exhaustive minimization over uniform invariant mixtures whose support
    // contains the training set: candidate supports are unions of the
    // training classes with any other isomorphism classes at n = 4.
    std::set<GraphKey> required;
    for (const auto& g : train)
      for (const auto& h : isomorphism_class(g)) required.insert(key_of(h));

    std::vector<std::vector<GraphKey>> other_classes;
    std::set<GraphKey> assigned;
    for (std::uint64_t bits = 0; bits < 64; ++bits) {
      GraphKey k{4, bits};
      if (assigned.count(k) || required.count(k)) continue;
      std::vector<GraphKey> cls;
      for (const auto& h : isomorphism_class(graph_of(k))) {
        cls.push_back(key_of(h));
        assigned.insert(key_of(h));
      }
      other_classes.push_back(std::move(cls));
    }
    Rational best_tv(100);
    std::vector<GraphKey> best_support;
    for (std::uint64_t mask = 0; mask < (1ULL << other_classes.size()); ++mask) {
      std::vector<GraphKey> support(required.begin(), required.end());
      for (size_t c = 0; c < other_classes.size(); ++c)
        if (mask & (1ULL << c))
          support.insert(support.end(), other_classes[c].begin(), other_classes[c].end());
      const auto q = GraphMixture::uniform(support);
      const Rational tv = total_variation(q, pdata);
      if (tv < best_tv) {
        best_tv = tv;
        best_support = support;
      }
    }
    std::sort(best_support.begin(), best_support.end());
    expect_true(out, "superset.argmin_is_class_union",
                best_support == std::vector<GraphKey>(pstar.atoms()),
                "minimizer support == union of training classes");
    expect_eq(out, "superset.argmin_tv", best_tv, total_variation(pstar, pdata));
  }

  // l-permuted empirical distribution.
  {
    const auto identity_only = l_permuted_distribution({path3}, {Permutation::identity(3)});
    expect_true(out, "lperm.l1_identity", identity_only == empirical_distribution({path3}),
                "l=1 with identity reproduces the data");

    std::vector<Permutation> all6;
    std::vector<int> perm{0, 1, 2};
    do {
      all6.push_back(Permutation(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto full = l_permuted_distribution({path3}, all6);
    expect_eq(out, "lperm.path3_atoms", static_cast<long long>(full.size()), 3LL);
    bool thirds = true;
    for (const auto& w : full.weights()) thirds = thirds && w == frac(1, 3);
    expect_true(out, "lperm.path3_uniform_thirds", thirds);
    expect_true(out, "lperm.path3_equals_class_uniform", full == closest_invariant_uniform({path3}),
                "full permutation set reproduces the class uniform");

    const auto e = l_permuted_distribution({empty3}, all6);
    expect_true(out, "lperm.empty_single_atom", e.size() == 1 && e.weights()[0] == Rational(1));
  }

  return out;
}

namespace detail {

inline GraphKey random_graph_key(int n, Rng& rng) {
  Graph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.bernoulli(0.5)) g.add_edge(u, v);
  return key_of(g);
}

inline GraphMixture random_base(int n, Rng& rng) {
  const int k = rng.uniform_int(1, 4);
  std::set<GraphKey> atoms;
  while (static_cast<int>(atoms.size()) < k) atoms.insert(random_graph_key(n, rng));
  std::vector<long long> raw;
  long long total = 0;
  for (size_t i = 0; i < atoms.size(); ++i) {
    raw.push_back(rng.uniform_int(1, 10));
    total += raw.back();
  }
  std::vector<std::pair<GraphKey, Rational>> terms;
  size_t i = 0;
  for (const auto& a : atoms) terms.emplace_back(a, Rational(raw[i++], total));
  return GraphMixture::from_terms(terms);
}

inline bool exactly_invariant(const GraphMixture& q, int n) {
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    const Permutation p(perm);
    for (size_t a = 0; a < q.size(); ++a) {
      const GraphKey moved = key_of(permute(graph_of(q.atoms()[a]), p));
      if (q.probability(moved) != q.weights()[a]) return false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return true;
}

}  // namespace detail

// Random-base verification of the permuted-sampler construction: exact
// invariance under every permutation, agreement with the closed form, and
// idempotence, all in rational arithmetic.
inline std::vector<CheckResult> run_sampler_checks(std::uint64_t seed = 7, int bases_per_size = 25) {
  std::vector<CheckResult> out;
  Rng rng(seed);

  Graph path3(3);
  path3.add_edge(0, 1);
  path3.add_edge(1, 2);
  {
    const auto q = permuted_sampler_distribution(empirical_distribution({path3}));
    bool thirds = q.size() == 3;
    for (const auto& w : q.weights()) thirds = thirds && w == frac(1, 3);
    expect_true(out, "sampler.point_mass_path3_uniform_class", thirds,
                "point mass maps to uniform over its class");
  }
  {
    // Non-uniform base on two matrices of one 4-node class flattens to the
    // uniform class distribution.
    Graph p4(4);
    p4.add_edge(0, 1);
    p4.add_edge(1, 2);
    p4.add_edge(2, 3);
    const auto cls = isomorphism_class(p4);
    const auto base = GraphMixture::from_terms(
        {{key_of(cls[0]), frac(7, 10)}, {key_of(cls[1]), frac(3, 10)}});
    const auto q = permuted_sampler_distribution(base);
    bool uniform_cls = q.size() == cls.size();
    for (const auto& w : q.weights())
      uniform_cls = uniform_cls && w == Rational(1, static_cast<long long>(cls.size()));
    expect_true(out, "sampler.same_class_base_flattens", uniform_cls);
  }

  for (int n : {3, 4}) {
    bool invariant = true, closed = true, idempotent = true;
    for (int trial = 0; trial < bases_per_size; ++trial) {
      const auto base = detail::random_base(n, rng);
      const auto q = permuted_sampler_distribution(base);
      invariant = invariant && detail::exactly_invariant(q, n);
      for (size_t a = 0; a < q.size() && closed; ++a)
        closed = closed && permuted_sampler_closed_form(base, q.atoms()[a]) == q.weights()[a];
      idempotent = idempotent && permuted_sampler_distribution(q) == q;
    }
    const std::string tag = "n" + std::to_string(n);
    expect_true(out, "sampler.invariance." + tag, invariant,
                std::to_string(bases_per_size) + " random bases, zero error");
    expect_true(out, "sampler.closed_form." + tag, closed);
    expect_true(out, "sampler.idempotent." + tag, idempotent);
  }
  return out;
}

inline std::vector<CheckResult> run_all_checks(std::uint64_t seed = 7) {
  auto out = run_case_checks();
  auto target = run_target_checks();
  out.insert(out.end(), target.begin(), target.end());
  auto sampler = run_sampler_checks(seed);
  out.insert(out.end(), sampler.begin(), sampler.end());
  return out;
}

}  // namespace theory
}  // namespace graphdiff
