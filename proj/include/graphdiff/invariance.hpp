#pragma once

#include <numeric>
#include <vector>

#include "graphdiff/graph.hpp"
#include "graphdiff/mixture.hpp"

namespace graphdiff {

using GraphMixture = DiracMixture<GraphKey, Rational>;
using GraphMixtureD = DiracMixture<GraphKey, double>;

// Empirical distribution of a training set augmented with l fixed permuted
// copies of every matrix: uniform over {P_j A_i P_j^T} with duplicates merged
// (automorphic copies collapse onto one atom with summed weight).
inline GraphMixture l_permuted_distribution(const std::vector<Graph>& train,
                                            const std::vector<Permutation>& perms) {
  require(!train.empty() && !perms.empty(), ErrorCategory::invalid_argument,
          "l_permuted_distribution: empty inputs");
  const int n = train.front().n();
  for (const auto& g : train)
    require(g.n() == n, ErrorCategory::invalid_argument, "l_permuted_distribution: graphs must share n");
  for (size_t i = 0; i < perms.size(); ++i) {
    require(perms[i].size() == n, ErrorCategory::invalid_argument,
            "l_permuted_distribution: permutation size mismatch");
    for (size_t j = i + 1; j < perms.size(); ++j)
      require(!(perms[i] == perms[j]), ErrorCategory::invalid_argument,
              "l_permuted_distribution: permutations must be distinct");
  }
  const long long total = static_cast<long long>(train.size()) * static_cast<long long>(perms.size());
  std::vector<std::pair<GraphKey, Rational>> terms;
  terms.reserve(static_cast<size_t>(total));
  for (const auto& g : train)
    for (const auto& p : perms) terms.emplace_back(key_of(permute(g, p)), Rational(1, total));
  return GraphMixture::from_terms(terms);
}

inline GraphMixture empirical_distribution(const std::vector<Graph>& train) {
  require(!train.empty(), ErrorCategory::invalid_argument, "empirical_distribution: empty input");
  std::vector<std::pair<GraphKey, Rational>> terms;
  for (const auto& g : train)
    terms.emplace_back(key_of(g), Rational(1, static_cast<long long>(train.size())));
  return GraphMixture::from_terms(terms);
}

// The uniform distribution over the union of the training graphs' isomorphism
// classes: the closest permutation-invariant distribution to the empirical
// one within the family of uniform distributions whose support contains the
// training set.
inline GraphMixture closest_invariant_uniform(const std::vector<Graph>& train) {
  require(!train.empty(), ErrorCategory::invalid_argument, "closest_invariant_uniform: empty input");
  for (const auto& g : train)
    require(g.n() <= 6, ErrorCategory::unsupported_size, "closest_invariant_uniform: supports n <= 6");
  std::vector<GraphKey> atoms;
  for (const auto& g : train)
    for (const auto& h : isomorphism_class(g)) atoms.push_back(key_of(h));
  return GraphMixture::uniform(atoms);
}

// Exact distribution of P A P^T with P uniform over S_n, computed by full
// enumeration. The result is permutation invariant and idempotent under this
// map.
template <class W>
DiracMixture<GraphKey, W> permuted_sampler_distribution(const DiracMixture<GraphKey, W>& base) {
  require(base.size() > 0, ErrorCategory::invalid_argument, "permuted_sampler_distribution: empty base");
  const int n = base.atoms().front().n;
  require(n <= 6, ErrorCategory::unsupported_size, "permuted_sampler_distribution: supports n <= 6");
  long long fact = 1;
  for (int i = 2; i <= n; ++i) fact *= i;

  std::vector<std::pair<GraphKey, W>> terms;
  std::vector<int> perm(static_cast<size_t>(n));
  for (size_t a = 0; a < base.size(); ++a) {
    require(base.atoms()[a].n == n, ErrorCategory::invalid_argument,
            "permuted_sampler_distribution: atoms must share n");
    const Graph g = graph_of(base.atoms()[a]);
    const W share = base.weights()[a] / static_cast<W>(fact);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      terms.emplace_back(key_of(permute(g, Permutation(perm))), share);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return DiracMixture<GraphKey, W>::from_terms(terms);
}

// One Monte Carlo draw from the permuted sampler: sample an atom from the
// base, then conjugate by a uniform random permutation.
inline GraphKey sample_permuted(const DiracMixture<GraphKey, double>& base, Rng& rng) {
  const size_t i = sample_index(base, rng);
  const Graph g = graph_of(base.atoms()[i]);
  return key_of(permute(g, uniform_random_permutation(g.n(), rng)));
}

// Closed-form weight of one atom under the permuted sampler:
//   q(B) = Aut(B)/n! * sum of base weights over the atoms isomorphic to B.
template <class W>
W permuted_sampler_closed_form(const DiracMixture<GraphKey, W>& base, const GraphKey& target) {
  const Graph tg = graph_of(target);
  long long fact = 1;
  for (int i = 2; i <= target.n; ++i) fact *= i;
  const W aut = static_cast<W>(automorphism_count(tg));
  W mass{};
  for (size_t a = 0; a < base.size(); ++a) {
    if (isomorphic(graph_of(base.atoms()[a]), tg)) mass = mass + base.weights()[a];
  }
  return aut / static_cast<W>(fact) * mass;
}

}  // namespace graphdiff
