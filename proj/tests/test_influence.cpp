#include "cqed/influence.hpp"

#include <doctest.h>

#include <random>

using namespace cqed;

namespace {

MemoryKernel random_kernel(std::size_t lags, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  MemoryKernel k;
  k.dt = 1.0;
  k.temperature = 4.0;
  for (std::size_t d = 0; d <= lags; ++d) k.eta.emplace_back(std::abs(u(rng)), u(rng));
  return k;
}

} // namespace

TEST_CASE("compound index convention") {
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t r = 0; r < 3; ++r) {
      const std::size_t beta = compound_index(s, r);
      CHECK(beta == s + 3 * r);
      CHECK(ket_of(beta) == s);
      CHECK(bra_of(beta) == r);
    }
}

TEST_CASE("influence factor by hand") {
  const Complex eta(0.2, -0.1);
  // later slice in |e><g| branch, earlier slice |e><e|
  CHECK(std::abs(influence_factor(eta, 1, 0, 1, 1) - std::exp(-(eta - std::conj(eta)))) < 1e-15);
  CHECK(std::abs(influence_factor(eta, 1, 0, 1, 0) - std::exp(-eta)) < 1e-15);
  CHECK(std::abs(influence_factor(eta, 0, 1, 0, 1) - std::exp(-std::conj(eta))) < 1e-15);
  CHECK(influence_factor(eta, 1, 1, 1, 0) == Complex(1.0));
  CHECK(influence_factor(eta, 0, 0, 1, 0) == Complex(1.0));
}

TEST_CASE("influence tensor entries") {
  const MemoryKernel k = random_kernel(3, 1);
  for (std::size_t d = 0; d <= 3; ++d) {
    const InfluenceTensor b = influence_tensor(k, d);
    CHECK(b.delta == d);
    const CouplingDiagonal c;
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 9; ++j) {
        const Complex ref = std::exp(-(c.ket(i) - c.bra(i)) * (k.eta[d] * c.ket(j) - std::conj(k.eta[d]) * c.bra(j)));
        CHECK(std::abs(b.values(Eigen::Index(i), Eigen::Index(j)) - ref) < 1e-15);
      }
  }
  CHECK_THROWS_AS(influence_tensor(k, 4), std::out_of_range);
}

TEST_CASE("rank-4 promotion") {
  const InfluenceTensor b = influence_tensor(random_kernel(1, 2), 1);
  const DenseTensor t = promote_rank4(b);
  CHECK(t.shape() == std::vector<std::size_t>{9, 9, 9, 9});
  std::size_t nonzero = 0;
  for (std::size_t p = 0; p < 9; ++p)
    for (std::size_t g = 0; g < 9; ++g)
      for (std::size_t q = 0; q < 9; ++q)
        for (std::size_t h = 0; h < 9; ++h) {
          const Complex v = t({p, g, q, h});
          if (p != q || g != h) {
            CHECK(v == Complex(0.0));
          } else {
            CHECK(v == b.values(Eigen::Index(g), Eigen::Index(p)));
            if (v != Complex(0.0)) ++nonzero;
          }
        }
  CHECK(nonzero == 81);
}

TEST_CASE("step MPO diagonal equals the product of pairwise factors") {
  const MemoryKernel k = random_kernel(4, 3);
  for (std::size_t steps = 1; steps <= 4; ++steps) {
    const StepMpo mpo = build_step_mpo(k, steps);
    REQUIRE(mpo.sites.size() == steps);
    const DenseTensor diag = contract_step_mpo_diagonal(mpo);
    REQUIRE(diag.rank() == steps);
    std::vector<std::size_t> idx(steps, 0);
    std::mt19937 rng(steps);
    std::uniform_int_distribution<std::size_t> pick(0, 8);
    for (int trial = 0; trial < 200; ++trial) {
      for (auto &i : idx) i = pick(rng);
      Complex ref = influence_tensor(k, 0).values(Eigen::Index(idx.back()), Eigen::Index(idx.back()));
      for (std::size_t l = 0; l + 1 < steps; ++l)
        ref *= influence_tensor(k, steps - 1 - l).values(Eigen::Index(idx.back()), Eigen::Index(idx[l]));
      std::size_t off = 0;
      for (std::size_t a = 0; a < steps; ++a) off = off * 9 + idx[a];
      CHECK(std::abs(diag.data()[off] - ref) < 1e-13);
    }
  }
  CHECK_THROWS(build_step_mpo(k, 0));
  CHECK_THROWS(build_step_mpo(k, 7));
}

TEST_CASE("memory cutoff replaces distant lags by ones") {
  const MemoryKernel k = random_kernel(1, 4);
  const StepMpo mpo = build_step_mpo(k, 4, {}, 1);
  const DenseTensor diag = contract_step_mpo_diagonal(mpo);
  for (std::size_t a = 0; a < 9; ++a)
    for (std::size_t c = 0; c < 9; ++c) {
      const Complex ref = influence_tensor(k, 0).values(Eigen::Index(c), Eigen::Index(c)) *
                          influence_tensor(k, 1).values(Eigen::Index(c), Eigen::Index(a));
      CHECK(std::abs(diag({a, a, a, c}) - ref) < 1e-14);
      CHECK(std::abs(diag({0, 0, a, c}) - ref) < 1e-14);
    }
}

TEST_CASE("classification of active indices") {
  std::vector<std::size_t> all(9);
  for (std::size_t i = 0; i < 9; ++i) all[i] = i;
  const InfluenceClasses c = classify(all);
  CHECK(c.n_classes() == 4);
  CHECK(c.n_branches() == 3);
  CHECK(c.has_identity_branch);
  CHECK(c.branch_pair[0] == std::array<double, 2>{0.0, 0.0});
  for (std::size_t pos = 0; pos < 9; ++pos) {
    const std::size_t beta = c.active[pos];
    CHECK(c.pair[c.class_of[pos]] == std::array<double, 2>{CouplingDiagonal{}.ket(beta), CouplingDiagonal{}.bra(beta)});
  }

  const InfluenceClasses coh = classify(std::vector<std::size_t>{compound_index(1, 0), compound_index(2, 0)});
  CHECK(coh.n_classes() == 2);
  CHECK(coh.n_branches() == 2);

  const InfluenceClasses off = classify(std::vector<std::size_t>{compound_index(1, 0)});
  CHECK_FALSE(off.has_identity_branch);
  CHECK(off.n_branches() == 1);
  CHECK_THROWS(classify(std::vector<std::size_t>{9}));
}

TEST_CASE("class factors reproduce the full tensor") {
  const MemoryKernel k = random_kernel(2, 5);
  std::vector<std::size_t> all(9);
  for (std::size_t i = 0; i < 9; ++i) all[i] = i;
  const InfluenceClasses c = classify(all);
  for (std::size_t d = 0; d <= 2; ++d) {
    const Eigen::MatrixXcd f = class_influence(c, k.eta[d]);
    const InfluenceTensor b = influence_tensor(k, d);
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 9; ++j)
        CHECK(std::abs(f(Eigen::Index(c.branch_of[i]), Eigen::Index(c.class_of[j])) -
                       b.values(Eigen::Index(i), Eigen::Index(j))) < 1e-15);
  }
}
