#include "cqed/influence.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cqed {

Complex influence_factor(Complex eta, double ket_later, double bra_later, double ket_earlier,
                         double bra_earlier) {
  const double d = ket_later - bra_later;
  if (d == 0.0) return {1.0, 0.0};
  return std::exp(-d * (eta * ket_earlier - std::conj(eta) * bra_earlier));
}

InfluenceTensor influence_tensor(const MemoryKernel &kernel, std::size_t delta, const CouplingDiagonal &coupling) {
  if (delta > kernel.delta_max() || kernel.eta.empty())
    throw std::out_of_range("influence_tensor: lag " + std::to_string(delta) + " exceeds kernel range " +
                            std::to_string(kernel.delta_max()));
  const Complex eta = kernel.eta[delta];
  InfluenceTensor b;
  b.delta = delta;
  for (std::size_t i = 0; i < kLiouvilleDim; ++i)
    for (std::size_t j = 0; j < kLiouvilleDim; ++j)
      b.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          influence_factor(eta, coupling.ket(i), coupling.bra(i), coupling.ket(j), coupling.bra(j));
  return b;
}

DenseTensor promote_rank4(const InfluenceTensor &b) {
  constexpr std::size_t d = kLiouvilleDim;
  DenseTensor t({d, d, d, d});
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t g = 0; g < d; ++g)
      t({p, g, p, g}) = b.values(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(p));
  return t;
}

StepMpo build_step_mpo(const MemoryKernel &kernel, std::size_t k, const CouplingDiagonal &coupling,
                       std::optional<std::size_t> memory_cutoff) {
  if (k == 0) throw std::invalid_argument("build_step_mpo: k must be >= 1");
  const std::size_t needed = std::min(k - 1, memory_cutoff.value_or(k - 1));
  if (kernel.eta.empty() || kernel.delta_max() < needed)
    throw std::out_of_range("build_step_mpo: kernel too short for step " + std::to_string(k));

  constexpr std::size_t d = kLiouvilleDim;
  StepMpo mpo;
  mpo.step = k;
  mpo.sites.reserve(k);
  const InfluenceTensor b0 = influence_tensor(kernel, 0, coupling);

  for (std::size_t l = 1; l <= k; ++l) {
    const std::size_t lag = k - l;
    const bool newest = l == k;
    const bool oldest = l == 1;
    const std::size_t dn = newest ? 1 : d;
    const std::size_t dold = oldest ? 1 : d;
    DenseTensor t({d, dn, d, dold});
    if (newest) {
      for (std::size_t p = 0; p < d; ++p) {
        const auto pi = static_cast<Eigen::Index>(p);
        t({p, 0, p, oldest ? 0 : p}) = b0.values(pi, pi);
      }
    } else {
      const bool beyond = memory_cutoff && lag > *memory_cutoff;
      const InfluenceTensor b = beyond ? InfluenceTensor{lag, Eigen::Matrix<Complex, 9, 9>::Ones()}
                                       : influence_tensor(kernel, lag, coupling);
      for (std::size_t p = 0; p < d; ++p)
        for (std::size_t g = 0; g < d; ++g)
          t({p, g, p, oldest ? 0 : g}) =
              b.values(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(p));
    }
    mpo.sites.push_back(std::move(t));
  }
  return mpo;
}

DenseTensor contract_step_mpo_diagonal(const StepMpo &mpo) {
  if (mpo.sites.empty()) throw std::invalid_argument("contract_step_mpo_diagonal: empty MPO");
  auto site_diagonal = [](const DenseTensor &t) {
    // e[bond_newer, p, bond_older] = t[p, bond_newer, p, bond_older]
    const std::size_t d = t.extent(0), dn = t.extent(1), dold = t.extent(3);
    DenseTensor e({dn, d, dold});
    for (std::size_t g = 0; g < dn; ++g)
      for (std::size_t p = 0; p < d; ++p)
        for (std::size_t o = 0; o < dold; ++o) e({g, p, o}) = t({p, g, p, o});
    return e;
  };

  const std::size_t k = mpo.sites.size();
  // axes: (p_k, p_{k-1}, ..., bond)
  DenseTensor acc = site_diagonal(mpo.sites.back());
  acc = std::move(acc).reshape({acc.extent(1), acc.extent(2)});
  for (std::size_t l = k - 1; l-- > 0;) {
    const DenseTensor e = site_diagonal(mpo.sites[l]);
    acc = contract(acc, e, {{acc.rank() - 1, 0}});
  }
  // drop the unit bond, then order axes oldest first
  std::vector<std::size_t> shape(acc.shape().begin(), acc.shape().end() - 1);
  acc = std::move(acc).reshape(shape);
  std::vector<std::size_t> axes(k);
  std::iota(axes.rbegin(), axes.rend(), std::size_t{0});
  return acc.permute(axes);
}

InfluenceClasses classify(const std::vector<std::size_t> &active, const CouplingDiagonal &coupling) {
  InfluenceClasses c;
  c.active = active;
  for (std::size_t beta : active) {
    if (beta >= kLiouvilleDim) throw std::out_of_range("classify: compound index out of range");
    const std::array<double, 2> pr{coupling.ket(beta), coupling.bra(beta)};
    auto it = std::find(c.pair.begin(), c.pair.end(), pr);
    if (it == c.pair.end()) {
      c.pair.push_back(pr);
      it = c.pair.end() - 1;
    }
    c.class_of.push_back(static_cast<std::size_t>(it - c.pair.begin()));
  }
  // identity branch first so that it occupies branch 0
  for (std::size_t beta : active)
    if (coupling.ket(beta) == coupling.bra(beta)) {
      c.has_identity_branch = true;
      c.branch_pair.push_back({0.0, 0.0});
      break;
    }
  for (std::size_t beta : active) {
    const std::array<double, 2> pr{coupling.ket(beta), coupling.bra(beta)};
    if (pr[0] == pr[1]) {
      c.branch_of.push_back(0);
      continue;
    }
    auto it = std::find(c.branch_pair.begin() + (c.has_identity_branch ? 1 : 0), c.branch_pair.end(), pr);
    if (it == c.branch_pair.end()) {
      c.branch_pair.push_back(pr);
      it = c.branch_pair.end() - 1;
    }
    c.branch_of.push_back(static_cast<std::size_t>(it - c.branch_pair.begin()));
  }
  return c;
}

Eigen::MatrixXcd class_influence(const InfluenceClasses &classes, Complex eta) {
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(classes.n_branches()), static_cast<Eigen::Index>(classes.n_classes()));
  for (std::size_t b = 0; b < classes.n_branches(); ++b)
    for (std::size_t c = 0; c < classes.n_classes(); ++c)
      m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(c)) =
          influence_factor(eta, classes.branch_pair[b][0], classes.branch_pair[b][1], classes.pair[c][0],
                           classes.pair[c][1]);
  return m;
}

} // namespace cqed
