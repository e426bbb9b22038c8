#include "tgw/coupling_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tgw {

namespace {
constexpr double kDropMass = 1e-15;
constexpr double kGlueMarginalTol = 1e-10;
}  // namespace

MultiCoupling MultiCoupling::from_tuples(std::vector<Index> sizes, const std::vector<Index>& tuples,
                                         const std::vector<double>& masses) {
  const auto arity = sizes.size();
  require(arity >= 1, "multi-coupling needs at least one axis");
  require(tuples.size() == masses.size() * arity, "tuple array does not match mass count");
  for (std::size_t s = 0; s < masses.size(); ++s) {
    require(std::isfinite(masses[s]), "non-finite multi-coupling mass");
    for (std::size_t a = 0; a < arity; ++a) {
      const Index idx = tuples[s * arity + a];
      require(idx >= 0 && idx < sizes[a], "multi-coupling index out of range");
    }
  }
  std::vector<std::size_t> order(masses.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(tuples.begin() + static_cast<std::ptrdiff_t>(a * arity),
                                        tuples.begin() + static_cast<std::ptrdiff_t>((a + 1) * arity),
                                        tuples.begin() + static_cast<std::ptrdiff_t>(b * arity),
                                        tuples.begin() + static_cast<std::ptrdiff_t>((b + 1) * arity));
  };
  std::stable_sort(order.begin(), order.end(), less);

  MultiCoupling out;
  out.sizes_ = std::move(sizes);
  for (std::size_t k = 0; k < order.size();) {
    const std::size_t s = order[k];
    double total = 0.0;
    std::size_t l = k;
    while (l < order.size() && !less(s, order[l]) && !less(order[l], s)) {
      total += masses[order[l]];
      ++l;
    }
    if (total > 0.0) {
      out.tuples_.insert(out.tuples_.end(), tuples.begin() + static_cast<std::ptrdiff_t>(s * arity),
                         tuples.begin() + static_cast<std::ptrdiff_t>((s + 1) * arity));
      out.masses_.push_back(total);
    }
    k = l;
  }
  return out;
}

MultiCoupling MultiCoupling::diagonal(const Vector& weights, Index arity) {
  require(arity >= 1, "multi-coupling needs at least one axis");
  std::vector<Index> tuples;
  std::vector<double> masses;
  for (Index i = 0; i < weights.size(); ++i) {
    for (Index a = 0; a < arity; ++a) tuples.push_back(i);
    masses.push_back(weights(i));
  }
  return from_tuples(std::vector<Index>(static_cast<std::size_t>(arity), weights.size()), tuples,
                     masses);
}

MultiCoupling MultiCoupling::from_coupling(const Coupling& plan) {
  std::vector<Index> tuples;
  std::vector<double> masses;
  plan.for_each([&](Index r, Index c, double m) {
    tuples.push_back(r);
    tuples.push_back(c);
    masses.push_back(m);
  });
  return from_tuples({plan.rows(), plan.cols()}, tuples, masses);
}

Vector MultiCoupling::mass_vector() const {
  return Eigen::Map<const Vector>(masses_.data(), static_cast<Index>(masses_.size()));
}

Vector MultiCoupling::marginal(Index axis) const {
  require(axis >= 0 && axis < arity(), "axis out of range");
  Vector out = Vector::Zero(sizes_[static_cast<std::size_t>(axis)]);
  for (Index s = 0; s < support_size(); ++s) out(at(s, axis)) += mass(s);
  return out;
}

double MultiCoupling::total_mass() const {
  return std::accumulate(masses_.begin(), masses_.end(), 0.0);
}

double marginal_violation(const MultiCoupling& plan, const std::vector<Vector>& weights) {
  require(static_cast<Index>(weights.size()) == plan.arity(), "weight list does not match arity");
  double worst = 0.0;
  for (Index a = 0; a < plan.arity(); ++a) {
    const Vector& w = weights[static_cast<std::size_t>(a)];
    require(w.size() == plan.sizes()[static_cast<std::size_t>(a)], "weight length mismatch");
    worst = std::max(worst, (plan.marginal(a) - w).cwiseAbs().maxCoeff());
  }
  return worst;
}

Coupling nw_corner_coupling(const Vector& xi, const Vector& upsilon) {
  require_probability(as_span(xi), "source marginal");
  require_probability(as_span(upsilon), "target marginal");
  const Index n = xi.size();
  const Index m = upsilon.size();
  std::vector<CouplingEntry> entries;
  Index i = 0;
  Index j = 0;
  double ri = xi(0);
  double rj = upsilon(0);
  while (i < n && j < m) {
    const double d = std::min(ri, rj);
    if (d > kDropMass) entries.push_back({i, j, d});
    ri -= d;
    rj -= d;
    // On a tie only the row advances, which keeps the staircase shape.
    if (ri <= rj) {
      if (++i < n) ri = xi(i);
    } else {
      if (++j < m) rj = upsilon(j);
    }
  }
  return Coupling::from_entries(n, m, entries);
}

MultiCoupling glue_nw(const std::vector<Coupling>& couplings) {
  require(!couplings.empty(), "gluing needs at least one coupling");
  const Index m = couplings.front().rows();
  const Vector reference = couplings.front().row_marginal();
  for (const auto& c : couplings) {
    require(c.rows() == m, "couplings do not share the reference space");
    const double gap = (c.row_marginal() - reference).cwiseAbs().maxCoeff();
    require(gap <= kGlueMarginalTol, "couplings disagree on the reference marginal");
  }
  const auto count = couplings.size();
  std::vector<Index> sizes{m};
  for (const auto& c : couplings) sizes.push_back(c.cols());

  std::vector<Index> tuples;
  std::vector<double> masses;
  std::vector<Index> ptr(count);
  std::vector<double> rem(count);
  std::vector<bool> fresh(count);
  std::vector<const SparsePlan*> plans(count);
  for (std::size_t i = 0; i < count; ++i) plans[i] = &couplings[i].sparse();

  for (Index y = 0; y < m; ++y) {
    auto row_begin = [&](std::size_t i) { return plans[i]->outerIndexPtr()[y]; };
    auto row_end = [&](std::size_t i) { return plans[i]->outerIndexPtr()[y + 1]; };
    bool empty = false;
    for (std::size_t i = 0; i < count; ++i) {
      ptr[i] = row_begin(i);
      if (ptr[i] == row_end(i)) empty = true;
    }
    if (empty) continue;
    for (std::size_t i = 0; i < count; ++i) {
      rem[i] = plans[i]->valuePtr()[ptr[i]];
      fresh[i] = true;
    }
    const std::size_t first_tuple = masses.size();
    double dropped = 0.0;
    while (true) {
      const double least = *std::min_element(rem.begin(), rem.end());
      // Near-ties take an untouched entry verbatim so its mass is reproduced bit-exactly.
      double delta = least;
      for (std::size_t i = 0; i < count; ++i) {
        if (fresh[i] && rem[i] <= least + kDropMass) {
          delta = rem[i];
          break;
        }
      }
      if (delta > kDropMass) {
        tuples.push_back(y);
        for (std::size_t i = 0; i < count; ++i) tuples.push_back(plans[i]->innerIndexPtr()[ptr[i]]);
        masses.push_back(delta);
      } else {
        dropped += std::max(delta, 0.0);
      }
      bool done = false;
      for (std::size_t i = 0; i < count; ++i) {
        rem[i] -= delta;
        fresh[i] = false;
        if (rem[i] <= kDropMass) {
          if (++ptr[i] == row_end(i)) {
            done = true;
          } else {
            rem[i] = plans[i]->valuePtr()[ptr[i]];
            fresh[i] = true;
          }
        }
      }
      if (done) break;
    }
    if (dropped > 0.0 && masses.size() > first_tuple) {
      auto largest = std::max_element(masses.begin() + static_cast<std::ptrdiff_t>(first_tuple),
                                      masses.end());
      *largest += dropped;
    }
  }
  return MultiCoupling::from_tuples(std::move(sizes), tuples, masses);
}

MultiCoupling melt(const MultiCoupling& gluing) {
  const Index arity = gluing.arity();
  if (arity == 1) {
    // Melting a plain measure leaves nothing to drop.
    return gluing;
  }
  std::vector<Index> sizes(gluing.sizes().begin() + 1, gluing.sizes().end());
  std::vector<Index> tuples;
  tuples.reserve(static_cast<std::size_t>(gluing.support_size() * (arity - 1)));
  for (Index s = 0; s < gluing.support_size(); ++s) {
    for (Index a = 1; a < arity; ++a) tuples.push_back(gluing.at(s, a));
  }
  return MultiCoupling::from_tuples(std::move(sizes), tuples, gluing.masses());
}

MaxRuleResult max_rule_without_replacement(const std::vector<Coupling>& couplings,
                                           const Vector& reference_weights) {
  require(!couplings.empty(), "max rule needs at least one coupling");
  const Index m = reference_weights.size();
  require(is_uniform(as_span(reference_weights), 1e-12), "max rule needs a uniform reference");
  for (const auto& c : couplings) {
    require(c.rows() == m && c.cols() == m, "max rule needs equal sizes");
    require(is_uniform(as_span(c.col_marginal()), 1e-9), "max rule needs uniform inputs");
  }
  MaxRuleResult result;
  const auto count = couplings.size();
  std::vector<Index> inverse(count * static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < count; ++i) {
    const Matrix plan = couplings[i].dense();
    std::vector<bool> taken(static_cast<std::size_t>(m), false);
    std::vector<Index> map(static_cast<std::size_t>(m));
    for (Index x = 0; x < m; ++x) {
      Index best = -1;
      double best_score = -1.0;
      for (Index y = 0; y < m; ++y) {
        if (taken[static_cast<std::size_t>(y)]) continue;
        const double score = plan(y, x) / reference_weights(y);
        if (score > best_score) {
          best_score = score;
          best = y;
        }
      }
      if (best_score <= 0.0) {
        result.warnings.push_back("coupling " + std::to_string(i) + ": column " +
                                  std::to_string(x) +
                                  " has no mass on unassigned reference points");
      }
      taken[static_cast<std::size_t>(best)] = true;
      map[static_cast<std::size_t>(x)] = best;
      inverse[static_cast<std::size_t>(best) * count + i] = x;
    }
    result.maps.push_back(std::move(map));
  }
  std::vector<double> masses(reference_weights.data(), reference_weights.data() + m);
  result.melting = MultiCoupling::from_tuples(
      std::vector<Index>(count, m), inverse, masses);
  return result;
}

Coupling bimarginal(const MultiCoupling& plan, Index i, Index j) {
  require(i >= 0 && i < plan.arity() && j >= 0 && j < plan.arity(), "axis out of range");
  require(i != j, "bimarginal needs two distinct axes");
  std::vector<CouplingEntry> entries;
  entries.reserve(static_cast<std::size_t>(plan.support_size()));
  for (Index s = 0; s < plan.support_size(); ++s) {
    entries.push_back({plan.at(s, i), plan.at(s, j), plan.mass(s)});
  }
  return Coupling::from_entries(plan.sizes()[static_cast<std::size_t>(i)],
                                plan.sizes()[static_cast<std::size_t>(j)], entries);
}

}  // namespace tgw
