#include "tgw/barycenter.hpp"

#include "tgw/parallel.hpp"

#include <cmath>

namespace tgw {

namespace {

constexpr double kMeltTol = 1e-8;

void check_rho(const Vector& rho, std::size_t count) {
  require(rho.size() == static_cast<Index>(count), "rho length does not match the inputs");
  require_probability(as_span(rho), "rho", 1e-12);
}

void check_inputs(const std::vector<SpaceRef>& inputs) {
  require(!inputs.empty(), "at least one input space is required");
  for (const auto& x : inputs) {
    require(x != nullptr, "null input space");
    require(x->gauge.rows() == x->size() && x->gauge.cols() == x->size(),
            "input gauge shape does not match weights");
  }
}

void check_melting(const std::vector<SpaceRef>& inputs, const MultiCoupling& mu) {
  require(mu.arity() == static_cast<Index>(inputs.size()), "melting arity does not match inputs");
  std::vector<Vector> weights;
  for (const auto& x : inputs) weights.push_back(x->weights);
  require(marginal_violation(mu, weights) <= kMeltTol, "melting marginals do not match the inputs");
}

const Matrix& gauge_of(const std::vector<SpaceRef>& inputs, std::size_t i) {
  return inputs[i]->gauge;
}

}  // namespace

std::vector<SpaceRef> share(std::vector<GmSpace> spaces) {
  std::vector<SpaceRef> out;
  out.reserve(spaces.size());
  for (auto& s : spaces) out.push_back(std::make_shared<const GmSpace>(std::move(s)));
  return out;
}

GmSpace mean_gauge(const std::vector<SpaceRef>& inputs, const MultiCoupling& mu,
                   const Vector& rho) {
  check_inputs(inputs);
  check_rho(rho, inputs.size());
  check_melting(inputs, mu);
  const Index s_count = mu.support_size();
  GmSpace out;
  out.weights = mu.mass_vector();
  out.gauge = Matrix::Zero(s_count, s_count);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double r = rho(static_cast<Index>(i));
    if (r == 0.0) continue;
    const Matrix& g = gauge_of(inputs, i);
    const auto axis = static_cast<Index>(i);
    for (Index t = 0; t < s_count; ++t) {
      const Index b = mu.at(t, axis);
      for (Index s = 0; s < s_count; ++s) out.gauge(s, t) += r * g(mu.at(s, axis), b);
    }
  }
  out.kind = GaugeKind::Custom;
  out.label = "barycenter";
  return out;
}

double mgw_functional(const std::vector<SpaceRef>& inputs, const Vector& rho,
                      const MultiCoupling& mu) {
  const GmSpace mean = mean_gauge(inputs, mu, rho);
  const Index s_count = mu.support_size();
  double total = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double r = rho(static_cast<Index>(i));
    if (r == 0.0) continue;
    const Matrix& g = gauge_of(inputs, i);
    const auto axis = static_cast<Index>(i);
    double sum = 0.0;
    for (Index s = 0; s < s_count; ++s) {
      double row = 0.0;
      for (Index t = 0; t < s_count; ++t) {
        const double d = g(mu.at(s, axis), mu.at(t, axis)) - mean.gauge(s, t);
        row += mu.mass(t) * d * d;
      }
      sum += mu.mass(s) * row;
    }
    total += r * sum;
  }
  return total;
}

double gwb_loss(const std::vector<SpaceRef>& inputs, const Vector& rho, const GmSpace& y,
                const GwOptions& opts) {
  check_inputs(inputs);
  check_rho(rho, inputs.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double r = rho(static_cast<Index>(i));
    const double v = solve_gw(y, *inputs[i], opts).value;
    loss += r * v * v;
  }
  return loss;
}

Coupling induced_plan(const MultiCoupling& mu, Index axis) {
  require(axis >= 0 && axis < mu.arity(), "axis out of range");
  std::vector<CouplingEntry> entries;
  entries.reserve(static_cast<std::size_t>(mu.support_size()));
  for (Index s = 0; s < mu.support_size(); ++s) entries.push_back({s, mu.at(s, axis), mu.mass(s)});
  return Coupling::from_entries(mu.support_size(), mu.sizes()[static_cast<std::size_t>(axis)],
                                entries);
}

GmSpace BarycenterState::space() const { return mean_gauge(inputs, melting, rho); }

namespace {

struct Round {
  std::vector<Coupling> plans;
  double loss = 0.0;
};

class Engine {
 public:
  Engine(const std::vector<SpaceRef>& inputs, const Vector& rho, const BaryOptions& opts)
      : inputs_(inputs), rho_(rho), opts_(opts) {
    check_inputs(inputs);
    check_rho(rho, inputs.size());
    require(opts.max_outer >= 1, "max_outer must be at least 1");
    if (opts.stop.kind == StopRule::Kind::FixedIters) {
      require(opts.stop.iters >= 1, "fixed iteration count must be at least 1");
    }
    const bool entropic = opts.gw.inner.method != OtMethod::ExactFlow;
    if (entropic && inputs.size() >= 3 && opts.glue_rule == GlueRule::NwCorner && !opts.step) {
      throw PreconditionError("entropic GW steps with three or more inputs require the max rule");
    }
    if (opts.glue_rule == GlueRule::MaxRule) {
      const Index m = inputs.front()->size();
      for (const auto& x : inputs) {
        require(x->size() == m, "max rule requires inputs of equal size");
        require(is_uniform(as_span(x->weights), 1e-12), "max rule requires uniform weights");
      }
    }
  }

  Round gw_round(const GmSpace& y, const MultiCoupling* mu, std::optional<Index> identity) {
    const auto count = inputs_.size();
    std::vector<GwResult> results(count);
    parallel_for(count, opts_.threads, [&](std::size_t i) {
      const auto idx = static_cast<Index>(i);
      if (identity && *identity == idx) {
        results[i].plan = Coupling::identity(inputs_[i]->weights);
        results[i].value = 0.0;
        return;
      }
      std::optional<Coupling> warm;
      if (mu != nullptr) warm = induced_plan(*mu, idx);
      results[i] = step(y, *inputs_[i], idx, warm);
    });
    Round round;
    for (std::size_t i = 0; i < count; ++i) {
      const double v = results[i].value;
      round.loss += rho_(static_cast<Index>(i)) * v * v;
      round.plans.push_back(std::move(results[i].plan));
    }
    return round;
  }

  MultiCoupling glue(const std::vector<Coupling>& plans, const GmSpace& y,
                     std::vector<std::string>& warnings) const {
    if (opts_.glue_rule == GlueRule::MaxRule) {
      MaxRuleResult r = max_rule_without_replacement(plans, y.weights);
      warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
      return std::move(r.melting);
    }
    return melt(glue_nw(plans));
  }

  BarycenterState run(const GmSpace& y0, std::optional<Index> identity) {
    BarycenterState state;
    state.inputs = inputs_;
    state.rho = rho_;
    Round current = gw_round(y0, nullptr, identity);
    GmSpace current_space = y0;
    double previous_loss = current.loss;
    bool have_melting = false;

    for (int k = 1; k <= opts_.max_outer; ++k) {
      MultiCoupling mu = glue(current.plans, current_space, state.warnings);
      if (have_melting && mu == state.melting) {
        // Fixpoint: another pass would reproduce the same state.
        if (opts_.stop.kind == StopRule::Kind::FixedIters) {
          for (int j = k; j <= opts_.stop.iters; ++j) state.loss_history.emplace_back(j, previous_loss);
        }
        break;
      }
      GmSpace next_space = mean_gauge(inputs_, mu, rho_);
      Round next = gw_round(next_space, &mu, std::nullopt);
      state.loss_history.emplace_back(k, next.loss);
      if (opts_.on_iteration) opts_.on_iteration({k, next.loss, &mu});

      if (opts_.stop.kind == StopRule::Kind::LossIncrease && have_melting &&
          next.loss > previous_loss + 1e-12 * std::abs(previous_loss)) {
        state.loss_increased = true;
        break;
      }
      const double change = std::abs(next.loss - previous_loss);
      const double reference = std::abs(previous_loss);
      state.melting = std::move(mu);
      state.plans = next.plans;
      have_melting = true;
      current = std::move(next);
      current_space = std::move(next_space);
      previous_loss = current.loss;

      if (opts_.stop.kind == StopRule::Kind::RelTol && change <= opts_.stop.tol * reference) break;
      if (opts_.stop.kind == StopRule::Kind::FixedIters && k >= opts_.stop.iters) break;
    }
    return state;
  }

 private:
  GwResult step(const GmSpace& y, const GmSpace& x, Index i, const std::optional<Coupling>& warm) {
    if (opts_.step) return opts_.step(y, x, i, warm);
    GwOptions o = opts_.gw;
    if (warm && o.inner.method == OtMethod::ExactFlow) o.init = GwInit::given(*warm);
    return solve_gw(y, x, o);
  }

  const std::vector<SpaceRef>& inputs_;
  Vector rho_;
  const BaryOptions& opts_;
};

}  // namespace

BarycenterState iterate(const std::vector<SpaceRef>& inputs, const Vector& rho, Index init,
                        const BaryOptions& opts) {
  require(init >= 0 && init < static_cast<Index>(inputs.size()), "init index out of range");
  Engine engine(inputs, rho, opts);
  return engine.run(*inputs[static_cast<std::size_t>(init)], init);
}

BarycenterState iterate(const std::vector<SpaceRef>& inputs, const Vector& rho,
                        const GmSpace& init, const BaryOptions& opts) {
  Engine engine(inputs, rho, opts);
  return engine.run(init, std::nullopt);
}

GmSpace reweigh(const BarycenterState& state, const Vector& rho) {
  return mean_gauge(state.inputs, state.melting, rho);
}

Matrix lgw_matrix(const std::vector<SpaceRef>& inputs, const MultiCoupling& mu) {
  check_inputs(inputs);
  check_melting(inputs, mu);
  const auto n = static_cast<Index>(inputs.size());
  Matrix out = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double v = gw_functional(*inputs[static_cast<std::size_t>(i)],
                                     *inputs[static_cast<std::size_t>(j)], bimarginal(mu, i, j));
      out(i, j) = out(j, i) = v;
    }
  }
  return out;
}

}  // namespace tgw
