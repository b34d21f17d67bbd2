#include "shelfwise/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "shelfwise/discovery.hpp"

namespace shelfwise {

namespace {

std::string describe_components(const IrreducibilityReport& report) {
  std::string s = "chain is reducible: " + std::to_string(report.components.size()) +
                  " strongly connected components";
  if (report.witness) {
    s += "; no path from state " + std::to_string(report.witness->first) + " to state " +
         std::to_string(report.witness->second);
  }
  return s;
}

std::vector<double> left_product(const Ctmc& chain, std::span<const double> pi) {
  std::vector<double> out(chain.num_states(), 0.0);
  for (State i = 0; i < chain.num_states(); ++i) {
    out[i] += pi[i] * chain.diagonal(i);
    for (const auto& t : chain.row(i)) out[t.to] += pi[i] * t.rate;
  }
  return out;
}

}  // namespace

NotIrreducibleError::NotIrreducibleError(IrreducibilityReport report)
    : Error(ErrorCode::NotIrreducible, describe_components(report)), report_(std::move(report)) {}

SteadyState steady_state(const Ctmc& chain) {
  const std::size_t n = chain.num_states();
  if (n > kMaxDenseStates) {
    throw Error(ErrorCode::InvalidArgument,
                "capacity " + std::to_string(chain.capacity()) +
                    " exceeds the dense solver limit of " + std::to_string(kMaxDenseStates - 1));
  }
  auto report = is_irreducible(chain);
  if (!report.irreducible) throw NotIrreducibleError(std::move(report));

  SteadyState ss;
  ss.method = "dense LU with partial pivoting, normalisation row replaces last balance equation";
  if (n == 1) {
    ss.pi = {1.0};
    return ss;
  }

  // pi Q = 0  <=>  Q^T pi^T = 0; the last equation becomes sum(pi) = 1.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (State i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    a(col, col) = chain.diagonal(i);
    for (const auto& t : chain.row(i)) a(static_cast<Eigen::Index>(t.to), col) = t.rate;
  }
  a.row(static_cast<Eigen::Index>(n - 1)).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  b(static_cast<Eigen::Index>(n - 1)) = 1.0;

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd x = lu.solve(b);
  for (int step = 0; step < 2; ++step) {
    const Eigen::VectorXd r = b - a * x;
    if (r.lpNorm<Eigen::Infinity>() == 0.0) break;
    x += lu.solve(r);
    ss.refinement_steps++;
  }
  if (!x.allFinite()) throw Error(ErrorCode::SolverFailure, "balance system is singular");

  ss.pi.assign(x.data(), x.data() + n);
  for (auto& p : ss.pi) {
    if (p < 0.0) {
      if (p < -kClampTolerance) {
        throw Error(ErrorCode::SolverFailure,
                    "stationary solve produced a negative probability " + std::to_string(p));
      }
      p = 0.0;
      ss.clamped++;
    }
  }
  const double total = std::accumulate(ss.pi.begin(), ss.pi.end(), 0.0);
  if (!(std::fabs(total - 1.0) <= 1e-6)) {
    throw Error(ErrorCode::SolverFailure, "stationary vector does not normalise");
  }
  for (auto& p : ss.pi) p /= total;

  const auto r = left_product(chain, ss.pi);
  ss.residual = 0.0;
  for (double v : r) ss.residual = std::max(ss.residual, std::fabs(v));
  if (!(ss.residual <= kResidualTolerance)) {
    throw Error(ErrorCode::SolverFailure,
                "balance residual " + std::to_string(ss.residual) + " exceeds tolerance");
  }
  return ss;
}

double expected_quantity(std::span<const double> pi) {
  double s = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) s += static_cast<double>(i) * pi[i];
  return s;
}

double undersupply_probability(std::span<const double> pi, std::size_t max_quantity) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(max_quantity, pi.size()); ++i) s += pi[i];
  return s;
}

double expected_surplus(std::span<const double> pi, std::size_t threshold) {
  double s = 0.0;
  for (std::size_t i = threshold + 1; i < pi.size(); ++i) {
    s += static_cast<double>(i - threshold) * pi[i];
  }
  return s;
}

WhatIfResult evaluate_strategy(const Ctmc& purchasing, const SupplyStrategy& strategy,
                               std::size_t threshold, std::size_t max_quantity) {
  const std::size_t k = purchasing.capacity();
  if (threshold > k) {
    throw Error(ErrorCode::InvalidArgument, "threshold " + std::to_string(threshold) +
                                                " exceeds capacity " + std::to_string(k));
  }
  if (max_quantity < 1 || max_quantity > k) {
    throw Error(ErrorCode::InvalidArgument,
                "max quantity must lie in 1.." + std::to_string(k));
  }
  if (!(strategy.rate > 0.0) || !std::isfinite(strategy.rate)) {
    throw Error(ErrorCode::InvalidArgument, "supply rate must be > 0");
  }
  const Ctmc enhanced = enhance_with_supply(purchasing, strategy);

  WhatIfResult out;
  out.strategy = strategy;
  out.capacity = k;
  out.threshold = threshold;
  out.max_quantity = max_quantity;
  auto report = is_irreducible(enhanced);
  out.irreducible = report.irreducible;
  if (!report.irreducible) {
    out.component_sizes = report.component_sizes();
    return out;
  }
  out.steady = steady_state(enhanced);
  out.metrics = WhatIfMetrics{expected_quantity(*out.steady),
                              undersupply_probability(*out.steady, max_quantity),
                              expected_surplus(*out.steady, threshold)};
  return out;
}

std::vector<WhatIfResult> what_if_sweep(const ProductSublog& sublog, const SweepConfig& config) {
  if (config.rates.empty()) throw Error(ErrorCode::InvalidArgument, "no supply rates given");
  for (double r : config.rates) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw Error(ErrorCode::InvalidArgument, "supply rates must be > 0");
    }
  }
  auto [purchasing, report] = discover_ctmc(sublog, config.capacity, config.initial, config.unit);
  std::size_t max_quantity = config.max_quantity.value_or(0);
  if (!config.max_quantity) {
    for (const auto& c : report.classes) {
      max_quantity = std::max(max_quantity, static_cast<std::size_t>(c.quantity));
    }
  }

  std::vector<std::future<WhatIfResult>> jobs;
  jobs.reserve(config.rates.size());
  const auto policy = config.rates.size() > 1 ? std::launch::async : std::launch::deferred;
  for (double rate : config.rates) {
    jobs.push_back(std::async(policy, [&purchasing = purchasing, &config, rate, max_quantity] {
      return evaluate_strategy(purchasing, SupplyStrategy{config.batch, rate}, config.threshold,
                               max_quantity);
    }));
  }
  std::vector<WhatIfResult> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace shelfwise
