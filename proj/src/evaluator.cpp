#include <algorithm>

#include "cabs/abstraction.hpp"

namespace causabs {

namespace {

// Number of doubles the interventional cache may hold.
constexpr std::size_t kCacheLimit = std::size_t{1} << 22;

std::size_t mask_of(std::span<const std::size_t> vars) {
  std::size_t mask = 0;
  for (auto v : vars) mask |= std::size_t{1} << v;
  return mask;
}

}  // namespace

Evaluator::Evaluator(std::shared_ptr<const Scm> base, bool precompute)
    : base_(std::move(base)), joint_((base_->require_valid(), joint_distribution(*base_))) {
  const std::size_t n = base_->size();
  if (!precompute || n >= 20) return;

  std::size_t configs = 1;
  for (std::size_t v = 0; v < n; ++v) configs *= static_cast<std::size_t>(base_->cardinality(v)) + 1;
  if (configs * static_cast<std::size_t>(joint_.size()) > kCacheLimit) return;

  clamped_.resize(std::size_t{1} << n);
  std::vector<std::size_t> vars;
  std::vector<std::pair<std::size_t, int>> clamp;
  for (std::size_t mask = 1; mask < clamped_.size(); ++mask) {
    vars.clear();
    for (std::size_t v = 0; v < n; ++v) {
      if (mask & (std::size_t{1} << v)) vars.push_back(v);
    }
    const auto space = base_->index_space(vars);
    clamp.resize(vars.size());
    for (std::size_t x = 0; x < space.size(); ++x) {
      const auto digits = space.decode(x);
      for (std::size_t j = 0; j < vars.size(); ++j) clamp[j] = {vars[j], digits[j]};
      clamped_[mask].push_back(clamped_joint(*base_, clamp));
    }
  }
  cached_ = true;
}

Matrix Evaluator::base_virtual(std::span<const std::size_t> sources, std::span<const std::size_t> targets) const {
  if (!cached_) return virtual_mechanism(*base_, sources, targets).matrix();
  const auto& columns = clamped_[mask_of(sources)];
  const auto rows = static_cast<Eigen::Index>(base_->index_space(targets).size());
  Matrix out(rows, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t x = 0; x < columns.size(); ++x) {
    out.col(static_cast<Eigen::Index>(x)) = marginalize(*base_, columns[x], targets);
  }
  return out;
}

std::pair<double, std::size_t> Evaluator::diagram_value(const Abstraction& a, std::span<const std::size_t> sources,
                                                        std::span<const std::size_t> targets) const {
  a.require_valid();
  if (a.base_ptr() != base_ && !(a.base() == *base_)) throw Error("abstraction base does not match evaluator base");

  const auto low_x = a.preimage(sources);
  const auto low_y = a.preimage(targets);
  const Matrix upper_mech = base_virtual(low_x, low_y);
  const Matrix lower_mech = virtual_mechanism(a.high(), sources, targets).matrix();
  const auto map_x = a.composite_map(sources);
  const auto map_y = a.composite_map(targets);

  double worst = -1.0;
  std::size_t worst_at = 0;
  std::vector<double> upper(static_cast<std::size_t>(lower_mech.rows()));
  std::vector<double> lower(upper.size());
  for (Eigen::Index x = 0; x < upper_mech.cols(); ++x) {
    std::fill(upper.begin(), upper.end(), 0.0);
    for (Eigen::Index r = 0; r < upper_mech.rows(); ++r) {
      upper[static_cast<std::size_t>(map_y[static_cast<std::size_t>(r)])] += upper_mech(r, x);
    }
    const auto col = static_cast<Eigen::Index>(map_x[static_cast<std::size_t>(x)]);
    for (std::size_t r = 0; r < lower.size(); ++r) lower[r] = lower_mech(static_cast<Eigen::Index>(r), col);
    const double d = jsd_distance(upper, lower);
    if (d > worst) {
      worst = d;
      worst_at = static_cast<std::size_t>(x);
    }
  }
  return {worst, worst_at};
}

double Evaluator::abstraction_error(const Abstraction& a, std::span<const SubsetPair> pairs) const {
  double e = 0.0;
  for (const auto& [x, y] : pairs) e = std::max(e, diagram_value(a, x, y).first);
  return e;
}

double Evaluator::abstraction_error(const Abstraction& a) const {
  a.require_valid();
  return abstraction_error(a, admissible_pairs(a.high()));
}

double Evaluator::information_loss(const Abstraction& a) const {
  a.require_valid();
  const auto gm = a.global_map();
  const Vector high_joint = joint_distribution(a.high()).values();
  std::vector<int> counts(static_cast<std::size_t>(high_joint.size()), 0);
  for (int h : gm) ++counts[static_cast<std::size_t>(h)];
  std::vector<double> reconstructed(gm.size());
  for (std::size_t b = 0; b < gm.size(); ++b) {
    const auto h = static_cast<std::size_t>(gm[b]);
    reconstructed[b] = high_joint[static_cast<Eigen::Index>(h)] / counts[h];
  }
  return jsd_distance(std::span<const double>(joint_.values().data(), static_cast<std::size_t>(joint_.size())),
                      reconstructed);
}

Score Evaluator::score(const Abstraction& a, double lambda, std::span<const SubsetPair> pairs) const {
  if (!(lambda >= 0.0)) throw Error("lambda must be non-negative");
  Score s;
  s.e = abstraction_error(a, pairs);
  s.i = information_loss(a);
  s.objective = s.e + lambda * s.i;
  return s;
}

Score Evaluator::score(const Abstraction& a, double lambda) const {
  a.require_valid();
  return score(a, lambda, admissible_pairs(a.high()));
}

EvaluationReport Evaluator::evaluate(const Abstraction& a, double lambda) const {
  if (!(lambda >= 0.0)) throw Error("lambda must be non-negative");
  a.require_valid();
  EvaluationReport report;
  report.lambda = lambda;
  for (const auto& [x, y] : admissible_pairs(a.high())) {
    const auto [value, worst] = diagram_value(a, x, y);
    DiagramError d;
    for (auto v : x) d.sources.push_back(a.high().name(v));
    for (auto v : y) d.targets.push_back(a.high().name(v));
    d.value = value;
    const auto low_x = a.preimage(x);
    const auto digits = a.base().index_space(low_x).decode(worst);
    for (std::size_t j = 0; j < low_x.size(); ++j) {
      d.worst_intervention[a.base().name(low_x[j])] =
          a.base().variables()[low_x[j]].outcomes[static_cast<std::size_t>(digits[j])];
    }
    report.e = std::max(report.e, value);
    report.per_diagram.push_back(std::move(d));
  }
  report.i = information_loss(a);
  report.objective = report.e + lambda * report.i;
  return report;
}

}  // namespace causabs
