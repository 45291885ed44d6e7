#include "cabs/scm.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace causabs {

IndexSpace::IndexSpace(std::vector<int> radices) : radices_(std::move(radices)) {
  for (int r : radices_) {
    if (r < 1) throw Error("index space radix must be positive");
    size_ *= static_cast<std::size_t>(r);
  }
}

std::size_t IndexSpace::encode(std::span<const int> digits) const {
  std::size_t index = 0;
  for (std::size_t i = 0; i < radices_.size(); ++i) {
    index = index * static_cast<std::size_t>(radices_[i]) + static_cast<std::size_t>(digits[i]);
  }
  return index;
}

void IndexSpace::decode(std::size_t index, std::span<int> digits) const {
  for (std::size_t i = radices_.size(); i-- > 0;) {
    const auto r = static_cast<std::size_t>(radices_[i]);
    digits[i] = static_cast<int>(index % r);
    index /= r;
  }
}

std::vector<int> IndexSpace::decode(std::size_t index) const {
  std::vector<int> digits(radices_.size());
  decode(index, digits);
  return digits;
}

Scm::Scm(std::vector<VariableSpec> variables, std::vector<Mechanism> mechanisms)
    : variables_(std::move(variables)), mechanisms_(std::move(mechanisms)) {
  check();
}

void Scm::check() {
  auto add = [this](std::string entity, std::string message) {
    violations_.push_back({std::move(entity), std::move(message)});
  };

  if (variables_.empty()) add("model", "has no variables");

  std::set<std::string_view> names;
  for (const auto& v : variables_) {
    if (v.name.empty()) add("variable", "empty variable name");
    if (!names.insert(v.name).second) add("variable " + v.name, "declared more than once");
    if (v.outcomes.empty()) add("variable " + v.name, "has no outcomes");
    std::set<std::string_view> labels;
    for (const auto& o : v.outcomes) {
      if (!labels.insert(o).second) add("variable " + v.name, "outcome label '" + o + "' is repeated");
    }
  }
  if (!violations_.empty()) return;

  constexpr auto kNone = static_cast<std::size_t>(-1);
  mechanism_index_.assign(variables_.size(), kNone);
  parents_.assign(variables_.size(), {});
  for (std::size_t m = 0; m < mechanisms_.size(); ++m) {
    const auto& mech = mechanisms_[m];
    const std::string entity = "mechanism " + mech.target;
    auto target = find(mech.target);
    if (!target) {
      add(entity, "target is not a declared variable");
      continue;
    }
    if (mechanism_index_[*target] != kNone) {
      add(entity, "variable has more than one mechanism");
      continue;
    }
    mechanism_index_[*target] = m;

    bool parents_ok = true;
    std::set<std::size_t> seen;
    std::size_t cols = 1;
    for (const auto& p : mech.parents) {
      auto pi = find(p);
      if (!pi) {
        add(entity, "parent '" + p + "' is not a declared variable");
        parents_ok = false;
      } else if (*pi == *target) {
        add(entity, "variable lists itself as a parent");
        parents_ok = false;
      } else if (!seen.insert(*pi).second) {
        add(entity, "parent '" + p + "' is repeated");
        parents_ok = false;
      } else {
        parents_[*target].push_back(*pi);
        cols *= static_cast<std::size_t>(cardinality(*pi));
      }
    }
    if (!parents_ok) continue;

    const auto rows = static_cast<std::size_t>(cardinality(*target));
    if (static_cast<std::size_t>(mech.matrix.rows()) != rows || static_cast<std::size_t>(mech.matrix.cols()) != cols) {
      std::ostringstream os;
      os << "matrix is " << mech.matrix.rows() << "x" << mech.matrix.cols() << " but outcomes require " << rows << "x"
         << cols;
      add(entity, os.str());
      continue;
    }
    if (auto v = stochastic_violation(mech.matrix)) add(entity, *v);
  }
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    if (mechanism_index_[v] == kNone) add("variable " + variables_[v].name, "has no mechanism");
  }
  if (!violations_.empty()) return;

  // Cycle search by DFS, children in declaration order so the reported cycle is deterministic.
  std::vector<std::vector<std::size_t>> children(variables_.size());
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    for (auto p : parents_[v]) children[p].push_back(v);
  }
  for (auto& c : children) std::sort(c.begin(), c.end());

  std::vector<int> state(variables_.size(), 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::size_t> stack;
  std::function<bool(std::size_t)> dfs = [&](std::size_t v) {
    state[v] = 1;
    stack.push_back(v);
    for (auto c : children[v]) {
      if (state[c] == 1) {
        auto it = std::find(stack.begin(), stack.end(), c);
        std::string path;
        for (; it != stack.end(); ++it) path += variables_[*it].name + "→";
        path += variables_[c].name;
        add("model", "cycle: " + path);
        return true;
      }
      if (state[c] == 0 && dfs(c)) return true;
    }
    stack.pop_back();
    state[v] = 2;
    return false;
  };
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    if (state[v] == 0 && dfs(v)) return;
  }

  // Kahn's algorithm, lowest declaration index first.
  std::vector<std::size_t> indegree(variables_.size());
  for (std::size_t v = 0; v < variables_.size(); ++v) indegree[v] = parents_[v].size();
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    if (indegree[v] == 0) ready.insert(v);
  }
  while (!ready.empty()) {
    const auto v = *ready.begin();
    ready.erase(ready.begin());
    topo_.push_back(v);
    for (auto c : children[v]) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
}

void Scm::require_valid() const {
  if (!valid()) throw ValidationError(violations_);
}

std::optional<std::size_t> Scm::find(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Scm::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error("unknown variable '" + std::string(name) + "'");
}

std::vector<std::size_t> Scm::indices_of(std::span<const std::string> names) const {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(index_of(n));
  return out;
}

int Scm::outcome_index(std::size_t var, std::string_view label) const {
  const auto& outs = variables_[var].outcomes;
  auto it = std::find(outs.begin(), outs.end(), label);
  if (it == outs.end()) {
    throw Error("unknown outcome '" + std::string(label) + "' for variable " + variables_[var].name);
  }
  return static_cast<int>(it - outs.begin());
}

const Mechanism& Scm::mechanism_of(std::size_t var) const {
  require_valid();
  return mechanisms_[mechanism_index_[var]];
}

const std::vector<std::size_t>& Scm::parents_of(std::size_t var) const {
  require_valid();
  return parents_[var];
}

const std::vector<std::size_t>& Scm::topological_order() const {
  require_valid();
  return topo_;
}

std::vector<bool> Scm::descendants(std::size_t var) const {
  require_valid();
  std::vector<bool> reach(size(), false);
  // Forward closure in topological order.
  for (auto v : topo_) {
    for (auto p : parents_[v]) {
      if (p == var || reach[p]) {
        reach[v] = true;
        break;
      }
    }
  }
  return reach;
}

IndexSpace Scm::index_space() const {
  std::vector<int> radices;
  for (std::size_t v = 0; v < size(); ++v) radices.push_back(cardinality(v));
  return IndexSpace(std::move(radices));
}

IndexSpace Scm::index_space(std::span<const std::size_t> vars) const {
  std::vector<int> radices;
  for (auto v : vars) radices.push_back(cardinality(v));
  return IndexSpace(std::move(radices));
}

std::vector<Violation> validate(const Scm& scm) { return scm.violations(); }

std::size_t joint_index(const Scm& scm, const Intervention& total_assignment) {
  if (total_assignment.size() != scm.size()) throw Error("joint_index requires an assignment to every variable");
  std::vector<int> digits(scm.size());
  for (const auto& [name, label] : total_assignment) {
    const auto v = scm.index_of(name);
    digits[v] = scm.outcome_index(v, label);
  }
  return scm.index_space().encode(digits);
}

Intervention decode_joint_index(const Scm& scm, std::size_t index) {
  const auto space = scm.index_space();
  if (index >= space.size()) throw Error("joint index out of range");
  const auto digits = space.decode(index);
  Intervention out;
  for (std::size_t v = 0; v < scm.size(); ++v) {
    out[scm.name(v)] = scm.variables()[v].outcomes[static_cast<std::size_t>(digits[v])];
  }
  return out;
}

Vector clamped_joint(const Scm& scm, std::span<const std::pair<std::size_t, int>> clamped) {
  scm.require_valid();
  const auto n = scm.size();
  std::vector<int> clamp(n, -1);
  for (const auto& [v, o] : clamped) clamp[v] = o;

  // Build the joint over variables in topological order, one variable at a
  // time, then permute to declaration order.
  const auto& order = scm.topological_order();
  std::vector<std::size_t> position(n);
  for (std::size_t i = 0; i < n; ++i) position[order[i]] = i;

  std::vector<double> probs{1.0};
  std::vector<int> radices;
  std::vector<int> digits;
  for (std::size_t step = 0; step < n; ++step) {
    const auto v = order[step];
    const int card = scm.cardinality(v);
    const auto& parents = scm.parents_of(v);
    const Matrix& m = scm.mechanism_of(v).matrix;
    const IndexSpace placed(radices);

    std::vector<double> next(probs.size() * static_cast<std::size_t>(card), 0.0);
    digits.resize(radices.size());
    for (std::size_t idx = 0; idx < probs.size(); ++idx) {
      if (probs[idx] == 0.0) continue;
      placed.decode(idx, digits);
      if (clamp[v] >= 0) {
        next[idx * static_cast<std::size_t>(card) + static_cast<std::size_t>(clamp[v])] = probs[idx];
        continue;
      }
      Eigen::Index col = 0;
      for (auto p : parents) col = col * scm.cardinality(p) + digits[position[p]];
      for (int o = 0; o < card; ++o) {
        next[idx * static_cast<std::size_t>(card) + static_cast<std::size_t>(o)] = probs[idx] * m(o, col);
      }
    }
    probs = std::move(next);
    radices.push_back(card);
  }

  const IndexSpace topo_space(radices);
  const IndexSpace decl_space = scm.index_space();
  Vector joint = Vector::Zero(static_cast<Eigen::Index>(probs.size()));
  std::vector<int> decl(n);
  digits.resize(n);
  for (std::size_t idx = 0; idx < probs.size(); ++idx) {
    topo_space.decode(idx, digits);
    for (std::size_t i = 0; i < n; ++i) decl[order[i]] = digits[i];
    joint[static_cast<Eigen::Index>(decl_space.encode(decl))] = probs[idx];
  }
  return joint;
}

Distribution joint_distribution(const Scm& scm) { return Distribution(clamped_joint(scm, {})); }

Vector marginalize(const Scm& scm, const Vector& joint, std::span<const std::size_t> vars) {
  const auto full = scm.index_space();
  const auto sub = scm.index_space(vars);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(sub.size()));
  std::vector<int> digits(scm.size());
  std::vector<int> picked(vars.size());
  for (std::size_t idx = 0; idx < full.size(); ++idx) {
    const double p = joint[static_cast<Eigen::Index>(idx)];
    if (p == 0.0) continue;
    full.decode(idx, digits);
    for (std::size_t i = 0; i < vars.size(); ++i) picked[i] = digits[vars[i]];
    out[static_cast<Eigen::Index>(sub.encode(picked))] += p;
  }
  return out;
}

Scm intervene(const Scm& scm, const Intervention& assignment) {
  scm.require_valid();
  std::vector<int> clamp(scm.size(), -1);
  for (const auto& [name, label] : assignment) {
    const auto v = scm.index_of(name);
    clamp[v] = scm.outcome_index(v, label);
  }
  std::vector<Mechanism> mechanisms = scm.mechanisms();
  for (auto& mech : mechanisms) {
    const auto v = scm.index_of(mech.target);
    if (clamp[v] < 0) continue;
    mech.parents.clear();
    mech.matrix = Matrix::Zero(scm.cardinality(v), 1);
    mech.matrix(clamp[v], 0) = 1.0;
  }
  return Scm(scm.variables(), std::move(mechanisms));
}

namespace {

void require_distinct(const Scm& scm, std::span<const std::size_t> a, std::span<const std::size_t> b,
                      const char* what) {
  std::vector<bool> seen(scm.size(), false);
  for (auto v : a) {
    if (seen[v]) throw Error(std::string(what) + ": variable " + scm.name(v) + " listed twice");
    seen[v] = true;
  }
  for (auto v : b) {
    if (seen[v]) throw Error(std::string(what) + ": variable " + scm.name(v) + " appears in both sets");
    seen[v] = true;
  }
}

}  // namespace

Distribution marginal(const Scm& scm, std::span<const std::string> vars) {
  scm.require_valid();
  const auto idx = scm.indices_of(vars);
  require_distinct(scm, idx, {}, "marginal");
  if (idx.empty()) throw Error("marginal: no variables requested");
  return Distribution(marginalize(scm, clamped_joint(scm, {}), idx));
}

StochasticMatrix conditional(const Scm& scm, std::span<const std::string> targets,
                             std::span<const std::string> givens) {
  scm.require_valid();
  const auto t = scm.indices_of(targets);
  const auto g = scm.indices_of(givens);
  if (t.empty()) throw Error("conditional: no target variables");
  require_distinct(scm, t, g, "conditional");

  std::vector<std::size_t> both = t;
  both.insert(both.end(), g.begin(), g.end());
  const Vector pair = marginalize(scm, clamped_joint(scm, {}), both);
  const auto rows = static_cast<Eigen::Index>(scm.index_space(t).size());
  const auto cols = static_cast<Eigen::Index>(scm.index_space(g).size());
  Matrix out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    double pg = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) pg += pair[r * cols + c];
    if (pg <= 0.0) throw Error("conditioning on null event (given configuration " + std::to_string(c + 1) + ")");
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = pair[r * cols + c] / pg;
  }
  return StochasticMatrix(std::move(out));
}

StochasticMatrix virtual_mechanism(const Scm& scm, std::span<const std::size_t> sources,
                                   std::span<const std::size_t> targets) {
  scm.require_valid();
  if (sources.empty() || targets.empty()) throw Error("virtual_mechanism: sources and targets must be non-empty");
  require_distinct(scm, sources, targets, "virtual_mechanism");

  const auto src_space = scm.index_space(sources);
  const auto rows = static_cast<Eigen::Index>(scm.index_space(targets).size());
  Matrix out(rows, static_cast<Eigen::Index>(src_space.size()));
  std::vector<int> digits(sources.size());
  std::vector<std::pair<std::size_t, int>> clamped(sources.size());
  for (std::size_t x = 0; x < src_space.size(); ++x) {
    src_space.decode(x, digits);
    for (std::size_t i = 0; i < sources.size(); ++i) clamped[i] = {sources[i], digits[i]};
    out.col(static_cast<Eigen::Index>(x)) = marginalize(scm, clamped_joint(scm, clamped), targets);
  }
  return StochasticMatrix(std::move(out));
}

StochasticMatrix virtual_mechanism(const Scm& scm, std::span<const std::string> sources,
                                   std::span<const std::string> targets) {
  scm.require_valid();
  return virtual_mechanism(scm, scm.indices_of(sources), scm.indices_of(targets));
}

}  // namespace causabs
