#include "cabs/abstraction.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace causabs {

Abstraction::Abstraction(std::shared_ptr<const Scm> base, std::shared_ptr<const Scm> high,
                         std::vector<std::string> relevant, std::vector<VarMapEntry> varmap,
                         std::vector<OutcomeMap> outcome_maps)
    : base_(std::move(base)),
      high_(std::move(high)),
      relevant_(std::move(relevant)),
      varmap_(std::move(varmap)),
      outcome_maps_(std::move(outcome_maps)) {
  if (!base_ || !high_) throw Error("abstraction requires both a base and a high-level model");
  check();
}

void Abstraction::check() {
  auto add = [this](std::string entity, std::string message) {
    violations_.push_back({std::move(entity), std::move(message)});
  };
  if (!base_->valid()) add("base model", std::string("is invalid: ") + ValidationError(base_->violations()).what());
  if (!high_->valid()) add("high model", std::string("is invalid: ") + ValidationError(high_->violations()).what());
  if (!violations_.empty()) return;

  const Scm& base = *base_;
  const Scm& high = *high_;

  std::vector<bool> in_r(base.size(), false);
  for (const auto& r : relevant_) {
    auto v = base.find(r);
    if (!v) {
      add("relevant set", "'" + r + "' is not a base variable");
    } else if (in_r[*v]) {
      add("relevant set", "'" + r + "' is listed twice");
    } else {
      in_r[*v] = true;
    }
  }
  if (relevant_.empty()) add("relevant set", "is empty");

  high_of_.assign(base.size(), -1);
  for (const auto& e : varmap_) {
    auto from = base.find(e.from);
    auto to = high.find(e.to);
    if (!from) {
      add("variable map", "'" + e.from + "' is not a base variable");
      continue;
    }
    if (!to) {
      add("variable map", "'" + e.to + "' is not a high-level variable");
      continue;
    }
    if (!in_r[*from]) {
      add("variable map", "'" + e.from + "' is mapped but not in the relevant set");
      continue;
    }
    if (high_of_[*from] != -1) {
      add("variable map", "'" + e.from + "' is mapped more than once");
      continue;
    }
    high_of_[*from] = static_cast<int>(*to);
  }
  for (std::size_t v = 0; v < base.size(); ++v) {
    if (in_r[v] && high_of_[v] == -1) add("variable map", "relevant variable '" + base.name(v) + "' is not mapped");
  }
  if (!violations_.empty()) return;

  preimages_.assign(high.size(), {});
  for (std::size_t v = 0; v < base.size(); ++v) {
    if (high_of_[v] >= 0) preimages_[static_cast<std::size_t>(high_of_[v])].push_back(v);
  }
  for (std::size_t h = 0; h < high.size(); ++h) {
    if (preimages_[h].empty()) {
      add("variable map", "a not surjective: high variable '" + high.name(h) + "' has no preimage");
    }
  }
  if (!violations_.empty()) return;

  std::vector<const OutcomeMap*> by_high(high.size(), nullptr);
  for (const auto& om : outcome_maps_) {
    auto h = high.find(om.target);
    if (!h) {
      add("outcome map " + om.target, "target is not a high-level variable");
    } else if (by_high[*h]) {
      add("outcome map " + om.target, "given more than once");
    } else {
      by_high[*h] = &om;
    }
  }
  for (std::size_t h = 0; h < high.size(); ++h) {
    const std::string entity = "outcome map " + high.name(h);
    if (!by_high[h]) {
      add(entity, "missing");
      continue;
    }
    const Matrix& m = by_high[h]->matrix;
    const auto rows = static_cast<Eigen::Index>(high.cardinality(h));
    const auto cols = static_cast<Eigen::Index>(base.index_space(preimages_[h]).size());
    if (m.rows() != rows || m.cols() != cols) {
      std::ostringstream os;
      os << "matrix is " << m.rows() << "x" << m.cols() << " but expected " << rows << "x" << cols;
      add(entity, os.str());
      continue;
    }
    if (!is_binary(m)) {
      add(entity, "not a binary column-stochastic matrix");
      continue;
    }
    auto b = BinaryStochasticMatrix::from_matrix(m);
    const auto counts = b.row_counts();
    for (std::size_t r = 0; r < counts.size(); ++r) {
      if (counts[r] == 0) {
        add(entity, "not surjective: outcome '" + high.variables()[h].outcomes[r] + "' is never reached");
        break;
      }
    }
    maps_.push_back(std::move(b));
  }
  if (!violations_.empty()) maps_.clear();
}

void Abstraction::require_valid() const {
  if (!valid()) throw ValidationError(violations_);
}

int Abstraction::high_of(std::size_t base_var) const {
  require_valid();
  return high_of_[base_var];
}

const std::vector<std::size_t>& Abstraction::preimage(std::size_t high_var) const {
  require_valid();
  return preimages_[high_var];
}

std::vector<std::size_t> Abstraction::preimage(std::span<const std::size_t> high_vars) const {
  require_valid();
  std::vector<std::size_t> out;
  for (auto h : high_vars) out.insert(out.end(), preimages_[h].begin(), preimages_[h].end());
  std::sort(out.begin(), out.end());
  return out;
}

const BinaryStochasticMatrix& Abstraction::map_for(std::size_t high_var) const {
  require_valid();
  return maps_[high_var];
}

std::vector<int> Abstraction::composite_map(std::span<const std::size_t> high_vars) const {
  require_valid();
  const auto low = preimage(high_vars);
  const auto low_space = base_->index_space(low);
  const auto high_space = high_->index_space(high_vars);

  // positions[k][j]: where the j-th preimage variable of high_vars[k] sits in `low`.
  std::vector<std::vector<std::size_t>> positions(high_vars.size());
  std::vector<IndexSpace> spaces;
  for (std::size_t k = 0; k < high_vars.size(); ++k) {
    for (auto v : preimages_[high_vars[k]]) {
      positions[k].push_back(static_cast<std::size_t>(std::find(low.begin(), low.end(), v) - low.begin()));
    }
    spaces.push_back(base_->index_space(preimages_[high_vars[k]]));
  }

  std::vector<int> out(low_space.size());
  std::vector<int> digits(low.size());
  std::vector<int> part;
  std::vector<int> high_digits(high_vars.size());
  for (std::size_t x = 0; x < low_space.size(); ++x) {
    low_space.decode(x, digits);
    for (std::size_t k = 0; k < high_vars.size(); ++k) {
      part.resize(positions[k].size());
      for (std::size_t j = 0; j < part.size(); ++j) part[j] = digits[positions[k][j]];
      high_digits[k] = maps_[high_vars[k]].row_of(static_cast<Eigen::Index>(spaces[k].encode(part)));
    }
    out[x] = static_cast<int>(high_space.encode(high_digits));
  }
  return out;
}

std::vector<int> Abstraction::global_map() const {
  require_valid();
  std::vector<std::size_t> all(high_->size());
  for (std::size_t h = 0; h < all.size(); ++h) all[h] = h;
  const auto low = preimage(all);
  const auto relevant_map = composite_map(all);
  // Project every base outcome onto the relevant coordinates, then map.
  const auto space = base_->index_space();
  const auto low_space = base_->index_space(low);
  std::vector<int> out(space.size());
  std::vector<int> digits(base_->size());
  std::vector<int> picked(low.size());
  for (std::size_t b = 0; b < space.size(); ++b) {
    space.decode(b, digits);
    for (std::size_t j = 0; j < low.size(); ++j) picked[j] = digits[low[j]];
    out[b] = relevant_map[low_space.encode(picked)];
  }
  return out;
}

std::vector<Violation> validate_abstraction(const Abstraction& a) { return a.violations(); }

Abstraction identity_abstraction(std::shared_ptr<const Scm> scm) {
  std::vector<std::string> relevant;
  std::vector<VarMapEntry> varmap;
  std::vector<OutcomeMap> maps;
  for (const auto& v : scm->variables()) {
    relevant.push_back(v.name);
    varmap.push_back({v.name, v.name});
    const auto n = static_cast<Eigen::Index>(v.outcomes.size());
    maps.push_back({v.name, Matrix::Identity(n, n)});
  }
  return Abstraction(scm, scm, std::move(relevant), std::move(varmap), std::move(maps));
}

std::vector<SubsetPair> admissible_pairs(const Scm& high) {
  high.require_valid();
  const std::size_t n = high.size();
  std::vector<std::vector<bool>> desc(n);
  for (std::size_t v = 0; v < n; ++v) desc[v] = high.descendants(v);

  std::vector<SubsetPair> out;
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= 3;
  std::vector<int> role(n);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    SubsetPair p;
    for (std::size_t v = 0; v < n; ++v) {
      role[v] = static_cast<int>(c % 3);
      c /= 3;
      if (role[v] == 1) p.first.push_back(v);
      if (role[v] == 2) p.second.push_back(v);
    }
    if (p.first.empty() || p.second.empty()) continue;
    bool linked = false;
    for (auto x : p.first) {
      for (auto y : p.second) linked = linked || desc[x][y];
    }
    if (linked) out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const SubsetPair& a, const SubsetPair& b) {
    const auto sa = a.first.size() + a.second.size();
    const auto sb = b.first.size() + b.second.size();
    if (sa != sb) return sa < sb;
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a < b;
  });
  return out;
}

namespace {

std::vector<std::string> names_of(const Scm& scm, std::span<const std::size_t> vars) {
  std::vector<std::string> out;
  for (auto v : vars) out.push_back(scm.name(v));
  return out;
}

std::vector<std::size_t> sorted_subset(const Scm& scm, std::span<const std::string> names, const char* what) {
  auto idx = scm.indices_of(names);
  std::sort(idx.begin(), idx.end());
  if (idx.empty()) throw Error(std::string(what) + " must be non-empty");
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
    throw Error(std::string(what) + " lists a variable twice");
  }
  return idx;
}

Intervention intervention_for(const Scm& base, std::span<const std::size_t> vars, std::size_t config) {
  const auto digits = base.index_space(vars).decode(config);
  Intervention out;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    out[base.name(vars[j])] = base.variables()[vars[j]].outcomes[static_cast<std::size_t>(digits[j])];
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> enumerate_diagrams(const Abstraction& a) {
  a.require_valid();
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> out;
  for (const auto& [x, y] : admissible_pairs(a.high())) {
    out.emplace_back(names_of(a.high(), x), names_of(a.high(), y));
  }
  return out;
}

DiagramError diagram_error(const Abstraction& a, std::span<const std::string> sources,
                           std::span<const std::string> targets) {
  a.require_valid();
  const auto x = sorted_subset(a.high(), sources, "diagram sources");
  const auto y = sorted_subset(a.high(), targets, "diagram targets");
  for (auto v : x) {
    if (std::binary_search(y.begin(), y.end(), v)) {
      throw Error("diagram sources and targets must be disjoint");
    }
  }
  const Evaluator ev(a.base_ptr(), false);
  const auto [value, worst] = ev.diagram_value(a, x, y);
  return {names_of(a.high(), x), names_of(a.high(), y), value, intervention_for(a.base(), a.preimage(x), worst)};
}

double abstraction_error(const Abstraction& a) { return Evaluator(a.base_ptr(), false).abstraction_error(a); }

StochasticMatrix component_inverse(const BinaryStochasticMatrix& m) {
  if (!m.is_surjective()) throw Error("component_inverse: outcome map is not surjective");
  return l1_normalize_columns(m.matrix().transpose());
}

StochasticMatrix component_inverse(const Matrix& m) { return component_inverse(BinaryStochasticMatrix::from_matrix(m)); }

StochasticMatrix global_inverse(const Abstraction& a) {
  a.require_valid();
  const auto gm = a.global_map();
  const auto high_size = a.high().index_space().size();
  std::vector<int> counts(high_size, 0);
  for (int h : gm) ++counts[static_cast<std::size_t>(h)];
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(gm.size()), static_cast<Eigen::Index>(high_size));
  for (std::size_t b = 0; b < gm.size(); ++b) {
    const auto h = static_cast<std::size_t>(gm[b]);
    out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(h)) = 1.0 / counts[h];
  }
  return StochasticMatrix(std::move(out));
}

double information_loss(const Abstraction& a) { return Evaluator(a.base_ptr(), false).information_loss(a); }

EvaluationReport evaluate(const Abstraction& a, double lambda) {
  return Evaluator(a.base_ptr(), false).evaluate(a, lambda);
}

}  // namespace causabs
