#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cabs/error.hpp"
#include "cabs/numerics.hpp"

namespace causabs {

// Mixed-radix index over an ordered list of variables: the first variable
// varies slowest, the last fastest. Used for every joint index in the library.
class IndexSpace {
 public:
  IndexSpace() = default;
  explicit IndexSpace(std::vector<int> radices);

  std::size_t size() const noexcept { return size_; }
  std::size_t arity() const noexcept { return radices_.size(); }
  const std::vector<int>& radices() const noexcept { return radices_; }

  std::size_t encode(std::span<const int> digits) const;
  void decode(std::size_t index, std::span<int> digits) const;
  std::vector<int> decode(std::size_t index) const;

 private:
  std::vector<int> radices_;
  std::size_t size_ = 1;
};

struct VariableSpec {
  std::string name;
  std::vector<std::string> outcomes;

  bool operator==(const VariableSpec&) const = default;
};

// Conditional distribution of `target` given `parents`. Column c of `matrix`
// is the parent configuration c in IndexSpace order over `parents`; a root
// has a single column.
struct Mechanism {
  std::string target;
  std::vector<std::string> parents;
  Matrix matrix;

  bool operator==(const Mechanism&) const = default;
};

// Assignment of outcome labels to a subset of variables.
using Intervention = std::map<std::string, std::string>;

// Finite structural causal model. Immutable; construction records any
// violated invariant, which validate() reports and every computation rejects.
class Scm {
 public:
  Scm(std::vector<VariableSpec> variables, std::vector<Mechanism> mechanisms);

  const std::vector<VariableSpec>& variables() const noexcept { return variables_; }
  const std::vector<Mechanism>& mechanisms() const noexcept { return mechanisms_; }

  bool valid() const noexcept { return violations_.empty(); }
  const std::vector<Violation>& violations() const noexcept { return violations_; }
  void require_valid() const;

  std::size_t size() const noexcept { return variables_.size(); }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  std::vector<std::size_t> indices_of(std::span<const std::string> names) const;
  const std::string& name(std::size_t var) const { return variables_[var].name; }
  int cardinality(std::size_t var) const { return static_cast<int>(variables_[var].outcomes.size()); }
  int outcome_index(std::size_t var, std::string_view label) const;

  // The following require a valid model.
  const Mechanism& mechanism_of(std::size_t var) const;
  const std::vector<std::size_t>& parents_of(std::size_t var) const;
  const std::vector<std::size_t>& topological_order() const;
  // reach[v] is true iff v is reachable from var along at least one edge.
  std::vector<bool> descendants(std::size_t var) const;

  IndexSpace index_space() const;
  IndexSpace index_space(std::span<const std::size_t> vars) const;

  bool operator==(const Scm& o) const { return variables_ == o.variables_ && mechanisms_ == o.mechanisms_; }

 private:
  void check();

  std::vector<VariableSpec> variables_;
  std::vector<Mechanism> mechanisms_;
  std::vector<Violation> violations_;
  std::vector<std::size_t> mechanism_index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::size_t> topo_;
};

std::vector<Violation> validate(const Scm& scm);

std::size_t joint_index(const Scm& scm, const Intervention& total_assignment);
Intervention decode_joint_index(const Scm& scm, std::size_t index);

// P(x_1..x_N) = prod_i mechanism_i(x_i | parents), indexed over all variables
// in declaration order.
Distribution joint_distribution(const Scm& scm);

// Joint distribution with each variable in `clamped` (var, outcome) held at a
// point mass. Same indexing as joint_distribution.
Vector clamped_joint(const Scm& scm, std::span<const std::pair<std::size_t, int>> clamped);

// Sums a joint vector (declaration order) down to `vars`, in the given order.
Vector marginalize(const Scm& scm, const Vector& joint, std::span<const std::size_t> vars);

Scm intervene(const Scm& scm, const Intervention& assignment);

Distribution marginal(const Scm& scm, std::span<const std::string> vars);

// Column c = P(targets | givens = c). Throws on a given configuration of
// probability zero.
StochasticMatrix conditional(const Scm& scm, std::span<const std::string> targets,
                             std::span<const std::string> givens);

// Column x = P(targets | do(sources = x)), x in IndexSpace order over sources.
StochasticMatrix virtual_mechanism(const Scm& scm, std::span<const std::string> sources,
                                   std::span<const std::string> targets);
StochasticMatrix virtual_mechanism(const Scm& scm, std::span<const std::size_t> sources,
                                   std::span<const std::size_t> targets);

}  // namespace causabs
