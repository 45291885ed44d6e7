#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cabs/numerics.hpp"
#include "cabs/scm.hpp"

namespace causabs {

struct VarMapEntry {
  std::string from;  // base variable
  std::string to;    // high variable

  bool operator==(const VarMapEntry&) const = default;
};

// Outcome map for one high variable. Columns range over the joint outcomes of
// its preimage variables (base declaration order), rows over its outcomes.
struct OutcomeMap {
  std::string target;
  Matrix matrix;

  bool operator==(const OutcomeMap&) const = default;
};

// Abstraction <R, a, alpha> from a base model onto a high-level model.
// Immutable; invalid abstractions can be built so validate() can report why.
class Abstraction {
 public:
  Abstraction(std::shared_ptr<const Scm> base, std::shared_ptr<const Scm> high, std::vector<std::string> relevant,
              std::vector<VarMapEntry> varmap, std::vector<OutcomeMap> outcome_maps);

  const Scm& base() const noexcept { return *base_; }
  const Scm& high() const noexcept { return *high_; }
  const std::shared_ptr<const Scm>& base_ptr() const noexcept { return base_; }
  const std::shared_ptr<const Scm>& high_ptr() const noexcept { return high_; }
  const std::vector<std::string>& relevant() const noexcept { return relevant_; }
  const std::vector<VarMapEntry>& varmap() const noexcept { return varmap_; }
  const std::vector<OutcomeMap>& outcome_maps() const noexcept { return outcome_maps_; }

  bool valid() const noexcept { return violations_.empty(); }
  const std::vector<Violation>& violations() const noexcept { return violations_; }
  void require_valid() const;

  // The following require a valid abstraction.

  // High variable a base variable maps to, or -1 when it is not relevant.
  int high_of(std::size_t base_var) const;
  // a^{-1}(high_var), base declaration order.
  const std::vector<std::size_t>& preimage(std::size_t high_var) const;
  // a^{-1}(high_vars), base declaration order.
  std::vector<std::size_t> preimage(std::span<const std::size_t> high_vars) const;
  const BinaryStochasticMatrix& map_for(std::size_t high_var) const;

  // For the joint outcomes of preimage(high_vars) (IndexSpace order), the
  // index of the image in IndexSpace order over high_vars (sorted ascending).
  std::vector<int> composite_map(std::span<const std::size_t> high_vars) const;

  // Image of every base joint outcome in the high joint index space.
  std::vector<int> global_map() const;

 private:
  void check();

  std::shared_ptr<const Scm> base_;
  std::shared_ptr<const Scm> high_;
  std::vector<std::string> relevant_;
  std::vector<VarMapEntry> varmap_;
  std::vector<OutcomeMap> outcome_maps_;
  std::vector<Violation> violations_;

  std::vector<int> high_of_;
  std::vector<std::vector<std::size_t>> preimages_;
  std::vector<BinaryStochasticMatrix> maps_;
};

std::vector<Violation> validate_abstraction(const Abstraction& a);

// Identity abstraction of a model onto itself.
Abstraction identity_abstraction(std::shared_ptr<const Scm> scm);

struct DiagramError {
  std::vector<std::string> sources;  // X', high declaration order
  std::vector<std::string> targets;  // Y', high declaration order
  double value = 0.0;
  Intervention worst_intervention;   // on a^{-1}(X')
};

struct EvaluationReport {
  double e = 0.0;
  double i = 0.0;
  double lambda = 1.0;
  double objective = 0.0;
  std::vector<DiagramError> per_diagram;
};

inline constexpr double kDefaultLambda = 1.0;

using SubsetPair = std::pair<std::vector<std::size_t>, std::vector<std::size_t>>;

// Ordered pairs (X', Y') of disjoint non-empty variable subsets such that some
// variable of Y' is a descendant of some variable of X'. Ordered by total
// size, then |X'|, then the sorted index lists.
std::vector<SubsetPair> admissible_pairs(const Scm& high);
std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> enumerate_diagrams(const Abstraction& a);

DiagramError diagram_error(const Abstraction& a, std::span<const std::string> sources,
                           std::span<const std::string> targets);
double abstraction_error(const Abstraction& a);

// alpha* = l1-normalized transpose of a surjective outcome map.
StochasticMatrix component_inverse(const BinaryStochasticMatrix& m);
StochasticMatrix component_inverse(const Matrix& m);

// Map from the high joint index to the base joint index spreading each high
// outcome uniformly over its preimage, non-relevant variables included.
StochasticMatrix global_inverse(const Abstraction& a);

double information_loss(const Abstraction& a);

EvaluationReport evaluate(const Abstraction& a, double lambda = kDefaultLambda);

struct Score {
  double e = 0.0;
  double i = 0.0;
  double objective = 0.0;
};

// Evaluates many abstractions against one base model. Interventional joints
// of the base are precomputed when small enough; the object is immutable after
// construction and safe to share between threads.
class Evaluator {
 public:
  explicit Evaluator(std::shared_ptr<const Scm> base, bool precompute = true);

  const Scm& base() const noexcept { return *base_; }
  const Distribution& base_joint() const noexcept { return joint_; }

  // P_base(targets | do(sources)), sources/targets in base declaration order.
  Matrix base_virtual(std::span<const std::size_t> sources, std::span<const std::size_t> targets) const;

  // value and worst column (index into preimage IndexSpace) of one diagram.
  std::pair<double, std::size_t> diagram_value(const Abstraction& a, std::span<const std::size_t> sources,
                                               std::span<const std::size_t> targets) const;
  double abstraction_error(const Abstraction& a) const;
  double abstraction_error(const Abstraction& a, std::span<const SubsetPair> pairs) const;
  double information_loss(const Abstraction& a) const;

  Score score(const Abstraction& a, double lambda) const;
  Score score(const Abstraction& a, double lambda, std::span<const SubsetPair> pairs) const;
  EvaluationReport evaluate(const Abstraction& a, double lambda) const;

 private:
  std::shared_ptr<const Scm> base_;
  Distribution joint_;
  bool cached_ = false;
  // clamped_[mask][config]: joint of the base under do(mask = config).
  std::vector<std::vector<Vector>> clamped_;
};

}  // namespace causabs
