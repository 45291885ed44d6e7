#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cabs/abstraction.hpp"
#include "cabs/scm.hpp"

namespace causabs {

// Which parts of the high-level model and abstraction are given versus searched.
enum class ProblemClass {
  assessment,          // everything given
  completion,          // some or all outcome maps free
  abstraction_design,  // R, a and outcome maps free; high model given
  mechanism_design,    // additionally high DAG and mechanisms free; high variables given
  granularity_design,  // additionally high cardinalities free; high variable names given
  model_design,        // only the base model given
};

std::string_view to_string(ProblemClass c);
ProblemClass parse_problem_class(std::string_view s);

struct Caps {
  int max_high_variables = 2;
  int max_cardinality = 2;
};

// R, a and any subset of the outcome maps, by name.
struct PartialAbstraction {
  std::vector<std::string> relevant;
  std::vector<VarMapEntry> varmap;
  std::vector<OutcomeMap> outcome_maps;
};

inline constexpr std::size_t kDefaultBudget = 1'000'000;

struct LearningProblem {
  ProblemClass problem_class = ProblemClass::assessment;
  std::shared_ptr<const Scm> base;
  std::shared_ptr<const Scm> high;                 // assessment, completion, abstraction_design
  std::optional<PartialAbstraction> abstraction;   // assessment (complete), completion
  std::vector<VariableSpec> high_variables;        // mechanism_design
  std::vector<std::string> high_variable_names;    // granularity_design
  Caps caps;
  double lambda = kDefaultLambda;
  std::size_t budget = kDefaultBudget;
  std::size_t top_k = 10;  // 0 keeps every candidate
};

struct Candidate {
  std::shared_ptr<const Scm> high;
  Abstraction abstraction;
  EvaluationReport report;
  std::vector<int> encoding;  // tie-break key
  std::string label;
};

struct SolverResult {
  ProblemClass problem_class = ProblemClass::assessment;
  double lambda = kDefaultLambda;
  std::vector<Candidate> ranked;  // ascending (objective, e, i, encoding)
  std::vector<Candidate> pareto;  // non-dominated under (e, i)
  std::size_t candidates_evaluated = 0;
  bool exhaustive = true;

  const Candidate& best() const { return ranked.front(); }
};

enum class Execution { serial, parallel };

struct SolveOptions {
  Execution execution = Execution::parallel;
  int threads = 0;  // 0 = OpenMP default
};

// Number of surjections from an n-set onto an m-set, m! S(n, m).
std::size_t count_surjections(int n, int m);

// Every surjective binary column-stochastic m x n matrix, in lexicographic
// order of the column -> row assignment.
std::vector<BinaryStochasticMatrix> enumerate_outcome_maps(int domain_size, int codomain_size);

// A choice of relevant set and variable map: target[v] is the high variable
// index of base variable v, or -1 when v is not relevant.
struct VarMapChoice {
  std::vector<int> target;

  bool operator==(const VarMapChoice&) const = default;
};

// All non-empty R and surjective a: R -> {0..high_count-1}, ordered by R
// bitmask then the assignment. When `fixed_relevant` is given only that R is used.
std::vector<VarMapChoice> enumerate_varmaps(const Scm& base, int high_count,
                                            const std::optional<std::vector<std::size_t>>& fixed_relevant = {});

// Parent lists (ascending) of every DAG on n labelled nodes, ordered by edge bitmask.
std::vector<std::vector<std::vector<std::size_t>>> enumerate_dags(std::size_t n);

struct HighSkeleton {
  std::vector<VariableSpec> variables;
  std::vector<std::vector<std::size_t>> parents;
};

// High mechanisms from the base: column x' of Y's mechanism averages
// alpha_Y . P_base(a^-1(Y) | do(x)) over the preimage x of x'; roots take the
// pushforward of the base marginal. `a` must map onto the skeleton's variables.
Scm fit_mechanisms(const Evaluator& base, const HighSkeleton& skeleton, const Abstraction& a);
Scm fit_mechanisms(const Scm& base, const HighSkeleton& skeleton, const Abstraction& a);

SolverResult solve(const LearningProblem& problem, const SolveOptions& options = {});

// Non-dominated candidates under (e, i), ordered by (e, i, encoding).
std::vector<Candidate> pareto_front(const SolverResult& result);

// Post-hoc check of acyclicity and surjectivity constraints; empty when satisfied.
std::vector<Violation> check_candidate(const Candidate& c);

}  // namespace causabs
