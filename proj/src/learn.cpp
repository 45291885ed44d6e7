#include <algorithm>
#include <map>
#include <tuple>

#include "cabs/learn.hpp"
#include "search.hpp"

namespace causabs {

namespace {

constexpr std::size_t kBatch = 4096;

struct ProblemClassName {
  ProblemClass value;
  std::string_view name;
};

constexpr ProblemClassName kClassNames[] = {
    {ProblemClass::assessment, "assessment"},
    {ProblemClass::completion, "completion"},
    {ProblemClass::abstraction_design, "abstraction_design"},
    {ProblemClass::mechanism_design, "mechanism_design"},
    {ProblemClass::granularity_design, "granularity_design"},
    {ProblemClass::model_design, "model_design"},
};

using MapList = std::shared_ptr<const std::vector<BinaryStochasticMatrix>>;

class MapCache {
 public:
  MapList get(int n, int m) {
    auto& slot = cache_[{n, m}];
    if (!slot) slot = std::make_shared<const std::vector<BinaryStochasticMatrix>>(enumerate_outcome_maps(n, m));
    return slot;
  }

 private:
  std::map<std::pair<int, int>, MapList> cache_;
};

std::shared_ptr<const Scm> placeholder(const std::vector<VariableSpec>& vars,
                                       const std::vector<std::vector<std::size_t>>& parents) {
  std::vector<Mechanism> mechs;
  for (std::size_t h = 0; h < vars.size(); ++h) {
    Mechanism m;
    m.target = vars[h].name;
    Eigen::Index cols = 1;
    for (auto p : parents[h]) {
      m.parents.push_back(vars[p].name);
      cols *= static_cast<Eigen::Index>(vars[p].outcomes.size());
    }
    const auto rows = static_cast<Eigen::Index>(vars[h].outcomes.size());
    m.matrix = Matrix::Constant(rows, cols, 1.0 / static_cast<double>(rows));
    mechs.push_back(std::move(m));
  }
  return std::make_shared<const Scm>(vars, std::move(mechs));
}

std::vector<VariableSpec> designed_variables(const std::vector<std::string>& names, const std::vector<int>& cards) {
  std::vector<VariableSpec> vars;
  for (std::size_t h = 0; h < names.size(); ++h) {
    VariableSpec v{names[h], {}};
    for (int o = 0; o < cards[h]; ++o) v.outcomes.push_back(std::to_string(o));
    vars.push_back(std::move(v));
  }
  return vars;
}

// Fills the outcome-map lists of every varmap in `shape`. `given` holds
// per-high-variable fixed maps (nullopt = free).
void attach_maps(detail::Shape& shape, const Scm& base, const std::vector<std::optional<BinaryStochasticMatrix>>& given,
                 MapCache& cache) {
  std::vector<VarMapChoice> kept;
  for (const auto& vm : shape.varmaps) {
    std::vector<MapList> lists;
    bool feasible = true;
    for (std::size_t h = 0; h < shape.variables.size() && feasible; ++h) {
      int n = 1;
      for (std::size_t v = 0; v < base.size(); ++v) {
        if (vm.target[v] == static_cast<int>(h)) n *= base.cardinality(v);
      }
      const int m = static_cast<int>(shape.variables[h].outcomes.size());
      if (h < given.size() && given[h]) {
        if (given[h]->cols() != n || given[h]->rows() != m) {
          throw Error("given outcome map for " + shape.variables[h].name + " has the wrong dimensions");
        }
        lists.push_back(std::make_shared<const std::vector<BinaryStochasticMatrix>>(1, *given[h]));
      } else if (n < m) {
        feasible = false;
      } else {
        lists.push_back(cache.get(n, m));
      }
    }
    if (!feasible) continue;
    kept.push_back(vm);
    shape.maps.push_back(std::move(lists));
  }
  shape.varmaps = std::move(kept);
}

void add_fitted_shape(detail::SearchSpace& space, std::vector<VariableSpec> vars, MapCache& cache) {
  detail::Shape shape;
  shape.variables = std::move(vars);
  shape.dags = enumerate_dags(shape.variables.size());
  for (const auto& dag : shape.dags) {
    shape.placeholders.push_back(placeholder(shape.variables, dag));
    shape.pairs.push_back(admissible_pairs(*shape.placeholders.back()));
  }
  shape.varmaps = enumerate_varmaps(*space.base, static_cast<int>(shape.variables.size()));
  attach_maps(shape, *space.base, {}, cache);
  if (!shape.varmaps.empty()) space.shapes.push_back(std::move(shape));
}

// Every cardinality vector in [1, max]^k, first variable slowest.
std::vector<std::vector<int>> cardinality_vectors(std::size_t k, int max) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k, 1);
  while (true) {
    out.push_back(cur);
    std::size_t i = k;
    while (i > 0 && cur[i - 1] == max) cur[--i] = 1;
    if (i == 0) break;
    ++cur[i - 1];
  }
  return out;
}

detail::SearchSpace build_space(const LearningProblem& p) {
  if (!p.base) throw Error("learning problem has no base model");
  p.base->require_valid();
  if (!(p.lambda >= 0.0)) throw Error("lambda must be non-negative");
  if (p.budget == 0) throw Error("budget must be positive");

  detail::SearchSpace space;
  space.base = p.base;
  const Scm& base = *p.base;
  MapCache cache;

  const bool needs_high = p.problem_class == ProblemClass::assessment || p.problem_class == ProblemClass::completion ||
                          p.problem_class == ProblemClass::abstraction_design;
  if (needs_high) {
    if (!p.high) throw Error(std::string(to_string(p.problem_class)) + " requires a high-level model");
    p.high->require_valid();
    detail::Shape shape;
    shape.variables = p.high->variables();
    shape.fixed_high = p.high;
    shape.pairs.push_back(admissible_pairs(*p.high));

    std::vector<std::optional<BinaryStochasticMatrix>> given(p.high->size());
    if (p.problem_class == ProblemClass::abstraction_design) {
      shape.varmaps = enumerate_varmaps(base, static_cast<int>(p.high->size()));
    } else {
      if (!p.abstraction) throw Error(std::string(to_string(p.problem_class)) + " requires an abstraction");
      const auto& pa = *p.abstraction;
      VarMapChoice vm{std::vector<int>(base.size(), -1)};
      std::vector<bool> in_r(base.size(), false);
      for (const auto& r : pa.relevant) in_r[base.index_of(r)] = true;
      for (const auto& e : pa.varmap) {
        const auto from = base.index_of(e.from);
        if (!in_r[from]) throw Error("variable map uses '" + e.from + "' which is not in the relevant set");
        if (vm.target[from] != -1) throw Error("variable map lists '" + e.from + "' twice");
        vm.target[from] = static_cast<int>(p.high->index_of(e.to));
      }
      for (std::size_t v = 0; v < base.size(); ++v) {
        if (in_r[v] && vm.target[v] < 0) throw Error("relevant variable '" + base.name(v) + "' is not mapped");
      }
      for (std::size_t h = 0; h < p.high->size(); ++h) {
        if (std::find(vm.target.begin(), vm.target.end(), static_cast<int>(h)) == vm.target.end()) {
          throw Error("variable map is not surjective: '" + p.high->name(h) + "' has no preimage");
        }
      }
      for (const auto& om : pa.outcome_maps) {
        const auto h = p.high->index_of(om.target);
        if (given[h]) throw Error("outcome map for '" + om.target + "' given twice");
        given[h] = BinaryStochasticMatrix::from_matrix(om.matrix);
        if (!given[h]->is_surjective()) throw Error("given outcome map for '" + om.target + "' is not surjective");
      }
      if (p.problem_class == ProblemClass::assessment) {
        for (std::size_t h = 0; h < given.size(); ++h) {
          if (!given[h]) throw Error("assessment requires every outcome map; missing '" + p.high->name(h) + "'");
        }
      }
      shape.varmaps.push_back(std::move(vm));
    }
    attach_maps(shape, base, given, cache);
    if (!shape.varmaps.empty()) space.shapes.push_back(std::move(shape));
  } else if (p.problem_class == ProblemClass::mechanism_design) {
    if (p.high_variables.empty()) throw Error("mechanism_design requires high-level variables");
    if (p.high_variables.size() > base.size()) throw Error("more high-level variables than base variables");
    placeholder(p.high_variables, std::vector<std::vector<std::size_t>>(p.high_variables.size()))->require_valid();
    add_fitted_shape(space, p.high_variables, cache);
  } else {
    if (p.caps.max_cardinality < 1) throw Error("caps.max_cardinality must be positive");
    std::vector<std::vector<std::string>> name_sets;
    if (p.problem_class == ProblemClass::granularity_design) {
      if (p.high_variable_names.empty()) throw Error("granularity_design requires high-level variable names");
      if (p.high_variable_names.size() > base.size()) throw Error("more high-level variables than base variables");
      name_sets.push_back(p.high_variable_names);
    } else {
      if (p.caps.max_high_variables < 1) throw Error("caps.max_high_variables must be positive");
      const auto kmax = std::min<std::size_t>(static_cast<std::size_t>(p.caps.max_high_variables), base.size());
      for (std::size_t k = 1; k <= kmax; ++k) {
        std::vector<std::string> names;
        for (std::size_t h = 0; h < k; ++h) names.push_back("H" + std::to_string(h + 1));
        name_sets.push_back(std::move(names));
      }
    }
    for (const auto& names : name_sets) {
      for (const auto& cards : cardinality_vectors(names.size(), p.caps.max_cardinality)) {
        auto vars = designed_variables(names, cards);
        placeholder(vars, std::vector<std::vector<std::size_t>>(vars.size()))->require_valid();
        add_fitted_shape(space, std::move(vars), cache);
      }
    }
  }
  return space;
}

// Generates candidate specs in deterministic order, batch by batch.
class SpecCursor {
 public:
  explicit SpecCursor(const detail::SearchSpace& space) : space_(space) { settle(); }

  bool done() const { return shape_ >= space_.shapes.size(); }

  detail::CandidateSpec next() {
    detail::CandidateSpec s{static_cast<std::uint32_t>(shape_), static_cast<std::uint32_t>(varmap_),
                            static_cast<std::uint32_t>(dag_), alpha_};
    advance();
    return s;
  }

 private:
  const detail::Shape& shape() const { return space_.shapes[shape_]; }

  void reset_alpha() { alpha_.assign(shape().variables.size(), 0); }

  // Moves to the first valid position at or after the current one.
  void settle() {
    while (shape_ < space_.shapes.size() && varmap_ >= shape().varmaps.size()) {
      ++shape_;
      varmap_ = 0;
      dag_ = 0;
    }
    if (shape_ < space_.shapes.size() && alpha_.size() != shape().variables.size()) reset_alpha();
  }

  void advance() {
    const auto& sh = shape();
    if (++dag_ < sh.dag_count()) return;
    dag_ = 0;
    const auto& lists = sh.maps[varmap_];
    std::size_t i = alpha_.size();
    while (i > 0) {
      --i;
      if (++alpha_[i] < lists[i]->size()) return;
      alpha_[i] = 0;
    }
    ++varmap_;
    settle();
    reset_alpha_if_valid();
  }

  void reset_alpha_if_valid() {
    if (!done()) reset_alpha();
  }

  const detail::SearchSpace& space_;
  std::size_t shape_ = 0;
  std::size_t varmap_ = 0;
  std::size_t dag_ = 0;
  std::vector<std::uint32_t> alpha_;
};

struct Entry {
  Score score;
  std::vector<int> encoding;
  detail::CandidateSpec spec;
};

bool rank_less(const Entry& a, const Entry& b) {
  return std::tie(a.score.objective, a.score.e, a.score.i, a.encoding) <
         std::tie(b.score.objective, b.score.e, b.score.i, b.encoding);
}

bool pareto_less(const Entry& a, const Entry& b) {
  return std::tie(a.score.e, a.score.i, a.encoding) < std::tie(b.score.e, b.score.i, b.encoding);
}

bool dominates(const Score& a, const Score& b) {
  return a.e <= b.e && a.i <= b.i && (a.e < b.e || a.i < b.i);
}

void merge_front(std::vector<Entry>& front, const Entry& e) {
  for (const auto& f : front) {
    if (dominates(f.score, e.score)) return;
  }
  std::erase_if(front, [&](const Entry& f) { return dominates(e.score, f.score); });
  front.push_back(e);
}

}  // namespace

std::string_view to_string(ProblemClass c) {
  for (const auto& n : kClassNames) {
    if (n.value == c) return n.name;
  }
  return "unknown";
}

ProblemClass parse_problem_class(std::string_view s) {
  for (const auto& n : kClassNames) {
    if (n.name == s) return n.value;
  }
  throw Error("unknown problem class '" + std::string(s) + "'");
}

SolverResult solve(const LearningProblem& problem, const SolveOptions& options) {
  const detail::SearchSpace space = build_space(problem);
  const Evaluator ev(space.base);

  SolverResult result;
  result.problem_class = problem.problem_class;
  result.lambda = problem.lambda;

  std::vector<Entry> ranked;
  std::vector<Entry> front;
  SpecCursor cursor(space);
  std::vector<detail::CandidateSpec> batch;
  std::vector<Score> scores;
  while (!cursor.done()) {
    if (result.candidates_evaluated >= problem.budget) {
      result.exhaustive = false;
      break;
    }
    batch.clear();
    const auto room = std::min(kBatch, problem.budget - result.candidates_evaluated);
    while (!cursor.done() && batch.size() < room) batch.push_back(cursor.next());
    scores.assign(batch.size(), Score{});
    if (options.execution == Execution::parallel) {
      detail::score_parallel(space, ev, batch, problem.lambda, scores, options.threads);
    } else {
      detail::score_serial(space, ev, batch, problem.lambda, scores);
    }
    result.candidates_evaluated += batch.size();

    for (std::size_t i = 0; i < batch.size(); ++i) {
      Entry e{scores[i], detail::encode(space, batch[i]), batch[i]};
      merge_front(front, e);
      ranked.push_back(std::move(e));
    }
    if (problem.top_k > 0 && ranked.size() > problem.top_k) {
      std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(problem.top_k), ranked.end(),
                        rank_less);
      ranked.resize(problem.top_k);
    }
  }
  std::sort(ranked.begin(), ranked.end(), rank_less);
  if (!cursor.done()) result.exhaustive = false;
  if (result.candidates_evaluated == 0) throw Error("learning problem has no feasible candidates");

  std::sort(front.begin(), front.end(), pareto_less);
  auto materialize = [&](const Entry& e) {
    detail::Built b = detail::build(space, ev, e.spec);
    EvaluationReport report = ev.evaluate(b.abstraction, problem.lambda);
    return Candidate{b.high, std::move(b.abstraction), std::move(report), e.encoding, detail::describe(space, e.spec)};
  };
  for (const auto& e : ranked) result.ranked.push_back(materialize(e));
  for (const auto& e : front) result.pareto.push_back(materialize(e));
  return result;
}

std::vector<Candidate> pareto_front(const SolverResult& result) {
  if (result.ranked.empty()) throw Error("pareto_front: result has no candidates");
  return result.pareto;
}

std::vector<Violation> check_candidate(const Candidate& c) {
  std::vector<Violation> out = c.high->violations();
  const auto& av = c.abstraction.violations();
  out.insert(out.end(), av.begin(), av.end());
  if (!(c.abstraction.high() == *c.high)) out.push_back({"candidate", "abstraction does not target the candidate model"});
  return out;
}

}  // namespace causabs
