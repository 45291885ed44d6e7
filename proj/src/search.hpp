#pragma once

// Internal: candidate search space shared by the solver driver and the
// evaluation kernels.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cabs/learn.hpp"

namespace causabs::detail {

// One high-level model shape: variables plus either a given model or a list
// of DAGs whose mechanisms are fitted per candidate.
struct Shape {
  std::vector<VariableSpec> variables;
  std::shared_ptr<const Scm> fixed_high;
  std::vector<std::vector<std::vector<std::size_t>>> dags;
  std::vector<std::shared_ptr<const Scm>> placeholders;  // per DAG, uniform mechanisms
  std::vector<std::vector<SubsetPair>> pairs;            // per DAG; one entry when fixed
  std::vector<VarMapChoice> varmaps;
  // maps[varmap][high var] -> candidate outcome maps for that variable.
  std::vector<std::vector<std::shared_ptr<const std::vector<BinaryStochasticMatrix>>>> maps;

  bool fitted() const { return fixed_high == nullptr; }
  std::size_t dag_count() const { return fitted() ? dags.size() : 1; }
};

struct CandidateSpec {
  std::uint32_t shape = 0;
  std::uint32_t varmap = 0;
  std::uint32_t dag = 0;
  std::vector<std::uint32_t> alpha;
};

struct SearchSpace {
  std::shared_ptr<const Scm> base;
  std::vector<Shape> shapes;
};

struct Built {
  std::shared_ptr<const Scm> high;
  Abstraction abstraction;
};

Built build(const SearchSpace& space, const Evaluator& ev, const CandidateSpec& spec);
Score score_one(const SearchSpace& space, const Evaluator& ev, const CandidateSpec& spec, double lambda);
std::vector<int> encode(const SearchSpace& space, const CandidateSpec& spec);
std::string describe(const SearchSpace& space, const CandidateSpec& spec);

// Serial reference kernel and its OpenMP counterpart; both fill out[i] for specs[i].
void score_serial(const SearchSpace& space, const Evaluator& ev, std::span<const CandidateSpec> specs, double lambda,
                  std::span<Score> out);
void score_parallel(const SearchSpace& space, const Evaluator& ev, std::span<const CandidateSpec> specs,
                    double lambda, std::span<Score> out, int threads);

}  // namespace causabs::detail
