#include <exception>
#include <sstream>

#include <omp.h>

#include "search.hpp"

namespace causabs::detail {

Built build(const SearchSpace& space, const Evaluator& ev, const CandidateSpec& spec) {
  const Shape& shape = space.shapes[spec.shape];
  const Scm& base = *space.base;
  const VarMapChoice& vm = shape.varmaps[spec.varmap];

  std::vector<std::string> relevant;
  std::vector<VarMapEntry> varmap;
  for (std::size_t v = 0; v < base.size(); ++v) {
    if (vm.target[v] < 0) continue;
    relevant.push_back(base.name(v));
    varmap.push_back({base.name(v), shape.variables[static_cast<std::size_t>(vm.target[v])].name});
  }
  std::vector<OutcomeMap> maps;
  for (std::size_t h = 0; h < shape.variables.size(); ++h) {
    maps.push_back({shape.variables[h].name, (*shape.maps[spec.varmap][h])[spec.alpha[h]].matrix()});
  }

  if (!shape.fitted()) {
    return {shape.fixed_high, Abstraction(space.base, shape.fixed_high, relevant, varmap, maps)};
  }
  Abstraction draft(space.base, shape.placeholders[spec.dag], relevant, varmap, maps);
  auto fitted = std::make_shared<const Scm>(fit_mechanisms(ev, {shape.variables, shape.dags[spec.dag]}, draft));
  return {fitted, Abstraction(space.base, fitted, std::move(relevant), std::move(varmap), std::move(maps))};
}

Score score_one(const SearchSpace& space, const Evaluator& ev, const CandidateSpec& spec, double lambda) {
  const Built b = build(space, ev, spec);
  const Shape& shape = space.shapes[spec.shape];
  return ev.score(b.abstraction, lambda, shape.pairs[shape.fitted() ? spec.dag : 0]);
}

std::vector<int> encode(const SearchSpace& space, const CandidateSpec& spec) {
  const Shape& shape = space.shapes[spec.shape];
  std::vector<int> code;
  code.push_back(static_cast<int>(shape.variables.size()));
  for (const auto& v : shape.variables) code.push_back(static_cast<int>(v.outcomes.size()));
  code.push_back(shape.fitted() ? static_cast<int>(spec.dag) : -1);
  int mask = 0;
  const auto& target = shape.varmaps[spec.varmap].target;
  for (std::size_t v = 0; v < target.size(); ++v) {
    if (target[v] >= 0) mask |= 1 << v;
  }
  code.push_back(mask);
  for (int t : target) {
    if (t >= 0) code.push_back(t);
  }
  for (std::size_t h = 0; h < shape.variables.size(); ++h) {
    const auto& assign = (*shape.maps[spec.varmap][h])[spec.alpha[h]].assignment();
    code.insert(code.end(), assign.begin(), assign.end());
  }
  return code;
}

std::string describe(const SearchSpace& space, const CandidateSpec& spec) {
  const Shape& shape = space.shapes[spec.shape];
  const Scm& base = *space.base;
  const auto& target = shape.varmaps[spec.varmap].target;
  std::ostringstream os;
  os << "R={";
  bool first = true;
  for (std::size_t v = 0; v < target.size(); ++v) {
    if (target[v] < 0) continue;
    os << (first ? "" : ",") << base.name(v);
    first = false;
  }
  os << "} a={";
  first = true;
  for (std::size_t v = 0; v < target.size(); ++v) {
    if (target[v] < 0) continue;
    os << (first ? "" : ",") << base.name(v) << "->" << shape.variables[static_cast<std::size_t>(target[v])].name;
    first = false;
  }
  os << "} alpha={";
  for (std::size_t h = 0; h < shape.variables.size(); ++h) {
    os << (h ? "," : "") << shape.variables[h].name << ":[";
    const auto& assign = (*shape.maps[spec.varmap][h])[spec.alpha[h]].assignment();
    for (std::size_t c = 0; c < assign.size(); ++c) os << (c ? "," : "") << assign[c];
    os << "]";
  }
  os << "}";
  if (shape.fitted()) {
    os << " card=(";
    for (std::size_t h = 0; h < shape.variables.size(); ++h) os << (h ? "," : "") << shape.variables[h].outcomes.size();
    os << ") dag={";
    first = true;
    const auto& parents = shape.dags[spec.dag];
    for (std::size_t h = 0; h < parents.size(); ++h) {
      for (auto p : parents[h]) {
        os << (first ? "" : ",") << shape.variables[p].name << "->" << shape.variables[h].name;
        first = false;
      }
    }
    os << "}";
  }
  return os.str();
}

void score_serial(const SearchSpace& space, const Evaluator& ev, std::span<const CandidateSpec> specs, double lambda,
                  std::span<Score> out) {
  for (std::size_t i = 0; i < specs.size(); ++i) out[i] = score_one(space, ev, specs[i], lambda);
}

void score_parallel(const SearchSpace& space, const Evaluator& ev, std::span<const CandidateSpec> specs,
                    double lambda, std::span<Score> out, int threads) {
  const auto n = static_cast<std::int64_t>(specs.size());
  const int team = threads > 0 ? threads : omp_get_max_threads();
  std::exception_ptr failure;
  std::int64_t failed_at = n;
#pragma omp parallel for schedule(dynamic, 16) num_threads(team)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = score_one(space, ev, specs[static_cast<std::size_t>(i)], lambda);
    } catch (...) {
#pragma omp critical(cabs_kernel_failure)
      {
        // keep the lowest index so the reported error does not depend on scheduling
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace causabs::detail
