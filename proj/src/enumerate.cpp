#include <algorithm>
#include <functional>

#include "cabs/learn.hpp"

namespace causabs {

namespace {

// All assignments of n items to m labels that use every label, lexicographic.
std::vector<std::vector<int>> surjective_assignments(int n, int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<std::size_t>(n));
  std::vector<int> used(static_cast<std::size_t>(m), 0);
  int covered = 0;
  std::function<void(int)> rec = [&](int pos) {
    if (n - pos < m - covered) return;  // not enough columns left to cover every row
    if (pos == n) {
      out.push_back(current);
      return;
    }
    for (int r = 0; r < m; ++r) {
      current[static_cast<std::size_t>(pos)] = r;
      if (used[static_cast<std::size_t>(r)]++ == 0) ++covered;
      rec(pos + 1);
      if (--used[static_cast<std::size_t>(r)] == 0) --covered;
    }
  };
  rec(0);
  return out;
}

}  // namespace

std::size_t count_surjections(int n, int m) {
  if (n < 0 || m < 0) return 0;
  // surj(n, m) = m * (surj(n-1, m) + surj(n-1, m-1))
  std::vector<std::size_t> row(static_cast<std::size_t>(m) + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i) {
    for (int j = m; j >= 1; --j) row[static_cast<std::size_t>(j)] = static_cast<std::size_t>(j) * (row[static_cast<std::size_t>(j)] + row[static_cast<std::size_t>(j) - 1]);
    row[0] = 0;
  }
  return row[static_cast<std::size_t>(m)];
}

std::vector<BinaryStochasticMatrix> enumerate_outcome_maps(int domain_size, int codomain_size) {
  if (domain_size < 1 || codomain_size < 1) throw Error("outcome map sizes must be positive");
  if (domain_size < codomain_size) {
    throw Error("no surjective map exists from " + std::to_string(domain_size) + " onto " +
                std::to_string(codomain_size) + " outcomes");
  }
  std::vector<BinaryStochasticMatrix> out;
  for (auto& a : surjective_assignments(domain_size, codomain_size)) out.emplace_back(codomain_size, std::move(a));
  return out;
}

std::vector<VarMapChoice> enumerate_varmaps(const Scm& base, int high_count,
                                            const std::optional<std::vector<std::size_t>>& fixed_relevant) {
  const auto n = base.size();
  if (high_count < 1 || static_cast<std::size_t>(high_count) > n) {
    throw Error("infeasible variable count: cannot map " + std::to_string(n) + " base variables onto " +
                std::to_string(high_count) + " high-level variables");
  }
  if (n >= 31) throw Error("too many base variables to enumerate relevant sets");

  std::vector<std::size_t> masks;
  if (fixed_relevant) {
    std::size_t mask = 0;
    for (auto v : *fixed_relevant) {
      if (v >= n) throw Error("relevant variable index out of range");
      mask |= std::size_t{1} << v;
    }
    masks.push_back(mask);
  } else {
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) masks.push_back(mask);
  }

  std::vector<VarMapChoice> out;
  for (auto mask : masks) {
    std::vector<std::size_t> vars;
    for (std::size_t v = 0; v < n; ++v) {
      if (mask & (std::size_t{1} << v)) vars.push_back(v);
    }
    if (static_cast<int>(vars.size()) < high_count) continue;
    for (const auto& assign : surjective_assignments(static_cast<int>(vars.size()), high_count)) {
      VarMapChoice c{std::vector<int>(n, -1)};
      for (std::size_t j = 0; j < vars.size(); ++j) c.target[vars[j]] = assign[j];
      out.push_back(std::move(c));
    }
  }
  if (fixed_relevant && out.empty()) {
    throw Error("infeasible variable count: relevant set is smaller than the high-level variable count");
  }
  return out;
}

std::vector<std::vector<std::vector<std::size_t>>> enumerate_dags(std::size_t n) {
  if (n > 5) throw Error("DAG enumeration is limited to 5 high-level variables");
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (parent, child)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) edges.emplace_back(i, j);
    }
  }
  std::vector<std::vector<std::vector<std::size_t>>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << edges.size()); ++mask) {
    std::vector<std::vector<std::size_t>> parents(n);
    std::vector<std::size_t> indegree(n, 0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (mask & (std::size_t{1} << e)) {
        parents[edges[e].second].push_back(edges[e].first);
        ++indegree[edges[e].second];
      }
    }
    // Kahn: acyclic iff every node gets removed.
    std::vector<std::size_t> stack;
    for (std::size_t v = 0; v < n; ++v) {
      if (indegree[v] == 0) stack.push_back(v);
    }
    std::size_t removed = 0;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      ++removed;
      for (std::size_t c = 0; c < n; ++c) {
        if (std::find(parents[c].begin(), parents[c].end(), v) != parents[c].end() && --indegree[c] == 0) {
          stack.push_back(c);
        }
      }
    }
    if (removed == n) {
      for (auto& p : parents) std::sort(p.begin(), p.end());
      out.push_back(std::move(parents));
    }
  }
  return out;
}

Scm fit_mechanisms(const Evaluator& ev, const HighSkeleton& skeleton, const Abstraction& a) {
  a.require_valid();
  if (a.high().variables() != skeleton.variables) {
    throw Error("fit_mechanisms: abstraction does not target the skeleton's variables");
  }
  if (skeleton.parents.size() != skeleton.variables.size()) {
    throw Error("fit_mechanisms: skeleton needs one parent list per variable");
  }
  const Scm& base = ev.base();
  std::vector<Mechanism> mechanisms;
  for (std::size_t h = 0; h < skeleton.variables.size(); ++h) {
    std::vector<std::size_t> parents = skeleton.parents[h];
    std::sort(parents.begin(), parents.end());
    const std::size_t self[] = {h};
    const auto& low_y = a.preimage(h);
    const auto map_y = a.composite_map(self);
    const auto rows = static_cast<Eigen::Index>(skeleton.variables[h].outcomes.size());

    Mechanism mech;
    mech.target = skeleton.variables[h].name;
    for (auto p : parents) {
      if (p >= skeleton.variables.size() || p == h) throw Error("fit_mechanisms: invalid parent index");
      mech.parents.push_back(skeleton.variables[p].name);
    }

    if (parents.empty()) {
      const Vector marg = marginalize(base, ev.base_joint().values(), low_y);
      mech.matrix = Matrix::Zero(rows, 1);
      for (Eigen::Index r = 0; r < marg.size(); ++r) mech.matrix(map_y[static_cast<std::size_t>(r)], 0) += marg[r];
    } else {
      const auto low_x = a.preimage(parents);
      const Matrix vm = ev.base_virtual(low_x, low_y);
      const auto map_x = a.composite_map(parents);
      std::size_t cols = 1;
      for (auto p : parents) cols *= skeleton.variables[p].outcomes.size();
      mech.matrix = Matrix::Zero(rows, static_cast<Eigen::Index>(cols));
      std::vector<int> hits(cols, 0);
      for (Eigen::Index x = 0; x < vm.cols(); ++x) {
        const auto col = static_cast<Eigen::Index>(map_x[static_cast<std::size_t>(x)]);
        ++hits[static_cast<std::size_t>(col)];
        for (Eigen::Index r = 0; r < vm.rows(); ++r) mech.matrix(map_y[static_cast<std::size_t>(r)], col) += vm(r, x);
      }
      for (std::size_t c = 0; c < cols; ++c) {
        if (hits[c] == 0) throw Error("fit_mechanisms: empty preimage for a parent configuration");
        mech.matrix.col(static_cast<Eigen::Index>(c)) /= hits[c];
      }
    }
    mechanisms.push_back(std::move(mech));
  }
  Scm fitted(skeleton.variables, std::move(mechanisms));
  fitted.require_valid();
  return fitted;
}

Scm fit_mechanisms(const Scm& base, const HighSkeleton& skeleton, const Abstraction& a) {
  if (!(a.base() == base)) throw Error("fit_mechanisms: abstraction base does not match");
  return fit_mechanisms(Evaluator(a.base_ptr(), false), skeleton, a);
}

}  // namespace causabs
