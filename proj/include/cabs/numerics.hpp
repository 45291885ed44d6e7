#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace causabs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Tolerance used when checking that probabilities sum to one.
inline constexpr double kStochasticTolerance = 1e-9;

// Returns a description of the first violated column-stochastic invariant, or
// nullopt. Columns are reported 1-based.
std::optional<std::string> stochastic_violation(const Matrix& m);

// A probability vector. Entries lie in [0,1] and sum to one within tolerance.
class Distribution {
 public:
  explicit Distribution(Vector p);
  Distribution(std::initializer_list<double> p);

  static Distribution uniform(Eigen::Index n);
  static Distribution point_mass(Eigen::Index n, Eigen::Index at);

  Eigen::Index size() const noexcept { return p_.size(); }
  double operator[](Eigen::Index i) const { return p_[i]; }
  const Vector& values() const noexcept { return p_; }

  bool operator==(const Distribution& o) const { return p_ == o.p_; }

 private:
  Vector p_;
};

// Column-stochastic matrix: entry(r, c) = P(row outcome r | column condition c).
class StochasticMatrix {
 public:
  explicit StochasticMatrix(Matrix m);

  static StochasticMatrix identity(Eigen::Index n);

  Eigen::Index rows() const noexcept { return m_.rows(); }
  Eigen::Index cols() const noexcept { return m_.cols(); }
  double operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }
  const Matrix& matrix() const noexcept { return m_; }
  Distribution column(Eigen::Index c) const { return Distribution(Vector(m_.col(c))); }

  bool operator==(const StochasticMatrix& o) const { return m_ == o.m_; }

 private:
  Matrix m_;
};

// Binary column-stochastic matrix stored as its column -> row assignment.
class BinaryStochasticMatrix {
 public:
  BinaryStochasticMatrix(Eigen::Index rows, std::vector<int> assignment);

  // Throws unless every entry is 0 or 1 with exactly one 1 per column.
  static BinaryStochasticMatrix from_matrix(const Matrix& m);
  static BinaryStochasticMatrix identity(Eigen::Index n);

  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return static_cast<Eigen::Index>(assign_.size()); }
  int row_of(Eigen::Index col) const { return assign_[static_cast<std::size_t>(col)]; }
  const std::vector<int>& assignment() const noexcept { return assign_; }

  // Every row holds at least one 1.
  bool is_surjective() const;
  std::vector<int> row_counts() const;

  Matrix matrix() const;
  StochasticMatrix stochastic() const { return StochasticMatrix(matrix()); }

  bool operator==(const BinaryStochasticMatrix&) const = default;

 private:
  Eigen::Index rows_;
  std::vector<int> assign_;
};

bool is_binary(const Matrix& m);

// Sum p ln(p/q) in nats; terms with p = 0 contribute nothing.
double kl_divergence(const Distribution& p, const Distribution& q);

// Square root of the Jensen-Shannon divergence in nats. Lies in [0, sqrt(ln 2)].
double jsd_distance(const Distribution& p, const Distribution& q);
double jsd_distance(std::span<const double> p, std::span<const double> q);

StochasticMatrix kronecker(const StochasticMatrix& a, const StochasticMatrix& b);
Matrix kronecker(const Matrix& a, const Matrix& b);

// Divides each column by its sum. Throws on a column with zero sum.
StochasticMatrix l1_normalize_columns(const Matrix& m);

// Pushforward of a distribution through a stochastic map.
Distribution apply(const StochasticMatrix& m, const Distribution& p);

}  // namespace causabs
