#include <gtest/gtest.h>

#include <random>
#include <set>

#include "cabs/abstraction.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace causabs;

namespace {

Matrix id2() { return Matrix::Identity(2, 2); }

Matrix swap2() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix col(double a, double b) {
  Matrix m(2, 1);
  m << a, b;
  return m;
}

std::shared_ptr<const Scm> chain3() {
  std::vector<VariableSpec> v{{"X", {"0", "1"}}, {"Y", {"0", "1"}}, {"Z", {"0", "1"}}};
  return std::make_shared<const Scm>(
      v, std::vector<Mechanism>{{"X", {}, col(0.5, 0.5)}, {"Y", {"X"}, mat2(0.9, 0.2, 0.1, 0.8)},
                                {"Z", {"Y"}, mat2(0.7, 0.4, 0.3, 0.6)}});
}

}  // namespace

TEST(AdmissiblePairs, ChainHasSevenPairs) {
  const auto pairs = admissible_pairs(*chain3());
  std::set<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> got(pairs.begin(), pairs.end());
  const std::set<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> want{
      {{0}, {1}}, {{0}, {2}}, {{1}, {2}}, {{0}, {1, 2}}, {{0, 1}, {2}}, {{1}, {0, 2}}, {{0, 2}, {1}}};
  EXPECT_EQ(got, want);
  EXPECT_EQ(pairs.size(), 7u);
  // Ordered by total size, then source size.
  EXPECT_EQ(pairs.front(), (SubsetPair{{0}, {1}}));
}

TEST(AdmissiblePairs, EdgelessModelHasNone) {
  std::vector<VariableSpec> v{{"A", {"0", "1"}}, {"B", {"0", "1"}}};
  const Scm m(v, {{"A", {}, col(0.5, 0.5)}, {"B", {}, col(0.3, 0.7)}});
  EXPECT_TRUE(admissible_pairs(m).empty());
}

TEST(AdmissiblePairsProperty, MatchesMaskOracle) {
  std::mt19937_64 rng(201);
  for (int trial = 0; trial < 120; ++trial) {
    const Scm m = oracle::random_model(rng, 5, 2);
    const auto pairs = admissible_pairs(m);
    std::set<std::pair<unsigned, unsigned>> got;
    for (const auto& [x, y] : pairs) {
      unsigned xm = 0, ym = 0;
      for (auto v : x) xm |= 1u << v;
      for (auto v : y) ym |= 1u << v;
      got.insert({xm, ym});
    }
    const auto ref = oracle::admissible_masks(m);
    EXPECT_EQ(got, (std::set<std::pair<unsigned, unsigned>>(ref.begin(), ref.end())));
    EXPECT_EQ(got.size(), pairs.size());
  }
}

TEST(Abstraction, ValidationMessages) {
  const auto m = fixtures::M();
  const auto h = fixtures::Mprime();
  {
    const Abstraction a(m, h, {"S"}, {{"S", "S'"}}, {{"S'", id2()}});
    ASSERT_FALSE(a.valid());
    EXPECT_EQ(a.violations()[0].to_string(), "variable map: a not surjective: high variable 'C'' has no preimage");
  }
  {
    Matrix onto_one(2, 2);
    onto_one << 1, 1, 0, 0;
    const Abstraction a(m, h, {"S", "C"}, {{"S", "S'"}, {"C", "C'"}}, {{"S'", id2()}, {"C'", onto_one}});
    ASSERT_FALSE(a.valid());
    EXPECT_EQ(a.violations()[0].to_string(), "outcome map C': not surjective: outcome '1' is never reached");
  }
  {
    const Abstraction a(m, h, {"S", "C"}, {{"S", "S'"}, {"C", "C'"}}, {{"S'", id2()}, {"C'", mat2(0.5, 0.5, 0.5, 0.5)}});
    EXPECT_EQ(a.violations()[0].to_string(), "outcome map C': not a binary column-stochastic matrix");
  }
  {
    const Abstraction a(m, h, {"S", "C"}, {{"S", "S'"}, {"C", "C'"}}, {{"S'", id2()}});
    EXPECT_EQ(a.violations()[0].to_string(), "outcome map C': missing");
  }
  {
    const Abstraction a(m, h, {"S", "C"}, {{"S", "S'"}, {"C", "C'"}}, {{"S'", id2()}, {"C'", Matrix::Identity(2, 4)}});
    EXPECT_EQ(a.violations()[0].to_string(), "outcome map C': matrix is 2x4 but expected 2x2");
  }
  {
    const Abstraction a(m, h, {"S", "C"}, {{"E", "S'"}, {"C", "C'"}}, {{"S'", id2()}, {"C'", id2()}});
    EXPECT_FALSE(a.valid());
  }
  {
    const Abstraction a(m, h, {"Q"}, {}, {});
    EXPECT_EQ(a.violations()[0].to_string(), "relevant set: 'Q' is not a base variable");
  }
}

TEST(Abstraction, CompositeAndGlobalMaps) {
  const auto g = fixtures::abstraction("abs_gamma.json");
  ASSERT_TRUE(g.valid());
  EXPECT_EQ(g.preimage(0), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(g.global_map(), std::vector<int>(8, 0));
  const auto b = fixtures::abstraction("abs_beta.json");
  // Base (E,S,C) index -> high (S',C') index with both maps swapped.
  EXPECT_EQ(b.global_map(), (std::vector<int>{3, 2, 1, 0, 3, 2, 1, 0}));
  const std::size_t both[] = {0, 1};
  EXPECT_EQ(b.composite_map(both), (std::vector<int>{3, 2, 1, 0}));
  EXPECT_EQ(b.high_of(0), -1);
}

TEST(Abstraction, AlphaCommutes) {
  const auto a = fixtures::abstraction("abs_alpha.json");
  const auto pairs = enumerate_diagrams(a);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].first, std::vector<std::string>{"S'"});
  EXPECT_EQ(pairs[0].second, std::vector<std::string>{"C'"});
  // 0.8*0.9 + 0.2*0.8 is not exactly 0.88 in binary floating point.
  EXPECT_LT(abstraction_error(a), 1e-12);
}

TEST(Abstraction, AlphaOntoMdprime) {
  const auto a = fixtures::abstraction("abs_alpha_Mdprime.json");
  const std::vector<std::string> x{"S''"}, y{"C''"};
  const auto d = diagram_error(a, x, y);
  EXPECT_NEAR(d.value, 0.07749949674606982, 1e-9);
  EXPECT_EQ(d.worst_intervention, (Intervention{{"S", "0"}}));
  EXPECT_NEAR(abstraction_error(a), 0.07749949674606982, 1e-9);
  EXPECT_THROW(diagram_error(a, x, x), Error);
  const std::vector<std::string> none;
  EXPECT_THROW(diagram_error(a, none, y), Error);
}

TEST(Abstraction, InformationLossValues) {
  EXPECT_NEAR(information_loss(fixtures::abstraction("abs_alpha.json")), 0.4432084736213933, 1e-9);
  EXPECT_NEAR(information_loss(fixtures::abstraction("abs_beta.json")), 0.31430370573308963, 1e-9);
  EXPECT_NEAR(information_loss(fixtures::abstraction("abs_gamma.json")), 0.3671539190498019, 1e-9);
  EXPECT_NEAR(information_loss(fixtures::abstraction("abs_alpha_Mtprime.json")), 0.24399834647877872, 1e-9);
  EXPECT_NEAR(abstraction_error(fixtures::abstraction("abs_beta.json")), 0.21642685993286398, 1e-9);
  EXPECT_EQ(abstraction_error(fixtures::abstraction("abs_gamma.json")), 0.0);
  EXPECT_LT(abstraction_error(fixtures::abstraction("abs_alpha_Mtprime.json")), 1e-12);
}

TEST(Abstraction, GlobalInverses) {
  const Matrix ai = global_inverse(fixtures::abstraction("abs_alpha.json")).matrix();
  Matrix want = Matrix::Zero(8, 4);
  for (int r = 0; r < 8; ++r) want(r, r % 4) = 0.5;
  EXPECT_EQ(ai, want);
  const Matrix bi = global_inverse(fixtures::abstraction("abs_beta.json")).matrix();
  Matrix bw = Matrix::Zero(8, 4);
  for (int r = 0; r < 8; ++r) bw(r, 3 - r % 4) = 0.5;
  EXPECT_EQ(bi, bw);
  const Matrix gi = global_inverse(fixtures::abstraction("abs_gamma.json")).matrix();
  EXPECT_EQ(gi, Matrix::Constant(8, 1, 0.125));
}

TEST(Abstraction, Reconstruction) {
  const auto a = fixtures::abstraction("abs_alpha.json");
  const Vector r = global_inverse(a).matrix() * joint_distribution(a.high()).values();
  const std::vector<double> want{0.088, 0.012, 0.152, 0.248, 0.088, 0.012, 0.152, 0.248};
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(r[k], want[static_cast<std::size_t>(k)], 1e-12);
}

TEST(Abstraction, ComponentInverse) {
  Matrix m(2, 3);
  m << 1, 1, 0, 0, 0, 1;
  const auto inv = component_inverse(m);
  Matrix want(3, 2);
  want << 0.5, 0, 0.5, 0, 0, 1;
  EXPECT_EQ(inv.matrix(), want);
  Matrix ns(2, 2);
  ns << 1, 1, 0, 0;
  EXPECT_THROW(component_inverse(ns), Error);
}

TEST(Abstraction, EvaluateReport) {
  const auto r = evaluate(fixtures::abstraction("abs_beta.json"), 0.5);
  EXPECT_NEAR(r.objective, r.e + 0.5 * r.i, 1e-15);
  ASSERT_EQ(r.per_diagram.size(), 1u);
  EXPECT_DOUBLE_EQ(r.per_diagram[0].value, r.e);
  EXPECT_THROW(evaluate(fixtures::abstraction("abs_beta.json"), -1.0), Error);
}

TEST(Abstraction, IdentityIsLossless) {
  const auto m = fixtures::M();
  const auto a = identity_abstraction(m);
  ASSERT_TRUE(a.valid());
  EXPECT_LT(abstraction_error(a), 1e-12);
  EXPECT_LT(information_loss(a), 1e-7);
}

TEST(AbstractionProperty, EmptyDiagramSetHasZeroError) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 120; ++trial) {
    auto base = std::make_shared<const Scm>(oracle::random_model(rng, 4, 3));
    auto ra = oracle::random_abstraction(rng, base);
    // Replace the high mechanisms with parentless ones: no admissible pair remains.
    std::vector<Mechanism> roots;
    for (const auto& v : ra.high->variables()) {
      roots.push_back({v.name, {}, Matrix::Constant(static_cast<Eigen::Index>(v.outcomes.size()), 1,
                                                    1.0 / static_cast<double>(v.outcomes.size()))});
    }
    ra.high = std::make_shared<const Scm>(ra.high->variables(), roots);
    const auto a = ra.build();
    ASSERT_TRUE(a.valid()) << ValidationError(a.violations()).what();
    EXPECT_TRUE(enumerate_diagrams(a).empty());
    EXPECT_EQ(abstraction_error(a), 0.0);
    EXPECT_TRUE(evaluate(a).per_diagram.empty());
  }
}

TEST(AbstractionProperty, GlobalInverseColumnsAreUniformOverPreimages) {
  std::mt19937_64 rng(203);
  for (int trial = 0; trial < 150; ++trial) {
    auto base = std::make_shared<const Scm>(oracle::random_model(rng, 4, 3));
    const auto a = oracle::random_abstraction(rng, base).build();
    ASSERT_TRUE(a.valid()) << ValidationError(a.violations()).what();
    const Matrix inv = global_inverse(a).matrix();
    const auto tau = a.global_map();
    EXPECT_FALSE(stochastic_violation(inv));
    for (Eigen::Index h = 0; h < inv.cols(); ++h) {
      const auto count = std::count(tau.begin(), tau.end(), static_cast<int>(h));
      ASSERT_GT(count, 0);
      for (Eigen::Index b = 0; b < inv.rows(); ++b) {
        const double want = tau[static_cast<std::size_t>(b)] == h ? 1.0 / static_cast<double>(count) : 0.0;
        EXPECT_DOUBLE_EQ(inv(b, h), want);
      }
    }
    // Same as the normalized pseudoinverse of the global binary matrix.
    const Matrix ref = oracle::pinv_inverse(oracle::from_library(a));
    EXPECT_LT((inv - ref).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(AbstractionProperty, ErrorAndLossMatchOracle) {
  std::mt19937_64 rng(204);
  for (int trial = 0; trial < 120; ++trial) {
    auto base = std::make_shared<const Scm>(oracle::random_model(rng, 4, 3));
    const auto a = oracle::random_abstraction(rng, base).build();
    ASSERT_TRUE(a.valid());
    const auto o = oracle::from_library(a);
    const auto r = evaluate(a, 1.0);
    EXPECT_NEAR(r.e, oracle::abstraction_error(o), oracle::kDistanceTol);
    EXPECT_NEAR(r.i, oracle::information_loss(o), 1e-9);
    EXPECT_GE(r.e, 0.0);
    EXPECT_LE(r.e, std::sqrt(std::log(2.0)) + 1e-12);
    // The precomputing evaluator must agree with the direct path.
    const Evaluator ev(base, true);
    const auto s = ev.score(a, 1.0);
    EXPECT_NEAR(s.e, r.e, 1e-12);
    EXPECT_NEAR(s.i, r.i, 1e-12);
  }
}
