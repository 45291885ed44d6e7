#include "cabs/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>

#include "cabs/model_io.hpp"

#ifndef CABS_DEFAULT_FIXTURE_DIR
#define CABS_DEFAULT_FIXTURE_DIR "data/fixtures"
#endif

namespace causabs {

bool PaperReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

std::filesystem::path default_fixture_dir() { return CABS_DEFAULT_FIXTURE_DIR; }

namespace {

using Values = std::vector<double>;
using Rows = std::vector<Values>;

// Reference mechanisms of the bundled models, row-major.
struct GoldenMechanism {
  const char* target;
  std::vector<std::string> parents;
  Rows matrix;
};

struct GoldenModel {
  const char* file;
  std::vector<GoldenMechanism> mechanisms;
};

const std::vector<GoldenModel>& golden_models() {
  static const std::vector<GoldenModel> models = {
      {"model_M.json",
       {{"E", {}, {{0.8}, {0.2}}},
        {"S", {"E"}, {{0.8, 0.6}, {0.2, 0.4}}},
        {"C", {"E", "S"}, {{0.9, 0.4, 0.8, 0.3}, {0.1, 0.6, 0.2, 0.7}}}}},
      {"model_Mprime.json", {{"S'", {}, {{0.2}, {0.8}}}, {"C'", {"S'"}, {{0.88, 0.38}, {0.12, 0.62}}}}},
      {"model_Mdprime.json", {{"S''", {}, {{0.2}, {0.8}}}, {"C''", {"S''"}, {{0.8, 0.3}, {0.2, 0.7}}}}},
      {"model_Mtprime.json", {{"S'''", {}, {{0.8}, {0.2}}}, {"C'''", {"S'''"}, {{0.88, 0.38}, {0.12, 0.62}}}}},
      {"model_Ms.json", {{"*", {}, {{1.0}}}}},
  };
  return models;
}

struct GoldenAbstraction {
  const char* file;
  std::vector<std::pair<const char*, Rows>> maps;
};

const std::vector<GoldenAbstraction>& golden_abstractions() {
  static const Rows id = {{1, 0}, {0, 1}};
  static const Rows swap = {{0, 1}, {1, 0}};
  static const std::vector<GoldenAbstraction> abs = {
      {"abs_alpha.json", {{"S'", id}, {"C'", id}}},
      {"abs_alpha_Mdprime.json", {{"S''", id}, {"C''", id}}},
      {"abs_alpha_Mtprime.json", {{"S'''", id}, {"C'''", id}}},
      {"abs_beta.json", {{"S'", swap}, {"C'", swap}}},
      {"abs_gamma.json", {{"*", {{1, 1, 1, 1, 1, 1, 1, 1}}}}},
  };
  return abs;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt(const Values& v) {
  if (v.size() == 1) return fmt(v[0]);
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + fmt(v[k]);
  return out + "]";
}

std::string fmt_g(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

std::string fmt_tol(double t) { return t == 0.0 ? "exact" : fmt_g(t); }

Values flatten(const Matrix& m) {
  Values out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Values flatten(const Rows& rows) {
  Values out;
  for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

Values values(const Vector& v) { return {v.data(), v.data() + v.size()}; }

class Builder {
 public:
  explicit Builder(PaperReport& report) : report_(report) {}

  void number(std::string quantity, const Values& expected, const Values& actual, double tol) {
    bool pass = expected.size() == actual.size();
    for (std::size_t k = 0; pass && k < expected.size(); ++k) {
      pass = std::isfinite(actual[k]) && std::abs(expected[k] - actual[k]) <= tol;
    }
    report_.rows.push_back({std::move(quantity), fmt(expected), fmt(actual), fmt_tol(tol), pass});
  }

  void number(std::string quantity, double expected, double actual, double tol) {
    number(std::move(quantity), Values{expected}, Values{actual}, tol);
  }

  void text(std::string quantity, std::string expected, std::string actual) {
    const bool pass = expected == actual;
    report_.rows.push_back({std::move(quantity), std::move(expected), std::move(actual), "exact", pass});
  }

  // Runs one group of checks; an exception becomes a single failing row.
  void group(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      report_.rows.push_back({name, "computable", std::string("error: ") + e.what(), "-", false});
    }
  }

 private:
  PaperReport& report_;
};

constexpr double kExact = 1e-9;
constexpr double kRounded = 5e-3;

}  // namespace

PaperReport paper_report(const std::filesystem::path& dir, double lambda) {
  if (!(lambda >= 0.0)) throw Error("lambda must be non-negative");
  PaperReport report;
  report.lambda = lambda;
  Builder b(report);

  auto model = [&](const char* file) { return std::make_shared<const Scm>(load_model_file(dir / file)); };
  auto abstraction = [&](const char* file) { return load_abstraction_file(dir / file); };

  for (const auto& gm : golden_models()) {
    b.group(std::string(gm.file) + " mechanisms", [&] {
      const auto scm = model(gm.file);
      for (const auto& mech : gm.mechanisms) {
        const auto v = scm->index_of(mech.target);
        const auto& m = scm->mechanism_of(v);
        std::string parents;
        for (const auto& p : m.parents) parents += (parents.empty() ? "" : ",") + p;
        std::string want;
        for (const auto& p : mech.parents) want += (want.empty() ? "" : ",") + p;
        b.text(std::string(gm.file) + " parents of " + mech.target, want.empty() ? "(none)" : want,
               parents.empty() ? "(none)" : parents);
        b.number(std::string(gm.file) + " mechanism " + mech.target, flatten(mech.matrix), flatten(m.matrix), kExact);
      }
    });
  }
  for (const auto& ga : golden_abstractions()) {
    b.group(std::string(ga.file) + " maps", [&] {
      const auto a = abstraction(ga.file);
      for (const auto& [target, rows] : ga.maps) {
        const auto h = a.high().index_of(target);
        b.number(std::string(ga.file) + " map " + target, flatten(rows), flatten(a.map_for(h).matrix()), 0.0);
      }
    });
  }

  b.group("joint distributions", [&] {
    b.number("P_M(E,S,C)", {0.576, 0.064, 0.064, 0.096, 0.096, 0.024, 0.024, 0.056},
             values(joint_distribution(*model("model_M.json")).values()), kExact);
    b.number("P_M'(S',C')", {0.176, 0.024, 0.304, 0.496},
             values(joint_distribution(*model("model_Mprime.json")).values()), kExact);
  });

  b.group("marginals", [&] {
    const std::vector<std::string> s{"S"};
    const std::vector<std::string> sp{"S'"};
    b.number("P_M(S)", {0.76, 0.24}, values(marginal(*model("model_M.json"), s).values()), kExact);
    b.number("P_M'(S')", {0.2, 0.8}, values(marginal(*model("model_Mprime.json"), sp).values()), kExact);
  });

  b.group("conditionals", [&] {
    const std::vector<std::string> s{"S"}, c{"C"}, sp{"S'"}, cp{"C'"};
    b.number("P_M(S|C)", {0.88, 0.37, 0.12, 0.63}, flatten(conditional(*model("model_M.json"), s, c).matrix()),
             kRounded);
    b.number("P_M'(S'|C')", {0.37, 0.05, 0.63, 0.95},
             flatten(conditional(*model("model_Mprime.json"), sp, cp).matrix()), kRounded);
  });

  b.group("virtual mechanisms", [&] {
    const std::vector<std::string> s{"S"}, c{"C"}, sp{"S'"}, cp{"C'"};
    b.number("P_M(C|do(S))", {0.88, 0.38, 0.12, 0.62},
             flatten(virtual_mechanism(*model("model_M.json"), s, c).matrix()), kExact);
    b.number("P_M'(C'|do(S'))", {0.88, 0.38, 0.12, 0.62},
             flatten(virtual_mechanism(*model("model_Mprime.json"), sp, cp).matrix()), kExact);
  });

  b.group("alpha: M -> M'", [&] {
    const auto a = abstraction("abs_alpha.json");
    const Matrix inv = global_inverse(a).matrix();
    Rows want(8, Values(4, 0.0));
    for (std::size_t r = 0; r < 8; ++r) want[r][r % 4] = 0.5;
    b.number("alpha* (global inverse)", flatten(want), flatten(inv), 0.0);
    const Vector recon = inv * joint_distribution(a.high()).values();
    b.number("alpha*(P_M')(E,S,C)", {0.088, 0.012, 0.152, 0.248, 0.088, 0.012, 0.152, 0.248}, values(recon), kExact);
    const std::vector<std::size_t> s{1};
    b.number("alpha*(P_M')(S)", {0.2, 0.8}, values(marginalize(a.base(), recon, s)), kExact);
    b.number("e(alpha: M->M')", 0.0, abstraction_error(a), kExact);
    b.number("i(alpha: M->M')", 0.44, information_loss(a), kRounded);
  });

  b.group("alpha: M -> M''", [&] {
    const auto a = abstraction("abs_alpha_Mdprime.json");
    const std::vector<std::string> x{"S''"}, y{"C''"};
    const auto d = diagram_error(a, x, y);
    b.number("E_alpha(S'',C'')", 0.077, d.value, kRounded);
    std::string worst;
    for (const auto& [k, v] : d.worst_intervention) worst += (worst.empty() ? "" : ",") + k + "=" + v;
    b.text("E_alpha(S'',C'') worst intervention", "S=0", worst);
    b.number("e(alpha: M->M'')", 0.077, abstraction_error(a), kRounded);
  });

  struct Golden {
    const char* name;
    const char* file;
    double e;
    double i;
  };
  const Golden goldens[] = {
      {"alpha: M->M'", "abs_alpha.json", 0.0, 0.44},
      {"beta: M->M'", "abs_beta.json", 0.22, 0.31},
      {"gamma: M->Ms", "abs_gamma.json", 0.0, 0.37},
      {"alpha: M->M'''", "abs_alpha_Mtprime.json", 0.0, 0.24},
  };

  b.group("beta: M -> M'", [&] {
    const auto a = abstraction("abs_beta.json");
    Rows want(8, Values(4, 0.0));
    for (std::size_t r = 0; r < 8; ++r) want[r][3 - r % 4] = 0.5;
    b.number("beta* (global inverse)", flatten(want), flatten(global_inverse(a).matrix()), 0.0);
    b.number("e(beta: M->M')", 0.22, abstraction_error(a), kRounded);
    b.number("i(beta: M->M')", 0.31, information_loss(a), kRounded);
  });

  b.group("gamma: M -> Ms", [&] {
    const auto a = abstraction("abs_gamma.json");
    b.number("gamma* (global inverse)", Values(8, 0.125), flatten(global_inverse(a).matrix()), 0.0);
    b.number("e(gamma: M->Ms)", 0.0, abstraction_error(a), kExact);
    b.number("i(gamma: M->Ms)", 0.37, information_loss(a), kRounded);
  });

  b.group("alpha: M -> M'''", [&] {
    const auto a = abstraction("abs_alpha_Mtprime.json");
    b.number("e(alpha: M->M''')", 0.0, abstraction_error(a), kExact);
    b.number("i(alpha: M->M''')", 0.24, information_loss(a), kRounded);
  });

  for (const auto& g : goldens) {
    b.group(std::string("objective ") + g.name, [&] {
      const auto r = evaluate(abstraction(g.file), lambda);
      b.number(std::string("objective ") + g.name + " (lambda=" + fmt_g(lambda) + ")", g.e + lambda * g.i,
               r.objective, kRounded * std::max(1.0, lambda));
    });
  }
  return report;
}

}  // namespace causabs
