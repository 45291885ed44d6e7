#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "cabs/learn.hpp"
#include "cabs/model_io.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace causabs;

namespace {

const char* kModelFiles[] = {"model_M.json", "model_Mprime.json", "model_Mdprime.json", "model_Mtprime.json",
                             "model_Ms.json"};
const char* kAbstractionFiles[] = {"abs_alpha.json", "abs_alpha_Mdprime.json", "abs_alpha_Mtprime.json",
                                   "abs_beta.json", "abs_gamma.json"};

void strip_comments(Json& j) {
  if (j.is_object()) {
    j.erase("comment");
    for (auto& [k, v] : j.items()) strip_comments(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_comments(v);
  }
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

const char* kSmall = R"({
  "format_version": "1.0",
  "variables": [{"name": "A", "outcomes": ["yes", "no"]}],
  "mechanisms": [{"target": "A", "parents": [], "matrix": [[0.25], [0.75]]}]
})";

}  // namespace

TEST(ModelIo, LoadsExampleModel) {
  const auto m = fixtures::M();
  ASSERT_EQ(m->size(), 3u);
  EXPECT_EQ(m->name(0), "E");
  EXPECT_EQ(m->mechanism_of(2).parents, (std::vector<std::string>{"E", "S"}));
  EXPECT_DOUBLE_EQ(m->mechanism_of(2).matrix(0, 1), 0.4);
  const auto s = fixtures::model("model_Ms.json");
  EXPECT_EQ(s->variables()[0].outcomes, std::vector<std::string>{"*"});
}

TEST(ModelIo, FixturesAreCanonical) {
  for (const char* f : kModelFiles) {
    const auto path = fixtures::dir() / f;
    Json doc = parse_json(read_text_file(path));
    strip_comments(doc);
    EXPECT_EQ(dump_model(load_model_file(path)), write_canonical(doc)) << f;
  }
  for (const char* f : kAbstractionFiles) {
    Json doc = parse_json(read_text_file(fixtures::dir() / f));
    strip_comments(doc);
    doc.erase("base_ref");
    doc.erase("high_ref");
    EXPECT_EQ(dump_abstraction(fixtures::abstraction(f)), write_canonical(doc)) << f;
  }
}

TEST(ModelIo, FixturesRoundTrip) {
  for (const char* f : kModelFiles) {
    const Scm m = load_model_file(fixtures::dir() / f);
    EXPECT_EQ(load_model(dump_model(m)), m) << f;
  }
  for (const char* f : kAbstractionFiles) {
    const auto a = fixtures::abstraction(f);
    const auto b = load_abstraction(dump_abstraction(a), a.base_ptr(), a.high_ptr());
    EXPECT_EQ(b.relevant(), a.relevant());
    EXPECT_EQ(b.varmap(), a.varmap());
    EXPECT_EQ(b.outcome_maps(), a.outcome_maps());
  }
}

TEST(ModelIoProperty, RandomModelsRoundTripExactly) {
  std::mt19937_64 rng(301);
  for (int trial = 0; trial < 200; ++trial) {
    const Scm m = oracle::random_model(rng, 4, 3);
    const std::string text = dump_model(m);
    const Scm back = load_model(text);
    ASSERT_EQ(back, m);
    EXPECT_EQ(dump_model(back), text);
  }
}

TEST(ModelIoProperty, RandomAbstractionsRoundTripExactly) {
  std::mt19937_64 rng(302);
  for (int trial = 0; trial < 150; ++trial) {
    auto base = std::make_shared<const Scm>(oracle::random_model(rng, 4, 3));
    const auto a = oracle::random_abstraction(rng, base).build();
    const auto b = load_abstraction(dump_abstraction(a), a.base_ptr(), a.high_ptr());
    EXPECT_EQ(b.relevant(), a.relevant());
    EXPECT_EQ(b.varmap(), a.varmap());
    EXPECT_EQ(b.outcome_maps(), a.outcome_maps());
    EXPECT_EQ(load_model(dump_model(a.high())), a.high());
  }
}

TEST(ModelIo, NumberFormatting) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.88), "0.88");
  EXPECT_EQ(format_number(0.0), "0");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_number(third)), third);
  EXPECT_THROW(format_number(std::nan("")), Error);
}

TEST(ModelIo, LabelsPreservedVerbatim) {
  const Scm m = load_model(kSmall);
  EXPECT_EQ(m.variables()[0].outcomes, (std::vector<std::string>{"yes", "no"}));
  EXPECT_NE(dump_model(m).find(R"(["yes", "no"])"), std::string::npos);
  EXPECT_NE(dump_model(*fixtures::M()).find(R"("outcomes": ["0", "1"])"), std::string::npos);
}

TEST(ModelIo, DumpOfIntervenedModel) {
  const std::string text = dump_model(intervene(*fixtures::M(), {{"S", "0"}}));
  EXPECT_NE(text.find(R"({"target": "S", "parents": [], "matrix": [[1], [0]]})"), std::string::npos);
}

TEST(ModelIo, StochasticityErrorNamesMechanismAndColumn) {
  Json doc = parse_json(read_text_file(fixtures::dir() / "model_M.json"));
  doc["mechanisms"][2]["matrix"] = Json::parse("[[0.9, 0.8, 0.4, 0.3], [0.2, 0.4, 0.6, 0.7]]");
  try {
    (void)load_model(write_canonical(doc));
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    ASSERT_EQ(e.violations().size(), 1u);
    EXPECT_EQ(e.violations()[0].to_string(), "mechanism C: column 1 sums to 1.1 (expected 1)");
  }
  // Near-stochastic columns are rejected, not renormalized.
  doc["mechanisms"][2]["matrix"] = Json::parse("[[0.9, 0.4, 0.8, 0.3], [0.1000001, 0.6, 0.2, 0.7]]");
  EXPECT_THROW(load_model(write_canonical(doc)), ValidationError);
}

TEST(ModelIo, SchemaErrorsNameThePath) {
  Json doc = parse_json(kSmall);
  doc["mechanisms"][0]["weights"] = 1;
  EXPECT_EQ(error_of([&] { load_model(doc.dump(), "m.json"); }),
            "m.json: mechanisms[0]: unknown field 'weights'");

  doc = parse_json(kSmall);
  doc.erase("format_version");
  EXPECT_EQ(error_of([&] { load_model(doc.dump(), "m.json"); }), "m.json: document: missing field 'format_version'");

  doc = parse_json(kSmall);
  doc["format_version"] = "2.0";
  EXPECT_EQ(error_of([&] { load_model(doc.dump(), "m.json"); }), "m.json: format_version: unsupported version '2.0'");

  doc = parse_json(kSmall);
  doc["mechanisms"][0]["matrix"] = Json::parse("[[0.25, 0.5], [0.75]]");
  EXPECT_EQ(error_of([&] { load_model(doc.dump(), "m.json"); }),
            "m.json: mechanisms[0].matrix[1]: row has 1 entries, expected 2");

  doc = parse_json(kSmall);
  doc["mechanisms"][0]["matrix"] = Json::parse(R"([["a"], [1]])");
  EXPECT_EQ(error_of([&] { load_model(doc.dump(), "m.json"); }),
            "m.json: mechanisms[0].matrix[0][0]: expected a number");

  doc = parse_json(kSmall);
  doc["variables"][0]["outcomes"] = "yes";
  EXPECT_EQ(error_of([&] { load_model(doc.dump(), "m.json"); }), "m.json: variables[0].outcomes: expected an array");

  EXPECT_THROW(load_model("[1, 2]"), InputError);
}

TEST(ModelIo, ParseErrorHasLineAndColumn) {
  const std::string bad = "{\n  \"format_version\": \"1.0\",\n  \"variables\": [,]\n}";
  const auto msg = error_of([&] { load_model(bad, "bad.json"); });
  EXPECT_EQ(msg.rfind("bad.json:3:17: parse error", 0), 0u) << msg;
  EXPECT_THROW(load_model(bad), InputError);
}

TEST(ModelIo, MissingFile) {
  EXPECT_THROW(load_model_file("/nonexistent/model.json"), InputError);
  EXPECT_THROW(load_abstraction_file("/nonexistent/abs.json"), InputError);
}

TEST(ModelIo, AbstractionCrossChecks) {
  const auto base = fixtures::M();
  const auto high = fixtures::Mprime();
  const std::string text = R"({"format_version": "1.0", "relevant": ["S", "C"],
    "varmap": [{"from": "S", "to": "S'"}, {"from": "C", "to": "Q"}],
    "outcome_maps": [{"target": "S'", "matrix": [[1, 0], [0, 1]]}, {"target": "C'", "matrix": [[1, 0], [0, 1]]}]})";
  try {
    (void)load_abstraction(text, base, high);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.violations()[0].to_string(), "variable map: 'Q' is not a high-level variable");
  }
  Json doc = parse_json(text);
  doc["varmap"][1]["to"] = "C'";
  doc["outcome_maps"][1]["matrix"] = Json::parse("[[0.5, 0.5], [0.5, 0.5]]");
  EXPECT_THROW(load_abstraction(doc.dump(), base, high), ValidationError);
  doc["outcome_maps"][1]["matrix"] = Json::parse("[[1, 0], [0, 1]]");
  EXPECT_NO_THROW(load_abstraction(doc.dump(), base, high));
}

TEST(ModelIo, AbstractionWithInlineModels) {
  Json doc = parse_json(read_text_file(fixtures::dir() / "abs_beta.json"));
  doc["base_ref"] = parse_json(read_text_file(fixtures::dir() / "model_M.json"));
  doc["high_ref"] = parse_json(read_text_file(fixtures::dir() / "model_Mprime.json"));
  const auto tmp = std::filesystem::temp_directory_path() / "cabs_inline_abs.json";
  std::ofstream(tmp) << doc.dump(2);
  const auto a = load_abstraction_file(tmp);
  std::filesystem::remove(tmp);
  EXPECT_NEAR(information_loss(a), 0.31430370573308963, 1e-9);
}

TEST(ProblemIo, EveryBundledProblemLoads) {
  const std::pair<const char*, ProblemClass> files[] = {
      {"assessment.json", ProblemClass::assessment},
      {"completion.json", ProblemClass::completion},
      {"abstraction_design.json", ProblemClass::abstraction_design},
      {"mechanism_design.json", ProblemClass::mechanism_design},
      {"granularity_design.json", ProblemClass::granularity_design},
      {"model_design.json", ProblemClass::model_design},
  };
  for (const auto& [f, cls] : files) {
    const auto p = load_problem_file(fixtures::problems() / f);
    EXPECT_EQ(p.problem_class, cls) << f;
    ASSERT_TRUE(p.base);
    EXPECT_EQ(*p.base, *fixtures::M());
    EXPECT_NO_THROW(solve(p)) << f;
  }
  const auto c = load_problem_file(fixtures::problems() / "completion.json");
  EXPECT_EQ(c.lambda, 0.0);
  EXPECT_EQ(c.top_k, 0u);
  ASSERT_TRUE(c.abstraction);
  EXPECT_TRUE(c.abstraction->outcome_maps.empty());
  const auto a = load_problem_file(fixtures::problems() / "assessment.json");
  EXPECT_EQ(a.abstraction->outcome_maps.size(), 2u);
  const auto m = load_problem_file(fixtures::problems() / "model_design.json");
  EXPECT_EQ(m.caps.max_high_variables, 2);
}

TEST(ProblemIo, GivensAreCheckedPerClass) {
  const auto dir = fixtures::problems();
  auto load = [&](const std::string& text) { return error_of([&] { load_problem(text, dir, "p.json"); }); };
  EXPECT_EQ(load(R"({"format_version": "1.0", "problem_class": "model_design",
                     "givens": {"base": "../fixtures/model_M.json", "high": "../fixtures/model_Mprime.json"}})"),
            "p.json: givens: unknown field 'high'");
  EXPECT_EQ(load(R"({"format_version": "1.0", "problem_class": "abstraction_design",
                     "givens": {"base": "../fixtures/model_M.json"}})"),
            "p.json: givens: missing field 'high'");
  EXPECT_EQ(load(R"({"format_version": "1.0", "problem_class": "abstraction_design",
                     "givens": {"base": "../fixtures/model_M.json", "high": "../fixtures/model_Mprime.json"},
                     "caps": {"max_cardinality": 3}})"),
            "p.json: caps: caps apply only to granularity_design and model_design");
  EXPECT_EQ(load(R"({"format_version": "1.0", "problem_class": "learning", "givens": {}})"),
            "p.json: problem_class: unknown problem class 'learning'");
  EXPECT_EQ(load(R"({"format_version": "1.0", "problem_class": "model_design",
                     "givens": {"base": "../fixtures/model_M.json"}, "lambda": -1})"),
            "p.json: lambda: must be non-negative");
  EXPECT_EQ(load(R"({"format_version": "1.0", "problem_class": "model_design",
                     "givens": {"base": "../fixtures/model_M.json"}, "top_k": 1.5})"),
            "p.json: top_k: expected a non-negative integer");
  EXPECT_EQ(load(R"({"format_version": "1.0", "problem_class": "completion",
                     "givens": {"base": "../fixtures/model_M.json", "high": "../fixtures/model_Mprime.json",
                                "abstraction": {"relevant": ["S", "C"], "varmap": [{"from": "S", "to": "X"}]}}})"),
            "p.json: givens.abstraction: variable map target 'X' is not a high-level variable");
  EXPECT_NE(load(R"({"format_version": "1.0", "problem_class": "model_design",
                     "givens": {"base": "missing.json"}})").find("cannot open"),
            std::string::npos);
}

TEST(ResultIo, CandidateDocumentsReload) {
  LearningProblem p = load_problem_file(fixtures::problems() / "model_design.json");
  p.top_k = 5;
  const auto r = solve(p);
  const Json doc = result_to_json(r);
  EXPECT_EQ(doc["kind"], "solver_result");
  ASSERT_EQ(doc["ranked"].size(), 5u);
  for (std::size_t k = 0; k < r.ranked.size(); ++k) {
    const Json reparsed = parse_json(write_canonical(doc["ranked"][k]));
    const auto high = std::make_shared<const Scm>(model_from_json(reparsed["high"]));
    EXPECT_EQ(*high, *r.ranked[k].high);
    const auto a = abstraction_from_json(reparsed["abstraction"], p.base, high);
    EXPECT_EQ(a.outcome_maps(), r.ranked[k].abstraction.outcome_maps());
    EXPECT_EQ(reparsed["objective"].get<double>(), r.ranked[k].report.objective);
    EXPECT_EQ(reparsed["rank"], k + 1);
  }
}
