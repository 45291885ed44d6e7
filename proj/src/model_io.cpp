#include "cabs/model_io.hpp"

#include <algorithm>
#include <initializer_list>

namespace causabs {
namespace {

// Schema-checking cursor: every error names the document and the JSON path.
struct Ctx {
  std::string_view source;
  std::string path;

  Ctx at(std::string_view key) const {
    return {source, path.empty() ? std::string(key) : path + "." + std::string(key)};
  }
  Ctx at(std::size_t i) const { return {source, path + "[" + std::to_string(i) + "]"}; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError(std::string(source) + ": " + (path.empty() ? std::string("document") : path) + ": " + msg);
  }
};

void expect_object(const Json& j, const Ctx& c, std::initializer_list<std::string_view> required,
                   std::initializer_list<std::string_view> optional = {}) {
  if (!j.is_object()) c.fail("expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    const bool known = std::find(required.begin(), required.end(), k) != required.end() ||
                       std::find(optional.begin(), optional.end(), k) != optional.end();
    if (!known) c.fail("unknown field '" + k + "'");
  }
  for (auto k : required) {
    if (!j.contains(k)) c.fail("missing field '" + std::string(k) + "'");
  }
}

const Json& array_at(const Json& j, const Ctx& c) {
  if (!j.is_array()) c.fail("expected an array");
  return j;
}

std::string string_at(const Json& j, const Ctx& c) {
  if (!j.is_string()) c.fail("expected a string");
  return j.get<std::string>();
}

std::vector<std::string> strings_at(const Json& j, const Ctx& c) {
  std::vector<std::string> out;
  const auto& a = array_at(j, c);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(string_at(a[i], c.at(i)));
  return out;
}

double number_at(const Json& j, const Ctx& c) {
  if (!j.is_number()) c.fail("expected a number");
  return j.get<double>();
}

Matrix matrix_at(const Json& j, const Ctx& c) {
  const auto& rows = array_at(j, c);
  if (rows.empty()) c.fail("matrix has no rows");
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = array_at(rows[r], c.at(r));
    if (row.empty()) c.at(r).fail("matrix row is empty");
    if (r == 0) cols = row.size();
    if (row.size() != cols) {
      c.at(r).fail("row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
    }
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = number_at(rows[r][k], c.at(r).at(k));
    }
  }
  return m;
}

void check_version(const Json& j, const Ctx& c) {
  const auto v = string_at(j.at("format_version"), c.at("format_version"));
  if (v != kFormatVersion) c.at("format_version").fail("unsupported version '" + v + "'");
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(r, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json strings_json(const std::vector<std::string>& v) {
  Json a = Json::array();
  for (const auto& s : v) a.push_back(s);
  return a;
}

std::string source_of(const std::filesystem::path& p) { return p.string(); }

// A model given as a path (relative to base_dir) or as an inline document.
std::shared_ptr<const Scm> model_ref(const Json& j, const Ctx& c, const std::filesystem::path& base_dir) {
  std::shared_ptr<const Scm> scm;
  if (j.is_string()) {
    scm = std::make_shared<const Scm>(load_model_file(base_dir / j.get<std::string>()));
  } else if (j.is_object()) {
    scm = std::make_shared<const Scm>(model_from_json(j, std::string(c.source) + ": " + c.path));
    scm->require_valid();
  } else {
    c.fail("expected a file path or an inline model document");
  }
  return scm;
}

struct AbstractionParts {
  std::vector<std::string> relevant;
  std::vector<VarMapEntry> varmap;
  std::vector<OutcomeMap> outcome_maps;
};

AbstractionParts abstraction_parts(const Json& j, const Ctx& c) {
  AbstractionParts p;
  p.relevant = strings_at(j.at("relevant"), c.at("relevant"));
  const auto vc = c.at("varmap");
  const auto& vm = array_at(j.at("varmap"), vc);
  for (std::size_t i = 0; i < vm.size(); ++i) {
    const auto ec = vc.at(i);
    expect_object(vm[i], ec, {"from", "to"});
    p.varmap.push_back({string_at(vm[i].at("from"), ec.at("from")), string_at(vm[i].at("to"), ec.at("to"))});
  }
  const auto oc = c.at("outcome_maps");
  const auto& om = array_at(j.at("outcome_maps"), oc);
  for (std::size_t i = 0; i < om.size(); ++i) {
    const auto ec = oc.at(i);
    expect_object(om[i], ec, {"target", "matrix"}, {"comment"});
    p.outcome_maps.push_back({string_at(om[i].at("target"), ec.at("target")), matrix_at(om[i].at("matrix"), ec.at("matrix"))});
  }
  return p;
}

}  // namespace

// --- models ----------------------------------------------------------------

Scm model_from_json(const Json& doc, std::string_view source) {
  const Ctx root{source, ""};
  expect_object(doc, root, {"format_version", "variables", "mechanisms"}, {"comment"});
  check_version(doc, root);

  std::vector<VariableSpec> vars;
  const auto vc = root.at("variables");
  const auto& va = array_at(doc.at("variables"), vc);
  for (std::size_t i = 0; i < va.size(); ++i) {
    const auto c = vc.at(i);
    expect_object(va[i], c, {"name", "outcomes"});
    vars.push_back({string_at(va[i].at("name"), c.at("name")), strings_at(va[i].at("outcomes"), c.at("outcomes"))});
  }

  std::vector<Mechanism> mechs;
  const auto mc = root.at("mechanisms");
  const auto& ma = array_at(doc.at("mechanisms"), mc);
  for (std::size_t i = 0; i < ma.size(); ++i) {
    const auto c = mc.at(i);
    expect_object(ma[i], c, {"target", "parents", "matrix"}, {"comment"});
    mechs.push_back({string_at(ma[i].at("target"), c.at("target")), strings_at(ma[i].at("parents"), c.at("parents")),
                     matrix_at(ma[i].at("matrix"), c.at("matrix"))});
  }
  return Scm(std::move(vars), std::move(mechs));
}

Scm parse_model(std::string_view text, std::string_view source) { return model_from_json(parse_json(text, source), source); }

Scm load_model(std::string_view text, std::string_view source) {
  Scm scm = parse_model(text, source);
  scm.require_valid();
  return scm;
}

Scm load_model_file(const std::filesystem::path& path) { return load_model(read_text_file(path), source_of(path)); }

Json model_to_json(const Scm& scm) {
  Json doc = Json::object();
  doc["format_version"] = kFormatVersion;
  Json vars = Json::array();
  for (const auto& v : scm.variables()) {
    Json j = Json::object();
    j["name"] = v.name;
    j["outcomes"] = strings_json(v.outcomes);
    vars.push_back(std::move(j));
  }
  doc["variables"] = std::move(vars);
  Json mechs = Json::array();
  for (const auto& m : scm.mechanisms()) {
    Json j = Json::object();
    j["target"] = m.target;
    j["parents"] = strings_json(m.parents);
    j["matrix"] = matrix_json(m.matrix);
    mechs.push_back(std::move(j));
  }
  doc["mechanisms"] = std::move(mechs);
  return doc;
}

std::string dump_model(const Scm& scm) { return write_canonical(model_to_json(scm)); }

// --- abstractions ----------------------------------------------------------

Abstraction abstraction_from_json(const Json& doc, std::shared_ptr<const Scm> base, std::shared_ptr<const Scm> high,
                             std::string_view source) {
  const Ctx root{source, ""};
  expect_object(doc, root, {"format_version", "relevant", "varmap", "outcome_maps"},
                {"comment", "base_ref", "high_ref"});
  check_version(doc, root);
  auto p = abstraction_parts(doc, root);
  Abstraction a(std::move(base), std::move(high), std::move(p.relevant), std::move(p.varmap),
                std::move(p.outcome_maps));
  a.require_valid();
  return a;
}

Abstraction load_abstraction(std::string_view text, std::shared_ptr<const Scm> base, std::shared_ptr<const Scm> high,
                             std::string_view source) {
  return abstraction_from_json(parse_json(text, source), std::move(base), std::move(high), source);
}

Abstraction load_abstraction_file(const std::filesystem::path& path) {
  const auto source = source_of(path);
  const Json doc = parse_json(read_text_file(path), source);
  const Ctx root{source, ""};
  if (!doc.is_object()) root.fail("expected an object");
  if (!doc.contains("base_ref")) root.fail("missing field 'base_ref'");
  if (!doc.contains("high_ref")) root.fail("missing field 'high_ref'");
  const auto dir = path.parent_path();
  auto base = model_ref(doc.at("base_ref"), root.at("base_ref"), dir);
  auto high = model_ref(doc.at("high_ref"), root.at("high_ref"), dir);
  return abstraction_from_json(doc, std::move(base), std::move(high), source);
}

Json abstraction_to_json(const Abstraction& a) {
  Json doc = Json::object();
  doc["format_version"] = kFormatVersion;
  doc["relevant"] = strings_json(a.relevant());
  Json vm = Json::array();
  for (const auto& e : a.varmap()) {
    Json j = Json::object();
    j["from"] = e.from;
    j["to"] = e.to;
    vm.push_back(std::move(j));
  }
  doc["varmap"] = std::move(vm);
  Json om = Json::array();
  for (const auto& m : a.outcome_maps()) {
    Json j = Json::object();
    j["target"] = m.target;
    j["matrix"] = matrix_json(m.matrix);
    om.push_back(std::move(j));
  }
  doc["outcome_maps"] = std::move(om);
  return doc;
}

std::string dump_abstraction(const Abstraction& a) { return write_canonical(abstraction_to_json(a)); }

// --- learning problems -------------------------------------------------------

LearningProblem load_problem(std::string_view text, const std::filesystem::path& base_dir, std::string_view source) {
  const Json doc = parse_json(text, source);
  const Ctx root{source, ""};
  expect_object(doc, root, {"format_version", "problem_class", "givens"},
                {"comment", "caps", "lambda", "budget", "top_k"});
  check_version(doc, root);

  LearningProblem p;
  const auto pc = root.at("problem_class");
  const auto cls = string_at(doc.at("problem_class"), pc);
  try {
    p.problem_class = parse_problem_class(cls);
  } catch (const Error&) {
    pc.fail("unknown problem class '" + cls + "'");
  }

  const auto gc = root.at("givens");
  const Json& g = doc.at("givens");
  using PC = ProblemClass;
  switch (p.problem_class) {
    case PC::assessment:
    case PC::completion:
      expect_object(g, gc, {"base", "high", "abstraction"});
      break;
    case PC::abstraction_design:
      expect_object(g, gc, {"base", "high"});
      break;
    case PC::mechanism_design:
      expect_object(g, gc, {"base", "high_variables"});
      break;
    case PC::granularity_design:
      expect_object(g, gc, {"base", "high_variable_names"});
      break;
    case PC::model_design:
      expect_object(g, gc, {"base"});
      break;
  }

  p.base = model_ref(g.at("base"), gc.at("base"), base_dir);
  if (g.contains("high")) p.high = model_ref(g.at("high"), gc.at("high"), base_dir);
  if (g.contains("abstraction")) {
    const auto ac = gc.at("abstraction");
    const Json& aj = g.at("abstraction");
    AbstractionParts parts;
    if (aj.is_string()) {
      const auto path = base_dir / aj.get<std::string>();
      const auto asrc = source_of(path);
      const Json adoc = parse_json(read_text_file(path), asrc);
      const Ctx aroot{asrc, ""};
      expect_object(adoc, aroot, {"format_version", "relevant", "varmap", "outcome_maps"},
                    {"comment", "base_ref", "high_ref"});
      check_version(adoc, aroot);
      parts = abstraction_parts(adoc, aroot);
    } else {
      // A completion problem may leave outcome maps out.
      expect_object(aj, ac, {"relevant", "varmap"}, {"outcome_maps", "comment"});
      Json filled = aj;
      if (!filled.contains("outcome_maps")) filled["outcome_maps"] = Json::array();
      parts = abstraction_parts(filled, ac);
    }
    for (const auto& r : parts.relevant) {
      if (!p.base->find(r)) ac.fail("relevant variable '" + r + "' is not a base variable");
    }
    for (const auto& e : parts.varmap) {
      if (!p.base->find(e.from)) ac.fail("variable map source '" + e.from + "' is not a base variable");
      if (!p.high->find(e.to)) ac.fail("variable map target '" + e.to + "' is not a high-level variable");
    }
    for (const auto& m : parts.outcome_maps) {
      if (!p.high->find(m.target)) ac.fail("outcome map target '" + m.target + "' is not a high-level variable");
    }
    p.abstraction = PartialAbstraction{std::move(parts.relevant), std::move(parts.varmap), std::move(parts.outcome_maps)};
  }
  if (g.contains("high_variables")) {
    const auto hc = gc.at("high_variables");
    const auto& ha = array_at(g.at("high_variables"), hc);
    for (std::size_t i = 0; i < ha.size(); ++i) {
      const auto c = hc.at(i);
      expect_object(ha[i], c, {"name", "outcomes"});
      p.high_variables.push_back({string_at(ha[i].at("name"), c.at("name")), strings_at(ha[i].at("outcomes"), c.at("outcomes"))});
    }
  }
  if (g.contains("high_variable_names")) {
    p.high_variable_names = strings_at(g.at("high_variable_names"), gc.at("high_variable_names"));
  }

  if (doc.contains("caps")) {
    const auto cc = root.at("caps");
    if (p.problem_class != PC::granularity_design && p.problem_class != PC::model_design) {
      cc.fail("caps apply only to granularity_design and model_design");
    }
    const Json& cj = doc.at("caps");
    expect_object(cj, cc, {}, {"max_high_variables", "max_cardinality"});
    auto positive_int = [](const Json& j, const Ctx& c) {
      if (!j.is_number_integer() || j.get<long long>() < 1 || j.get<long long>() > 64) {
        c.fail("expected a positive integer");
      }
      return static_cast<int>(j.get<long long>());
    };
    if (cj.contains("max_high_variables")) {
      p.caps.max_high_variables = positive_int(cj.at("max_high_variables"), cc.at("max_high_variables"));
    }
    if (cj.contains("max_cardinality")) {
      p.caps.max_cardinality = positive_int(cj.at("max_cardinality"), cc.at("max_cardinality"));
    }
  }
  if (doc.contains("lambda")) {
    p.lambda = number_at(doc.at("lambda"), root.at("lambda"));
    if (!(p.lambda >= 0.0)) root.at("lambda").fail("must be non-negative");
  }
  auto count_at = [](const Json& j, const Ctx& c, bool allow_zero) {
    if (!j.is_number_integer() || j.get<long long>() < (allow_zero ? 0 : 1)) {
      c.fail(allow_zero ? "expected a non-negative integer" : "expected a positive integer");
    }
    return static_cast<std::size_t>(j.get<long long>());
  };
  if (doc.contains("budget")) p.budget = count_at(doc.at("budget"), root.at("budget"), false);
  if (doc.contains("top_k")) p.top_k = count_at(doc.at("top_k"), root.at("top_k"), true);
  return p;
}

LearningProblem load_problem_file(const std::filesystem::path& path) {
  return load_problem(read_text_file(path), path.parent_path(), source_of(path));
}

// --- output documents -------------------------------------------------------

Json distribution_to_json(const Scm& scm, std::span<const std::size_t> vars, const Vector& p) {
  Json doc = Json::object();
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "distribution";
  Json names = Json::array();
  for (auto v : vars) names.push_back(scm.name(v));
  doc["variables"] = std::move(names);
  const auto space = scm.index_space(vars);
  Json entries = Json::array();
  std::vector<int> digits(vars.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    space.decode(k, digits);
    Json e = Json::object();
    Json labels = Json::array();
    for (std::size_t d = 0; d < vars.size(); ++d) {
      labels.push_back(scm.variables()[vars[d]].outcomes[static_cast<std::size_t>(digits[d])]);
    }
    e["outcome"] = std::move(labels);
    e["p"] = p[static_cast<Eigen::Index>(k)];
    entries.push_back(std::move(e));
  }
  doc["entries"] = std::move(entries);
  return doc;
}

Json matrix_to_json(const Scm& scm, std::span<const std::size_t> row_vars, std::span<const std::size_t> col_vars,
                    const Matrix& m) {
  Json doc = Json::object();
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "matrix";
  Json rows = Json::array();
  for (auto v : row_vars) rows.push_back(scm.name(v));
  Json cols = Json::array();
  for (auto v : col_vars) cols.push_back(scm.name(v));
  doc["row_variables"] = std::move(rows);
  doc["column_variables"] = std::move(cols);
  doc["matrix"] = matrix_json(m);
  return doc;
}

Json report_to_json(const EvaluationReport& r) {
  Json doc = Json::object();
  doc["e"] = r.e;
  doc["i"] = r.i;
  doc["lambda"] = r.lambda;
  doc["objective"] = r.objective;
  Json diagrams = Json::array();
  for (const auto& d : r.per_diagram) {
    Json j = Json::object();
    j["sources"] = strings_json(d.sources);
    j["targets"] = strings_json(d.targets);
    j["value"] = d.value;
    Json w = Json::object();
    for (const auto& [k, v] : d.worst_intervention) w[k] = v;
    j["worst_intervention"] = std::move(w);
    diagrams.push_back(std::move(j));
  }
  doc["per_diagram"] = std::move(diagrams);
  return doc;
}

Json candidate_to_json(const Candidate& c, std::size_t rank) {
  Json doc = Json::object();
  doc["rank"] = rank;
  doc["objective"] = c.report.objective;
  doc["e"] = c.report.e;
  doc["i"] = c.report.i;
  doc["label"] = c.label;
  Json enc = Json::array();
  for (int v : c.encoding) enc.push_back(v);
  doc["encoding"] = std::move(enc);
  doc["report"] = report_to_json(c.report);
  doc["high"] = model_to_json(*c.high);
  doc["abstraction"] = abstraction_to_json(c.abstraction);
  return doc;
}

Json result_to_json(const SolverResult& r) {
  Json doc = Json::object();
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "solver_result";
  doc["problem_class"] = std::string(to_string(r.problem_class));
  doc["lambda"] = r.lambda;
  doc["candidates_evaluated"] = r.candidates_evaluated;
  doc["exhaustive"] = r.exhaustive;
  Json ranked = Json::array();
  for (std::size_t k = 0; k < r.ranked.size(); ++k) ranked.push_back(candidate_to_json(r.ranked[k], k + 1));
  doc["ranked"] = std::move(ranked);
  Json pareto = Json::array();
  for (std::size_t k = 0; k < r.pareto.size(); ++k) pareto.push_back(candidate_to_json(r.pareto[k], k + 1));
  doc["pareto"] = std::move(pareto);
  return doc;
}

}  // namespace causabs
