#include "cabs/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <sstream>

#include "CLI11.hpp"

#include "cabs/learn.hpp"
#include "cabs/model_io.hpp"
#include "cabs/report.hpp"

namespace causabs::cli {
namespace {

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  int precision = 6;
  std::string output = "text";
  std::vector<std::string> interventions;

  bool machine() const { return output != "text"; }
};

void add_format(CLI::App* cmd, Common& c) {
  cmd->add_option("--precision", c.precision, "Decimals in text output")->check(CLI::Range(0, 17));
  cmd->add_option("--output", c.output, "text or machine-readable")
      ->check(CLI::IsMember({"text", "machine-readable", "json"}));
}

void add_do(CLI::App* cmd, Common& c) {
  cmd->add_option("--do", c.interventions, "Intervention VAR=OUTCOME (repeatable)");
}

Intervention parse_do(const std::vector<std::string>& items) {
  Intervention out;
  for (const auto& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
      throw Usage("--do expects VAR=OUTCOME, got '" + s + "'");
    }
    const auto var = s.substr(0, eq);
    if (out.count(var)) throw Usage("--do assigns '" + var + "' twice");
    out[var] = s.substr(eq + 1);
  }
  return out;
}

std::string fixed(double v, int precision) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

// Left-aligned table with two-space gutters.
void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line += r[c];
      if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
    }
    out << line << "\n";
  }
}

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

std::string config_label(const Scm& scm, std::span<const std::size_t> vars, std::size_t index) {
  if (vars.empty()) return "*";
  const auto digits = scm.index_space(vars).decode(index);
  std::string out;
  for (std::size_t d = 0; d < vars.size(); ++d) {
    if (d) out += ",";
    out += scm.name(vars[d]) + "=" + scm.variables()[vars[d]].outcomes[static_cast<std::size_t>(digits[d])];
  }
  return out;
}

void print_distribution(std::ostream& out, const Scm& scm, std::span<const std::size_t> vars, const Vector& p,
                        const Common& c) {
  if (c.machine()) {
    out << write_canonical(distribution_to_json(scm, vars, p));
    return;
  }
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  for (auto v : vars) header.push_back(scm.name(v));
  header.push_back("P");
  rows.push_back(header);
  const auto space = scm.index_space(vars);
  for (std::size_t k = 0; k < space.size(); ++k) {
    const auto digits = space.decode(k);
    std::vector<std::string> row;
    for (std::size_t d = 0; d < vars.size(); ++d) {
      row.push_back(scm.variables()[vars[d]].outcomes[static_cast<std::size_t>(digits[d])]);
    }
    row.push_back(fixed(p[static_cast<Eigen::Index>(k)], c.precision));
    rows.push_back(std::move(row));
  }
  print_table(out, rows);
}

void print_matrix(std::ostream& out, const std::string& title, const Scm& scm, std::span<const std::size_t> row_vars,
                  std::span<const std::size_t> col_vars, const Matrix& m, const Common& c) {
  if (c.machine()) {
    out << write_canonical(matrix_to_json(scm, row_vars, col_vars, m));
    return;
  }
  out << title << "\n";
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{""};
  for (Eigen::Index k = 0; k < m.cols(); ++k) header.push_back(config_label(scm, col_vars, static_cast<std::size_t>(k)));
  rows.push_back(header);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<std::string> row{config_label(scm, row_vars, static_cast<std::size_t>(r))};
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(fixed(m(r, k), c.precision));
    rows.push_back(std::move(row));
  }
  print_table(out, rows);
}

std::vector<std::size_t> indices(const Scm& scm, const std::vector<std::string>& names) {
  return scm.indices_of(names);
}

// Loads a model and applies any --do assignments.
Scm prepared(const std::string& path, const Common& c) {
  Scm scm = load_model_file(path);
  const auto iv = parse_do(c.interventions);
  if (iv.empty()) return scm;
  return intervene(scm, iv);
}

std::string intervention_label(const Intervention& iv) {
  std::string out;
  for (const auto& [k, v] : iv) out += (out.empty() ? "" : ",") + k + "=" + v;
  return out.empty() ? "-" : out;
}

void print_report(std::ostream& out, const EvaluationReport& r, const Common& c) {
  if (c.machine()) {
    Json doc = Json::object();
    doc["format_version"] = kFormatVersion;
    doc["kind"] = "evaluation_report";
    for (auto it = report_to_json(r); auto& [k, v] : it.items()) doc[k] = v;
    out << write_canonical(doc);
    return;
  }
  print_table(out, {{"e", fixed(r.e, c.precision)},
                    {"i", fixed(r.i, c.precision)},
                    {"lambda", fixed(r.lambda, c.precision)},
                    {"objective", fixed(r.objective, c.precision)}});
  out << "\n";
  std::vector<std::vector<std::string>> rows{{"sources", "targets", "error", "worst intervention"}};
  for (const auto& d : r.per_diagram) {
    rows.push_back({"{" + join(d.sources) + "}", "{" + join(d.targets) + "}", fixed(d.value, c.precision),
                    intervention_label(d.worst_intervention)});
  }
  print_table(out, rows);
}

void print_result(std::ostream& out, const SolverResult& r, const Common& c) {
  if (c.machine()) {
    out << write_canonical(result_to_json(r));
    return;
  }
  print_table(out, {{"problem_class", std::string(to_string(r.problem_class))},
                    {"lambda", fixed(r.lambda, c.precision)},
                    {"candidates_evaluated", std::to_string(r.candidates_evaluated)},
                    {"exhaustive", r.exhaustive ? "yes" : "no"}});
  auto table = [&](const std::vector<Candidate>& cs) {
    std::vector<std::vector<std::string>> rows{{"rank", "objective", "e", "i", "candidate"}};
    for (std::size_t k = 0; k < cs.size(); ++k) {
      rows.push_back({std::to_string(k + 1), fixed(cs[k].report.objective, c.precision),
                      fixed(cs[k].report.e, c.precision), fixed(cs[k].report.i, c.precision), cs[k].label});
    }
    print_table(out, rows);
  };
  out << "\nranked\n";
  table(r.ranked);
  out << "\npareto\n";
  table(r.pareto);
}

int threads_from_env() {
  const char* env = std::getenv("CABS_NUM_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0 || v > 4096) throw Usage("CABS_NUM_THREADS must be a non-negative integer");
  return static_cast<int>(v);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal abstraction toolkit: models, abstractions, error and information loss, learning"};
  app.name("cabs");
  app.require_subcommand(1);

  Common common;
  std::string model_path;
  std::function<int()> action;

  auto* validate_cmd = app.add_subcommand("validate", "Check a model document");
  validate_cmd->add_option("model", model_path)->required();
  add_format(validate_cmd, common);
  validate_cmd->callback([&] {
    action = [&] {
      const Scm scm = parse_model(read_text_file(model_path), model_path);
      if (common.machine()) {
        Json doc = Json::object();
        doc["format_version"] = kFormatVersion;
        doc["kind"] = "validation";
        doc["valid"] = scm.valid();
        Json vs = Json::array();
        for (const auto& v : scm.violations()) vs.push_back(Json{{"entity", v.entity}, {"message", v.message}});
        doc["violations"] = std::move(vs);
        out << write_canonical(doc);
      } else if (scm.valid()) {
        out << "valid\n";
      } else {
        for (const auto& v : scm.violations()) out << v.to_string() << "\n";
      }
      return scm.valid() ? 0 : 1;
    };
  });

  auto* joint_cmd = app.add_subcommand("joint", "Print the joint distribution");
  joint_cmd->add_option("model", model_path)->required();
  add_do(joint_cmd, common);
  add_format(joint_cmd, common);
  joint_cmd->callback([&] {
    action = [&] {
      const Scm scm = prepared(model_path, common);
      std::vector<std::size_t> all(scm.size());
      for (std::size_t v = 0; v < all.size(); ++v) all[v] = v;
      print_distribution(out, scm, all, joint_distribution(scm).values(), common);
      return 0;
    };
  });

  std::vector<std::string> vars;
  auto* marginal_cmd = app.add_subcommand("marginal", "Print a marginal distribution");
  marginal_cmd->add_option("model", model_path)->required();
  marginal_cmd->add_option("--vars", vars)->required()->delimiter(',');
  add_do(marginal_cmd, common);
  add_format(marginal_cmd, common);
  marginal_cmd->callback([&] {
    action = [&] {
      const Scm scm = prepared(model_path, common);
      print_distribution(out, scm, indices(scm, vars), marginal(scm, vars).values(), common);
      return 0;
    };
  });

  std::vector<std::string> targets, given;
  auto* conditional_cmd = app.add_subcommand("conditional", "Print P(targets | given)");
  conditional_cmd->add_option("model", model_path)->required();
  conditional_cmd->add_option("--targets", targets)->required()->delimiter(',');
  conditional_cmd->add_option("--given", given)->required()->delimiter(',');
  add_do(conditional_cmd, common);
  add_format(conditional_cmd, common);
  conditional_cmd->callback([&] {
    action = [&] {
      const Scm scm = prepared(model_path, common);
      const auto m = conditional(scm, targets, given);
      print_matrix(out, "P(" + join(targets) + " | " + join(given) + ")", scm, indices(scm, targets),
                   indices(scm, given), m.matrix(), common);
      return 0;
    };
  });

  std::vector<std::string> from, to;
  auto* virtual_cmd = app.add_subcommand("virtual", "Print P(to | do(from))");
  virtual_cmd->add_option("model", model_path)->required();
  virtual_cmd->add_option("--from", from)->required()->delimiter(',');
  virtual_cmd->add_option("--to", to)->required()->delimiter(',');
  add_do(virtual_cmd, common);
  add_format(virtual_cmd, common);
  virtual_cmd->callback([&] {
    action = [&] {
      const Scm scm = prepared(model_path, common);
      const auto m = virtual_mechanism(scm, from, to);
      print_matrix(out, "P(" + join(to) + " | do(" + join(from) + "))", scm, indices(scm, to), indices(scm, from),
                   m.matrix(), common);
      return 0;
    };
  });

  auto* intervene_cmd = app.add_subcommand("intervene", "Print the intervened model document");
  intervene_cmd->add_option("model", model_path)->required();
  add_do(intervene_cmd, common);
  intervene_cmd->get_option("--do")->required();
  add_format(intervene_cmd, common);
  intervene_cmd->callback([&] {
    action = [&] {
      out << dump_model(prepared(model_path, common));
      return 0;
    };
  });

  std::string high_path, abstraction_path;
  double lambda = kDefaultLambda;
  auto* assess_cmd = app.add_subcommand("assess", "Abstraction error and information loss");
  assess_cmd->add_option("base", model_path)->required();
  assess_cmd->add_option("high", high_path)->required();
  assess_cmd->add_option("abstraction", abstraction_path)->required();
  assess_cmd->add_option("--lambda", lambda)->check(CLI::NonNegativeNumber);
  add_format(assess_cmd, common);
  assess_cmd->callback([&] {
    action = [&] {
      auto base = std::make_shared<const Scm>(load_model_file(model_path));
      auto high = std::make_shared<const Scm>(load_model_file(high_path));
      const auto a = load_abstraction(read_text_file(abstraction_path), base, high, abstraction_path);
      print_report(out, evaluate(a, lambda), common);
      return 0;
    };
  });

  std::string problem_path;
  std::optional<std::size_t> top_k, budget;
  std::optional<double> learn_lambda;
  std::optional<int> threads;
  std::string execution = "parallel";
  auto* learn_cmd = app.add_subcommand("learn", "Solve a learning problem document");
  learn_cmd->add_option("problem,--problem", problem_path)->required();
  learn_cmd->add_option("--top-k", top_k, "Candidates to keep (0 = all)");
  learn_cmd->add_option("--budget", budget, "Maximum candidates to evaluate")->check(CLI::PositiveNumber);
  learn_cmd->add_option("--lambda", learn_lambda)->check(CLI::NonNegativeNumber);
  learn_cmd->add_option("--threads", threads, "Worker threads (0 = all)")->check(CLI::NonNegativeNumber);
  learn_cmd->add_option("--execution", execution)->check(CLI::IsMember({"serial", "parallel"}));
  add_format(learn_cmd, common);
  learn_cmd->callback([&] {
    action = [&] {
      auto problem = load_problem_file(problem_path);
      if (top_k) problem.top_k = *top_k;
      if (budget) problem.budget = *budget;
      if (learn_lambda) problem.lambda = *learn_lambda;
      SolveOptions opts;
      opts.execution = execution == "serial" ? Execution::serial : Execution::parallel;
      opts.threads = threads ? *threads : threads_from_env();
      print_result(out, solve(problem, opts), common);
      return 0;
    };
  });

  std::string fixtures = default_fixture_dir().string();
  double report_lambda = kDefaultLambda;
  auto* report_cmd = app.add_subcommand("report-paper", "Recompute the worked example and check every value");
  report_cmd->add_option("--fixtures", fixtures, "Fixture directory");
  report_cmd->add_option("--lambda", report_lambda)->check(CLI::NonNegativeNumber);
  add_format(report_cmd, common);
  report_cmd->callback([&] {
    action = [&] {
      const auto r = paper_report(fixtures, report_lambda);
      if (common.machine()) {
        Json doc = Json::object();
        doc["format_version"] = kFormatVersion;
        doc["kind"] = "paper_report";
        doc["lambda"] = r.lambda;
        doc["all_pass"] = r.all_pass();
        Json rows = Json::array();
        for (const auto& row : r.rows) {
          rows.push_back(Json{{"quantity", row.quantity},
                              {"expected", row.expected},
                              {"actual", row.actual},
                              {"tolerance", row.tolerance},
                              {"pass", row.pass}});
        }
        doc["rows"] = std::move(rows);
        out << write_canonical(doc);
      } else {
        std::size_t failed = 0;
        for (const auto& row : r.rows) {
          failed += row.pass ? 0 : 1;
          out << (row.pass ? "PASS" : "FAIL") << "  " << row.quantity << "  (tolerance " << row.tolerance << ")\n"
              << "      expected " << row.expected << "\n"
              << "      actual   " << row.actual << "\n";
        }
        out << "\n" << (r.rows.size() - failed) << "/" << r.rows.size() << " passed\n";
      }
      return r.all_pass() ? 0 : 1;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  if (!action) {
    err << "error: no command given\n";
    return 2;
  }
  try {
    return action();
  } catch (const Usage& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    for (const auto& v : e.violations()) err << v.to_string() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace causabs::cli
