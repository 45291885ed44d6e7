#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "json.hpp"

#include "cabs/abstraction.hpp"
#include "cabs/learn.hpp"
#include "cabs/scm.hpp"

namespace causabs {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kFormatVersion = "1.0";

// Reads a whole file; throws InputError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

// Parses JSON text, reporting syntax errors with line and column.
Json parse_json(std::string_view text, std::string_view source = "<input>");

// Canonical rendering: insertion key order, two-space indent, scalar arrays on
// one line, numbers with 12 significant digits unless more are needed to
// read back the identical double.
std::string write_canonical(const Json& doc);
std::string format_number(double v);

// --- models ----------------------------------------------------------------

// Schema-checked but not validated; use Scm::violations() for the rest.
Scm model_from_json(const Json& doc, std::string_view source = "<input>");
Scm parse_model(std::string_view text, std::string_view source = "<input>");
// Schema-checked and validated; throws ValidationError naming each violation.
Scm load_model(std::string_view text, std::string_view source = "<input>");
Scm load_model_file(const std::filesystem::path& path);

Json model_to_json(const Scm& scm);
std::string dump_model(const Scm& scm);

// --- abstractions ----------------------------------------------------------

Abstraction abstraction_from_json(const Json& doc, std::shared_ptr<const Scm> base, std::shared_ptr<const Scm> high,
                             std::string_view source = "<input>");
Abstraction load_abstraction(std::string_view text, std::shared_ptr<const Scm> base, std::shared_ptr<const Scm> high,
                             std::string_view source = "<input>");
// Resolves base_ref and high_ref (paths relative to the file, or inline models).
Abstraction load_abstraction_file(const std::filesystem::path& path);

Json abstraction_to_json(const Abstraction& a);
std::string dump_abstraction(const Abstraction& a);

// --- learning problems and results -------------------------------------------

LearningProblem load_problem(std::string_view text, const std::filesystem::path& base_dir,
                             std::string_view source = "<input>");
LearningProblem load_problem_file(const std::filesystem::path& path);

Json distribution_to_json(const Scm& scm, std::span<const std::size_t> vars, const Vector& p);
Json matrix_to_json(const Scm& scm, std::span<const std::size_t> row_vars, std::span<const std::size_t> col_vars,
                    const Matrix& m);
Json report_to_json(const EvaluationReport& r);
Json candidate_to_json(const Candidate& c, std::size_t rank);
Json result_to_json(const SolverResult& r);

}  // namespace causabs
