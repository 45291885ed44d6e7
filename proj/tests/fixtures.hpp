#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "cabs/model_io.hpp"

namespace fixtures {

inline std::filesystem::path dir() { return CABS_FIXTURE_DIR; }
inline std::filesystem::path problems() { return CABS_PROBLEM_DIR; }

inline std::shared_ptr<const causabs::Scm> model(const std::string& file) {
  return std::make_shared<const causabs::Scm>(causabs::load_model_file(dir() / file));
}

inline causabs::Abstraction abstraction(const std::string& file) {
  return causabs::load_abstraction_file(dir() / file);
}

inline std::shared_ptr<const causabs::Scm> M() { return model("model_M.json"); }
inline std::shared_ptr<const causabs::Scm> Mprime() { return model("model_Mprime.json"); }

inline std::vector<double> as_vec(const causabs::Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace fixtures
