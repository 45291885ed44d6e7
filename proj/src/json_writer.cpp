#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cabs/model_io.hpp"

namespace causabs {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw InputError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                     ": parse error: " + what);
  }
}

std::string format_number(double v) {
  if (!std::isfinite(v)) throw Error("cannot serialize a non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  double back = 0.0;
  std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
  if (back != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

constexpr std::size_t kLineWidth = 100;

void write_inline(const Json& j, std::string& out) {
  if (j.is_object()) {
    out += "{";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ", ";
      first = false;
      out += Json(it.key()).dump() + ": ";
      write_inline(it.value(), out);
    }
    out += "}";
  } else if (j.is_array()) {
    out += "[";
    bool first = true;
    for (const auto& e : j) {
      if (!first) out += ", ";
      first = false;
      write_inline(e, out);
    }
    out += "]";
  } else if (j.is_number_float()) {
    out += format_number(j.get<double>());
  } else {
    out += j.dump();
  }
}

// `used` is the width already taken on the current line (indent and key).
void write(const Json& j, std::size_t indent, std::size_t used, bool top, std::string& out) {
  if (!top || (!j.is_object() && !j.is_array()) || j.empty()) {
    std::string flat;
    write_inline(j, flat);
    if (used + flat.size() + 1 <= kLineWidth || (!j.is_object() && !j.is_array()) || j.empty()) {
      out += flat;
      return;
    }
  }
  const std::string pad(indent, ' ');
  const std::string inner(indent + 2, ' ');
  bool first = true;
  if (j.is_object()) {
    out += "{\n";
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      const std::string key = Json(it.key()).dump() + ": ";
      out += inner + key;
      write(it.value(), indent + 2, indent + 2 + key.size(), false, out);
    }
    out += "\n" + pad + "}";
  } else {
    out += "[\n";
    for (const auto& e : j) {
      if (!first) out += ",\n";
      first = false;
      out += inner;
      write(e, indent + 2, indent + 2, false, out);
    }
    out += "\n" + pad + "]";
  }
}

}  // namespace

std::string write_canonical(const Json& doc) {
  std::string out;
  write(doc, 0, 0, true, out);
  out += "\n";
  return out;
}

}  // namespace causabs
