#ifndef QLSR_IO_HPP
#define QLSR_IO_HPP

// JSON system files. Complex entries are [re, im] pairs, matrices are
// row-major nested arrays. Doubles are written with the shortest
// representation that parses back to the same bits.

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include "json.hpp"
#endif

#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "qlsr/matcore.hpp"
#include "qlsr/sysmodel.hpp"

namespace qlsr {

using Json = nlohmann::json;

inline Json complex_to_json(cdouble z) { return Json::array({z.real(), z.imag()}); }

inline Json matrix_to_json(const CMat& x) {
  Json rows = Json::array();
  for (Index i = 0; i < x.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < x.cols(); ++j) row.push_back(complex_to_json(x(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Reads a complex scalar given either as [re, im] or as a bare real number.
inline cdouble complex_from_json(const Json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ParseError(where + ": expected a complex number [re, im], got " + v.dump());
}

inline CMat matrix_from_json(const Json& v, const std::string& name, Index rows, Index cols) {
  if (!v.is_array()) throw ParseError(name + ": expected an array of rows");
  if (static_cast<Index>(v.size()) != rows) {
    throw StructuralError(name + ": has " + std::to_string(v.size()) + " rows, expected " +
                          std::to_string(rows));
  }
  CMat x(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw StructuralError(name + ": row " + std::to_string(i) + " has " +
                            (row.is_array() ? std::to_string(row.size()) : std::string("no")) +
                            " entries, expected " + std::to_string(cols));
    }
    for (Index j = 0; j < cols; ++j) {
      x(i, j) = complex_from_json(row[static_cast<std::size_t>(j)],
                                  name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
  }
  if (!all_finite(x)) throw ValidationError(name + ": non-finite entry");
  return x;
}

/// A system read from disk, tagged with the kind recorded in the file.
struct SystemFile {
  std::variant<GeneralSystem, PassiveSystem> system;
  Json metadata = Json::object();

  bool passive() const { return std::holds_alternative<PassiveSystem>(system); }
  GeneralSystem general() const {
    return passive() ? std::get<PassiveSystem>(system).to_general() : std::get<GeneralSystem>(system);
  }
  const PassiveSystem& as_passive() const { return std::get<PassiveSystem>(system); }
  Index m() const { return std::visit([](const auto& s) { return s.m(); }, system); }
  Index n() const { return std::visit([](const auto& s) { return s.n(); }, system); }
};

inline Json system_to_json(const PassiveSystem& sys, const Json& metadata = Json::object()) {
  Json j;
  j["kind"] = "passive";
  j["m"] = sys.m();
  j["n"] = sys.n();
  j["S"] = matrix_to_json(sys.S());
  j["C_minus"] = matrix_to_json(sys.C_minus());
  j["Omega_minus"] = matrix_to_json(sys.Omega_minus());
  j["metadata"] = metadata;
  return j;
}

inline Json system_to_json(const GeneralSystem& sys, const Json& metadata = Json::object()) {
  Json j;
  j["kind"] = "general";
  j["m"] = sys.m();
  j["n"] = sys.n();
  j["S"] = matrix_to_json(sys.S());
  j["C_minus"] = matrix_to_json(sys.C_minus());
  j["C_plus"] = matrix_to_json(sys.C_plus());
  j["Omega_minus"] = matrix_to_json(sys.Omega_minus());
  j["Omega_plus"] = matrix_to_json(sys.Omega_plus());
  j["metadata"] = metadata;
  return j;
}

inline Json system_to_json(const SystemFile& f) {
  return std::visit([&](const auto& s) { return system_to_json(s, f.metadata); }, f.system);
}

namespace detail {

inline Index count_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 0) {
    throw ParseError(std::string("field '") + key + "' must be a nonnegative integer");
  }
  return static_cast<Index>(j[key].get<long long>());
}

}  // namespace detail

inline SystemFile system_from_json(const Json& j, const Tolerances& tol = {},
                                   Validation mode = Validation::strict) {
  if (!j.is_object()) throw ParseError("system file must be a JSON object");
  const std::string kind = j.value("kind", std::string());
  if (kind != "general" && kind != "passive") {
    throw ParseError("field 'kind' must be \"general\" or \"passive\"");
  }
  const Index m = detail::count_field(j, "m");
  const Index n = detail::count_field(j, "n");
  auto required = [&](const char* key) -> const Json& {
    if (!j.contains(key)) throw ParseError(std::string("missing matrix '") + key + "'");
    return j[key];
  };
  const CMat s = matrix_from_json(required("S"), "S", m, m);
  const CMat cm = matrix_from_json(required("C_minus"), "C_minus", m, n);
  const CMat om = matrix_from_json(required("Omega_minus"), "Omega_minus", n, n);
  const CMat cp = j.contains("C_plus") ? matrix_from_json(j["C_plus"], "C_plus", m, n) : CMat::Zero(m, n);
  const CMat op = j.contains("Omega_plus") ? matrix_from_json(j["Omega_plus"], "Omega_plus", n, n)
                                           : CMat::Zero(n, n);
  const Json metadata = j.contains("metadata") ? j["metadata"] : Json::object();
  if (kind == "passive") {
    if (cp.norm() != 0.0 || op.norm() != 0.0) {
      throw ValidationError("passive system file has nonzero C_plus or Omega_plus");
    }
    return SystemFile{PassiveSystem(s, cm, om, tol, mode), metadata};
  }
  return SystemFile{GeneralSystem(s, cm, cp, om, op, tol, mode), metadata};
}

/// Parses a system document; `source` names the input in error messages.
inline SystemFile parse_system(const std::string& text, const std::string& source = "<input>",
                               const Tolerances& tol = {}, Validation mode = Validation::strict) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into a line number.
    std::size_t line = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t k = 0; k < limit; ++k) line += text[k] == '\n';
    throw ParseError(source + ":" + std::to_string(line) + ": " + e.what());
  }
  try {
    return system_from_json(j, tol, mode);
  } catch (const Error& e) {
    const std::string msg = source + ": " + e.what();
    if (dynamic_cast<const ValidationError*>(&e)) throw ValidationError(msg);
    if (dynamic_cast<const StructuralError*>(&e)) throw StructuralError(msg);
    throw ParseError(msg);
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path + ": cannot open file for writing");
  out << text;
  if (!out) throw Error(path + ": write failed");
}

inline SystemFile load_system(const std::string& path, const Tolerances& tol = {},
                              Validation mode = Validation::strict) {
  return parse_system(read_text_file(path), path, tol, mode);
}

inline void save_system(const std::string& path, const SystemFile& f) {
  write_text_file(path, system_to_json(f).dump(2) + "\n");
}

}  // namespace qlsr

#endif  // QLSR_IO_HPP
