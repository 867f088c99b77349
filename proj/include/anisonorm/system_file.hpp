#pragma once

// JSON system files.
//
//   {
//     "schema_version": 1,
//     "dims": {"n": 1, "m": 1, "r": 1},
//     "horizon": 1,
//     "matrices": {"constant": {"A": [[0.5]], "B": [[1]], "C": [[1]], "D": [[0]]}}
//   }
//
// "matrices" may instead hold {"sequence": [{A, B, C, D}, ...]} with N+1
// entries. Matrices are row-major nested arrays. Unknown keys are rejected.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "anisonorm/errors.hpp"
#include "anisonorm/system_model.hpp"

namespace anisonorm {

inline constexpr int kSchemaVersion = 1;

/// Malformed or inconsistent system file; the message names the line or
/// JSON field at fault.
class FileFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::string& where,
                                std::initializer_list<std::string_view> keys) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto k : keys) known = known || key == k;
    if (!known) {
      throw FileFormatError(where + ": unknown key \"" + key + "\"");
    }
  }
}

inline const json& require(const json& obj, const std::string& where,
                           const char* key) {
  if (!obj.is_object()) throw FileFormatError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw FileFormatError(where + ": missing field \"" + key + "\"");
  }
  return *it;
}

inline int require_int(const json& obj, const std::string& where,
                       const char* key) {
  const json& v = require(obj, where, key);
  if (!v.is_number_integer()) {
    throw FileFormatError(where + "." + key + ": expected an integer");
  }
  return v.get<int>();
}

inline MatrixXd parse_matrix(const json& v, const std::string& where,
                             Eigen::Index rows, Eigen::Index cols) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != rows) {
    throw FileFormatError(where + ": expected " + std::to_string(rows) +
                          " rows");
  }
  MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw FileFormatError(where + "[" + std::to_string(i) + "]: expected " +
                            std::to_string(cols) + " columns");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      const json& x = row[static_cast<std::size_t>(j)];
      if (!x.is_number()) {
        throw FileFormatError(where + "[" + std::to_string(i) + "][" +
                              std::to_string(j) + "]: expected a number");
      }
      out(i, j) = x.get<double>();
    }
  }
  return out;
}

struct Quad {
  MatrixXd a, b, c, d;
};

inline Quad parse_quad(const json& v, const std::string& where, int n, int m,
                       int r) {
  if (!v.is_object()) throw FileFormatError(where + ": expected an object");
  reject_unknown_keys(v, where, {"A", "B", "C", "D"});
  return {parse_matrix(require(v, where, "A"), where + ".A", n, n),
          parse_matrix(require(v, where, "B"), where + ".B", n, m),
          parse_matrix(require(v, where, "C"), where + ".C", r, n),
          parse_matrix(require(v, where, "D"), where + ".D", r, m)};
}

inline json matrix_to_json(const MatrixXd& x) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace detail

inline LdtvSystem parse_system(std::string_view text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FileFormatError("line " +
                          std::to_string(detail::line_of(text, e.byte)) +
                          ": " + e.what());
  }
  if (!doc.is_object()) throw FileFormatError("top level: expected an object");
  detail::reject_unknown_keys(doc, "top level",
                              {"schema_version", "dims", "horizon", "matrices"});
  const int version = detail::require_int(doc, "top level", "schema_version");
  if (version != kSchemaVersion) {
    throw FileFormatError("schema_version: unsupported version " +
                          std::to_string(version));
  }
  const auto& dims = detail::require(doc, "top level", "dims");
  if (!dims.is_object()) throw FileFormatError("dims: expected an object");
  detail::reject_unknown_keys(dims, "dims", {"n", "m", "r"});
  const int n = detail::require_int(dims, "dims", "n");
  const int m = detail::require_int(dims, "dims", "m");
  const int r = detail::require_int(dims, "dims", "r");
  const int horizon = detail::require_int(doc, "top level", "horizon");
  if (n <= 0 || m <= 0 || r <= 0) {
    throw FileFormatError("dims: n, m, r must be positive");
  }
  if (horizon < 0) throw FileFormatError("horizon: must be nonnegative");

  const auto& mats = detail::require(doc, "top level", "matrices");
  if (!mats.is_object() || mats.size() != 1) {
    throw FileFormatError(
        "matrices: expected exactly one of \"constant\" or \"sequence\"");
  }
  detail::reject_unknown_keys(mats, "matrices", {"constant", "sequence"});

  LdtvSystem sys;
  if (mats.contains("constant")) {
    const auto q = detail::parse_quad(mats["constant"], "matrices.constant",
                                      n, m, r);
    sys = LdtvSystem::time_invariant(q.a, q.b, q.c, q.d, horizon);
  } else {
    const auto& seq = mats["sequence"];
    if (!seq.is_array() ||
        seq.size() != static_cast<std::size_t>(horizon) + 1) {
      throw FileFormatError("matrices.sequence: expected " +
                            std::to_string(horizon + 1) + " entries (N+1)");
    }
    sys.n = n;
    sys.m = m;
    sys.r = r;
    sys.horizon = horizon;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      auto q = detail::parse_quad(
          seq[k], "matrices.sequence[" + std::to_string(k) + "]", n, m, r);
      sys.A.push_back(std::move(q.a));
      sys.B.push_back(std::move(q.b));
      sys.C.push_back(std::move(q.c));
      sys.D.push_back(std::move(q.d));
    }
  }
  try {
    validate(sys);
  } catch (const std::invalid_argument& e) {
    throw FileFormatError(e.what());
  }
  return sys;
}

inline LdtvSystem load_system(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileFormatError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str());
}

/// Always writes the explicit "sequence" form. Doubles are emitted in the
/// shortest form that parses back to the identical value.
inline std::string serialize_system(const LdtvSystem& sys) {
  using detail::json;
  validate(sys);
  json seq = json::array();
  for (std::size_t k = 0; k < sys.steps(); ++k) {
    seq.push_back({{"A", detail::matrix_to_json(sys.A[k])},
                   {"B", detail::matrix_to_json(sys.B[k])},
                   {"C", detail::matrix_to_json(sys.C[k])},
                   {"D", detail::matrix_to_json(sys.D[k])}});
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"dims", {{"n", sys.n}, {"m", sys.m}, {"r", sys.r}}},
              {"horizon", sys.horizon},
              {"matrices", {{"sequence", std::move(seq)}}}};
  return doc.dump(2) + "\n";
}

}  // namespace anisonorm
