#ifndef MPIRK_IO_HPP
#define MPIRK_IO_HPP

// JSON and CSV serialization (uses the vendored nlohmann json.hpp).
// Scalars go to JSON as hex floats (lossless) and to CSV as 40-digit decimals.

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpirk/integrate.hpp"
#include "mpirk/stability.hpp"
#include "mpirk/tableau.hpp"

namespace mpirk::io {

using nlohmann::json;

inline json to_json(const MPVector& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x.to_hex());
  return a;
}

inline json to_json(const MPMatrix& M) {
  json a = json::array();
  for (std::size_t i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < M.cols(); ++j) row.push_back(M(i, j).to_hex());
    a.push_back(std::move(row));
  }
  return a;
}

inline MPVector vector_from_json(const json& a, PrecisionContext ctx) {
  MPVector v;
  for (const auto& x : a) v.push_back(Real::from_string(x.get<std::string>(), ctx));
  return v;
}

inline MPMatrix matrix_from_json(const json& a, PrecisionContext ctx) {
  const std::size_t r = a.size(), c = r ? a[0].size() : 0;
  MPMatrix M(r, c, ctx);
  for (std::size_t i = 0; i < r; ++i) {
    if (a[i].size() != c) throw InvalidArgument("tableau JSON: ragged matrix");
    for (std::size_t j = 0; j < c; ++j) M(i, j) = Real::from_string(a[i][j].get<std::string>(), ctx);
  }
  return M;
}

inline json tableau_to_json(const Tableau& t) {
  return {{"family", to_string(t.family)}, {"m", t.m},         {"bits", t.ctx.bits}, {"order", t.order},
          {"c", to_json(t.c)},            {"A", to_json(t.A)}, {"b", to_json(t.b)}};
}

inline Tableau tableau_from_json(const json& j) {
  Tableau t;
  t.family = family_from_string(j.at("family").get<std::string>());
  t.m = j.at("m").get<int>();
  t.order = j.at("order").get<int>();
  t.ctx = PrecisionContext{j.at("bits").get<int>()};
  t.c = vector_from_json(j.at("c"), t.ctx);
  t.A = matrix_from_json(j.at("A"), t.ctx);
  t.b = vector_from_json(j.at("b"), t.ctx);
  if (t.c.size() != static_cast<std::size_t>(t.m) || t.b.size() != t.c.size() || t.A.rows() != t.c.size() ||
      t.A.cols() != t.c.size())
    throw InvalidArgument("tableau JSON: inconsistent sizes");
  return t;
}

inline json embedded_to_json(const EmbeddedWeights& e) {
  return {{"gamma0", e.gamma0.to_hex()}, {"bhat", to_json(e.bhat)}, {"order_hat", e.order_hat}};
}

/// 40 significant digits; "inf" for infinities.
inline std::string decimal(const Real& x, int digits = 40) {
  if (x.is_nan()) return "nan";
  if (!x.is_finite()) return x.sign() > 0 ? "inf" : "-inf";
  return x.to_string(digits);
}

inline void write_stability_csv(std::ostream& os, const std::vector<StabilitySample>& grid) {
  os << "re,im,abs_R\n";
  for (const auto& s : grid) os << decimal(s.re) << ',' << decimal(s.im) << ',' << decimal(s.abs_r) << '\n';
}

inline void write_history_csv(std::ostream& os, const std::vector<StepRecord>& history) {
  os << "k,x,h,err_norm,accepted,newton_iters,linear_iters\n";
  for (const auto& r : history)
    os << r.k << ',' << decimal(r.x) << ',' << decimal(r.h) << ',' << decimal(r.err_norm) << ','
       << (r.accepted ? 1 : 0) << ',' << r.newton_iters << ',' << r.linear_iters << '\n';
}

}  // namespace mpirk::io

#endif  // MPIRK_IO_HPP
