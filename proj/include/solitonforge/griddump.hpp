#pragma once

#include <cstdio>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "parallel.hpp"
#include "wavemaps.hpp"

namespace solitonforge {

inline constexpr const char* kSchema = "solitonforge/1";

/// Inclusive grid lo:hi:count.
struct Axis {
  double lo = 0.0, hi = 0.0;
  int count = 1;

  double at(int i) const { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); }
  bool operator==(const Axis&) const = default;
};

inline Axis parse_axis(const std::string& s) {
  Axis a;
  char extra;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d%c", &a.lo, &a.hi, &a.count, &extra) != 3)
    throw PreconditionViolation("axis must be lo:hi:count, got '" + s + "'");
  if (a.count < 1) throw PreconditionViolation("axis count must be positive");
  if (!std::isfinite(a.lo) || !std::isfinite(a.hi)) throw PreconditionViolation("axis bounds must be finite");
  return a;
}

/// "X0:X1:NX,T0:T1:NT"
inline std::pair<Axis, Axis> parse_grid(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos) throw PreconditionViolation("grid must be X0:X1:NX,T0:T1:NT");
  return {parse_axis(s.substr(0, comma)), parse_axis(s.substr(comma + 1))};
}

struct GridMeta {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::string target_class;
  Axis x, t;

  bool operator==(const GridMeta&) const = default;
};

struct GridDump {
  GridMeta meta;
  int dim = 0;
  std::vector<Matrix> values;  // row-major in (t, x); empty when dim = 0
  std::map<std::string, std::vector<double>> aux;
  nlohmann::json results = nlohmann::json::object();  // extra top-level keys

  const Matrix& value(int it, int ix) const { return values[static_cast<std::size_t>(it) * meta.x.count + ix]; }

  bool operator==(const GridDump& o) const {
    if (!(meta == o.meta) || dim != o.dim || aux != o.aux || results != o.results || values.size() != o.values.size())
      return false;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] != o.values[i]) return false;
    return true;
  }
};

inline const char* class_name(TargetClass c) {
  switch (c) {
    case TargetClass::SU: return "su";
    case TargetClass::S2: return "s2";
    case TargetClass::CPn: return "cpn";
    case TargetClass::Sn: return "sn";
    case TargetClass::SL2R: return "sl2r";
    case TargetClass::Rplus: return "rplus";
  }
  return "unknown";
}

/// Samples s over the grid; every stored value must be finite.
inline GridDump sample_grid(const WaveMap& s, const Axis& x, const Axis& t, std::string command,
                            nlohmann::json parameters) {
  GridDump d;
  d.meta = {std::move(command), std::move(parameters), class_name(s.target_class), x, t};
  d.dim = s.dim;
  d.values.resize(static_cast<std::size_t>(x.count) * t.count);
  parallel_for(d.values.size(), [&](std::size_t k) {
    const int it = static_cast<int>(k / x.count), ix = static_cast<int>(k % x.count);
    Matrix v = s.eval(x.at(ix), t.at(it));
    if (!v.allFinite()) throw EvaluationFailure("non-finite value at grid point");
    d.values[k] = v;
  });
  return d;
}

inline nlohmann::json to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const int n = static_cast<int>(j.size());
  if (n < 1 || n > kMaxDim) throw ShapeMismatch("matrix size out of range");
  Matrix m(n, n);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(j[r].size()) != n) throw ShapeMismatch("matrix must be square");
    for (int c = 0; c < n; ++c) m(r, c) = cplx(j[r][c][0].get<double>(), j[r][c][1].get<double>());
  }
  return m;
}

inline nlohmann::json to_json(const GridDump& d) {
  nlohmann::json j = nlohmann::json::object();
  j["schema"] = kSchema;
  j["meta"] = {{"command", d.meta.command},
               {"parameters", d.meta.parameters},
               {"target_class", d.meta.target_class},
               {"x0", d.meta.x.lo},
               {"x1", d.meta.x.hi},
               {"nx", d.meta.x.count},
               {"t0", d.meta.t.lo},
               {"t1", d.meta.t.hi},
               {"nt", d.meta.t.count}};
  j["dim"] = d.dim;
  nlohmann::json values = nlohmann::json::array();
  for (int it = 0; it < (d.dim ? d.meta.t.count : 0); ++it) {
    nlohmann::json row = nlohmann::json::array();
    for (int ix = 0; ix < d.meta.x.count; ++ix) row.push_back(to_json(d.value(it, ix)));
    values.push_back(std::move(row));
  }
  j["values"] = std::move(values);
  nlohmann::json aux = nlohmann::json::object();
  for (const auto& [k, v] : d.aux) aux[k] = v;
  j["aux"] = std::move(aux);
  for (const auto& [k, v] : d.results.items()) j[k] = v;
  return j;
}

inline GridDump grid_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != kSchema) throw PreconditionViolation("unknown schema");
  GridDump d;
  const auto& m = j.at("meta");
  d.meta.command = m.at("command").get<std::string>();
  d.meta.parameters = m.at("parameters");
  d.meta.target_class = m.at("target_class").get<std::string>();
  d.meta.x = {m.at("x0").get<double>(), m.at("x1").get<double>(), m.at("nx").get<int>()};
  d.meta.t = {m.at("t0").get<double>(), m.at("t1").get<double>(), m.at("nt").get<int>()};
  d.dim = j.at("dim").get<int>();
  const auto& values = j.at("values");
  if (d.dim) {
    if (static_cast<int>(values.size()) != d.meta.t.count) throw ShapeMismatch("values rows differ from nt");
    for (const auto& row : values) {
      if (static_cast<int>(row.size()) != d.meta.x.count) throw ShapeMismatch("values columns differ from nx");
      for (const auto& v : row) d.values.push_back(matrix_from_json(v));
    }
  }
  for (const auto& [k, v] : j.at("aux").items()) d.aux[k] = v.get<std::vector<double>>();
  for (const auto& [k, v] : j.items())
    if (k != "schema" && k != "meta" && k != "dim" && k != "values" && k != "aux") d.results[k] = v;
  return d;
}

/// JSON text; doubles are written in shortest round-trip form, so reloading is bit-exact.
inline std::string dump_json(const GridDump& d) { return to_json(d).dump(1) + "\n"; }

inline GridDump load_json(const std::string& text) { return grid_from_json(nlohmann::json::parse(text)); }

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One row per grid point: x, t, flattened re/im entries, then aux fields; meta as # lines.
inline std::string dump_csv(const GridDump& d) {
  std::ostringstream os;
  os << "# schema: " << kSchema << "\n";
  os << "# command: " << d.meta.command << "\n";
  os << "# parameters: " << d.meta.parameters.dump() << "\n";
  os << "# target_class: " << d.meta.target_class << "\n";
  os << "# x0: " << fmt17(d.meta.x.lo) << "\n# x1: " << fmt17(d.meta.x.hi) << "\n# nx: " << d.meta.x.count << "\n";
  os << "# t0: " << fmt17(d.meta.t.lo) << "\n# t1: " << fmt17(d.meta.t.hi) << "\n# nt: " << d.meta.t.count << "\n";
  for (const auto& [k, v] : d.results.items()) os << "# " << k << ": " << v.dump() << "\n";
  os << "x,t";
  for (int i = 0; i < d.dim; ++i)
    for (int j = 0; j < d.dim; ++j) os << ",re" << i << j << ",im" << i << j;
  for (const auto& [k, v] : d.aux) os << "," << k;
  os << "\n";
  for (int it = 0; it < d.meta.t.count; ++it)
    for (int ix = 0; ix < d.meta.x.count; ++ix) {
      os << fmt17(d.meta.x.at(ix)) << "," << fmt17(d.meta.t.at(it));
      if (d.dim) {
        const Matrix& m = d.value(it, ix);
        for (int i = 0; i < d.dim; ++i)
          for (int j = 0; j < d.dim; ++j) os << "," << fmt17(m(i, j).real()) << "," << fmt17(m(i, j).imag());
      }
      for (const auto& [k, v] : d.aux) os << "," << fmt17(v[static_cast<std::size_t>(it) * d.meta.x.count + ix]);
      os << "\n";
    }
  return os.str();
}

}  // namespace solitonforge
