#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "xstable/csv.hpp"
#include "xstable/discrete_measure.hpp"
#include "xstable/errors.hpp"
#include "xstable/index_set.hpp"
#include "xstable/logistic.hpp"
#include "xstable/point.hpp"

namespace xstable {

// Type-erased model storage for the file-driven surfaces. The monostate
// alternative only exists so containers can default-construct; visiting an
// empty handle is an error.
using ModelHandle =
    std::variant<std::monostate, DiscreteSpectralMeasure, LogisticModel, AsymmetricLogisticModel>;

template <class F>
auto visit_model(const ModelHandle& h, F&& f) {
  using R = decltype(f(std::get<LogisticModel>(h)));
  return std::visit(
      [&](const auto& m) -> R {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, std::monostate>) {
          throw StructuralError("visit_model: empty model handle");
        } else {
          return f(m);
        }
      },
      h);
}

inline IndexSet model_ground(const ModelHandle& h) {
  return visit_model(h, [](const auto& m) { return m.ground(); });
}

inline bool model_smooth(const ModelHandle& h) {
  return visit_model(h, [](const auto& m) { return m.smooth_density(); });
}

inline double model_exponent(const ModelHandle& h, IndexSet a, const EvaluationPoint& x) {
  return visit_model(h, [&](const auto& m) { return m.exponent(a, x); });
}

inline const DiscreteSpectralMeasure* as_discrete(const ModelHandle& h) {
  return std::get_if<DiscreteSpectralMeasure>(&h);
}

// 64-bit FNV-1a over the raw spec text; stable run-to-run identifier.
inline std::string text_digest(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// A parsed model file: the dependence model plus the user-facing index
// labels and a digest of the source text.
struct ModelSpec {
  std::string kind;
  std::vector<std::string> labels;
  ModelHandle model;
  std::string digest;

  int dimension() const { return static_cast<int>(labels.size()); }
  IndexSet ground() const { return IndexSet::full(dimension()); }

  int label_position(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return static_cast<int>(i);
    throw SchemaError("unknown index label '" + label + "'");
  }

  // "1+4" -> {positions of "1" and "4"}
  IndexSet parse_set(const std::string& joined) const {
    IndexSet out;
    std::string token;
    std::istringstream in(joined);
    while (std::getline(in, token, '+')) {
      if (token.empty()) throw SchemaError("empty index label in '" + joined + "'");
      const int pos = label_position(token);
      if (out.contains(pos)) throw SchemaError("duplicate index label in '" + joined + "'");
      out = out | IndexSet::single(pos);
    }
    if (out.empty()) throw SchemaError("empty index set '" + joined + "'");
    return out;
  }

  std::string set_label(IndexSet s) const {
    std::string out;
    for_each_member(s, [&](int i) {
      if (!out.empty()) out += '+';
      out += labels[static_cast<std::size_t>(i)];
    });
    return out;
  }

  // Comma-separated coordinates over the full ground set.
  EvaluationPoint parse_point(const std::string& csv) const {
    std::vector<double> coords;
    std::string token;
    std::istringstream in(csv);
    while (std::getline(in, token, ',')) {
      try {
        std::size_t used = 0;
        coords.push_back(std::stod(token, &used));
        while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) ++used;
        if (used != token.size())
          throw SchemaError("trailing characters in coordinate '" + token + "'");
      } catch (const SchemaError&) {
        throw;
      } catch (const std::exception&) {
        throw SchemaError("bad coordinate '" + token + "'");
      }
    }
    if (coords.size() != labels.size())
      throw SchemaError("expected " + std::to_string(labels.size()) + " coordinates, got " +
                        std::to_string(coords.size()));
    try {
      return EvaluationPoint(ground(), coords);
    } catch (const Error& e) {
      throw SchemaError(std::string("bad point: ") + e.what());
    }
  }
};

namespace detail {

using json = nlohmann::json;

inline const json& require_key(const json& obj, const char* key, const char* where) {
  if (!obj.is_object()) throw SchemaError(std::string(where) + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw SchemaError(std::string(where) + ": missing required key '" + key + "'");
  return *it;
}

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                                const char* where) {
  if (!obj.is_object()) throw SchemaError(std::string(where) + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw SchemaError(std::string(where) + ": unknown key '" + it.key() + "'");
  }
}

inline double as_number(const json& v, const char* where) {
  if (!v.is_number()) throw SchemaError(std::string(where) + ": expected a number");
  return v.get<double>();
}

inline bool as_bool(const json& v, const char* where) {
  if (!v.is_boolean()) throw SchemaError(std::string(where) + ": expected a boolean");
  return v.get<bool>();
}

inline std::vector<double> as_number_list(const json& v, const char* where) {
  if (!v.is_array()) throw SchemaError(std::string(where) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(e, where));
  return out;
}

inline bool optional_bool(const json& obj, const char* key, const char* where) {
  if (!obj.contains(key)) return false;
  return as_bool(obj[key], where);
}

}  // namespace detail

inline ModelSpec parse_model_spec(const std::string& text) {
  namespace dj = detail;
  dj::json root;
  try {
    root = dj::json::parse(text);
  } catch (const dj::json::parse_error& e) {
    throw SchemaError(std::string("model spec is not valid JSON: ") + e.what());
  }
  dj::reject_unknown_keys(root, {"kind", "indices", "params", "flags"}, "model spec");

  ModelSpec spec;
  spec.digest = text_digest(text);
  const dj::json& kind = dj::require_key(root, "kind", "model spec");
  if (!kind.is_string()) throw SchemaError("model spec: 'kind' must be a string");
  spec.kind = kind.get<std::string>();

  const dj::json& indices = dj::require_key(root, "indices", "model spec");
  if (!indices.is_array() || indices.empty())
    throw SchemaError("model spec: 'indices' must be a non-empty array of labels");
  for (const auto& e : indices) {
    if (!e.is_string() || e.get<std::string>().empty())
      throw SchemaError("model spec: index labels must be non-empty strings");
    const std::string label = e.get<std::string>();
    if (label.find('+') != std::string::npos || label.find(',') != std::string::npos ||
        label.find(';') != std::string::npos)
      throw SchemaError("model spec: index label '" + label + "' uses a reserved separator");
    for (const std::string& seen : spec.labels)
      if (seen == label) throw SchemaError("model spec: duplicate index label '" + label + "'");
    spec.labels.push_back(label);
  }
  const int dim = spec.dimension();
  if (dim > IndexSet::max_size) throw SchemaError("model spec: too many indices");

  std::optional<bool> smooth_flag;
  if (root.contains("flags")) {
    const dj::json& flags = root["flags"];
    dj::reject_unknown_keys(flags, {"smooth_density"}, "flags");
    if (flags.contains("smooth_density"))
      smooth_flag = dj::as_bool(flags["smooth_density"], "flags.smooth_density");
  }

  const dj::json& params = dj::require_key(root, "params", "model spec");
  try {
    if (spec.kind == "discrete") {
      dj::reject_unknown_keys(params, {"atoms", "renormalize"}, "params");
      const dj::json& atoms_json = dj::require_key(params, "atoms", "params");
      if (!atoms_json.is_array() || atoms_json.empty())
        throw SchemaError("params.atoms must be a non-empty array");
      std::vector<DiscreteSpectralMeasure::Atom> atoms;
      for (const auto& aj : atoms_json) {
        dj::reject_unknown_keys(aj, {"weight", "direction"}, "atom");
        DiscreteSpectralMeasure::Atom atom;
        atom.weight = dj::as_number(dj::require_key(aj, "weight", "atom"), "atom.weight");
        atom.direction =
            dj::as_number_list(dj::require_key(aj, "direction", "atom"), "atom.direction");
        atoms.push_back(std::move(atom));
      }
      DiscreteSpectralMeasure m(dim, std::move(atoms), smooth_flag.value_or(false));
      if (dj::optional_bool(params, "renormalize", "params.renormalize")) {
        m = renormalized(m);
      } else {
        const MomentReport rep = check_moments(m);
        if (!rep.pass)
          throw SchemaError("discrete measure moment sums deviate from one (max residual " +
                            format_real(rep.max_residual) + "); set params.renormalize");
      }
      spec.model = std::move(m);
    } else if (spec.kind == "max_linear") {
      dj::reject_unknown_keys(params, {"coefficients", "renormalize"}, "params");
      const dj::json& rows = dj::require_key(params, "coefficients", "params");
      if (!rows.is_array() || rows.empty())
        throw SchemaError("params.coefficients must be a non-empty array of rows");
      std::vector<std::vector<double>> coeff;
      for (const auto& r : rows) coeff.push_back(dj::as_number_list(r, "coefficients row"));
      const bool renorm = dj::optional_bool(params, "renormalize", "params.renormalize");
      DiscreteSpectralMeasure m = max_linear_measure(dim, coeff, renorm);
      if (smooth_flag.has_value()) m = DiscreteSpectralMeasure(dim, m.atoms(), *smooth_flag);
      spec.model = std::move(m);
    } else if (spec.kind == "logistic") {
      dj::reject_unknown_keys(params, {"alpha"}, "params");
      if (smooth_flag.has_value())
        throw SchemaError("flags.smooth_density is not configurable for logistic models");
      spec.model = LogisticModel(
          dim, dj::as_number(dj::require_key(params, "alpha", "params"), "params.alpha"));
    } else if (spec.kind == "asymmetric_logistic") {
      dj::reject_unknown_keys(params, {"terms"}, "params");
      const dj::json& terms_json = dj::require_key(params, "terms", "params");
      if (!terms_json.is_array() || terms_json.empty())
        throw SchemaError("params.terms must be a non-empty array");
      std::vector<AsymmetricLogisticModel::Term> terms;
      for (const auto& tj : terms_json) {
        dj::reject_unknown_keys(tj, {"subset", "alpha", "weights"}, "term");
        AsymmetricLogisticModel::Term term;
        const dj::json& subset = dj::require_key(tj, "subset", "term");
        if (!subset.is_array() || subset.empty())
          throw SchemaError("term.subset must be a non-empty array of labels");
        std::vector<int> positions;
        for (const auto& lbl : subset) {
          if (!lbl.is_string()) throw SchemaError("term.subset entries must be strings");
          const int pos = spec.label_position(lbl.get<std::string>());
          if (term.subset.contains(pos)) throw SchemaError("term.subset: duplicate label");
          term.subset = term.subset | IndexSet::single(pos);
          positions.push_back(pos);
        }
        term.alpha = dj::as_number(dj::require_key(tj, "alpha", "term"), "term.alpha");
        // Weights arrive in the order the subset labels were listed; the
        // model contract wants ascending ground positions.
        const std::vector<double> raw =
            dj::as_number_list(dj::require_key(tj, "weights", "term"), "term.weights");
        if (raw.size() != positions.size())
          throw SchemaError("term.weights length must match term.subset");
        std::vector<std::pair<int, double>> tagged;
        for (std::size_t i = 0; i < raw.size(); ++i) tagged.emplace_back(positions[i], raw[i]);
        std::sort(tagged.begin(), tagged.end());
        for (const auto& [pos, w] : tagged) term.weights.push_back(w);
        terms.push_back(std::move(term));
      }
      spec.model = AsymmetricLogisticModel(dim, terms, smooth_flag);
    } else {
      throw SchemaError("unknown model kind '" + spec.kind + "'");
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError("model spec rejected: " + std::string(e.what()));
  }
  return spec;
}

inline ModelSpec load_model_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open model spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_spec(buf.str());
}

}  // namespace xstable
