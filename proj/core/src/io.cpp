#include "sepcov/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sepcov/errors.hpp"

namespace sepcov {

using nlohmann::json;

namespace {

std::string field(std::string_view parent, std::string_view key) {
  return parent.empty() ? std::string(key) : std::string(parent) + "." + std::string(key);
}

std::string index_field(std::string_view parent, std::size_t i) {
  return std::string(parent) + "[" + std::to_string(i) + "]";
}

Complex parse_complex(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ParseError(where + ": expected a number or an [re, im] pair");
}

std::int64_t parse_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where + ": expected an integer");
  return j.get<std::int64_t>();
}

std::uint64_t parse_seed(const json& obj, const std::string& where) {
  if (!obj.contains("seed")) return kDefaultSeed;
  const json& s = obj["seed"];
  if (s.is_number_unsigned()) return s.get<std::uint64_t>();
  if (s.is_number_integer() && s.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(s.get<std::int64_t>());
  throw ParseError(field(where, "seed") + ": expected a nonnegative integer");
}

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  return j;
}

bool is_complex_literal(const json& j) {
  return j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number());
}

struct DenseLayout {
  Eigen::Index dim;
  bool nested;
};

/// Flat row-major when every element is a number or [re, im] pair and the
/// count is a perfect square; otherwise nested rows of equal length.
DenseLayout dense_layout(const json& dense, const std::string& where) {
  if (!dense.is_array() || dense.empty()) throw ParseError(where + ": expected a non-empty array");
  const bool flat = std::all_of(dense.begin(), dense.end(), is_complex_literal);
  if (flat) {
    const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(dense.size()))));
    if (side * side == static_cast<Eigen::Index>(dense.size())) return {side, false};
  }
  const auto rows = static_cast<Eigen::Index>(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i)
    if (!dense[i].is_array() || static_cast<Eigen::Index>(dense[i].size()) != rows)
      throw ParseError(index_field(where, i) + ": expected " + std::to_string(dense.size()) +
                       " flat entries in total or rows of " + std::to_string(dense.size()) + " entries");
  return {rows, true};
}

/// Dimension of a matrix object when it can be read off its entries.
std::optional<Eigen::Index> implied_dim(const json& mat, const std::string& where) {
  require_object(mat, where);
  if (mat.contains("diag")) {
    if (!mat["diag"].is_array()) throw ParseError(field(where, "diag") + ": expected an array");
    return static_cast<Eigen::Index>(mat["diag"].size());
  }
  if (mat.contains("permutation")) {
    if (!mat["permutation"].is_array()) throw ParseError(field(where, "permutation") + ": expected an array");
    return static_cast<Eigen::Index>(mat["permutation"].size());
  }
  if (mat.contains("dense")) return dense_layout(mat["dense"], field(where, "dense")).dim;
  return std::nullopt;
}

CMatrix parse_matrix(const json& mat, Eigen::Index dim, const std::string& where) {
  implied_dim(mat, where);
  const auto check_dim = [&](Eigen::Index got, const std::string& key) {
    if (got != dim)
      throw ParseError(field(where, key) + ": expected dimension " + std::to_string(dim) + ", got " +
                       std::to_string(got));
  };
  if (mat.contains("dense")) {
    const json& dense = mat["dense"];
    const std::string key = field(where, "dense");
    const DenseLayout layout = dense_layout(dense, key);
    check_dim(layout.dim, "dense");
    CMatrix out(dim, dim);
    if (layout.nested) {
      for (Eigen::Index i = 0; i < dim; ++i) {
        const json& row = dense[static_cast<std::size_t>(i)];
        const std::string row_key = index_field(key, static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim)
          throw ParseError(row_key + ": expected a row of " + std::to_string(dim) + " entries");
        for (Eigen::Index k = 0; k < dim; ++k)
          out(i, k) = parse_complex(row[static_cast<std::size_t>(k)], index_field(row_key, static_cast<std::size_t>(k)));
      }
    } else {
      for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index k = 0; k < dim; ++k) {
          const auto flat = static_cast<std::size_t>(i * dim + k);
          out(i, k) = parse_complex(dense[flat], index_field(key, flat));
        }
    }
    return out;
  }
  if (mat.contains("diag")) {
    const json& diag = mat["diag"];
    check_dim(static_cast<Eigen::Index>(diag.size()), "diag");
    CMatrix out = CMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      out(i, i) = parse_complex(diag[static_cast<std::size_t>(i)], index_field(field(where, "diag"), static_cast<std::size_t>(i)));
    return out;
  }
  if (mat.contains("permutation")) {
    const json& perm = mat["permutation"];
    const std::string key = field(where, "permutation");
    check_dim(static_cast<Eigen::Index>(perm.size()), "permutation");
    CMatrix out = CMatrix::Zero(dim, dim);
    std::vector<bool> seen(static_cast<std::size_t>(dim), false);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const std::string entry = index_field(key, static_cast<std::size_t>(i));
      const std::int64_t p = parse_int(perm[static_cast<std::size_t>(i)], entry);
      if (p < 0 || p >= dim || seen[static_cast<std::size_t>(p)])
        throw ParseError(entry + ": not a permutation of 0.." + std::to_string(dim - 1));
      seen[static_cast<std::size_t>(p)] = true;
      out(i, p) = 1.0;
    }
    return out;
  }
  if (mat.contains("generator")) {
    const std::string key = field(where, "generator");
    const json& gen = require_object(mat["generator"], key);
    if (!gen.contains("name") || !gen["name"].is_string()) throw ParseError(field(key, "name") + ": expected a string");
    const auto name = gen["name"].get<std::string>();
    const std::uint64_t seed = parse_seed(gen, key);
    const json params = gen.contains("params") ? gen["params"] : json::object();
    require_object(params, field(key, "params"));
    if (params.contains("dim") && parse_int(params["dim"], field(key, "params.dim")) != dim)
      throw ParseError(field(key, "params.dim") + ": does not match dimension " + std::to_string(dim));
    if (name == "identity") return CMatrix::Identity(dim, dim);
    if (name == "fourier") return fourier_matrix(dim);
    if (name == "haar_unitary") return haar_unitary(dim, seed);
    if (name == "random_permutation") return random_permutation_matrix(dim, seed);
    if (name == "shift") {
      const std::int64_t k = params.contains("k") ? parse_int(params["k"], field(key, "params.k")) : 1;
      if (k < 0) throw ParseError(field(key, "params.k") + ": must be nonnegative");
      return shift_matrix(dim, k);
    }
    throw ParseError(field(key, "name") + ": unknown matrix generator '" + name +
                     "' (expected identity, fourier, haar_unitary, random_permutation, shift)");
  }
  throw ParseError(where + ": expected one of dense, diag, permutation, generator");
}

std::vector<CMatrix> parse_family(const json& family, Eigen::Index dim, const std::string& where) {
  if (!family.is_array() || family.empty()) throw ParseError(where + ": expected a non-empty array of matrices");
  std::vector<CMatrix> out;
  for (std::size_t r = 0; r < family.size(); ++r) out.push_back(parse_matrix(family[r], dim, index_field(where, r)));
  return out;
}

Eigen::Index resolve_dim(const json& doc, const char* key, const json& family, const std::string& family_key) {
  std::optional<Eigen::Index> dim;
  if (doc.contains(key)) {
    const std::int64_t v = parse_int(doc[key], key);
    if (v < 1) throw ParseError(std::string(key) + ": must be positive");
    dim = v;
  }
  if (!family.is_array()) throw ParseError(family_key + ": expected a non-empty array of matrices");
  for (std::size_t r = 0; r < family.size(); ++r) {
    const auto implied = implied_dim(family[r], index_field(family_key, r));
    if (!implied) continue;
    if (dim && *dim != *implied)
      throw ParseError(index_field(family_key, r) + ": dimension " + std::to_string(*implied) + " does not match " +
                       key + " = " + std::to_string(*dim));
    dim = implied;
  }
  if (!dim) throw ParseError(std::string(key) + ": required when " + family_key + " holds only generator matrices");
  return *dim;
}

void apply_overrides(const json& doc, LoadedModel& out) {
  if (doc.contains("M")) out.m = parse_matrix(doc["M"], out.model.d(), "M");
  if (doc.contains("M_tilde")) out.m_tilde = parse_matrix(doc["M_tilde"], out.model.n(), "M_tilde");
  if (doc.contains("dist")) {
    if (!doc["dist"].is_string()) throw ParseError("dist: expected a string");
    try {
      out.dist = EntryDistribution::parse(doc["dist"].get<std::string>());
    } catch (const DomainError& e) {
      throw ParseError(std::string("dist: ") + e.what());
    }
  }
}

LoadedModel parse_generator_model(const json& doc) {
  const json& gen = require_object(doc["generator"], "generator");
  if (!gen.contains("name") || !gen["name"].is_string()) throw ParseError("generator.name: expected a string");
  ExampleSpec spec;
  try {
    spec.which = parse_example(gen["name"].get<std::string>());
  } catch (const DomainError& e) {
    throw ParseError(std::string("generator.name: ") + e.what());
  }
  spec.seed = parse_seed(gen, "generator");
  const json params = gen.contains("params") ? gen["params"] : json::object();
  require_object(params, "generator.params");
  if (!params.contains("n")) throw ParseError("generator.params.n: required");
  spec.n = parse_int(params["n"], "generator.params.n");
  if (params.contains("R")) spec.terms = static_cast<int>(parse_int(params["R"], "generator.params.R"));
  BuiltExample ex = [&] {
    try {
      return build_example(spec);
    } catch (const DomainError& e) {
      throw ParseError(std::string("generator.params: ") + e.what());
    }
  }();
  if (doc.contains("d") && parse_int(doc["d"], "d") != ex.model.d())
    throw ParseError("d: does not match the generated model (d = " + std::to_string(ex.model.d()) + ")");
  if (doc.contains("n") && parse_int(doc["n"], "n") != ex.model.n())
    throw ParseError("n: does not match the generated model (n = " + std::to_string(ex.model.n()) + ")");
  if (doc.contains("R") && parse_int(doc["R"], "R") != static_cast<std::int64_t>(ex.model.terms()))
    throw ParseError("R: does not match the generated model (R = " + std::to_string(ex.model.terms()) + ")");
  LoadedModel out{std::move(ex.model), std::move(ex.m), std::move(ex.m_tilde), std::move(ex.dist), spec};
  apply_overrides(doc, out);
  return out;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json dense_json(const CMatrix& m) {
  json flat = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) flat.push_back(complex_json(m(i, k)));
  return json{{"dense", std::move(flat)}};
}

json vector_json(const RVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json solution_json(const DualSolution& sol) {
  return json{{"z", complex_json(sol.z)},
              {"delta_a", matrix_json(sol.delta_a)},
              {"delta_b", matrix_json(sol.delta_b)},
              {"companion_stieltjes", complex_json(companion_stieltjes(sol))},
              {"residual", sol.residual},
              {"iterations", sol.iterations},
              {"damping_final", sol.damping_final}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

LoadedModel parse_model_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model spec: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model spec: expected a JSON object at the top level");
  if (doc.contains("generator")) return parse_generator_model(doc);
  if (!doc.contains("A")) throw ParseError("A: required");
  if (!doc.contains("B")) throw ParseError("B: required");
  const Eigen::Index d = resolve_dim(doc, "d", doc["A"], "A");
  const Eigen::Index n = resolve_dim(doc, "n", doc["B"], "B");
  auto a = parse_family(doc["A"], d, "A");
  auto b = parse_family(doc["B"], n, "B");
  if (a.size() != b.size())
    throw ParseError("B: expected " + std::to_string(a.size()) + " matrices to match A, got " + std::to_string(b.size()));
  if (doc.contains("R") && parse_int(doc["R"], "R") != static_cast<std::int64_t>(a.size()))
    throw ParseError("R: does not match the number of matrices in A (" + std::to_string(a.size()) + ")");
  LoadedModel out{[&] {
                    try {
                      return MixtureModel(std::move(a), std::move(b));
                    } catch (const Error& e) {
                      throw ParseError(std::string("model spec: ") + e.what());
                    }
                  }(),
                  CMatrix::Identity(d, d), CMatrix::Identity(n, n), EntryDistribution::complex_gaussian(), std::nullopt};
  apply_overrides(doc, out);
  return out;
}

LoadedModel load_model_spec(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  return parse_model_spec(text);
}

std::string generator_spec_json(const ExampleSpec& spec) {
  const BuiltExample ex = build_example(spec);
  json doc{{"d", ex.model.d()},
           {"n", ex.model.n()},
           {"R", ex.model.terms()},
           {"generator",
            {{"name", std::string(to_string(spec.which))},
             {"params", {{"n", spec.n}, {"R", resolved_terms(spec)}}},
             {"seed", spec.seed}}}};
  return dump(doc);
}

std::string dense_spec_json(const LoadedModel& loaded) {
  json a = json::array();
  json b = json::array();
  for (std::size_t r = 0; r < loaded.model.terms(); ++r) {
    a.push_back(dense_json(loaded.model.a(r)));
    b.push_back(dense_json(loaded.model.b(r)));
  }
  json doc{{"d", loaded.model.d()},
           {"n", loaded.model.n()},
           {"R", loaded.model.terms()},
           {"A", std::move(a)},
           {"B", std::move(b)},
           {"M", dense_json(loaded.m)},
           {"M_tilde", dense_json(loaded.m_tilde)},
           {"dist", loaded.dist.name()}};
  return dump(doc);
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string to_json(const AssumptionReport& report) {
  json doc{{"c_star", report.c_star},
           {"sigma_sq", report.sigma_sq},
           {"sum_norm_sq_a", report.sum_norm_sq_a},
           {"sum_norm_sq_b", report.sum_norm_sq_b},
           {"op_norm_aa", report.op_norm_aa},
           {"op_norm_bb", report.op_norm_bb},
           {"lam_min_aa", report.lam_min_aa},
           {"lam_min_bb", report.lam_min_bb},
           {"lam_min_gram_a", report.lam_min_gram_a},
           {"lam_min_gram_b", report.lam_min_gram_b},
           {"tau_raw", report.tau_raw},
           {"admissible", report.admissible()},
           {"support_bound", support_bound(report)},
           {"gram_a", matrix_json(report.gram_a)},
           {"gram_b", matrix_json(report.gram_b)}};
  return dump(doc);
}

std::string to_json(const DualSolution& sol) { return dump(solution_json(sol)); }

std::string to_json(std::span<const DualSolution> sols) {
  json arr = json::array();
  for (const auto& sol : sols) arr.push_back(solution_json(sol));
  return dump(json{{"solutions", std::move(arr)}});
}

std::string to_json(const DensityCurve& curve) {
  return dump(json{{"eta", curve.eta}, {"x", curve.xs}, {"density", curve.ys}});
}

std::string to_json(const ConvergenceTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"n", r.n},
                    {"z", complex_json(r.z)},
                    {"mean_a", r.mean_a},
                    {"q10_a", r.q10_a},
                    {"q90_a", r.q90_a},
                    {"mean_b", r.mean_b},
                    {"q10_b", r.q10_b},
                    {"q90_b", r.q90_b},
                    {"failures", r.failures}});
  return dump(json{{"reps", table.reps}, {"rows", std::move(rows)}});
}

std::string to_json(const UniversalitySummary& s) {
  return dump(json{{"n", s.n},
                   {"z", complex_json(s.z)},
                   {"reps", s.reps},
                   {"failures", s.failures},
                   {"native", s.native_label},
                   {"gaussian", s.gaussian_label},
                   {"diff_a", s.diff_a},
                   {"diff_b", s.diff_b},
                   {"mean_a", s.mean_a},
                   {"q10_a", s.q10_a},
                   {"q90_a", s.q90_a},
                   {"mean_b", s.mean_b},
                   {"q10_b", s.q10_b},
                   {"q90_b", s.q90_b}});
}

std::string to_json(const SimulationDump& d) {
  json points = json::array();
  for (const auto& p : d.points)
    points.push_back({{"z", complex_json(p.z)},
                      {"delta_hat_a", matrix_json(p.delta_a)},
                      {"delta_hat_b", matrix_json(p.delta_b)},
                      {"companion_stieltjes", complex_json(p.companion)}});
  return dump(json{{"dist", d.dist},
                   {"seed", d.seed},
                   {"d", d.eigenvalues_s.size()},
                   {"n", d.eigenvalues_s_tilde.size()},
                   {"eigenvalues_s", vector_json(d.eigenvalues_s)},
                   {"eigenvalues_s_tilde", vector_json(d.eigenvalues_s_tilde)},
                   {"points", std::move(points)}});
}

std::string density_csv(const DensityCurve& curve) {
  std::string out = "x,density\n";
  for (std::size_t k = 0; k < curve.xs.size(); ++k)
    out += format_double(curve.xs[k]) + "," + format_double(curve.ys[k]) + "\n";
  return out;
}

std::string eigenvalue_csv(const RVector& eigenvalues) {
  std::string out = "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    out += std::to_string(i) + "," + format_double(eigenvalues(i)) + "\n";
  return out;
}

std::string convergence_csv(const ConvergenceTable& table) {
  std::string out = "n,z_re,z_im,mean_a,q10_a,q90_a,mean_b,q10_b,q90_b,failures\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.n);
    for (const double v : {r.z.real(), r.z.imag(), r.mean_a, r.q10_a, r.q90_a, r.mean_b, r.q10_b, r.q90_b})
      out += "," + format_double(v);
    out += "," + std::to_string(r.failures) + "\n";
  }
  return out;
}

std::string universality_csv(const UniversalitySummary& s) {
  std::string out = "n,z_re,z_im,reps,failures,mean_a,q10_a,q90_a,mean_b,q10_b,q90_b\n";
  out += std::to_string(s.n) + "," + format_double(s.z.real()) + "," + format_double(s.z.imag()) + "," +
         std::to_string(s.reps) + "," + std::to_string(s.failures);
  for (const double v : {s.mean_a, s.q10_a, s.q90_a, s.mean_b, s.q10_b, s.q90_b}) out += "," + format_double(v);
  return out + "\n";
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error("write to '" + path.string() + "' failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace sepcov
