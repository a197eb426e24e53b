#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>

#include "sepcov/detequiv.hpp"
#include "sepcov/ensemble.hpp"
#include "sepcov/errors.hpp"
#include "sepcov/examples.hpp"
#include "sepcov/experiments.hpp"
#include "sepcov/io.hpp"
#include "sepcov/model.hpp"

namespace sepcov::cli {

namespace {

std::string strip(std::string_view text) {
  std::string out;
  for (const char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

double parse_real(std::string_view text, std::string_view whole) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw DomainError("cannot parse complex number '" + std::string(whole) + "'");
  return value;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<Eigen::Index> parse_index_list(std::string_view text) {
  std::vector<Eigen::Index> out;
  for (const auto& part : split(text, ',')) {
    const std::string item = strip(part);
    long long v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size() || v < 1)
      throw DomainError("cannot parse positive integer '" + item + "' in list '" + std::string(text) + "'");
    out.push_back(v);
  }
  return out;
}

int parse_threads(const std::string& text) {
  if (text == "auto") return 0;
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || v < 1)
    throw DomainError("--threads expects a positive integer or 'auto', got '" + text + "'");
  return v;
}

struct Globals {
  std::uint64_t seed = kDefaultSeed;
  std::string threads = "1";
  std::string format;
  std::string out = "stdout";
};

class Emitter {
 public:
  Emitter(const Globals& g, std::ostream& out) : g_(g), out_(out) {}

  void operator()(const std::string& text) const {
    if (g_.out == "stdout" || g_.out == "-")
      out_ << text;
    else
      write_text(g_.out, text);
  }

 private:
  const Globals& g_;
  std::ostream& out_;
};

std::string format_or(const Globals& g, std::string_view fallback, bool csv_allowed, std::string_view command) {
  const std::string f = g.format.empty() ? std::string(fallback) : g.format;
  if (f == "csv" && !csv_allowed) throw DomainError(std::string(command) + ": only --format json is supported");
  return f;
}

struct ExampleFlags {
  std::string name;
  int terms = 0;
  std::optional<std::uint64_t> seed;
};

struct ResolvedExample {
  ExampleSpec spec;
  std::optional<EntryDistribution> dist;
};

ResolvedExample resolve_example(const std::string& spec_path, const ExampleFlags& flags, std::string_view command) {
  if (!spec_path.empty() && !flags.name.empty())
    throw DomainError(std::string(command) + ": give either a model spec or --example, not both");
  if (!flags.name.empty()) {
    ExampleSpec spec{parse_example(flags.name), 1, flags.terms, flags.seed.value_or(kDefaultSeed)};
    return {spec, std::nullopt};
  }
  if (spec_path.empty()) throw DomainError(std::string(command) + ": a model spec or --example is required");
  LoadedModel loaded = load_model_spec(spec_path);
  if (!loaded.example)
    throw DomainError(std::string(command) + ": the model spec must be a generator reference such as " +
                      "{\"generator\": {\"name\": \"example1\", ...}} because n varies");
  return {*loaded.example, loaded.dist};
}

}  // namespace

Complex parse_complex(std::string_view text) {
  const std::string s = strip(text);
  if (s.empty()) throw DomainError("cannot parse empty complex number");
  if (s.back() != 'i' && s.back() != 'j') return parse_real(s, text);
  const std::string body = s.substr(0, s.size() - 1);
  // Split at the last sign that is not a leading sign or part of an exponent.
  std::size_t cut = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      cut = k;
      break;
    }
  }
  const std::string re = cut == std::string::npos ? "" : body.substr(0, cut);
  std::string im = cut == std::string::npos ? body : body.substr(cut);
  if (im.empty() || im == "+") im = "1";
  if (im == "-") im = "-1";
  return {re.empty() ? 0.0 : parse_real(re, text), parse_real(im, text)};
}

std::vector<Complex> parse_complex_list(std::string_view text) {
  std::vector<Complex> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_complex(part));
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deterministic equivalents and simulations for separable covariance mixtures Y = sum_r A_r X B_r"};
  app.name(args.empty() ? "sepcov" : args.front());
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Master seed (default " + std::to_string(kDefaultSeed) + ")");
  app.add_option("--threads", g.threads, "Worker threads: a positive integer or 'auto' (default 1)");
  app.add_option("--format", g.format, "Output format: csv or json (default depends on the command)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", g.out, "Output path, or 'stdout' (default)");

  const std::string complex_help = "complex numbers are written a+bi or a-bi, e.g. 1.5+0.1i";

  std::string spec_path;
  std::string z_list;
  double tol = SolverOptions{}.tolerance;
  int max_iter = SolverOptions{}.max_iterations;

  auto* check = app.add_subcommand("check", "Evaluate the assumption constants of a model (exit 2 if tau_raw <= 0)");
  check->add_option("spec", spec_path, "JSON model spec")->required();

  auto* solve = app.add_subcommand("solve", "Solve the dual system at given z; " + complex_help);
  solve->add_option("spec", spec_path, "JSON model spec")->required();
  solve->add_option("--z-list", z_list, "Comma-separated points of the upper half plane")->required();
  solve->add_option("--tol", tol, "Residual tolerance");
  solve->add_option("--max-iter", max_iter, "Iteration budget per attempt");

  double eta = 0.05;
  std::size_t points = 600;
  std::optional<double> lo;
  std::optional<double> hi;
  auto* density = app.add_subcommand("density", "Deterministic density x -> Im s(x + i eta) / pi as CSV x,density");
  density->add_option("spec", spec_path, "JSON model spec")->required();
  density->add_option("--eta", eta, "Distance to the real axis (default 0.05)");
  density->add_option("--points", points, "Grid points (default 600)")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  density->add_option("--lo", lo, "Left end of the grid (default -0.05 * support bound)");
  density->add_option("--hi", hi, "Right end of the grid (default 1.05 * support bound)");
  density->add_option("--tol", tol, "Residual tolerance");

  std::string dist_name;
  auto* simulate = app.add_subcommand("simulate", "One realization: eigenvalues, empirical deltas and companion transform; " + complex_help);
  simulate->add_option("spec", spec_path, "JSON model spec")->required();
  simulate->add_option("--dist", dist_name,
                       "Entry law overriding the model's: complex_gaussian, real_gaussian, rademacher, student_t[:dof], "
                       "similar_gaussian:<law>");
  simulate->add_option("--z-list", z_list, "Comma-separated evaluation points (default 1+1i)");

  ExampleFlags ex_flags;
  std::string n_list;
  int reps = 25;
  auto add_example_flags = [&](CLI::App* sub) {
    sub->add_option("spec", spec_path, "Generator model spec (alternative to --example)");
    sub->add_option("--example", ex_flags.name, "example1, example2 or example3");
    sub->add_option("--R", ex_flags.terms, "Number of terms (default 2, 4, 4)");
    sub->add_option("--example-seed", ex_flags.seed, "Seed of the Haar unitaries / permutations");
    sub->add_option("--dist", dist_name, "Entry law overriding the example's");
  };
  auto* errors = app.add_subcommand("errors", "A-/B-Error table over n and z; " + complex_help);
  add_example_flags(errors);
  errors->add_option("--n-list", n_list, "Comma-separated sample sizes, e.g. 10,20,40,80")->required();
  errors->add_option("--reps", reps, "Realizations per n (default 25)");
  errors->add_option("--z-list", z_list, "Comma-separated points of the upper half plane")->required();

  Eigen::Index uni_n = 200;
  std::string z_one;
  auto* universality = app.add_subcommand("universality", "Native entries against the similar Gaussian; " + complex_help);
  add_example_flags(universality);
  universality->add_option("--n", uni_n, "Sample size (default 200)");
  universality->add_option("--reps", reps, "Realizations (default 10)");
  universality->add_option("--z", z_one, "Evaluation point")->required();

  std::string example_name;
  Eigen::Index example_n = 0;
  bool dense = false;
  auto* example = app.add_subcommand("example", "Emit the model spec of a benchmark example (seeded by --seed)");
  example->add_option("name", example_name, "example1, example2 or example3")->required();
  example->add_option("--n", example_n, "Sample size n")->required();
  example->add_option("--R", ex_flags.terms, "Number of terms (default 2, 4, 4)");
  example->add_flag("--dense", dense, "Expand every matrix instead of referencing the generator");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const Emitter emit(g, out);
  try {
    const int threads = parse_threads(g.threads);
    SolverOptions opts;
    opts.tolerance = tol;
    opts.max_iterations = max_iter;

    if (check->parsed()) {
      format_or(g, "json", false, "check");
      const LoadedModel loaded = load_model_spec(spec_path);
      const AssumptionReport report = check_assumptions(loaded.model);
      emit(to_json(report));
      if (!report.admissible()) {
        err << "check: tau_raw = " << report.tau_raw << " <= 0, the model is not admissible\n";
        return kAssumptions;
      }
      return kOk;
    }

    if (solve->parsed()) {
      format_or(g, "json", false, "solve");
      const LoadedModel loaded = load_model_spec(spec_path);
      const DualSystem sys(loaded.model);
      std::vector<DualSolution> sols;
      for (const Complex z : parse_complex_list(z_list)) sols.push_back(solve_dual_system(sys, z, opts));
      emit(to_json(std::span<const DualSolution>(sols)));
      return kOk;
    }

    if (density->parsed()) {
      const std::string fmt = format_or(g, "csv", true, "density");
      const LoadedModel loaded = load_model_spec(spec_path);
      if (lo.has_value() != hi.has_value()) throw DomainError("density: give both --lo and --hi or neither");
      const double bound = support_bound(loaded.model);
      const std::vector<double> grid =
          lo ? linear_grid(*lo, *hi, points) : linear_grid(-0.05 * bound, 1.05 * bound, points);
      DensityStats stats;
      const DensityCurve curve = density_curve(loaded.model, eta, grid, opts, threads, &stats);
      err << "support_bound " << bound << "\n"
          << "solver iterations " << stats.total_iterations << ", continuation solves " << stats.ladder_solves
          << ", max residual " << stats.max_residual << "\n";
      emit(fmt == "csv" ? density_csv(curve) : to_json(curve));
      return kOk;
    }

    if (simulate->parsed()) {
      format_or(g, "json", false, "simulate");
      const LoadedModel loaded = load_model_spec(spec_path);
      const EntryDistribution dist = dist_name.empty() ? loaded.dist : EntryDistribution::parse(dist_name);
      const auto zs = parse_complex_list(z_list.empty() ? "1+1i" : z_list);
      for (const Complex z : zs) require_upper_half_plane(z, "simulate");
      const Realization real = sepcov::simulate(loaded.model, dist, g.seed);
      SimulationDump dump{dist.name(), g.seed, real.eig_s.eigenvalues.reverse(), real.eig_s_tilde.eigenvalues.reverse(),
                          {}};
      for (const Complex z : zs)
        dump.points.push_back({z, empirical_delta(loaded.model, real.eig_s, z, Side::A),
                               empirical_delta(loaded.model, real.eig_s_tilde, z, Side::B),
                               empirical_companion_stieltjes(real.eig_s_tilde, z)});
      emit(to_json(dump));
      return kOk;
    }

    if (errors->parsed() || universality->parsed()) {
      const bool is_errors = errors->parsed();
      const std::string fmt = format_or(g, "csv", true, is_errors ? "errors" : "universality");
      ResolvedExample resolved = resolve_example(spec_path, ex_flags, is_errors ? "errors" : "universality");
      StudyOptions study;
      study.dist = dist_name.empty() ? resolved.dist : std::optional(EntryDistribution::parse(dist_name));
      study.solver = opts;
      study.threads = threads;
      if (is_errors) {
        const auto ns = parse_index_list(n_list);
        const auto zs = parse_complex_list(z_list);
        const ConvergenceTable table = run_error_study(resolved.spec, ns, reps, zs, g.seed, study);
        emit(fmt == "csv" ? convergence_csv(table) : to_json(table));
      } else {
        const int uni_reps = universality->count("--reps") > 0 ? reps : 10;
        const UniversalitySummary summary =
            run_universality(resolved.spec, uni_n, uni_reps, parse_complex(z_one), g.seed, study);
        emit(fmt == "csv" ? universality_csv(summary) : to_json(summary));
      }
      return kOk;
    }

    if (example->parsed()) {
      format_or(g, "json", false, "example");
      const ExampleSpec spec{parse_example(example_name), example_n, ex_flags.terms, g.seed};
      if (!dense) {
        emit(generator_spec_json(spec));
      } else {
        BuiltExample built = build_example(spec);
        emit(dense_spec_json(LoadedModel{std::move(built.model), std::move(built.m), std::move(built.m_tilde),
                                         std::move(built.dist), spec}));
      }
      return kOk;
    }
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kSolver;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kSolver;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace sepcov::cli
