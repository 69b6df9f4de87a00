// Command-line front end: model ingestion, lattice tables, pair diagnostics,
// verification suites, and max-linear simulation with CSV/JSON reporting.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xstable/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xstable;

namespace {

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw DomainError("write failed for '" + path.string() + "'");
}

// One report.json per run; failures carry the error text verbatim.
struct RunContext {
  std::string command;
  fs::path out_dir;
  json parameters = json::object();
  json results = json::object();
  std::vector<std::string> outputs;
  std::optional<std::string> model_digest;
  bool pass = true;
  std::optional<std::string> error;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write_report() {
    json rep;
    rep["command"] = command;
    rep["model_digest"] = model_digest ? json(*model_digest) : json(nullptr);
    rep["parameters"] = parameters;
    rep["results"] = results;
    rep["outputs"] = outputs;
    rep["pass"] = pass;
    if (error) rep["error"] = *error;
    rep["wall_time_ms"] = static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                              start)
            .count());
    write_text(out_dir / "report.json", rep.dump(2) + "\n");
  }
};

template <class Body>
int guarded_run(RunContext& ctx, Body&& body) {
  try {
    const int code = body();
    ctx.pass = ctx.pass && code == 0;
    ctx.write_report();
    return code;
  } catch (const std::exception& e) {
    ctx.pass = false;
    ctx.error = e.what();
    try {
      ctx.write_report();
    } catch (...) {
      // Reporting must never mask the original failure.
    }
    throw;
  }
}

std::vector<double> parse_grid_levels(const std::string& text) {
  std::vector<double> levels;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    try {
      std::size_t used = 0;
      levels.push_back(std::stod(token, &used));
      if (used != token.size()) throw SchemaError("trailing characters in grid level '" + token + "'");
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception&) {
      throw SchemaError("bad grid level '" + token + "'");
    }
    if (!(levels.back() > 0.0) || !std::isfinite(levels.back()))
      throw SchemaError("grid levels must be positive and finite");
  }
  if (levels.empty()) throw SchemaError("empty grid specification");
  return levels;
}

std::pair<IndexSet, IndexSet> parse_pair_arg(const ModelSpec& spec, const std::string& arg) {
  const std::size_t split = arg.find(';');
  if (split == std::string::npos || arg.find(';', split + 1) != std::string::npos)
    throw SchemaError("pair specification must be 'A;B', got '" + arg + "'");
  return {spec.parse_set(arg.substr(0, split)), spec.parse_set(arg.substr(split + 1))};
}

int run_lattice(const std::string& model_path, const std::string& point_arg, RunContext& ctx) {
  const ModelSpec spec = load_model_spec(model_path);
  ctx.model_digest = spec.digest;
  const EvaluationPoint x = spec.parse_point(point_arg);
  const LatticeTable v =
      visit_model(spec.model, [&](const auto& m) { return exponent_table(m, x); });
  const LatticeTable d = mobius_from_exponent(v);
  const LatticeTable chi = chi_from_mobius(d);
  const double residual = std::max(detail::table_max_diff(exponent_from_mobius(d), v),
                                   detail::table_max_diff(mobius_from_chi(chi), d));
  double min_d = 0.0;
  std::string csv = csv_row({"subset", "V", "d", "chi"});
  for (const IndexSet a : enumerate_subsets(spec.ground())) {
    csv += csv_row(
        {spec.set_label(a), format_real(v.at(a)), format_real(d.at(a)), format_real(chi.at(a))});
    min_d = std::min(min_d, d.at(a));
  }
  csv += csv_row({"roundtrip_residual", format_real(residual), "", ""});
  write_text(ctx.out_dir / "lattice.csv", csv);
  ctx.outputs.push_back("lattice.csv");
  ctx.results["roundtrip_residual"] = residual;
  ctx.results["min_mobius_coefficient"] = min_d;
  // Necessary-condition screen on the inverted table; negative mass cannot
  // come from a genuine dependence structure.
  const bool nonneg = min_d >= -d.zero_tolerance();
  ctx.results["mobius_nonnegative"] = nonneg;
  std::cout << "lattice table over " << (d.entry_count()) << " subsets written to "
            << (ctx.out_dir / "lattice.csv").string() << "\n";
  if (!nonneg)
    std::cout << "warning: negative mobius coefficient " << format_real(min_d)
              << " exceeds rounding tolerance; the table is not a valid dependence structure\n";
  return 0;
}

int run_diag(const std::string& model_path, const std::vector<std::string>& set_args,
             bool all_pairs, const std::string& grid_arg, double tol_arg, int threads,
             RunContext& ctx) {
  const ModelSpec spec = load_model_spec(model_path);
  ctx.model_digest = spec.digest;
  const IndexSet ground = spec.ground();
  const std::vector<double> levels =
      grid_arg.empty() ? default_grid_levels() : parse_grid_levels(grid_arg);
  const std::vector<EvaluationPoint> grid = make_grid(ground, levels);
  const double tol = tol_arg > 0.0 ? tol_arg : default_tolerance(ground);
  std::vector<std::pair<IndexSet, IndexSet>> pairs;
  if (all_pairs) {
    pairs = disjoint_pairs(ground);
  } else {
    for (const std::string& arg : set_args) pairs.push_back(parse_pair_arg(spec, arg));
  }
  if (pairs.empty()) throw SchemaError("no pairs requested: pass --sets 'A;B' or --all-pairs");
  std::string csv = csv_row(
      {"A", "B", "C", "grid_size", "sup_d", "sup_chi", "independent", "ci_possible", "certificate"});
  int dependent = 0;
  for (const auto& [a, b] : pairs) {
    const PairDiagnostic diag = visit_model(
        spec.model, [&](const auto& m) { return diagnose_pair(m, a, b, grid, tol, threads); });
    csv += csv_row({spec.set_label(a), spec.set_label(b),
                    diag.set_c.empty() ? std::string() : spec.set_label(diag.set_c),
                    std::to_string(diag.grid_size), format_real(diag.sup_d),
                    format_real(diag.sup_chi), format_bool(diag.independent),
                    format_bool(diag.ci_possible),
                    diag.certificate ? format_bool(*diag.certificate) : std::string()});
    dependent += diag.independent ? 0 : 1;
  }
  write_text(ctx.out_dir / "diag.csv", csv);
  ctx.outputs.push_back("diag.csv");
  ctx.results["pairs"] = pairs.size();
  ctx.results["dependent_pairs"] = dependent;
  std::cout << "diagnosed " << pairs.size() << " pair(s) on a " << grid.size()
            << "-point grid; results in " << (ctx.out_dir / "diag.csv").string() << "\n";
  return 0;
}

int run_verify(const std::string& model_path, const std::string& suite_arg, std::uint64_t seed,
               int threads, RunContext& ctx) {
  std::optional<ModelSpec> spec;
  if (!model_path.empty()) {
    spec = load_model_spec(model_path);
    ctx.model_digest = spec->digest;
  }
  std::vector<std::string> names;
  if (suite_arg == "all") {
    names = suite_names();
  } else {
    names.push_back(suite_arg);
  }
  std::string csv = csv_row({"suite", "check", "status", "measured", "budget", "note"});
  json suites = json::array();
  bool all_ok = true;
  for (const std::string& name : names) {
    const SuiteReport rep = run_suite(name, spec ? &*spec : nullptr, seed, threads);
    json jsuite;
    jsuite["suite"] = rep.suite;
    jsuite["ok"] = rep.ok();
    jsuite["wall_seconds"] = rep.wall_seconds;
    json jchecks = json::array();
    for (const CheckResult& c : rep.checks) {
      const char* status = c.status == CheckResult::Status::pass   ? "pass"
                           : c.status == CheckResult::Status::fail ? "fail"
                                                                   : "skip";
      std::printf("[%s] %s :: %s", c.status == CheckResult::Status::pass   ? "PASS"
                                   : c.status == CheckResult::Status::fail ? "FAIL"
                                                                           : "SKIP",
                  rep.suite.c_str(), c.name.c_str());
      if (std::isfinite(c.measured))
        std::printf(" (measured %s, budget %s)", format_real(c.measured).c_str(),
                    format_real(c.budget).c_str());
      if (!c.note.empty()) std::printf(" -- %s", c.note.c_str());
      std::printf("\n");
      csv += csv_row({rep.suite, csv_field(c.name), status,
                      std::isfinite(c.measured) ? format_real(c.measured) : std::string(),
                      std::isfinite(c.budget) ? format_real(c.budget) : std::string(),
                      csv_field(c.note)});
      json jc;
      jc["name"] = c.name;
      jc["status"] = status;
      if (std::isfinite(c.measured)) jc["measured"] = c.measured;
      if (std::isfinite(c.budget)) jc["budget"] = c.budget;
      if (!c.note.empty()) jc["note"] = c.note;
      jchecks.push_back(std::move(jc));
    }
    jsuite["checks"] = std::move(jchecks);
    suites.push_back(std::move(jsuite));
    std::printf("suite %s: %s (%.2f s)\n", rep.suite.c_str(), rep.ok() ? "OK" : "FAILED",
                rep.wall_seconds);
    all_ok = all_ok && rep.ok();
  }
  write_text(ctx.out_dir / "verify.csv", csv);
  ctx.outputs.push_back("verify.csv");
  ctx.results["suites"] = std::move(suites);
  ctx.pass = all_ok;
  return all_ok ? 0 : 1;
}

int run_simulate(const std::string& model_path, std::uint64_t n, std::uint64_t seed,
                 RunContext& ctx) {
  const ModelSpec spec = load_model_spec(model_path);
  ctx.model_digest = spec.digest;
  const DiscreteSpectralMeasure* measure = as_discrete(spec.model);
  if (!measure) throw StructuralError("no sampler for this model kind");
  const SampleBatch batch = simulate_max_linear(*measure, n, seed, spec.digest);
  const IndexSet ground = measure->ground();
  {
    std::string header;
    for (std::size_t i = 0; i < spec.labels.size(); ++i) {
      if (i) header += ',';
      header += spec.labels[i];
    }
    std::string csv = header + "\n";
    for (std::size_t r = 0; r < batch.count; ++r) {
      std::vector<std::string> cells;
      cells.reserve(static_cast<std::size_t>(batch.dimension));
      for (int c = 0; c < batch.dimension; ++c) cells.push_back(format_real(batch.at(r, c)));
      csv += csv_row(cells);
    }
    write_text(ctx.out_dir / "samples.csv", csv);
    ctx.outputs.push_back("samples.csv");
  }
  const auto probes = deterministic_probe_points(ground, 10);
  const auto table = ecdf_probe_table(batch, ground, probes, [&](const EvaluationPoint& p) {
    return std::exp(-measure->exponent(ground, p));
  });
  int within = 0;
  {
    std::vector<std::string> head;
    for_each_member(ground, [&](int i) { head.push_back("x_" + spec.labels[static_cast<std::size_t>(i)]); });
    head.insert(head.end(), {"empirical", "expected", "se", "within_3se"});
    std::string csv = csv_row(head);
    for (const EcdfProbe& probe : table) {
      std::vector<std::string> cells;
      for_each_member(ground, [&](int i) { cells.push_back(format_real(probe.point[i])); });
      cells.push_back(format_real(probe.empirical));
      cells.push_back(format_real(probe.expected));
      cells.push_back(format_real(probe.se));
      cells.push_back(format_bool(probe.within_three_se));
      csv += csv_row(cells);
      within += probe.within_three_se ? 1 : 0;
    }
    write_text(ctx.out_dir / "probes.csv", csv);
    ctx.outputs.push_back("probes.csv");
  }
  ctx.results["probes_within_three_se"] = within;
  ctx.results["probe_count"] = static_cast<int>(table.size());
  const bool ok = within >= 9;
  std::cout << "simulated " << n << " draws; " << within << "/" << table.size()
            << " distribution probes within three standard errors\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"max-stable dependence structure toolkit"};
  app.require_subcommand(1);

  std::string model_path;
  std::string point_arg;
  std::string grid_arg;
  std::string suite_arg = "all";
  std::string out_arg = ".";
  std::vector<std::string> set_args;
  bool all_pairs = false;
  double tol_arg = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 0;
  int threads = 1;

  const auto add_common = [&](CLI::App* cmd, bool with_threads) {
    cmd->add_option("--out", out_arg, "output directory (created if missing)")
        ->default_val(".");
    if (with_threads)
      cmd->add_option("--threads", threads, "worker threads for grid sweeps")
          ->envname("XSTABLE_THREADS")
          ->check(CLI::Range(1, 64))
          ->default_val(1);
  };

  CLI::App* lattice = app.add_subcommand(
      "lattice", "evaluate the exponent/mobius/chi tables at a point");
  lattice->add_option("--model", model_path, "model specification file")
      ->required()
      ->check(CLI::ExistingFile);
  lattice->add_option("--point", point_arg, "comma-separated coordinates")->required();
  add_common(lattice, false);

  CLI::App* diag = app.add_subcommand("diag", "pairwise dependence diagnostics on a grid");
  diag->add_option("--model", model_path, "model specification file")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* sets_opt =
      diag->add_option("--sets", set_args, "pair of index sets 'A;B' (labels joined by '+')");
  diag->add_flag("--all-pairs", all_pairs, "diagnose every unordered disjoint pair")
      ->excludes(sets_opt);
  diag->add_option("--grid", grid_arg, "comma-separated per-coordinate grid levels");
  diag->add_option("--tol", tol_arg, "zero tolerance for verdicts")->check(CLI::PositiveNumber);
  add_common(diag, true);

  CLI::App* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("--model", model_path, "optional model specification file")
      ->check(CLI::ExistingFile);
  verify->add_option("--suite", suite_arg, "suite name or 'all'")
      ->default_val("all")
      ->check(CLI::IsMember({"all", "mobius", "lemmas", "theorem", "density", "simulate"}));
  verify->add_option("--seed", seed, "seed for the seeded fixtures")->required();
  add_common(verify, true);

  CLI::App* simulate = app.add_subcommand("simulate", "draw max-linear samples and probe the fit");
  simulate->add_option("--model", model_path, "model specification file")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--n", n_samples, "sample count")
      ->required()
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
  simulate->add_option("--seed", seed, "simulation seed")->required();
  add_common(simulate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunContext ctx;
  ctx.out_dir = fs::path(out_arg);
  try {
    fs::create_directories(ctx.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot create output directory: " << e.what() << "\n";
    return 2;
  }

  try {
    if (lattice->parsed()) {
      ctx.command = "lattice";
      ctx.parameters = {{"model", model_path}, {"point", point_arg}};
      return guarded_run(ctx, [&] { return run_lattice(model_path, point_arg, ctx); });
    }
    if (diag->parsed()) {
      ctx.command = "diag";
      ctx.parameters = {{"model", model_path},
                        {"sets", set_args},
                        {"all_pairs", all_pairs},
                        {"grid", grid_arg.empty() ? json(nullptr) : json(grid_arg)},
                        {"tol", tol_arg > 0.0 ? json(tol_arg) : json(nullptr)},
                        {"threads", threads}};
      return guarded_run(
          ctx, [&] { return run_diag(model_path, set_args, all_pairs, grid_arg, tol_arg, threads, ctx); });
    }
    if (verify->parsed()) {
      ctx.command = "verify";
      ctx.parameters = {{"model", model_path.empty() ? json(nullptr) : json(model_path)},
                        {"suite", suite_arg},
                        {"seed", seed},
                        {"threads", threads}};
      return guarded_run(ctx, [&] { return run_verify(model_path, suite_arg, seed, threads, ctx); });
    }
    ctx.command = "simulate";
    ctx.parameters = {{"model", model_path}, {"n", n_samples}, {"seed", seed}};
    return guarded_run(ctx, [&] { return run_simulate(model_path, n_samples, seed, ctx); });
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
