#include "freelab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "freelab/brown.hpp"
#include "freelab/errors.hpp"
#include "freelab/freemoments.hpp"
#include "freelab/matrixlab.hpp"
#include "freelab/verify.hpp"

namespace freelab::cli {

using json = nlohmann::ordered_json;

namespace {

// ------------------------------------------------------------ JSON output

void write_json(std::string& out, const json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner + json(key).dump() + ": ";
        write_json(out, item, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write_json(out, v[i], indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? fmt::format("{:.17g}", d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

std::string fmt17(double x) { return fmt::format("{:.17g}", x); }

// ---------------------------------------------------------------- parsing

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw DomainError(what + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw DomainError(what + " is empty");
  return out;
}

std::vector<int> parse_ints(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (double d : parse_doubles(text, what)) {
    if (d != std::floor(d)) throw DomainError(what + " must be integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

RhoProfile read_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open profile file '" + path + "'");
  return RhoProfile::from_csv(in);
}

SpectralSample read_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open spectrum file '" + path + "'");
  return read_spectrum_csv(in);
}

json labels_json(const StarWord& w) {
  json a = json::array();
  for (int l : w.labels()) a.push_back(l);
  return a;
}

// Per-label correlations: one value for all labels or one per label.
std::vector<double> rho_per_label(const std::string& text, int labels) {
  auto rhos = parse_doubles(text, "--rho");
  if (rhos.size() == 1) rhos.assign(static_cast<std::size_t>(labels), rhos[0]);
  if (static_cast<int>(rhos.size()) < labels) {
    throw DomainError(fmt::format("--rho gives {} values but the word uses {} labels", rhos.size(), labels));
  }
  return rhos;
}

// The built-in deterministic matrices: D alternates +1/-1 on the diagonal,
// E is +1 on the first half and -1 on the second.
std::vector<Matrix> builtin_deterministic(int n) {
  Matrix d = Matrix::Zero(n, n), e = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = i % 2 == 0 ? 1.0 : -1.0;
    e(i, i) = i < n / 2 ? 1.0 : -1.0;
  }
  return {d, e};
}

// ------------------------------------------------------------------ state

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  std::string tier = "quick";
  double inject_bias = 0.0;
  int threads = 0;
};

struct Output {
  json report;
  std::string csv;
  std::string default_format = "json";
  int status = ok;
};

json comparison(double theory, const std::string& method, const MomentEstimate& est,
                double extra_std_error, double bias) {
  const verify::Tolerances tol;
  const double value = est.value + bias;
  const double se = std::hypot(est.std_error, extra_std_error);
  const double z = se > 0.0 ? (value - theory) / se : (value == theory ? 0.0 : HUGE_VAL);
  const bool passed = std::abs(value - theory) <= tol.z_bound * se || std::abs(value - theory) <= 1e-12;
  return {{"n", est.n},
          {"reps", est.reps},
          {"value", value},
          {"stderr", est.std_error},
          {"theory", theory},
          {"theory_method", method},
          {"z_score", z},
          {"z_bound", tol.z_bound},
          {"passed", passed}};
}

std::string comparison_csv(const std::string& word, const json& r) {
  return fmt::format("word,n,reps,value,stderr,theory,z_score,passed\n{},{},{},{},{},{},{},{}\n",
                     word, r["n"].get<int>(), r["reps"].get<int>(), fmt17(r["value"].get<double>()),
                     fmt17(r["stderr"].get<double>()), fmt17(r["theory"].get<double>()),
                     fmt17(r["z_score"].get<double>()), r["passed"].get<bool>() ? "true" : "false");
}

std::string quote_csv(const std::string& s) {
  return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
}

void add_option(CLI::App* app, const std::string& name, std::string& target, const std::string& help,
                bool required = false) {
  auto* opt = app->add_option(name, target, help)->capture_default_str();
  if (required) opt->required();
}

template <class T>
void add_option(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  app->add_option(name, target, help)->capture_default_str();
}

// Effective option values of the global app and the leaf command.
json collect_config(const CLI::App& app, const std::vector<std::string>& command) {
  json options = json::object();
  auto add = [&](const CLI::App& a) {
    for (const CLI::Option* opt : a.get_options()) {
      if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
      const auto& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        options[name] = opt->as<std::string>();
      } else if (!opt->get_default_str().empty()) {
        options[name] = opt->get_default_str();
      }
    }
  };
  add(app);
  const CLI::App* node = &app;
  for (const auto& c : command) {
    node = node->get_subcommand(c);
    add(*node);
  }
  json cmd = json::array();
  for (const auto& c : command) cmd.push_back(c);
  return {{"command", cmd}, {"options", options}};
}

}  // namespace

std::string to_json_text(const json& value) {
  std::string out;
  write_json(out, value, 0);
  out += "\n";
  return out;
}

std::vector<std::string> args_from_config(const json& config) {
  std::vector<std::string> args;
  for (const auto& c : config.at("command")) args.push_back(c.get<std::string>());
  for (const auto& [name, value] : config.at("options").items()) {
    args.push_back("--" + name);
    args.push_back(value.get<std::string>());
  }
  return args;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Free-probability workbench: exact limiting moments, Brown measures and their "
               "Monte Carlo checks.",
               "freelab"};
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  add_option(&app, "--seed", g.seed, "Seed for every random stream");
  app.add_option("--out", g.out, "Write the report to this file instead of stdout");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--tier", g.tier, "Verification scale")
      ->check(CLI::IsMember({"quick", "full"}))
      ->capture_default_str();
  add_option(&app, "--threads", g.threads, "Worker threads for replicate loops (0 = all cores)");
  app.add_option("--inject-bias", g.inject_bias, "Bias added to estimates (negative control)")
      ->group("");

  Output result;
  std::vector<std::string> command;
  std::function<void()> action;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help,
                  std::function<void()> body) {
    auto* sub = parent->add_subcommand(name, help);
    sub->callback([&command, &action, parent, name, body = std::move(body)] {
      command = {parent->get_name(), name};
      action = body;
    });
    return sub;
  };

  // ----------------------------------------------------------- moments
  auto* moments = app.add_subcommand("moments", "Exact limiting moments");
  moments->require_subcommand(1);

  std::string word, rho_text = "0", profile_path, labels_text;
  double rho = 0.0, y = 1.0;
  int mp_k = 0;
  long mc_samples = 100000;

  auto* m_ell = leaf(moments, "elliptic", "phi(e^{x1}...e^{xp}) of an elliptic element", [&] {
    const auto w = StarWord::parse(word);
    if (w.max_label() != 1) throw DomainError("moments elliptic takes single-label words; use 'mixed'");
    const double v = elliptic_star_moment(rho, w);
    result.report["result"] = {{"word", w.to_string()}, {"labels", labels_json(w)},
                               {"params", {{"rho", rho}}}, {"value", v},
                               {"method", "exact: non-crossing pair partitions"}};
    result.csv = fmt::format("word,rho,value\n{},{},{}\n", quote_csv(w.to_string()), fmt17(rho), fmt17(v));
  });
  add_option(m_ell, "--rho", rho, "Correlation in [-1, 1]");
  add_option(m_ell, "--word", word, "Word such as 1,*,1,*", true);

  auto* m_mix = leaf(moments, "mixed", "Mixed moment of free elliptic elements", [&] {
    const auto w = StarWord::parse(word);
    const auto rhos = rho_per_label(rho_text, w.max_label());
    const double v = mixed_elliptic_moment(EllipticParams(rhos), w);
    result.report["result"] = {{"word", w.to_string()}, {"labels", labels_json(w)},
                               {"params", {{"rho", rhos}}}, {"value", v},
                               {"method", "exact: label-consistent non-crossing pair partitions"}};
    result.csv = fmt::format("word,value\n{},{}\n", quote_csv(w.to_string()), fmt17(v));
  });
  add_option(m_mix, "--rho", rho_text, "Comma separated correlation per label");
  add_option(m_mix, "--word", word, "Word with labels such as 1,1@2,*@2,*", true);

  auto* m_mp = leaf(moments, "mp", "Marchenko-Pastur moments", [&] {
    double v = 0.0;
    json labels = json::array();
    if (!labels_text.empty()) {
      const auto l = parse_ints(labels_text, "--labels");
      v = mixed_mp_moment(y, l);
      for (int x : l) labels.push_back(x);
    } else {
      if (mp_k < 1) throw DomainError("give --k >= 1 or --labels");
      v = mp_moment(y, mp_k);
      for (int i = 0; i < mp_k; ++i) labels.push_back(1);
    }
    result.report["result"] = {{"labels", labels}, {"params", {{"y", y}}}, {"value", v},
                               {"method", "exact: non-crossing partitions"}};
    result.csv = fmt::format("y,k,value\n{},{},{}\n", fmt17(y), labels.size(), fmt17(v));
  });
  add_option(m_mp, "--y", y, "Ratio p/n");
  add_option(m_mp, "--k", mp_k, "Moment order");
  add_option(m_mp, "--labels", labels_text, "Comma separated factor labels (mixed moment)");

  auto* m_prof = leaf(moments, "profile", "Limit moment of a generalised elliptic matrix", [&] {
    const auto w = StarWord::parse(word);
    const auto profile = profile_path.empty() ? RhoProfile::constant(rho) : read_profile(profile_path);
    const auto v = generalized_elliptic_limit(profile, w, mc_samples, g.seed);
    result.report["result"] = {
        {"word", w.to_string()}, {"labels", labels_json(w)},
        {"params", profile.is_constant() ? json{{"rho", profile.constant_value()}}
                                         : json{{"profile_points", profile.points().size()}}},
        {"value", v.value}, {"stderr", v.std_error},
        {"method", profile.is_constant() ? "exact: constant profile"
                                         : "monte carlo over uniforms per non-crossing pairing"}};
    result.csv = fmt::format("word,value,stderr\n{},{},{}\n", quote_csv(w.to_string()),
                             fmt17(v.value), fmt17(v.std_error));
  });
  add_option(m_prof, "--profile", profile_path, "CSV file of (x, f(x)) points");
  add_option(m_prof, "--rho", rho, "Constant profile value when no file is given");
  add_option(m_prof, "--word", word, "Word such as 1,1,*,*", true);
  add_option(m_prof, "--mc-samples", mc_samples, "Monte Carlo draws per pairing");

  // ---------------------------------------------------------- simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates compared with theory");
  simulate->require_subcommand(1);

  int n = 300, p = 150, reps = 50, wishart_k = 2, product_n = 400;
  double bound = verify::Tolerances{}.cdf_distance;
  std::string blocks_text, spectrum_out;
  const auto options = [&] { return EstimatorOptions{1200, g.threads}; };

  auto finish_comparison = [&](const std::string& w, json r) {
    result.status = r["passed"].get<bool>() ? ok : comparison_failed;
    result.csv = comparison_csv(quote_csv(w), r);
    json with_word{{"word", w}};
    with_word.update(r);
    result.report["result"] = with_word;
  };

  auto* s_ell = leaf(simulate, "elliptic", "Elliptic matrices at finite n", [&] {
    const auto w = StarWord::parse(word);
    const auto rhos = rho_per_label(rho_text, w.max_label());
    std::vector<EnsembleSpec> specs;
    for (int t = 0; t < w.max_label(); ++t) specs.push_back(EnsembleSpec::square_elliptic(n, rhos[static_cast<std::size_t>(t)], g.seed));
    const auto est = estimate_star_moment(specs, w, reps, options());
    finish_comparison(w.to_string(), comparison(mixed_elliptic_moment(EllipticParams(rhos), w),
                                                "exact", est, 0.0, g.inject_bias));
  });
  add_option(s_ell, "--n", n, "Dimension");
  add_option(s_ell, "--rho", rho_text, "Correlation, or one per label");
  add_option(s_ell, "--word", word, "Word", true);
  add_option(s_ell, "--reps", reps, "Replicates");

  auto* s_gen = leaf(simulate, "generalized", "Generalised elliptic matrices", [&] {
    const auto w = StarWord::parse(word);
    const auto profile = read_profile(profile_path);
    const auto spec = EnsembleSpec::generalized_elliptic(n, profile, g.seed);
    const auto est = estimate_star_moment(spec, w, reps, options());
    const auto limit = generalized_elliptic_limit(profile, w, mc_samples, derive_seed(g.seed, {1}));
    finish_comparison(w.to_string(), comparison(limit.value, "monte carlo limit", est,
                                                limit.std_error, g.inject_bias));
  });
  add_option(s_gen, "--n", n, "Dimension");
  add_option(s_gen, "--profile", profile_path, "CSV file of (x, f(x)) points", true);
  add_option(s_gen, "--word", word, "Word", true);
  add_option(s_gen, "--reps", reps, "Replicates");
  add_option(s_gen, "--mc-samples", mc_samples, "Monte Carlo draws per pairing for the limit");

  auto* s_wish = leaf(simulate, "wishart", "Moments of (1/n) X X^T", [&] {
    std::vector<int> l;
    if (!labels_text.empty()) {
      l = parse_ints(labels_text, "--labels");
    } else {
      if (wishart_k < 1) throw DomainError("give --k >= 1 or --labels");
      l.assign(static_cast<std::size_t>(wishart_k), 1);
    }
    const int m = *std::max_element(l.begin(), l.end());
    const auto rhos = rho_per_label(rho_text, m);
    std::vector<EnsembleSpec> specs;
    for (int t = 0; t < m; ++t) specs.push_back(EnsembleSpec::rectangular_elliptic(p, n, rhos[static_cast<std::size_t>(t)], g.seed));
    const auto est = estimate_mixed_wishart_moment(specs, l, reps, options());
    const double theory = mixed_mp_moment(static_cast<double>(p) / n, l);
    finish_comparison(fmt::format("{}", fmt::join(l, ",")),
                      comparison(theory, "exact, y = p/n", est, 0.0, g.inject_bias));
  });
  add_option(s_wish, "--p", p, "Rows");
  add_option(s_wish, "--n", n, "Columns");
  add_option(s_wish, "--rho", rho_text, "Correlation, or one per label");
  add_option(s_wish, "--k", wishart_k, "Moment order");
  add_option(s_wish, "--labels", labels_text, "Comma separated factor labels (mixed moment)");
  add_option(s_wish, "--reps", reps, "Replicates");

  int factors = 2;
  auto* s_prod = leaf(simulate, "product", "Eigenvalues of a product of elliptic matrices", [&] {
    auto rhos = parse_doubles(rho_text, "--rho");
    if (rhos.size() == 1) rhos.assign(static_cast<std::size_t>(factors), rhos[0]);
    if (static_cast<int>(rhos.size()) != factors) throw DomainError("--rho needs 1 or k values");
    std::vector<EnsembleSpec> specs;
    for (double r : rhos) specs.push_back(EnsembleSpec::square_elliptic(product_n, r, g.seed));
    const auto spectrum = product_spectrum(specs);
    if (!spectrum_out.empty()) {
      std::ofstream f(spectrum_out);
      if (!f) throw DomainError("cannot write '" + spectrum_out + "'");
      write_spectrum_csv(f, spectrum);
    }
    const double dist = sup_distance(empirical_radial_cdf(spectrum), product_radial_cdf(factors)) + g.inject_bias;
    const bool passed = dist <= bound;
    result.status = passed ? ok : comparison_failed;
    result.report["result"] = {{"k", factors}, {"n", product_n}, {"rho", rhos},
                               {"theory", fmt::format("t^(2/{})", factors)},
                               {"sup_distance", dist}, {"bound", bound}, {"passed", passed}};
    result.csv = fmt::format("k,n,sup_distance,bound,passed\n{},{},{},{},{}\n", factors, product_n,
                             fmt17(dist), fmt17(bound), passed ? "true" : "false");
  });
  add_option(s_prod, "--k", factors, "Number of factors (>= 2)");
  add_option(s_prod, "--n", product_n, "Dimension");
  add_option(s_prod, "--rho", rho_text, "Correlation, or one per factor");
  add_option(s_prod, "--bound", bound, "Largest accepted sup-distance");
  add_option(s_prod, "--spectrum-out", spectrum_out, "Also write the eigenvalues as CSV re,im");

  auto* s_det = leaf(simulate, "with-deterministic",
                     "Words interleaved with deterministic diagonal matrices D, E", [&] {
    const auto w = StarWord::parse(word);
    if (w.max_label() != 1) throw DomainError("with-deterministic takes single-label words");
    const auto blocks = parse_product_specs(blocks_text, "DE");
    const auto by_label = builtin_deterministic(n);
    std::vector<Matrix> concrete;
    for (const auto& b : blocks) concrete.push_back(evaluate_product(b, by_label, n));
    const auto spec = EnsembleSpec::square_elliptic(n, rho, g.seed);
    const auto est = estimate_mixed_moment_with_deterministic(spec, w, concrete, reps, options());
    const auto theory = elliptic_moment_with_deterministic(rho, w, blocks, matrix_trace_oracle(by_label));
    finish_comparison(w.to_string(), comparison(theory.real(), "exact with matrix trace oracle", est,
                                                0.0, g.inject_bias));
    result.report["result"]["blocks"] = blocks_text;
  });
  add_option(s_det, "--n", n, "Dimension");
  add_option(s_det, "--rho", rho, "Correlation");
  add_option(s_det, "--word", word, "Word", true);
  add_option(s_det, "--blocks", blocks_text,
             "One product per letter over D (alternating +-1), E (+1 then -1) and I", true);
  add_option(s_det, "--reps", reps, "Replicates");

  // ------------------------------------------------------------- brown
  auto* brown = app.add_subcommand("brown", "Radial distribution of Brown measures");
  brown->require_subcommand(1);
  int points = 201;
  double t_max = 0.0, scale = 1.0;
  std::string overlay_path;

  auto radial_output = [&](const RadialCDF& cdf) {
    std::vector<double> grid;
    const double top = t_max > 0.0 ? t_max : 1.2 * cdf.outer_radius();
    if (points < 2) throw DomainError("--points must be at least 2");
    for (int i = 0; i < points; ++i) grid.push_back(top * i / (points - 1));
    std::optional<RadialCDF> overlay;
    if (!overlay_path.empty()) overlay = empirical_radial_cdf(read_spectrum(overlay_path));
    std::ostringstream csv;
    write_radial_csv(csv, cdf, grid, overlay ? &*overlay : nullptr);
    result.csv = csv.str();
    result.default_format = "csv";
    json rows = json::array();
    for (double t : grid) {
      json row{{"t", t}, {"F", cdf(t)}};
      if (overlay) {
        row["empirical"] = (*overlay)(t);
        row["distance"] = std::abs((*overlay)(t) - cdf(t));
      }
      rows.push_back(row);
    }
    json r{{"descriptor", cdf.descriptor()}, {"outer_radius", cdf.outer_radius()}, {"grid", rows}};
    if (overlay) r["sup_distance"] = sup_distance(*overlay, cdf);
    result.report["result"] = r;
  };

  auto* b_prod = leaf(brown, "product", "Product of k free circular (or elliptic) elements", [&] {
    radial_output(product_radial_cdf(factors));
  });
  add_option(b_prod, "--k", factors, "Number of factors (>= 2)");
  add_option(b_prod, "--points", points, "Grid points");
  add_option(b_prod, "--t-max", t_max, "Grid end (0 = 1.2 x outer radius)");
  add_option(b_prod, "--overlay", overlay_path, "Spectrum CSV (re,im) for an empirical column");

  auto* b_rd = leaf(brown, "rdiagonal", "R-diagonal x with S_{xx*}(z) = (1+z)^-k / scale^2", [&] {
    if (!(scale > 0.0)) throw DomainError("--scale must be positive");
    const int kk = factors;
    const double s2 = scale * scale;
    auto sinv = STransformInverse::from_s_transform(
        [kk, s2](double z) { return std::pow(1.0 + z, -kk) / s2; }, -1.0 + 1e-12, 0.0, s2, std::nullopt);
    radial_output(rdiagonal_radial_cdf(std::move(sinv)));
  });
  add_option(b_rd, "--k", factors, "Exponent k >= 1");
  add_option(b_rd, "--scale", scale, "Scale sigma; the outer radius");
  add_option(b_rd, "--points", points, "Grid points");
  add_option(b_rd, "--t-max", t_max, "Grid end (0 = 1.2 x outer radius)");
  add_option(b_rd, "--overlay", overlay_path, "Spectrum CSV (re,im) for an empirical column");

  // ------------------------------------------------------------ verify
  std::string criteria_text;
  auto* ver = app.add_subcommand("verify", "Run the acceptance suite");
  ver->callback([&] {
    command = {"verify"};
    action = [&] {
      verify::Options vo;
      vo.tier = g.tier == "full" ? verify::Tier::full : verify::Tier::quick;
      vo.seed = g.seed;
      vo.inject_bias = g.inject_bias;
      vo.threads = g.threads;
      std::vector<int> ids;
      if (!criteria_text.empty()) ids = parse_ints(criteria_text, "--criteria");
      const auto results = verify::run_acceptance(vo, ids, [&](const verify::CriterionResult& r) {
        err << verify::format_line(r) << std::endl;
      });
      const auto summary = verify::summary_json(results, vo);
      result.status = summary["all_passed"].get<bool>() ? ok : comparison_failed;
      result.report["result"] = summary;
      result.csv = "id,name,passed\n";
      for (const auto& r : results) {
        result.csv += fmt::format("{},{},{}\n", r.id, quote_csv(r.name), r.passed ? "true" : "false");
      }
    };
  });
  ver->add_option("--criteria", criteria_text, "Comma separated criterion ids (default all)");

  // ------------------------------------------------------------- run
  std::vector<const char*> argv{"freelab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try {
    result.report["config"] = collect_config(app, command);
    action();
  } catch (const EnumerationLimitError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  }

  const std::string format = g.format.empty() ? result.default_format : g.format;
  const std::string text = format == "csv" ? result.csv : to_json_text(result.report);
  if (g.out.empty()) {
    out << text;
  } else {
    std::ofstream f(g.out);
    if (!f) {
      err << "error: cannot write '" << g.out << "'\n";
      return usage_error;
    }
    f << text;
  }
  return result.status;
}

}  // namespace freelab::cli
