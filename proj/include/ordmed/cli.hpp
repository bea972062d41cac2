#pragma once

// Command-line front end. Exit codes: 0 success, 2 usage, 3 io, 4 data,
// 5 numeric (non-convergence, boundary), 6 solver failure or oracle mismatch.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ordmed/error.hpp"
#include "ordmed/het_ordered.hpp"
#include "ordmed/io.hpp"
#include "ordmed/lad.hpp"
#include "ordmed/lad_oracle.hpp"
#include "ordmed/ordinal.hpp"
#include "ordmed/simulate.hpp"

namespace ordmed {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitIo = 3,
  kExitData = 4,
  kExitNumeric = 5,
  kExitSolver = 6,
};

inline int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kUsage: return kExitUsage;
    case ErrorCategory::kIo: return kExitIo;
    case ErrorCategory::kData: return kExitData;
    case ErrorCategory::kNumeric: return kExitNumeric;
    case ErrorCategory::kSolver: return kExitSolver;
  }
  return kExitSolver;
}

namespace cli_detail {

/// UTC time, or SOURCE_DATE_EPOCH when set so reruns are byte-identical.
inline std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* e = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(e, nullptr, 10));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const char* b = item.data();
    while (*b == ' ') ++b;
    auto r = std::from_chars(b, item.data() + item.size(), v);
    require(r.ec == std::errc() && r.ptr == item.data() + item.size(), ErrorCategory::kUsage,
            what + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  require(!out.empty(), ErrorCategory::kUsage, what + ": empty list");
  return out;
}

/// Every option the user actually passed, exactly as typed.
inline Json echo_flags(const CLI::App& sub) {
  Json flags = Json::object();
  for (const CLI::Option* o : sub.get_options()) {
    if (o->count() == 0 || o->get_name() == "--help") continue;
    const auto& res = o->results();
    if (res.empty()) flags[o->get_name()] = true;
    else if (res.size() == 1) flags[o->get_name()] = res[0];
    else flags[o->get_name()] = res;
  }
  return flags;
}

struct DataArgs {
  std::string data;
  std::string config;
};

inline LoadedData load(const DataArgs& a, ColumnConfig* used = nullptr) {
  const CsvTable t = read_csv(a.data);
  const ColumnConfig cfg = a.config.empty() ? default_config(t) : read_column_config(a.config);
  if (used) *used = cfg;
  return load_table(t, cfg);
}

inline void write_outputs(const ResultRecord& rec, const std::string& out_path, std::ostream& out) {
  out << format_table(rec);
  if (out_path.empty()) return;
  std::ofstream f(out_path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCategory::kIo, "cannot write '" + out_path + "'");
  f << serialize(rec);
  require(static_cast<bool>(f), ErrorCategory::kIo, "write to '" + out_path + "' failed");
}

inline std::string resolve_reference(const std::optional<std::string>& ref, const std::vector<std::string>& names) {
  require(!names.empty(), ErrorCategory::kData, "no coefficients to scale");
  return ref->empty() ? names.front() : *ref;
}

inline OrdinalDistribution distribution_arg(const std::string& s, const std::string& what) {
  return OrdinalDistribution(parse_list(s, what));
}

// Outcome distributions of the two groups of a 0/1 column.
inline std::pair<OrdinalDistribution, OrdinalDistribution> group_split(const DataArgs& a, const std::string& group) {
  const CsvTable t = read_csv(a.data);
  ColumnConfig cfg = a.config.empty() ? default_config(t) : read_column_config(a.config);
  cfg.group.reset();
  cfg.sked.clear();
  for (auto& c : cfg.covariates)
    c.transforms.erase(std::remove(c.transforms.begin(), c.transforms.end(), Transform::kInteract), c.transforms.end());
  if (std::none_of(cfg.covariates.begin(), cfg.covariates.end(), [&](const CovariateConfig& c) { return c.output_name() == group; }))
    cfg.covariates.push_back({group, {}, {}});
  const auto d = load_table(t, cfg);
  const auto k = d.data.column_index(group);
  require(k.has_value(), ErrorCategory::kData, "group column '" + group + "' not found");
  std::vector<int> y1, y0;
  std::vector<double> w1, w0;
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    const double g = d.data.covariates()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*k));
    require(g == 0.0 || g == 1.0, ErrorCategory::kData, "group column '" + group + "' is not binary");
    (g == 1.0 ? y1 : y0).push_back(d.data.outcome(i));
    (g == 1.0 ? w1 : w0).push_back(d.data.weight(i));
  }
  require(!y1.empty() && !y0.empty(), ErrorCategory::kData, "both groups must be non-empty");
  return {OrdinalDistribution::from_outcomes(y1, d.data.j_max(), &w1),
          OrdinalDistribution::from_outcomes(y0, d.data.j_max(), &w0)};
}

}  // namespace cli_detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Median-based analysis of ordered responses: LAD by MILP, heteroskedastic ordered probit/logit, "
               "median and dominance comparisons."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ordmed 0.1.0");

  DataArgs data;
  std::string out_path, dump_lp, sked_arg;
  std::optional<std::string> reference;
  double box = 10.0, delta = 1e-6, eps_gap = 1e-6, max_seconds = 60.0;
  std::optional<double> gamma_box;
  long max_nodes = 1'000'000;
  std::uint64_t seed = 0;
  double first_coef = 1.0;
  bool trace = false, no_center = false;

  auto add_data = [&](CLI::App* s, bool required) {
    auto* o = s->add_option("--data", data.data, "CSV file (header row, comma separated)");
    if (required) o->required();
    s->add_option("--config", data.config, "JSON column configuration (default: outcome 'y', other columns in order)");
  };
  auto add_reference = [&](CLI::App* s) {
    s->add_option("--reference", reference,
                  "Divide coefficients and thresholds by this coefficient; without a value, the first covariate")
        ->expected(0, 1);
  };
  auto add_lad = [&](CLI::App* s) {
    s->add_option("--box", box, "Bound B on every free slope: beta in [-B, B]")->check(CLI::NonNegativeNumber);
    s->add_option("--gamma-box", gamma_box, "Bound on every threshold (default: wide enough for the slope box)")
        ->check(CLI::PositiveNumber);
    s->add_option("--delta", delta, "Strict-inequality margin of the indicator constraints")->check(CLI::PositiveNumber);
    s->add_option("--eps-gap", eps_gap, "Minimum spacing between consecutive thresholds")->check(CLI::PositiveNumber);
    s->add_option("--max-nodes", max_nodes, "Branch-and-bound node limit")->check(CLI::PositiveNumber);
    s->add_option("--max-seconds", max_seconds, "Branch-and-bound wall-clock limit")->check(CLI::PositiveNumber);
    s->add_option("--seed", seed, "Seed of the randomized heuristic starts");
    s->add_option("--first-coef", first_coef, "Fixed coefficient of the first covariate (+1 or -1)")
        ->check(CLI::IsMember({1.0, -1.0}));
  };

  auto* lad = app.add_subcommand("fit-lad", "LAD (maximum score) estimate by mixed-integer programming");
  add_data(lad, true);
  add_lad(lad);
  add_reference(lad);
  lad->add_option("--out", out_path, "Write the result record (JSON) here");
  lad->add_option("--dump-lp", dump_lp, "Write the MILP in MPS format (binaries between INTORG/INTEND markers)");
  lad->add_flag("--trace", trace, "Print the branch-and-bound node log to stderr");
  lad->add_flag("--no-center", no_center, "Report the raw incumbent instead of the centered point");

  CLI::App* ml[2];
  ml[0] = app.add_subcommand("fit-probit", "Heteroskedastic ordered probit by maximum likelihood");
  ml[1] = app.add_subcommand("fit-logit", "Heteroskedastic ordered logit by maximum likelihood");
  for (auto* s : ml) {
    add_data(s, true);
    add_reference(s);
    s->add_option("--sked", sked_arg, "Comma-separated skedastic columns (overrides the config)");
    s->add_option("--out", out_path, "Write the result record (JSON) here");
    s->add_flag("--trace", trace, "Report optimizer diagnostics on stderr");
  }

  std::string a_arg, b_arg, gaussian_arg, group_arg;
  double gap = 1e-3;
  auto add_pair = [&](CLI::App* s) {
    add_data(s, false);
    s->add_option("--group", group_arg, "0/1 column splitting the data into groups 1 and 0");
    s->add_option("--a", a_arg, "Category probabilities of group a, comma separated");
    s->add_option("--b", b_arg, "Category probabilities of group b, comma separated");
  };
  auto* med = app.add_subcommand("median-compare", "Sign of the difference of observed median categories");
  add_pair(med);
  auto* fosd = app.add_subcommand("fosd", "First-order stochastic dominance between two groups");
  add_pair(fosd);
  fosd->add_option("--gaussian", gaussian_arg, "Latent normal pair mu1,var1,mu2,var2");
  auto* rev = app.add_subcommand("reversal", "Increasing transform or relabeling that reverses a mean ranking");
  add_pair(rev);
  rev->add_option("--gaussian", gaussian_arg, "Latent normal pair mu1,var1,mu2,var2 (exponential transform)");
  rev->add_option("--gap", gap, "Minimum spacing of relabeled categories")->check(CLI::NonNegativeNumber);

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic ordered-response CSV");
  std::size_t sim_n = 100;
  std::string theta_arg = "1", gamma_arg = "0", alpha_arg, error_arg = "normal";
  sim->add_option("--n", sim_n, "Observations")->check(CLI::PositiveNumber);
  sim->add_option("--theta", theta_arg, "Coefficients of x1, x2, ... (x ~ N(0, 1) independent)");
  sim->add_option("--gamma", gamma_arg, "Increasing thresholds");
  sim->add_option("--alpha", alpha_arg, "Skedastic coefficients on x1, x2, ...");
  sim->add_option("--error", error_arg, "Error law")->check(CLI::IsMember({"normal", "logistic", "asymmetric", "none"}));
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--out", out_path, "Output CSV")->required();

  auto* oracle = app.add_subcommand("oracle-check", "Compare fit-lad with exhaustive search (P <= 2, n <= 50)");
  add_data(oracle, true);
  add_lad(oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    CLI::App* used = app.get_subcommands().front();
    const std::string cmd = used->get_name();
    Json echo = {{"command", cmd}, {"flags", echo_flags(*used)}};

    if (cmd == "fit-lad" || cmd == "oracle-check") {
      ColumnConfig cfg;
      const auto ld = load(data, &cfg);
      const auto& d = ld.data;
      ParamBox pb = ParamBox::symmetric(d, box);
      if (gamma_box) {
        pb.gamma_lo.assign(pb.gamma_lo.size(), -*gamma_box);
        pb.gamma_hi.assign(pb.gamma_hi.size(), *gamma_box);
      }
      LadOptions opt;
      opt.build.delta = delta;
      opt.build.epsilon_gap = eps_gap;
      opt.build.first_coef = first_coef;
      opt.limits.max_nodes = max_nodes;
      opt.limits.max_seconds = max_seconds;
      opt.limits.trace = trace ? &err : nullptr;
      opt.seed = seed;
      opt.center = !no_center;

      if (cmd == "oracle-check") {
        opt.center = false;
        BruteForceOptions bo;
        bo.delta = delta;
        bo.epsilon_gap = eps_gap;
        bo.first_coef = first_coef;
        const auto bf = brute_force_lad(d, pb, bo);
        const auto fit = fit_lad(d, pb, opt);
        out << "milp objective   " << format_double(fit.objective) << " (" << to_string(fit.certificate.status) << ")\n";
        out << "oracle objective " << format_double(bf.objective) << '\n';
        const bool match = fit.certificate.status == MilpStatus::kOptimal && fit.objective == bf.objective;
        out << (match ? "match" : "MISMATCH") << '\n';
        return match ? kExitOk : kExitSolver;
      }

      if (!dump_lp.empty()) {
        std::ofstream f(dump_lp);
        require(static_cast<bool>(f), ErrorCategory::kIo, "cannot write '" + dump_lp + "'");
        const auto m = build_lad_milp(d, pb, opt.build);
        write_mps(f, m.problem.lp, "LAD", &m.problem.binary);
      }
      const auto fit = fit_lad(d, pb, opt);
      ResultRecord rec;
      rec.estimator = "lad";
      const auto& names = d.column_names();
      Eigen::VectorXd theta(static_cast<Eigen::Index>(names.size()));
      theta << fit.theta.first_coef, fit.theta.beta;
      std::optional<ScaledCoefficients> sc;
      if (reference) {
        sc = scale_by_reference(names, theta, fit.gamma_hat.values(), resolve_reference(reference, names));
        rec.reference = sc->reference;
      }
      for (std::size_t k = 0; k < names.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        rec.coefficients.push_back({names[k], theta(kk), sc ? std::optional(sc->theta(kk)) : std::nullopt, std::nullopt, k == 0});
      }
      for (std::size_t j = 0; j < fit.gamma_hat.size(); ++j)
        rec.thresholds.push_back({"gamma_" + std::to_string(j + 1), fit.gamma_hat[j],
                                  sc ? std::optional(sc->gamma[j]) : std::nullopt, std::nullopt, false});
      rec.objective = fit.objective;
      const auto& c = fit.certificate;
      rec.certificate = {{"status", to_string(c.status)}, {"objective", c.objective}, {"bound", c.bound},
                         {"gap", c.gap()},         {"nodes", c.nodes},         {"centered", fit.centered},
                         {"center_slack", fit.center_slack}};
      echo["column_config"] = to_json(cfg);
      echo["effective"] = {{"box", box},
                           {"gamma_lo", pb.gamma_lo},
                           {"gamma_hi", pb.gamma_hi},
                           {"delta", delta},
                           {"eps_gap", eps_gap},
                           {"max_nodes", max_nodes},
                           {"max_seconds", max_seconds},
                           {"seed", seed},
                           {"first_coef", first_coef},
                           {"center", opt.center}};
      rec.config = echo;
      rec.data = to_json(ld.report);
      rec.data["n"] = d.size();
      rec.data["J"] = d.j_max();
      rec.data["categories"] = ld.category_labels;
      rec.timestamp = timestamp();
      write_outputs(rec, out_path, out);
      if (trace) err << "wall seconds " << c.wall_seconds << ", lp iterations " << c.lp_iterations << '\n';
      return kExitOk;
    }

    if (cmd == "fit-probit" || cmd == "fit-logit") {
      ColumnConfig cfg;
      auto ld = load(data, &cfg);
      const auto& d = ld.data;
      HetOrderedSpec spec;
      spec.link = cmd == "fit-probit" ? Link::kNormal : Link::kLogistic;
      spec.sked_columns = ld.sked_columns;
      if (!sked_arg.empty()) {
        spec.sked_columns.clear();
        std::stringstream ss(sked_arg);
        std::string name;
        while (std::getline(ss, name, ',')) {
          auto k = d.column_index(name);
          require(k.has_value(), ErrorCategory::kUsage, "skedastic column '" + name + "' is not in the design");
          spec.sked_columns.push_back(*k);
        }
      }
      const auto fit = fit_het_ordered(spec, d);
      if (trace)
        err << "iterations " << fit.iterations << ", gradient inf-norm " << fit.grad_inf_norm << '\n';
      ResultRecord rec;
      rec.estimator = to_string(spec.link);
      std::optional<ScaledCoefficients> sc;
      if (reference) {
        sc = scale_by_reference(fit, resolve_reference(reference, fit.mean_names));
        rec.reference = sc->reference;
      }
      const auto K = fit.mean_names.size(), S = fit.sked_names.size();
      auto se = [&](std::size_t k) {
        return fit.std_errors.size() > 0 ? std::optional(fit.std_errors(static_cast<Eigen::Index>(k))) : std::nullopt;
      };
      for (std::size_t k = 0; k < K; ++k)
        rec.coefficients.push_back({fit.mean_names[k], fit.params.theta(static_cast<Eigen::Index>(k)),
                                    sc ? std::optional(sc->theta(static_cast<Eigen::Index>(k))) : std::nullopt, se(k), false});
      for (std::size_t k = 0; k < S; ++k)
        rec.skedastic.push_back({fit.sked_names[k], fit.params.alpha(static_cast<Eigen::Index>(k)), std::nullopt, se(K + k), false});
      for (std::size_t j = 0; j < fit.params.gamma.size(); ++j)
        rec.thresholds.push_back({"gamma_" + std::to_string(j + 1), fit.params.gamma[j],
                                  sc ? std::optional(sc->gamma[j]) : std::nullopt, se(K + S + j), false});
      rec.loglik = fit.loglik;
      rec.certificate = {{"status", fit.converged ? "converged" : "not-converged"},
                         {"iterations", fit.iterations},
                         {"grad_inf_norm", fit.grad_inf_norm},
                         {"message", fit.message}};
      echo["column_config"] = to_json(cfg);
      rec.config = echo;
      rec.data = to_json(ld.report);
      rec.data["n"] = d.size();
      rec.data["J"] = d.j_max();
      rec.data["categories"] = ld.category_labels;
      rec.timestamp = timestamp();
      write_outputs(rec, out_path, out);
      if (!fit.converged) {
        err << "ordmed: numeric: " << fit.message << '\n';
        return kExitNumeric;
      }
      return kExitOk;
    }

    if (cmd == "median-compare" || cmd == "fosd" || cmd == "reversal") {
      if (!gaussian_arg.empty()) {
        const auto v = parse_list(gaussian_arg, "--gaussian");
        require(v.size() == 4, ErrorCategory::kUsage, "--gaussian needs mu1,var1,mu2,var2");
        const LatentGaussianPair p{v[0], v[1], v[2], v[3]};
        if (cmd == "fosd") {
          out << "gaussian dominance: " << to_string(fosd_gaussian(p)) << '\n';
          return kExitOk;
        }
        const auto r = exponential_reversal(p);
        out << "transform " << (r.witness.sign < 0 ? "-exp(-k h)" : "exp(k h)") << '\n'
            << "k_star " << format_double(r.k_star) << '\n'
            << "k_witness " << format_double(r.k_witness) << '\n'
            << "original ranking " << r.original_ranking << '\n'
            << "transformed ranking " << r.transformed_ranking << '\n';
        return kExitOk;
      }
      std::optional<OrdinalDistribution> a, b;
      if (!group_arg.empty()) {
        require(!data.data.empty(), ErrorCategory::kUsage, "--group needs --data");
        auto [g1, g0] = group_split(data, group_arg);
        a = g1;
        b = g0;
      } else {
        require(!a_arg.empty() && !b_arg.empty(), ErrorCategory::kUsage,
                "give --a and --b, or --data with --group" + std::string(cmd == "median-compare" ? "" : ", or --gaussian"));
        a = distribution_arg(a_arg, "--a");
        b = distribution_arg(b_arg, "--b");
      }
      if (cmd == "median-compare") {
        out << "median a " << median_category(*a) << '\n'
            << "median b " << median_category(*b) << '\n'
            << "sign " << compare_observed_medians(*a, *b) << '\n';
      } else if (cmd == "fosd") {
        out << "dominance: " << to_string(fosd_discrete(*a, *b)) << '\n';
      } else {
        const auto r = relabel_reversal(*a, *b, gap);
        out << "original mean difference " << format_double(r.original_mean_diff) << '\n';
        if (r.reversed) {
          out << "reversing labels";
          for (double t : r.labels) out << ' ' << format_double(t);
          out << "\nachieved mean difference " << format_double(r.achieved_mean_diff) << '\n';
        } else {
          out << "no increasing relabeling reverses the ranking\n";
        }
      }
      return kExitOk;
    }

    if (cmd == "simulate") {
      DgpSpec spec;
      spec.n = sim_n;
      const auto th = parse_list(theta_arg, "--theta");
      spec.theta = Eigen::Map<const Eigen::VectorXd>(th.data(), static_cast<Eigen::Index>(th.size()));
      spec.covariates.assign(th.size(), CovariateLaw::normal(0.0, 1.0));
      spec.gamma = parse_list(gamma_arg, "--gamma");
      if (!alpha_arg.empty()) {
        const auto al = parse_list(alpha_arg, "--alpha");
        require(al.size() <= th.size(), ErrorCategory::kUsage, "--alpha is longer than --theta");
        spec.alpha = Eigen::Map<const Eigen::VectorXd>(al.data(), static_cast<Eigen::Index>(al.size()));
        for (std::size_t k = 0; k < al.size(); ++k) spec.sked_columns.push_back(k);
      }
      spec.error = error_arg == "normal"     ? ErrorLaw::kNormal
                   : error_arg == "logistic" ? ErrorLaw::kLogistic
                   : error_arg == "none"     ? ErrorLaw::kNone
                                             : ErrorLaw::kAsymmetric;
      spec.seed = seed;
      const auto s = generate(spec);
      std::ofstream f(out_path, std::ios::binary);
      require(static_cast<bool>(f), ErrorCategory::kIo, "cannot write '" + out_path + "'");
      write_dataset_csv(f, s.data);
      require(static_cast<bool>(f), ErrorCategory::kIo, "write to '" + out_path + "' failed");
      out << "wrote " << s.data.size() << " rows, J = " << s.data.j_max() << ", to " << out_path << '\n';
      return kExitOk;
    }
    fail(ErrorCategory::kUsage, "unknown subcommand");
  } catch (const Error& e) {
    err << "ordmed: " << category_name(e.category()) << ": " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::bad_alloc&) {
    err << "ordmed: numeric: out of memory\n";
    return kExitNumeric;
  }
}

}  // namespace ordmed
