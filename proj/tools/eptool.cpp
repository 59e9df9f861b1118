// eptool: Ewens-Pitman model utilities
//
//   tables    exact and asymptotic discovery / singleton-proportion estimates
//   rate      large deviation rate curve I_l^alpha
//   tail      LD tail approximations of the discovery probability
//   fit       empirical Bayes parameter fitting
//   simulate  seeded draws from the (conditional) sampling model
//   verify    oracle and property suites for every module

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ep/dataset.hpp"
#include "ep/inference.hpp"
#include "ep/moments.hpp"
#include "ep/partition.hpp"
#include "ep/rates.hpp"
#include "ep/verify.hpp"

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file '" + out_path + "'");
  f << text;
}

std::string format_value(double v, bool full_precision) {
  std::ostringstream os;
  if (full_precision) {
    os.precision(17);
    os << v;
  } else {
    os.setf(std::ios::fixed);
    os.precision(3);
    os << v;
  }
  return os.str();
}

std::string counts_field(const std::map<long, long>& counts) {
  std::ostringstream os;
  bool first = true;
  for (auto [l, m] : counts) {
    if (!first) os << ' ';
    os << l << ':' << m;
    first = false;
  }
  return os.str();
}

struct ParamSpec {
  double alpha = 0.5;
  std::optional<double> theta;
  std::string fit_method;  // "", "mean", "mle"
};

ep::Params resolve_params(const ParamSpec& spec, const ep::Dataset* ds) {
  if (spec.theta && !spec.fit_method.empty())
    throw std::runtime_error("give either --theta or --fit, not both");
  if (spec.theta) return ep::Params(spec.alpha, *spec.theta);
  if (spec.fit_method.empty())
    throw std::runtime_error("parameters missing: give --theta or --fit mean|mle");
  if (!ds) throw std::runtime_error("--fit needs a dataset");
  if (spec.fit_method == "mean") {
    ep::FitResult r = ep::fit_theta_mean(spec.alpha, ds->n(), ds->j());
    return ep::Params(r.alpha_hat, r.theta_hat);
  }
  ep::FitResult r = ep::fit_mle(ds->counts);
  return ep::Params(r.alpha_hat, r.theta_hat);
}

// Table row sizes. The published tables evaluate the floor(n/100) and
// floor(n/10) rows at round(n/100) and round(n/10); --rows floor gives the
// literal floors instead.
std::vector<long> default_m_list(long n, const std::string& rows) {
  auto half_up = [](double v) { return static_cast<long>(std::floor(v + 0.5)); };
  if (rows == "floor") return {n / 100, n / 10, n, 10 * n, 100 * n};
  return {half_up(n / 100.0), half_up(n / 10.0), n, 10 * n, 100 * n};
}

int cmd_tables(const ep::Dataset& ds, const ParamSpec& pspec, std::vector<long> m_list,
               const std::string& rows, const std::string& format, bool full_precision,
               const std::string& out) {
  ep::Params params = resolve_params(pspec, &ds);
  if (m_list.empty()) m_list = default_m_list(ds.n(), rows);
  const long n = ds.n(), j = ds.j(), m1 = ds.singletons();
  json rows_json = json::array();
  std::vector<std::array<double, 3>> discovery, singleton;
  for (long m : m_list) {
    std::array<double, 3> d{ep::discovery_estimate(params, n, j, m),
                            ep::discovery_asymptotic(params, n, j, m, false),
                            ep::discovery_asymptotic(params, n, j, m, true)};
    std::array<double, 3> s{ep::m1_estimate(params, n, j, m1, m, ep::M1Variant::exact),
                            ep::m1_estimate(params, n, j, m1, m, ep::M1Variant::uncorrected),
                            ep::m1_estimate(params, n, j, m1, m, ep::M1Variant::corrected)};
    discovery.push_back(d);
    singleton.push_back(s);
    rows_json.push_back(
        json{{"m", m},
             {"discovery", {{"exact", d[0]}, {"uncorrected", d[1]}, {"corrected", d[2]}}},
             {"singleton", {{"exact", s[0]}, {"uncorrected", s[1]}, {"corrected", s[2]}}}});
  }
  if (format == "json") {
    json doc{{"schema_version", kSchemaVersion}, {"command", "tables"},
             {"dataset", ds.name},              {"n", n},
             {"j", j},                          {"m1", m1},
             {"alpha", params.alpha()},         {"theta", params.theta()},
             {"rows", rows_json}};
    write_output(doc.dump(2) + "\n", out);
    return 0;
  }
  std::ostringstream csv;
  csv << "table,m,exact,uncorrected,corrected\n";
  for (size_t i = 0; i < m_list.size(); ++i)
    csv << "discovery," << m_list[i] << ',' << format_value(discovery[i][0], full_precision)
        << ',' << format_value(discovery[i][1], full_precision) << ','
        << format_value(discovery[i][2], full_precision) << '\n';
  for (size_t i = 0; i < m_list.size(); ++i)
    csv << "singleton," << m_list[i] << ',' << format_value(singleton[i][0], full_precision)
        << ',' << format_value(singleton[i][1], full_precision) << ','
        << format_value(singleton[i][2], full_precision) << '\n';
  write_output(csv.str(), out);
  return 0;
}

int cmd_rate(double alpha, long l, int grid, double x_min, double x_max, bool closed_form,
             int threads, const std::string& format, const std::string& out) {
  ep::RateCurve curve = ep::make_rate_curve(alpha, l, x_min, x_max, grid, closed_form, threads);
  if (format == "json") {
    json pts = json::array();
    for (auto [x, I] : curve.grid)
      pts.push_back({{"x", x}, {"I", std::isinf(I) ? json("inf") : json(I)}});
    json doc{{"schema_version", kSchemaVersion},
             {"command", "rate"},
             {"alpha", alpha},
             {"l", l},
             {"closed_form", closed_form},
             {"points", pts}};
    write_output(doc.dump(2) + "\n", out);
  } else {
    write_output(curve.to_csv(), out);
  }
  return 0;
}

int cmd_tail(const ep::Dataset& ds, const ParamSpec& pspec, std::vector<long> m_list, int grid,
             double x_min, double x_max, int threads, const std::string& format,
             const std::string& out) {
  ep::Params params = resolve_params(pspec, &ds);
  if (!(params.alpha() > 0.0 && params.alpha() < 1.0))
    throw std::runtime_error("tail: the rate function needs alpha in (0,1)");
  if (m_list.empty()) m_list = default_m_list(ds.n(), "published");
  const long n = ds.n(), j = ds.j(), m1 = ds.singletons();
  if (format == "json") {
    json curves = json::array();
    for (long m : m_list) {
      ep::TailCurve tc = ep::make_tail_curve(params, n, j, m1, m, x_min, x_max, grid, threads);
      json pts = json::array();
      for (auto [x, u, c] : tc.grid)
        pts.push_back({{"x", x}, {"uncorrected", u}, {"corrected", c}});
      curves.push_back({{"m", m}, {"points", pts}});
    }
    json doc{{"schema_version", kSchemaVersion}, {"command", "tail"},
             {"dataset", ds.name},              {"alpha", params.alpha()},
             {"theta", params.theta()},         {"curves", curves}};
    write_output(doc.dump(2) + "\n", out);
    return 0;
  }
  // CSV: one x,uncorrected,corrected block per m; several m go to separate
  // files (suffix -m<M>) or to stdout blocks introduced by a comment line.
  for (long m : m_list) {
    ep::TailCurve tc = ep::make_tail_curve(params, n, j, m1, m, x_min, x_max, grid, threads);
    if (out.empty()) {
      std::cout << "# m=" << m << "\n" << tc.to_csv();
    } else if (m_list.size() == 1) {
      write_output(tc.to_csv(), out);
    } else {
      std::string path = out;
      std::string suffix = "-m" + std::to_string(m);
      size_t dot = path.find_last_of('.');
      if (dot == std::string::npos)
        path += suffix;
      else
        path.insert(dot, suffix);
      write_output(tc.to_csv(), path);
    }
  }
  return 0;
}

int cmd_fit(const ep::Dataset& ds, const std::string& method, double alpha,
            const std::string& format, const std::string& out) {
  ep::FitResult r =
      method == "mle" ? ep::fit_mle(ds.counts) : ep::fit_theta_mean(alpha, ds.n(), ds.j());
  if (format == "json") {
    json doc{{"schema_version", kSchemaVersion},
             {"command", "fit"},
             {"dataset", ds.name},
             {"n", ds.n()},
             {"j", ds.j()},
             {"method", method},
             {"alpha", r.alpha_hat},
             {"theta", r.theta_hat}};
    if (method == "mle")
      doc["log_likelihood"] = r.log_likelihood;
    else
      doc["residual"] = r.residual;
    write_output(doc.dump(2) + "\n", out);
  } else {
    std::ostringstream csv;
    csv.precision(17);
    csv << "method,alpha,theta," << (method == "mle" ? "log_likelihood" : "residual") << "\n"
        << method << ',' << r.alpha_hat << ',' << r.theta_hat << ','
        << (method == "mle" ? r.log_likelihood : r.residual) << '\n';
    write_output(csv.str(), out);
  }
  return 0;
}

int cmd_simulate(const std::optional<long>& n_opt, const ep::Dataset* ds, long m, long reps,
                 std::uint64_t seed, const ParamSpec& pspec, const std::string& format,
                 const std::string& out) {
  ep::Params params = resolve_params(pspec, ds);
  const long budget = 500000000L;
  const bool conditional = !n_opt.has_value();
  if (reps < 1) throw std::runtime_error("simulate: reps must be >= 1");
  const long per_rep = conditional ? m : *n_opt;
  if (conditional ? m < 0 : *n_opt < 1)
    throw std::runtime_error("simulate: need --n >= 1 or --m >= 0");
  if (per_rep * reps > budget)
    throw std::runtime_error("simulate: reps * draws exceeds the budget of 5e8 steps");
  std::ostringstream csv;
  json rows = json::array();
  if (!conditional) {
    csv << "rep,k,counts\n";
    for (long r = 0; r < reps; ++r) {
      auto rng = ep::Xoshiro256::derive(seed, static_cast<std::uint64_t>(r));
      ep::FrequencyCounts fc = ep::sample_partition(params, *n_opt, rng);
      csv << r << ',' << fc.k() << ',' << counts_field(fc.counts()) << '\n';
      if (format == "json")
        rows.push_back({{"rep", r}, {"k", fc.k()}, {"counts", counts_field(fc.counts())}});
    }
  } else {
    if (!ds) throw std::runtime_error("simulate: conditional mode needs --dataset");
    std::vector<long> sizes;
    for (auto [l, ml] : ds->counts.counts())
      for (long t = 0; t < ml; ++t) sizes.push_back(l);
    csv << "rep,k_new,new_counts,old_counts,total_counts\n";
    for (long r = 0; r < reps; ++r) {
      auto rng = ep::Xoshiro256::derive(seed, static_cast<std::uint64_t>(r));
      ep::ConditionalState st = ep::sample_conditional(params, sizes, m, rng);
      csv << r << ',' << st.new_block_count() << ',' << counts_field(st.new_counts()) << ','
          << counts_field(st.old_counts()) << ',' << counts_field(st.total_counts()) << '\n';
      if (format == "json")
        rows.push_back({{"rep", r},
                        {"k_new", st.new_block_count()},
                        {"new_counts", counts_field(st.new_counts())},
                        {"old_counts", counts_field(st.old_counts())},
                        {"total_counts", counts_field(st.total_counts())}});
    }
  }
  if (format == "json") {
    json doc{{"schema_version", kSchemaVersion},
             {"command", "simulate"},
             {"seed", seed},
             {"reps", reps},
             {"rows", rows}};
    write_output(doc.dump(2) + "\n", out);
  } else {
    write_output(csv.str(), out);
  }
  return 0;
}

int cmd_verify(const ep::VerifyOptions& opt, const std::string& format, const std::string& out) {
  std::vector<ep::CheckResult> results = ep::run_verify(opt);
  bool all_pass = true;
  std::ostringstream csv;
  csv << "group,pass,max_err,cases,note\n";
  json groups = json::array();
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    csv.precision(6);
    csv << r.group << ',' << (r.pass ? "pass" : "FAIL") << ',' << std::scientific << r.max_err
        << std::defaultfloat << ',' << r.cases << ',' << r.note << '\n';
    groups.push_back({{"group", r.group},
                      {"pass", r.pass},
                      {"max_err", r.max_err},
                      {"cases", r.cases},
                      {"note", r.note}});
  }
  if (format == "json") {
    json doc{{"schema_version", kSchemaVersion},
             {"command", "verify"},
             {"pass", all_pass},
             {"groups", groups}};
    write_output(doc.dump(2) + "\n", out);
  } else {
    write_output(csv.str(), out);
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ewens-Pitman sampling model: moments, large deviations, discovery estimates"};
  app.require_subcommand(1);

  std::string dataset_spec, format = "csv", out_path, rows = "published";
  ParamSpec pspec;
  double theta_value = 0.0;
  std::vector<long> m_list;
  std::uint64_t seed = 0;
  int threads = 1;
  bool full_precision = false;

  auto add_common = [&](CLI::App* sub, bool with_dataset) {
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", out_path, "output file (default stdout)");
    if (with_dataset)
      sub->add_option("--dataset", dataset_spec, "CSV path or builtin:<id>");
  };
  auto add_params = [&](CLI::App* sub) {
    sub->add_option("--alpha", pspec.alpha, "discount parameter alpha in [0,1)");
    sub->add_option("--theta", theta_value, "concentration parameter theta > -alpha");
    sub->add_option("--fit", pspec.fit_method, "fit theta (mean) or both parameters (mle)")
        ->check(CLI::IsMember({"mean", "mle"}));
  };

  auto* tables = app.add_subcommand("tables", "discovery and singleton estimate tables");
  add_common(tables, true);
  add_params(tables);
  tables->add_option("--m-list", m_list, "additional sample sizes")->delimiter(',');
  tables->add_option("--rows", rows, "default row sizes: published (rounded) or floor")
      ->check(CLI::IsMember({"published", "floor"}));
  tables->add_flag("--full-precision", full_precision,
                   "17 significant digits instead of 3 decimals");

  auto* rate = app.add_subcommand("rate", "rate function curve");
  double r_alpha = 0.5, r_xmin = 0.0, r_xmax = -1.0;
  long r_l = 1;
  int r_grid = 200;
  bool closed_form = false;
  add_common(rate, false);
  rate->add_option("--alpha", r_alpha, "alpha in (0,1)");
  rate->add_option("--l", r_l, "block size l >= 1");
  rate->add_option("--grid", r_grid, "number of grid points");
  rate->add_option("--x-min", r_xmin, "grid start");
  rate->add_option("--x-max", r_xmax, "grid end (default 1/l)");
  rate->add_flag("--closed-form", closed_form, "use the alpha=1/2, l=1 closed form");
  rate->add_option("--threads", threads, "worker threads");

  auto* tail = app.add_subcommand("tail", "LD tail approximations per m");
  double t_xmin = 0.0, t_xmax = 1.0;
  int t_grid = 200;
  add_common(tail, true);
  add_params(tail);
  tail->add_option("--m-list", m_list, "additional sample sizes")->delimiter(',');
  tail->add_option("--grid", t_grid, "number of grid points");
  tail->add_option("--x-min", t_xmin, "grid start");
  tail->add_option("--x-max", t_xmax, "grid end");
  tail->add_option("--threads", threads, "worker threads");

  auto* fit = app.add_subcommand("fit", "parameter fitting");
  std::string fit_method = "mean";
  double fit_alpha = 0.5;
  add_common(fit, true);
  fit->add_option("--fit", fit_method, "mean or mle")->check(CLI::IsMember({"mean", "mle"}));
  fit->add_option("--alpha", fit_alpha, "alpha for the mean-match fit");

  auto* sim = app.add_subcommand("simulate", "seeded draws from the sampling model");
  long sim_n = 0, sim_m = 0, sim_reps = 100;
  add_common(sim, true);
  add_params(sim);
  sim->add_option("--n", sim_n, "unconditional sample size");
  sim->add_option("--m", sim_m, "conditional additional sample size");
  sim->add_option("--reps", sim_reps, "number of repetitions");
  sim->add_option("--seed", seed, "RNG seed");

  auto* verify = app.add_subcommand("verify", "oracle and property suites");
  ep::VerifyOptions vopt;
  add_common(verify, false);
  verify->add_option("--max-n", vopt.max_n, "enumeration oracle depth (<= 9)")
      ->check(CLI::Range(1L, 9L));
  verify->add_flag("--sandwich,!--no-sandwich", vopt.sandwich,
                   "run the conditional-MGF bound suite (default on)");
  verify->add_option("--chi-reps", vopt.chi_reps, "draws per chi-square cell");
  verify->add_option("--seed", vopt.seed, "RNG seed");
  verify->add_option("--threads", vopt.threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tables->parsed() || tail->parsed() || sim->parsed()) {
      CLI::App* sub = tables->parsed() ? tables : (tail->parsed() ? tail : sim);
      if (sub->count("--theta")) pspec.theta = theta_value;
    }
    if (tables->parsed()) {
      ep::Dataset ds = ep::parse_dataset(dataset_spec);
      return cmd_tables(ds, pspec, m_list, rows, format, full_precision, out_path);
    }
    if (rate->parsed()) {
      if (r_xmax < 0) r_xmax = 1.0 / static_cast<double>(r_l);
      return cmd_rate(r_alpha, r_l, r_grid, r_xmin, r_xmax, closed_form, threads, format,
                      out_path);
    }
    if (tail->parsed()) {
      ep::Dataset ds = ep::parse_dataset(dataset_spec);
      return cmd_tail(ds, pspec, m_list, t_grid, t_xmin, t_xmax, threads, format, out_path);
    }
    if (fit->parsed()) {
      ep::Dataset ds = ep::parse_dataset(dataset_spec);
      return cmd_fit(ds, fit_method, fit_alpha, format, out_path);
    }
    if (sim->parsed()) {
      std::optional<long> n_opt;
      if (sim->count("--n")) n_opt = sim_n;
      std::optional<ep::Dataset> ds;
      if (!dataset_spec.empty()) ds = ep::parse_dataset(dataset_spec);
      if (!n_opt && !ds) throw std::runtime_error("simulate: give --n or --dataset with --m");
      return cmd_simulate(n_opt, ds ? &*ds : nullptr, sim_m, sim_reps, seed, pspec, format,
                          out_path);
    }
    if (verify->parsed()) return cmd_verify(vopt, format, out_path);
  } catch (const std::exception& e) {
    std::cerr << "eptool: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
