#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "singcov/integrals.hpp"
#include "singcov/models.hpp"
#include "singcov/norms.hpp"
#include "singcov/parallel.hpp"
#include "singcov/simulation.hpp"
#include "singcov/suite.hpp"
#include "singcov/verification.hpp"

using nlohmann::json;
using namespace singcov;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(std::stod(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

// model preset "family:args" or a JSON file path
models::CovModel parse_model(const std::string& spec) {
  if (!spec.empty() && spec.front() == '{')
    return models::CovModel::from_json(json::parse(spec));
  const auto colon = spec.find(':');
  if (colon == std::string::npos || spec.find('/') != std::string::npos ||
      spec.find(".json") != std::string::npos) {
    return models::CovModel::from_json(load_json_file(spec));
  }
  const std::string family = spec.substr(0, colon);
  const std::string args = spec.substr(colon + 1);
  if (family == "fbm") return models::CovModel::fbm(std::stod(args), 1.0);
  if (family == "bifbm") {
    auto hk = split_numbers(args);
    if (hk.size() != 2) throw std::invalid_argument("bifbm preset wants bifbm:H,K");
    return models::CovModel::bifbm(hk[0], hk[1], 1.0);
  }
  if (family == "statinc") {
    if (args == "log") return models::CovModel::stat_inc_log(1.0);
    if (args.rfind("power", 0) == 0) {
      const auto comma = args.find(',');
      if (comma == std::string::npos)
        throw std::invalid_argument("statinc preset wants statinc:power,H");
      return models::CovModel::stat_inc_power(std::stod(args.substr(comma + 1)), 1.0);
    }
    throw std::invalid_argument("statinc preset wants statinc:log or statinc:power,H");
  }
  if (family == "kernel") {
    if (args == "indicator")
      return models::CovModel::kernel({models::Kappa::Kind::Indicator, 0.0}, 1.0);
    if (args.rfind("power", 0) == 0) {
      const auto comma = args.find(',');
      const double e = comma == std::string::npos ? -0.2 : std::stod(args.substr(comma + 1));
      return models::CovModel::kernel({models::Kappa::Kind::Power, e}, 1.0);
    }
    throw std::invalid_argument("kernel preset wants kernel:indicator or kernel:power[,e]");
  }
  throw std::invalid_argument("unknown model preset family '" + family + "'");
}

norms::PiecewiseFn parse_fn(const std::string& spec) {
  if (!spec.empty() && spec.front() == '{')
    return norms::PiecewiseFn::from_json(json::parse(spec));
  if (spec.rfind("indicator:", 0) == 0) {
    auto ab = split_numbers(spec.substr(10));
    if (ab.size() == 2) return norms::PiecewiseFn::indicator(ab[0], ab[1]);
    if (ab.size() == 3) return norms::PiecewiseFn::indicator(ab[0], ab[1], ab[2]);
    throw std::invalid_argument("indicator wants indicator:a,b[,c]");
  }
  if (spec.rfind("const:", 0) == 0)
    return norms::PiecewiseFn::constant(std::stod(spec.substr(6)));
  return norms::PiecewiseFn::from_json(load_json_file(spec));
}

// "T/16..T/512" halving ladder, "T/64" or a plain number for a single value
std::vector<double> parse_eps_spec(const std::string& spec, double T) {
  auto parse_one = [&](const std::string& s) {
    if (s.rfind("T/", 0) == 0) return T / std::stod(s.substr(2));
    return std::stod(s);
  };
  const auto dots = spec.find("..");
  if (dots == std::string::npos) return {parse_one(spec)};
  const double from = parse_one(spec.substr(0, dots));
  const double to = parse_one(spec.substr(dots + 2));
  if (!(from > to && to > 0.0))
    throw std::invalid_argument("eps ladder wants a decreasing range like T/16..T/512");
  std::vector<double> ladder;
  for (double e = from; e > to * (1.0 - 1e-12) && ladder.size() < 12; e *= 0.5)
    ladder.push_back(e);
  return ladder;
}

quad::Tolerances parse_tol(const std::string& spec) {
  quad::Tolerances tol;
  if (spec.empty()) return tol;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t next = spec.find(',', pos);
    if (next == std::string::npos) next = spec.size();
    const std::string kv = spec.substr(pos, next - pos);
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("tol override wants key=value");
    const std::string key = kv.substr(0, eq);
    const double value = std::stod(kv.substr(eq + 1));
    if (key == "rel") {
      tol.rel = value;
    } else if (key == "abs") {
      tol.abs = value;
    } else if (key == "cells") {
      tol.max_cells = static_cast<long>(value);
    } else {
      throw std::invalid_argument("unknown tol key '" + key + "'");
    }
    pos = next + 1;
  }
  return tol;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariance-singular Gaussian process toolkit"};
  app.require_subcommand(1);

  std::string model_spec, f_spec, g_spec, eps_spec = "T/64", out_dir, tol_spec;
  std::string kind = "pw", exp_name, params_file, preset = "paper";
  std::uint64_t seed = 42;
  int mpaths = 20000, grid_n = 256;
  unsigned threads = default_threads();
  double t_arg = -1.0;
  bool no_timestamp = false;

  auto add_common = [&](CLI::App* sub, bool with_model = true) {
    if (with_model) sub->add_option("--model", model_spec, "model preset or JSON file");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--paths", mpaths, "number of simulated paths");
    sub->add_option("--grid", grid_n, "grid steps n");
    sub->add_option("--threads", threads, "worker threads");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--no-timestamp", no_timestamp, "strip wall-clock fields from reports");
  };

  auto* cmd_sim = app.add_subcommand("simulate", "sample paths and export CSV");
  add_common(cmd_sim);
  cmd_sim->get_option("--paths")->default_val(100);

  auto* cmd_norm = app.add_subcommand("norm", "norms of a test function");
  add_common(cmd_norm);
  cmd_norm->add_option("--f", f_spec, "test function (indicator:a,b | const:c | JSON)")
      ->required();
  cmd_norm->add_option("--tol", tol_spec, "quadrature overrides rel=..,abs=..,cells=..");

  auto* cmd_inner = app.add_subcommand("inner", "inner products of two test functions");
  add_common(cmd_inner);
  cmd_inner->add_option("--f", f_spec, "first function")->required();
  cmd_inner->add_option("--g", g_spec, "second function")->required();
  cmd_inner->add_option("--tol", tol_spec, "quadrature overrides");

  auto* cmd_int = app.add_subcommand("integrate", "pathwise integral estimators");
  add_common(cmd_int);
  cmd_int->add_option("--f", f_spec, "integrand test function")->required();
  cmd_int->add_option("--kind", kind, "pw | forward | backward | symmetric");
  cmd_int->add_option("--eps", eps_spec, "regularization width (e.g. T/64)");
  cmd_int->add_option("--t", t_arg, "upper limit (default T)");

  auto* cmd_qv = app.add_subcommand("qv", "quadratic variation ladder");
  add_common(cmd_qv);
  cmd_qv->add_option("--eps", eps_spec, "ladder spec like T/16..T/256");
  cmd_qv->add_option("--t", t_arg, "time (default T)");

  auto* cmd_check = app.add_subcommand("check", "assumption checks and membership");
  add_common(cmd_check);

  auto* cmd_verify = app.add_subcommand("verify", "run one named experiment");
  add_common(cmd_verify);
  cmd_verify->add_option("--exp", exp_name, "experiment name")->required();
  cmd_verify->add_option("--params", params_file, "JSON parameter block");

  auto* cmd_suite = app.add_subcommand("suite", "full verification bundle");
  add_common(cmd_suite, false);
  cmd_suite->add_option("--preset", preset, "suite preset (paper)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the one-line diagnostic / help text
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_sim->parsed()) {
      auto model = parse_model(model_spec);
      sim::SimGrid grid(model.horizon(), grid_n);
      auto ens = sim::sample_paths(model, grid, mpaths, seed, {false, threads});
      if (out_dir.empty()) throw std::invalid_argument("simulate requires --out");
      std::filesystem::create_directories(out_dir);
      std::ofstream csv(std::filesystem::path(out_dir) / "paths.csv");
      ens.write_csv(csv);
      write_text(std::filesystem::path(out_dir) / "paths_meta.json",
                 ens.metadata().dump(2) + "\n");
      std::cout << "wrote " << mpaths << " paths to " << out_dir << "/paths.csv\n";
      return 0;
    }

    if (cmd_norm->parsed()) {
      auto model = parse_model(model_spec);
      auto f = parse_fn(f_spec);
      norms::NormOptions opts;
      opts.tol = parse_tol(tol_spec);
      json out;
      out["norm_H_sq"] = norms::norm_H_sq(f, model, opts);
      out["norm_R_sq"] = norms::norm_R_sq(f, model, opts);
      out["formal"] = norms::norms_formal(model);
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (cmd_inner->parsed()) {
      auto model = parse_model(model_spec);
      auto f = parse_fn(f_spec);
      auto g = parse_fn(g_spec);
      norms::NormOptions opts;
      opts.tol = parse_tol(tol_spec);
      json out;
      out["inner_H"] = norms::inner_H(f, g, model, opts);
      out["inner_R"] = norms::inner_R(f, g, model, opts);
      out["formal"] = norms::norms_formal(model);
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (cmd_int->parsed()) {
      auto model = parse_model(model_spec);
      auto f = parse_fn(f_spec);
      sim::SimGrid grid(model.horizon(), grid_n);
      const double t = t_arg < 0 ? model.horizon() : t_arg;
      auto ens = sim::sample_paths(model, grid, mpaths, seed, {false, threads});
      std::vector<double> vals(ens.size());
      const double eps = parse_eps_spec(eps_spec, model.horizon()).front();
      parallel_for(
          ens.size(),
          [&](std::size_t k) {
            const auto& path = ens.paths[k];
            if (kind == "pw") {
              vals[k] = integrals::paley_wiener(path, grid, f);
            } else {
              std::vector<double> Y(path.size());
              for (int i = 0; i <= grid.n; ++i) Y[i] = f(grid.time(i));
              integrals::RegKind rk = kind == "forward"    ? integrals::RegKind::Forward
                                      : kind == "backward" ? integrals::RegKind::Backward
                                                           : integrals::RegKind::Symmetric;
              vals[k] = integrals::reg_integral(Y, path, grid, eps, rk, t);
            }
          },
          threads);
      double mu = pairwise_sum(vals) / vals.size();
      double var = 0.0;
      for (double v : vals) var += (v - mu) * (v - mu);
      var /= (vals.size() - 1);
      json out{{"kind", kind},
               {"mean", mu},
               {"std_error", std::sqrt(var / vals.size())},
               {"variance", var},
               {"m", mpaths}};
      if (kind != "pw") out["eps"] = eps;
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (cmd_qv->parsed()) {
      auto model = parse_model(model_spec);
      sim::SimGrid grid(model.horizon(), grid_n);
      const double t = t_arg < 0 ? model.horizon() : t_arg;
      auto ladder = parse_eps_spec(eps_spec == "T/64" ? "T/16..T/256" : eps_spec,
                                   model.horizon());
      auto ens = sim::sample_paths(model, grid, mpaths, seed, {false, threads});
      json table = json::array();
      std::cout << "eps,mean_qv\n";
      for (double eps : ladder) {
        std::vector<double> qv(ens.size());
        parallel_for(
            ens.size(),
            [&](std::size_t k) {
              qv[k] = integrals::quadratic_variation_eps(ens.paths[k], grid, eps, t);
            },
            threads);
        const double mu = pairwise_sum(qv) / qv.size();
        std::cout << eps << "," << mu << "\n";
        table.push_back({{"eps", eps}, {"mean_qv", mu}});
      }
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text(std::filesystem::path(out_dir) / "qv.json", table.dump(2) + "\n");
      }
      return 0;
    }

    if (cmd_check->parsed()) {
      auto model = parse_model(model_spec);
      json out;
      out["model"] = model.to_json();
      out["assumptions"] = models::check_assumptions(model, std::max(grid_n, 16)).to_json();
      if (model.capabilities().has_Q) {
        out["membership"] =
            models::membership_condition(
                model, models::default_membership_cutoffs(model.horizon()))
                .to_json();
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (cmd_verify->parsed()) {
      json params;
      if (!params_file.empty()) {
        params = load_json_file(params_file);
      } else {
        if (model_spec.empty())
          throw std::invalid_argument("verify needs --params or --model");
        params["model"] = parse_model(model_spec).to_json();
        params["n"] = grid_n;
        params["m"] = mpaths;
        params["seed"] = seed;
        params["threads"] = threads;
        if (exp_name == "isometry" || exp_name == "duality") {
          params["f"] = exp_name == "duality" ? json("x") : parse_fn("indicator:0,0.5").to_json();
          if (exp_name == "duality") {
            params["phi"] = parse_fn("indicator:0,0.5").to_json();
            params["h"] = parse_fn("indicator:0,0.5").to_json();
          }
        } else if (exp_name == "ito_symmetric") {
          params["f"] = "sin";
          params["t"] = 0.5;
          params["eps_ladder"] = parse_eps_spec("T/16..T/256", 1.0);
        } else if (exp_name == "skorohod_mean_zero") {
          params["g"] = "x";
          params["eps"] = 1.0 / grid_n;
          params["t"] = 1.0;
        } else if (exp_name == "qv") {
          params["eps_ladder"] = parse_eps_spec("T/32..T/256", 1.0);
          params["t"] = 1.0;
          params["expect"] = "reference";
          params["reference"] = 1.0;
        } else if (exp_name == "membership_probe") {
          params["cutoffs"] = parse_eps_spec("T/4..T/128", 1.0);
        } else if (exp_name == "ll1_ratio") {
          params["eps_ladder"] = parse_eps_spec("T/16..T/128", 1.0);
        } else if (exp_name == "trace_convergence") {
          params["tau"] = 0.5;
          params["eps_ladder"] = parse_eps_spec("T/64..T/1024", 1.0);
        } else if (exp_name == "kernel_identity") {
          params = json{{"kappa", "indicator"}, {"phi", "quadratic_bump"},
                        {"grids", {128, 256}},  {"T", 1.0},
                        {"m", mpaths},          {"seed", seed},
                        {"threads", threads}};
        } else if (exp_name == "double_integral") {
          params["h"] = {{"x_breaks", {0.0, 0.5}}, {"y_breaks", {0.0, 0.5}},
                         {"coeffs", {{1.0}}}};
        }
      }
      auto rep = verify::run_experiment(exp_name, params);
      if (no_timestamp) rep.wall_seconds = 0.0;
      std::cout << rep.to_json(!no_timestamp).dump(2) << "\n";
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text(std::filesystem::path(out_dir) / "report.json",
                   rep.to_json(!no_timestamp).dump(2) + "\n");
        std::ostringstream csv;
        verify::ExperimentReport::csv_header(csv);
        rep.append_csv(csv);
        write_text(std::filesystem::path(out_dir) / "estimates.csv", csv.str());
      }
      return rep.passed() ? 0 : 1;
    }

    if (cmd_suite->parsed()) {
      if (preset != "paper") throw std::invalid_argument("unknown suite preset '" + preset + "'");
      auto suite = verify::run_paper_suite(seed, threads);
      for (int c : suite.criteria()) {
        std::cout << (suite.criterion_pass(c) ? "[PASS]" : "[FAIL]") << " criterion " << c;
        for (const auto& it : suite.items)
          if (it.criterion == c && !it.report.passed()) std::cout << "  <- " << it.label;
        std::cout << "\n";
      }
      std::cout << (suite.all_pass() ? "suite: all criteria passed\n"
                                     : "suite: FAILURES present\n");
      const std::string dir = out_dir.empty() ? "." : out_dir;
      std::filesystem::create_directories(dir);
      write_text(std::filesystem::path(dir) / "report.json",
                 suite.to_json(!no_timestamp).dump(2) + "\n");
      std::ostringstream csv;
      suite.write_csv(csv);
      write_text(std::filesystem::path(dir) / "estimates.csv", csv.str());
      return suite.all_pass() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
