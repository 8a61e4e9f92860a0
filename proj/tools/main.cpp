// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "qderk/constructor.hpp"
#include "qderk/errors.hpp"
#include "qderk/integrator.hpp"
#include "qderk/optimizer.hpp"
#include "qderk/stability.hpp"
#include "qderk/tableau.hpp"
#include "qderk/trees.hpp"

using namespace qderk;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << data;
}

std::string fmt(const ExtReal& x, int digits) {
  return digits > 0 ? x.to_string(digits) : x.to_string();
}

// The weight vector selected by --weights main|embedded; embedded weights
// are derived as b + d_1 when the file does not carry them.
DenseVector pick_weights(const ButcherTableau& T, const std::string& which) {
  if (which == "main") return T.b;
  if (which != "embedded")
    throw ValidationError("--weights must be main or embedded");
  if (T.b_embedded) return *T.b_embedded;
  return T.b + d_vector(T, 1);
}

ODEProblem make_problem(const std::string& name, const ExtReal& tf,
                        double lambda) {
  if (name == "lorenz") return lorenz63(tf);
  ODEProblem pr;
  pr.dimension = 1;
  pr.t0 = ExtReal(0);
  pr.tf = tf;
  pr.y0 = DenseVector{ExtReal(1)};
  if (name == "exp") {
    pr.rhs = [](const ExtReal&, const DenseVector& y) {
      return DenseVector{-y[0]};
    };
  } else if (name == "dahlquist") {
    ExtReal lam(lambda);
    pr.rhs = [lam](const ExtReal&, const DenseVector& y) {
      return DenseVector{lam * y[0]};
    };
  } else {
    throw ValidationError("--problem must be exp, dahlquist, or lorenz");
  }
  return pr;
}

std::string run_csv(const IntegrationRun& run, int digits) {
  std::ostringstream os;
  os << "t";
  for (std::size_t d = 0; d < run.states[0].size(); ++d) os << ",y" << d;
  os << "\n";
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    os << fmt(run.times[k], digits);
    for (const ExtReal& y : run.states[k]) os << "," << fmt(y, digits);
    os << "\n";
  }
  return os.str();
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Construction, analysis, and integration of high-order "
               "explicit Runge-Kutta methods"};
  app.require_subcommand(1);
  int digits = 0;
  app.add_option("--digits", digits,
                 "decimal digits for numeric output (default: full precision)");

  auto* cmd_construct = app.add_subcommand("construct", "build a method");
  int order = 0;
  std::string params_path, out_path;
  long precision = 0;
  cmd_construct->add_option("--order", order, "even order >= 4")->required();
  cmd_construct->add_option("--params", params_path, "free-parameter JSON");
  cmd_construct->add_option("--precision", precision, "precision bits");
  cmd_construct->add_option("--out", out_path, "output tableau JSON")->required();

  auto* cmd_verify = app.add_subcommand("verify", "check order conditions");
  std::string tableau_path, weights = "main";
  int max_order = 0;
  cmd_verify->add_option("--tableau", tableau_path, "tableau JSON")->required();
  cmd_verify->add_option("--max-order", max_order, "highest order to test")
      ->required();
  cmd_verify->add_option("--weights", weights, "main|embedded");

  auto* cmd_stab = app.add_subcommand("stability", "stability region scan");
  std::string grid = "-6,1,-4,4,101,101", stab_out;
  cmd_stab->add_option("--tableau", tableau_path, "tableau JSON")->required();
  cmd_stab->add_option("--grid", grid, "RE0,RE1,IM0,IM1,NX,NY");
  cmd_stab->add_option("--out", stab_out, "region CSV")->required();

  auto* cmd_int = app.add_subcommand("integrate", "integrate a test problem");
  std::string problem = "exp", int_out;
  bool adaptive = false;
  double atol = 1e-10, rtol = 1e-10, lambda = -2.0;
  std::string tf_str = "1", h_str = "0.01";
  cmd_int->set_help_flag("--help", "print help");  // frees -h for --h
  cmd_int->add_option("--tableau", tableau_path, "tableau JSON")->required();
  cmd_int->add_option("--problem", problem, "exp|dahlquist|lorenz");
  cmd_int->add_option("--lambda", lambda, "dahlquist coefficient");
  cmd_int->add_flag("--adaptive", adaptive, "embedded-pair step control");
  cmd_int->add_option("--atol", atol, "absolute tolerance");
  cmd_int->add_option("--rtol", rtol, "relative tolerance");
  cmd_int->add_option("--tf", tf_str, "final time")->required();
  cmd_int->add_option("--h", h_str, "step size (initial step when adaptive)");
  cmd_int->add_option("--out", int_out, "solution CSV")->required();

  auto* cmd_conv = app.add_subcommand("converge", "fixed-step convergence study");
  std::vector<std::string> h_list;
  std::string conv_out;
  cmd_conv->add_option("--tableau", tableau_path, "tableau JSON")->required();
  cmd_conv->add_option("--h-list", h_list, "step sizes")->required();
  cmd_conv->add_option("--out", conv_out, "CSV output (default stdout)");

  auto* cmd_pred = app.add_subcommand("predict", "Lorenz predictability time");
  std::string tol_str = "1e-6", t_end_str = "40";
  cmd_pred->set_help_flag("--help", "print help");  // frees -h for --h
  cmd_pred->add_option("--tableau", tableau_path, "tableau JSON")->required();
  cmd_pred->add_option("--h", h_str, "coarse step")->required();
  cmd_pred->add_option("--tol", tol_str, "divergence tolerance");
  cmd_pred->add_option("--t-end", t_end_str, "time horizon");

  auto* cmd_opt = app.add_subcommand("optimize", "CMA-ES parameter search");
  int budget = 50;
  unsigned long seed = 1;
  std::string weights_json;
  cmd_opt->add_option("--order", order, "even order >= 6")->required();
  cmd_opt->add_option("--budget", budget, "generations")->required();
  cmd_opt->add_option("--seed", seed, "random seed")->required();
  cmd_opt->add_option("--weights", weights_json, "fitness weight JSON file");
  cmd_opt->add_option("--out", out_path, "winner tableau JSON")->required();

  auto* cmd_info = app.add_subcommand("info", "stage layout summary");
  cmd_info->add_option("--order", order, "even order >= 4")->required();

  for (CLI::App* sub : app.get_subcommands(nullptr))
    sub->fallthrough();  // lets --digits follow any subcommand

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // validation exit code; --help stays 0
  }

  if (*cmd_construct) {
    mpfr_prec_t prec =
        precision > 0 ? static_cast<mpfr_prec_t>(precision)
                      : ExtReal::default_precision();
    StageLayout layout = plan_layout(order, prec);
    FreeParameters fp = params_path.empty()
                            ? default_free_parameters(layout)
                            : parse_free_parameters(layout, read_file(params_path));
    ButcherTableau T = construct(order, fp, prec);
    save_tableau(T, out_path);
    std::cout << "order " << order << " stages " << T.s << " written to "
              << out_path << "\n";
  } else if (*cmd_verify) {
    ButcherTableau T = load_tableau(tableau_path);
    DenseVector w = pick_weights(T, weights);
    OrderReport rep = verify_order(T, max_order, w,
                                   pow_int(ExtReal(0.5), T.precision_bits / 2));
    std::cout << "order_verified " << rep.order_verified << "\n";
    for (std::size_t k = 0; k < rep.max_abs_residual_per_order.size(); ++k)
      std::cout << "max_residual_order_" << k + 1 << " "
                << fmt(rep.max_abs_residual_per_order[k], digits ? digits : 3)
                << "\n";
  } else if (*cmd_stab) {
    ButcherTableau T = load_tableau(tableau_path);
    std::vector<double> g;
    std::stringstream ss(grid);
    for (std::string tok; std::getline(ss, tok, ',');)
      g.push_back(std::stod(tok));
    if (g.size() != 6) throw ValidationError("--grid needs six values");
    StabilityPolynomial P = stability_polynomial(T);
    write_file(stab_out,
               region_csv(P, ExtReal(g[0]), ExtReal(g[1]), ExtReal(g[2]),
                          ExtReal(g[3]), static_cast<int>(g[4]),
                          static_cast<int>(g[5])));
    ExtReal tol = pow_int(ExtReal(0.5), 40);
    ExtReal L = real_stability_interval(P, tol);
    std::cout << "real_interval " << fmt(L, digits ? digits : 6) << "\n";
  } else if (*cmd_int) {
    ButcherTableau T = load_tableau(tableau_path);
    ODEProblem pr = make_problem(problem, ExtReal::from_string(tf_str), lambda);
    IntegrationRun run;
    if (adaptive) {
      if (!T.b_embedded) T.b_embedded = embedded_weights(T);
      AdaptiveConfig cfg = scalar_config(ExtReal(atol), ExtReal(rtol),
                                         ExtReal::from_string(h_str));
      run = integrate_adaptive(T, pr, cfg);
    } else {
      run = integrate_fixed(T, pr, ExtReal::from_string(h_str));
    }
    write_file(int_out, run_csv(run, digits));
    std::cout << "steps " << run.times.size() - 1 << " rhs_evaluations "
              << run.rhs_evaluations << "\n";
  } else if (*cmd_conv) {
    ButcherTableau T = load_tableau(tableau_path);
    std::vector<ExtReal> hs;
    for (const std::string& h : h_list) hs.push_back(ExtReal::from_string(h));
    ODEProblem pr = make_problem("exp", ExtReal(1), 0);
    DenseVector exact{exp(ExtReal(-1))};
    std::ostringstream os;
    os << "h,err,p_obs\n";
    for (const ConvergenceRow& row : convergence_study(T, pr, exact, hs))
      os << fmt(row.h, digits ? digits : 6) << ","
         << fmt(row.err, digits ? digits : 6) << ","
         << fmt(row.p_obs, digits ? digits : 4) << "\n";
    if (conv_out.empty())
      std::cout << os.str();
    else
      write_file(conv_out, os.str());
  } else if (*cmd_pred) {
    ButcherTableau T = load_tableau(tableau_path);
    ExtReal Th = predictability_time(T, ExtReal::from_string(h_str),
                                     ExtReal::from_string(tol_str),
                                     ExtReal::from_string(t_end_str));
    std::cout << "predictability_time " << fmt(Th, digits ? digits : 6) << "\n";
  } else if (*cmd_opt) {
    FitnessConfig cfg;
    if (!weights_json.empty()) {
      auto j = nlohmann::json::parse(read_file(weights_json));
      cfg.w_err = j.value("w_err", cfg.w_err);
      cfg.w_stab = j.value("w_stab", cfg.w_stab);
      cfg.w_area = j.value("w_area", cfg.w_area);
      cfg.w_interval = j.value("w_interval", cfg.w_interval);
      cfg.w_convex = j.value("w_convex", cfg.w_convex);
    }
    auto [T, rep] = optimize_method(order, cfg, budget, seed);
    save_tableau(T, out_path);
    std::cout << serialize_report(rep) << "\n";
  } else if (*cmd_info) {
    StageLayout L = plan_layout(order);
    std::cout << "p " << L.p << "\nm " << L.m << "\nn " << L.n << "\nl " << L.l
              << "\ns2 " << L.s2 << "\ns " << L.s << "\ndof "
              << degrees_of_freedom(L) << "\n";
    for (std::size_t g = 0; g < L.q_groups.size(); ++g)
      std::cout << "q_group_" << g + 1 << " stages " << L.q_groups[g].first
                << ".." << L.q_groups[g].second << "\n";
    for (int i = 1; i <= L.N - 2; ++i) {
      std::cout << "cluster_" << i << " node "
                << fmt(L.cluster_node(i), digits ? digits : 6) << " stages";
      for (int stage : L.clusters[static_cast<std::size_t>(i - 1)])
        std::cout << " " << stage;
      std::cout << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible construction: " << e.what() << "\n";
    return 3;
  } catch (const VerificationError& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
