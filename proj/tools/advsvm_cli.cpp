#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "advsvm/best_response.hpp"
#include "advsvm/equilibrium.hpp"
#include "advsvm/errors.hpp"
#include "advsvm/game_eval.hpp"
#include "advsvm/model.hpp"
#include "advsvm/montecarlo.hpp"
#include "advsvm/policy.hpp"

namespace {

using advsvm::AdversaryPolicy;
using advsvm::ClassifierPolicy;
using advsvm::GameConfig;
using advsvm::GaussianClassModel;
using nlohmann::json;

void report_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
  std::cerr << "error (" << kind << "): " << message << "\n";
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw advsvm::Error("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw advsvm::Error("short write on " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw advsvm::ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw advsvm::ParseError(path + ": " + e.what());
  }
  return j;
}

// A policy file is either the bare policy object or a best-response output
// with the policy nested under "policy".
template <typename Policy>
Policy load_policy(const std::string& path) {
  json j = read_json_file(path);
  if (j.is_object() && j.contains("policy")) j = j["policy"];
  try {
    return j.get<Policy>();
  } catch (const json::exception& e) {
    throw advsvm::ParseError(path + ": " + e.what());
  }
}

struct ModelFlags {
  std::string source = "synthetic";
  double ridge = -1.0;  // negative means the fitted default
  bool labels01 = false;
  bool whiten = false;
};

GaussianClassModel load_model(const ModelFlags& flags,
                              std::optional<advsvm::WhitenTransform>* transform
                              = nullptr) {
  if (flags.source == "synthetic") return advsvm::synthetic_example();
  if (flags.source.rfind("fit:", 0) == 0) {
    advsvm::LabeledDataset data =
        advsvm::read_csv(flags.source.substr(4), flags.labels01);
    if (flags.whiten) {
      auto [whitened, t] = advsvm::whiten(data);
      data = std::move(whitened);
      if (transform != nullptr) *transform = t;
    }
    const double ridge =
        flags.ridge < 0.0 ? advsvm::default_ridge(data) : flags.ridge;
    return advsvm::fit(data, ridge);
  }
  GaussianClassModel model;
  try {
    model = read_json_file(flags.source).get<GaussianClassModel>();
  } catch (const json::exception& e) {
    throw advsvm::ParseError(flags.source + ": " + e.what());
  }
  model.validate();
  return model;
}

void add_model_flags(CLI::App* cmd, ModelFlags& flags) {
  cmd->add_option("--model", flags.source,
                  "synthetic | fit:<csv path> | <model json path>")
      ->capture_default_str();
  cmd->add_option("--ridge", flags.ridge,
                  "covariance ridge for fit: sources (negative = automatic)");
  cmd->add_flag("--labels01", flags.labels01, "CSV labels are 0/1, not -1/+1");
  cmd->add_flag("--whiten", flags.whiten, "whiten fit: data before fitting");
}

int run(int argc, char** argv) {
  CLI::App app{"Equilibria of the adversarial linear classification game"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 42;
  app.add_option("--seed", seed, "root seed for all randomness")
      ->capture_default_str();

  // gen-synthetic
  auto* gen = app.add_subcommand(
      "gen-synthetic", "Sample a labeled CSV from the reference game");
  long gen_n = 500;
  std::string gen_out;
  gen->add_option("--n", gen_n, "points per class")->capture_default_str();
  gen->add_option("--out", gen_out, "output CSV path")->required();

  // fit
  auto* fit_cmd =
      app.add_subcommand("fit", "Fit a Gaussian class model from a CSV");
  std::string fit_in, fit_out;
  ModelFlags fit_flags;
  fit_cmd->add_option("--in", fit_in, "labeled CSV path")->required();
  fit_cmd->add_option("--out", fit_out, "output model JSON path")->required();
  fit_cmd->add_option("--ridge", fit_flags.ridge,
                      "covariance ridge (negative = automatic)");
  fit_cmd->add_flag("--labels01", fit_flags.labels01,
                    "CSV labels are 0/1, not -1/+1");
  fit_cmd->add_flag("--whiten", fit_flags.whiten,
                    "whiten features before fitting");

  // best-response
  auto* br = app.add_subcommand("best-response",
                                "One player's best response to a fixed "
                                "opponent policy");
  std::string br_player, br_opponent, br_out;
  ModelFlags br_model;
  double br_delta = 0.01, br_epsilon = 2.0, br_solver_tol = 1e-8;
  br->add_option("--player", br_player, "adversary | classifier")
      ->required()
      ->check(CLI::IsMember({"adversary", "classifier"}));
  br->add_option("--opponent", br_opponent,
                 "opponent policy JSON (classifier player defaults to the "
                 "identity adversary)");
  br->add_option("--delta", br_delta, "negative-class bound")
      ->capture_default_str();
  br->add_option("--epsilon", br_epsilon, "adversary budget")
      ->capture_default_str();
  br->add_option("--solver-tol", br_solver_tol, "conic solver tolerance")
      ->capture_default_str();
  br->add_option("--out", br_out, "output JSON path")->required();
  add_model_flags(br, br_model);

  // equilibrium
  auto* eq = app.add_subcommand(
      "equilibrium", "Averaged best-response dynamics to an equilibrium");
  GameConfig eq_config;
  std::string eq_sweep = "jacobi", eq_out, eq_trace;
  ModelFlags eq_model;
  eq->add_option("--delta", eq_config.delta, "negative-class bound")
      ->capture_default_str();
  eq->add_option("--epsilon", eq_config.epsilon, "adversary budget")
      ->capture_default_str();
  eq->add_option("--varpi", eq_config.varpi, "mixing constant")
      ->capture_default_str();
  eq->add_option("--max-iters", eq_config.max_iters, "iteration cap")
      ->capture_default_str();
  eq->add_option("--conv-tol", eq_config.conv_tol, "parameter-change stop")
      ->capture_default_str();
  eq->add_option("--solver-tol", eq_config.solver_tol,
                 "conic solver tolerance")
      ->capture_default_str();
  eq->add_option("--sweep", eq_sweep, "best-response read order")
      ->check(CLI::IsMember({"jacobi", "gauss-seidel"}))
      ->capture_default_str();
  eq->add_option("--out", eq_out, "output JSON path")->required();
  eq->add_option("--trace", eq_trace, "per-iteration JSON-lines path");
  add_model_flags(eq, eq_model);

  // eval
  auto* ev = app.add_subcommand(
      "eval", "Closed-form metrics of a policy pair, with feasibility");
  std::string ev_adv, ev_clf, ev_out;
  ModelFlags ev_model;
  double ev_delta = 0.01, ev_epsilon = 2.0;
  ev->add_option("--adversary", ev_adv,
                 "adversary policy JSON (default identity)");
  ev->add_option("--classifier", ev_clf, "classifier policy JSON")->required();
  ev->add_option("--delta", ev_delta, "negative-class bound")
      ->capture_default_str();
  ev->add_option("--epsilon", ev_epsilon, "adversary budget")
      ->capture_default_str();
  ev->add_option("--out", ev_out, "output JSON path")->required();
  add_model_flags(ev, ev_model);

  // simulate
  auto* sim = app.add_subcommand(
      "simulate", "Monte Carlo rates for a policy pair");
  std::string sim_adv, sim_clf, sim_out, sim_scatter;
  ModelFlags sim_model;
  long sim_n = 100000, sim_scatter_n = 500;
  int sim_workers = 1;
  sim->add_option("--adversary", sim_adv,
                  "adversary policy JSON (default identity)");
  sim->add_option("--classifier", sim_clf, "classifier policy JSON")
      ->required();
  sim->add_option("--n", sim_n, "samples per class")->capture_default_str();
  sim->add_option("--workers", sim_workers, "worker threads")
      ->capture_default_str();
  sim->add_option("--out", sim_out, "output JSON path")->required();
  sim->add_option("--scatter", sim_scatter, "optional scatter CSV path");
  sim->add_option("--scatter-n", sim_scatter_n, "scatter points per class")
      ->capture_default_str();
  add_model_flags(sim, sim_model);

  // boundary
  auto* bd = app.add_subcommand(
      "boundary", "Decision-line polyline of a 2-D classifier");
  std::string bd_clf, bd_out;
  std::vector<double> bd_lo{-4.0, -4.0}, bd_hi{8.0, 8.0};
  int bd_count = 100;
  bd->add_option("--classifier", bd_clf, "classifier policy JSON")->required();
  bd->add_option("--lo", bd_lo, "box lower corner (two values)")
      ->expected(2)
      ->capture_default_str();
  bd->add_option("--hi", bd_hi, "box upper corner (two values)")
      ->expected(2)
      ->capture_default_str();
  bd->add_option("--count", bd_count, "points along the line")
      ->capture_default_str();
  bd->add_option("--out", bd_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) report_error("usage", e.what());
    return app.exit(e);
  }

  if (*gen) {
    const GaussianClassModel model = advsvm::synthetic_example();
    const Eigen::Index dim = model.dim();
    advsvm::LabeledDataset data;
    data.features.resize(2 * gen_n, dim);
    data.labels.resize(2 * gen_n);
    if (gen_n > 0) {
      data.features.topRows(gen_n) = advsvm::sample(model, 1, gen_n, seed);
      data.features.bottomRows(gen_n) = advsvm::sample(model, -1, gen_n, seed);
      data.labels.head(gen_n).setConstant(1);
      data.labels.tail(gen_n).setConstant(-1);
    }
    advsvm::write_csv(gen_out, data);
  } else if (*fit_cmd) {
    ModelFlags flags = fit_flags;
    flags.source = "fit:" + fit_in;
    std::optional<advsvm::WhitenTransform> transform;
    const GaussianClassModel model = load_model(flags, &transform);
    json j = model;
    j["schema"] = "model.v1";
    if (transform.has_value()) j["whiten"] = *transform;
    write_json_file(fit_out, j);
  } else if (*br) {
    const GaussianClassModel model = load_model(br_model);
    json j;
    j["schema"] = "best_response.v1";
    j["player"] = br_player;
    if (br_player == "classifier") {
      const AdversaryPolicy adv =
          br_opponent.empty()
              ? advsvm::identity_adversary(model.dim())
              : load_policy<AdversaryPolicy>(br_opponent);
      const advsvm::ClassifierResponse resp =
          advsvm::classifier_best_response(model, adv, br_delta,
                                           br_solver_tol);
      j["policy"] = resp.policy;
      j["achieved_tp"] = resp.achieved_tp;
      j["status"] = advsvm::conic::status_name(resp.raw.status);
      j["delta_prime"] = resp.raw.delta_prime;
    } else {
      if (br_opponent.empty()) {
        throw advsvm::ConstructionError(
            "the adversary player needs --opponent with a classifier policy");
      }
      const ClassifierPolicy clf = load_policy<ClassifierPolicy>(br_opponent);
      const advsvm::AdversaryResponse resp = advsvm::adversary_best_response(
          model, clf, br_epsilon, br_solver_tol);
      j["policy"] = resp.policy;
      j["achieved_fn"] = resp.achieved_fn;
      j["winner"] = resp.winner;
      j["status"] = advsvm::conic::status_name(resp.raw.status);
      j["t"] = resp.raw.t;
    }
    write_json_file(br_out, j);
  } else if (*eq) {
    const GaussianClassModel model = load_model(eq_model);
    const advsvm::Sweep sweep = eq_sweep == "jacobi"
                                    ? advsvm::Sweep::jacobi
                                    : advsvm::Sweep::gauss_seidel;
    const advsvm::EquilibriumResult res =
        advsvm::run_best_response_dynamics(model, eq_config, sweep);
    const advsvm::GameMetrics metrics =
        advsvm::evaluate_game(model, res.adversary, res.classifier);
    const advsvm::EquilibriumReport report = advsvm::verify_equilibrium(
        model, res.adversary, res.classifier, eq_config, 0.01);
    json j;
    j["schema"] = "equilibrium_result.v1";
    j["adversary"] = res.adversary;
    j["classifier"] = res.classifier;
    j["metrics"] = advsvm::metrics_to_json(metrics, eq_config.delta,
                                           eq_config.epsilon);
    j["converged"] = res.trace.converged;
    j["stop_reason"] = advsvm::stop_reason_name(res.trace.stop_reason);
    j["iterations"] = res.trace.iterations.size();
    j["sweep"] = eq_sweep;
    j["adv_gain"] = report.adv_gain;
    j["clf_gain"] = report.clf_gain;
    j["is_equilibrium"] = report.is_equilibrium;
    write_json_file(eq_out, j);
    if (!eq_trace.empty()) {
      std::ofstream trace_out(eq_trace);
      if (!trace_out) throw advsvm::Error("cannot write " + eq_trace);
      advsvm::write_trace_json_lines(res.trace, trace_out);
    }
  } else if (*ev) {
    const GaussianClassModel model = load_model(ev_model);
    const AdversaryPolicy adv =
        ev_adv.empty() ? advsvm::identity_adversary(model.dim())
                       : load_policy<AdversaryPolicy>(ev_adv);
    const ClassifierPolicy clf = load_policy<ClassifierPolicy>(ev_clf);
    const advsvm::GameMetrics metrics = advsvm::evaluate_game(model, adv, clf);
    const bool clf_ok = advsvm::feasible_classifier(model, clf, ev_delta);
    const bool adv_ok = advsvm::feasible_adversary(model, adv, ev_epsilon);
    json j = advsvm::metrics_to_json(metrics, ev_delta, ev_epsilon);
    j["schema"] = "metrics.v1";
    j["feasible_classifier"] = clf_ok;
    j["feasible_adversary"] = adv_ok;
    write_json_file(ev_out, j);
    if (!clf_ok || !adv_ok) {
      report_error("feasibility",
                   std::string(clf_ok ? "adversary" : "classifier") +
                       " policy violates its constraint");
      return 1;
    }
  } else if (*sim) {
    const GaussianClassModel model = load_model(sim_model);
    const AdversaryPolicy adv =
        sim_adv.empty() ? advsvm::identity_adversary(model.dim())
                        : load_policy<AdversaryPolicy>(sim_adv);
    const ClassifierPolicy clf = load_policy<ClassifierPolicy>(sim_clf);
    const advsvm::EmpiricalRates rates =
        advsvm::empirical_rates(model, adv, clf, sim_n, seed, sim_workers);
    json j;
    j["schema"] = "rates.v1";
    j["tp"] = rates.tp;
    j["fn"] = rates.fn;
    j["tn"] = rates.tn;
    j["fp"] = rates.fp;
    j["cost_mean"] = rates.cost_mean;
    j["n_samples"] = rates.n_samples;
    j["std_err_tp"] = rates.std_err_tp;
    j["std_err_tn"] = rates.std_err_tn;
    j["std_err_cost"] = rates.std_err_cost;
    j["seed"] = seed;
    j["workers"] = sim_workers;
    write_json_file(sim_out, j);
    if (!sim_scatter.empty()) {
      std::ofstream scatter_out(sim_scatter);
      if (!scatter_out) throw advsvm::Error("cannot write " + sim_scatter);
      advsvm::write_scatter_csv(model, adv, sim_scatter_n, seed, scatter_out);
    }
  } else if (*bd) {
    const ClassifierPolicy clf = load_policy<ClassifierPolicy>(bd_clf);
    const auto points = advsvm::decision_boundary_points(
        clf, Eigen::Vector2d(bd_lo[0], bd_lo[1]),
        Eigen::Vector2d(bd_hi[0], bd_hi[1]), bd_count);
    std::ofstream out(bd_out);
    if (!out) throw advsvm::Error("cannot write " + bd_out);
    advsvm::write_boundary_csv(points, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const advsvm::ParseError& e) {
    report_error("parse", e.what());
  } catch (const advsvm::NotPdError& e) {
    report_error("not_pd", e.what());
  } catch (const advsvm::InsufficientDataError& e) {
    report_error("insufficient_data", e.what());
  } catch (const advsvm::DegeneratePolicyError& e) {
    report_error("degenerate_policy", e.what());
  } catch (const advsvm::FeasibilityError& e) {
    report_error("feasibility", e.what());
  } catch (const advsvm::SolverError& e) {
    report_error("solver", e.what());
  } catch (const advsvm::DynamicsError& e) {
    report_error("dynamics", e.what());
  } catch (const advsvm::ConstructionError& e) {
    report_error("construction", e.what());
  } catch (const advsvm::Error& e) {
    report_error("error", e.what());
  } catch (const std::exception& e) {
    report_error("internal", e.what());
  }
  return 1;
}
