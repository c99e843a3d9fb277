// Command-line driver: synthetic field generation, masking/noise,
// attention-prior reconstruction, the Tucker-ALS baseline, metric
// evaluation and theory-bound reports, all over FT3D tensors.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "tap/tap.hpp"

using json = nlohmann::json;
using namespace tap;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

Dims3 parse_triple(const std::string& s, const std::string& flag) {
  Dims3 d{};
  int parsed = std::sscanf(s.c_str(), "%d,%d,%d", &d[0], &d[1], &d[2]);
  if (parsed != 3)
    throw std::invalid_argument(flag + ": expected three comma-separated integers, got '" + s + "'");
  return d;
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f.good()) throw std::invalid_argument("cannot open " + path);
  json j;
  f >> j;
  return j;
}

Dims3 json_dims(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
    throw std::invalid_argument(std::string("spec: '") + key +
                                "' must be an array of three integers");
  return {j[key][0].get<int>(), j[key][1].get<int>(), j[key][2].get<int>()};
}

NoiseSpec parse_noise(const std::string& s, std::uint64_t seed) {
  NoiseSpec n;
  n.seed = seed;
  if (s == "none" || s.empty()) return n;
  const auto colon = s.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument(
        "--noise: expected none, gaussian:SIGMA or laplace:SIGMA");
  const std::string kind = s.substr(0, colon);
  const double sigma = std::stod(s.substr(colon + 1));
  if (sigma < 0.0) throw std::invalid_argument("--noise: sigma must be >= 0");
  n.variance = sigma * sigma;
  if (kind == "gaussian") {
    n.kind = NoiseKind::kGaussian;
  } else if (kind == "laplace" || kind == "laplacian") {
    n.kind = NoiseKind::kLaplacian;
  } else {
    throw std::invalid_argument("--noise: unknown kind '" + kind + "'");
  }
  return n;
}

// Window/stride guidance when the grid does not tile: suggest K <= I/3 and
// S <= K/2 with (I - K) % S == 0.
std::string tiling_suggestion(Dims3 dims, Dims3 window) {
  std::string msg;
  for (int l = 0; l < 3; ++l) {
    const int i = dims[l];
    int k = std::min(window[l], std::max(1, i / 3));
    for (; k >= 1; --k) {
      for (int s = std::max(1, k / 2); s >= 1; --s) {
        if ((i - k) % s == 0) {
          msg += (msg.empty() ? "" : ", ") + std::string("mode ") +
                 std::to_string(l + 1) + ": K=" + std::to_string(k) +
                 ",S=" + std::to_string(s);
          k = 0;  // found
          break;
        }
      }
    }
  }
  return "suggested window/stride per mode (K <= I/3, S <= K/2): " + msg;
}

void transform_log_domain(ObservationSet& obs, std::vector<std::string>& warnings) {
  std::size_t floored = 0;
  for (std::size_t i = 0; i < obs.y.size(); ++i) {
    if (obs.o.data()[i] == 0.0) continue;
    double v = obs.y.data()[i];
    if (v < kLogFloor) {
      v = kLogFloor;
      ++floored;
    }
    obs.y.data()[i] = std::log(v);
  }
  if (floored > 0)
    warnings.push_back("log domain: " + std::to_string(floored) +
                       " observed entries floored at 1e-12 before the log");
  // refresh normalization bounds for the transformed values
  obs = make_observation_set(std::move(obs.y), std::move(obs.o),
                             std::move(obs.provenance));
}

void exp_in_place(Tensor3& t) {
  for (double& v : t.data()) v = std::exp(v);
}

int cmd_generate(const std::string& kind, const std::string& spec_path,
                 const std::string& out_path) {
  const json spec = load_json(spec_path);
  Tensor3 field;
  if (kind == "smooth") {
    field = gen_smooth_field(json_dims(spec, "dims"),
                             spec.value("seed", std::uint64_t{0}),
                             spec.value("components", 5));
  } else if (kind == "radio") {
    RadioMapSpec rm;
    rm.dims = json_dims(spec, "dims");
    rm.d_corr = spec.value("d_corr", 50.0);
    rm.subbands = spec.value("subbands", 10);
    rm.seed = spec.value("seed", std::uint64_t{0});
    if (spec.contains("emitters") && spec["emitters"].is_array()) {
      for (const auto& e : spec["emitters"]) {
        Emitter em;
        em.loc_x = e.at("location").at(0).get<double>();
        em.loc_y = e.at("location").at(1).get<double>();
        em.path_loss_exp = e.value("gamma", 2.0);
        em.shadow_var = e.value("eta", 0.0);
        rm.emitters.push_back(em);
      }
    } else {
      const int count = spec.value("emitters", 0) == 0 && spec.contains("emitter_count")
                            ? spec["emitter_count"].get<int>()
                            : spec.value("emitters", 3);
      rm = make_radio_spec(rm.dims, count, spec.value("gamma", 2.0),
                           spec.value("eta", 6.0), rm.d_corr, rm.seed);
      rm.subbands = spec.value("subbands", 10);
    }
    field = gen_radio_map(rm);
  } else {
    throw std::invalid_argument("--kind must be radio or smooth");
  }
  write_ft3d(out_path, field);
  std::cout << "wrote " << out_path << " dims " << field.dims()[0] << "x"
            << field.dims()[1] << "x" << field.dims()[2] << "\n";
  return 0;
}

int cmd_mask(const std::string& in_path, double rate, const std::string& pattern,
             const std::string& noise, std::uint64_t seed,
             const std::string& out_path, const std::string& mask_path,
             const std::string& meta_path) {
  Tensor3 field = read_ft3d(in_path);
  const NoiseSpec nspec = parse_noise(noise, seed + 1);
  Tensor3 noisy = add_noise(field, nspec);
  MaskSpec mspec;
  mspec.rate = rate;
  mspec.seed = seed;
  if (pattern == "element") {
    mspec.kind = MaskKind::kElementRandom;
  } else if (pattern == "fiber") {
    mspec.kind = MaskKind::kFiberWise;
  } else {
    throw std::invalid_argument("--pattern must be element or fiber");
  }
  auto [y, o] = apply_mask(noisy, mspec);
  write_ft3d(out_path, y);
  write_ft3d(mask_path, o);
  if (!meta_path.empty()) {
    json meta{{"source", in_path},
              {"rate", rate},
              {"pattern", pattern},
              {"noise", noise},
              {"seed", seed}};
    std::ofstream f(meta_path);
    f << meta.dump(2) << "\n";
  }
  std::cout << "wrote " << out_path << " and " << mask_path << "\n";
  return 0;
}

int cmd_reconstruct(const std::string& obs_path, const std::string& mask_path,
                    const std::string& model, const std::string& window,
                    const std::string& stride, int embed,
                    const std::string& heads, const std::string& activation,
                    double lr, int epochs, double rel_tol, double tv,
                    std::uint64_t seed, const std::string& domain,
                    const std::string& out_path, const std::string& trace_path,
                    const std::string& checkpoint_path) {
  Tensor3 y = read_ft3d(obs_path);
  Tensor3 o = read_ft3d(mask_path);
  if (y.dims() != o.dims())
    throw std::invalid_argument("observation and mask dims differ");
  // zero out unobserved entries so noisy inputs respect the Y = O .* (...) form
  y = hadamard(y, o);
  ObservationSet obs = make_observation_set(std::move(y), std::move(o));
  std::vector<std::string> warnings;
  if (domain == "log") {
    transform_log_domain(obs, warnings);
  } else if (domain != "linear") {
    throw std::invalid_argument("--domain must be linear or log");
  }

  ModelConfig mc;
  try {
    mc.grid = make_grid(obs.y.dims(), parse_triple(window, "--window"),
                        parse_triple(stride, "--stride"));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(
        std::string(e.what()) + "; " +
        tiling_suggestion(obs.y.dims(), parse_triple(window, "--window")));
  }
  mc.embed_dim = embed;
  mc.heads_shape = parse_triple(heads, "--heads");
  mc.activation = activation_from_name(activation);
  mc.seed = seed;
  const int head_count = mc.head_count();
  if (model == "tap") {
    if (head_count != 1)
      throw std::invalid_argument("--model tap requires --heads 1,1,1");
  } else if (model == "mhtap") {
    if (head_count < 2)
      throw std::invalid_argument("--model mhtap requires at least two heads");
  } else {
    throw std::invalid_argument("--model must be tap or mhtap");
  }

  TrainConfig tc;
  tc.learning_rate = lr;
  tc.max_epochs = epochs;
  tc.rel_tol = rel_tol;
  tc.tv_weight = tv;
  tc.seed = seed;

  FitResult fr = fit(obs, mc, tc);
  Tensor3 out = fr.reconstruction;
  if (domain == "log") exp_in_place(out);
  write_ft3d(out_path, out);
  if (!trace_path.empty()) write_trace_csv(trace_path, fr.trace);
  if (!checkpoint_path.empty()) {
    json header{{"model", model},
                {"window", {mc.grid.window[0], mc.grid.window[1], mc.grid.window[2]}},
                {"stride", {mc.grid.stride[0], mc.grid.stride[1], mc.grid.stride[2]}},
                {"dims", {obs.y.dims()[0], obs.y.dims()[1], obs.y.dims()[2]}},
                {"embed", embed},
                {"heads", {mc.heads_shape[0], mc.heads_shape[1], mc.heads_shape[2]}},
                {"activation", activation},
                {"seed", seed},
                {"domain", domain},
                {"norm_lo", fr.norm_lo},
                {"norm_hi", fr.norm_hi}};
    write_checkpoint(checkpoint_path, fr.params, header.dump());
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << out_path << " after " << fr.trace.loss.size()
            << " epochs, final loss " << fr.trace.loss.back() << "\n";
  return 0;
}

int cmd_baseline(const std::string& obs_path, const std::string& mask_path,
                 const std::string& ranks, int iters, double tol,
                 const std::string& domain, const std::string& out_path) {
  Tensor3 y = read_ft3d(obs_path);
  Tensor3 o = read_ft3d(mask_path);
  if (y.dims() != o.dims())
    throw std::invalid_argument("observation and mask dims differ");
  y = hadamard(y, o);
  ObservationSet obs = make_observation_set(std::move(y), std::move(o));
  std::vector<std::string> warnings;
  if (domain == "log") {
    transform_log_domain(obs, warnings);
  } else if (domain != "linear") {
    throw std::invalid_argument("--domain must be linear or log");
  }
  Tensor3 rec = tucker_als_complete(obs, parse_triple(ranks, "--ranks"), iters, tol);
  if (domain == "log") exp_in_place(rec);
  write_ft3d(out_path, rec);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& recon_path, const std::string& truth_path,
                 const std::string& metric, const std::string& json_path) {
  const auto t0 = std::chrono::steady_clock::now();
  Tensor3 recon = read_ft3d(recon_path);
  Tensor3 truth = read_ft3d(truth_path);
  if (recon.dims() != truth.dims())
    throw std::invalid_argument("reconstruction and truth dims differ");
  EvalResult r = evaluate(recon, truth, metric);
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.config_echo = "recon=" + recon_path + " truth=" + truth_path;
  std::cout << metric << " = " << r.value << "\n";
  if (!json_path.empty()) {
    json j{{"metric", metric},
           {"value", r.value},
           {"per_slice", r.per_slice},
           {"runtime_seconds", r.runtime_seconds},
           {"config", r.config_echo},
           {"warnings", r.warnings}};
    std::ofstream f(json_path);
    f << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_theory(const std::string& config_path, int mc_trials, int mc_n,
               std::uint64_t seed, const std::string& json_path) {
  const json cfg = load_json(config_path);
  BoundInputs b;
  b.alpha = cfg.at("alpha").get<double>();
  b.beta = cfg.at("beta").get<double>();
  b.lipschitz = cfg.value("lipschitz", 1.0);
  b.epsilon = cfg.value("epsilon", 0.01);
  b.delta = cfg.value("delta", 0.05);
  b.dims = json_dims(cfg, "dims");
  b.core_dims = json_dims(cfg, "core_dims");
  b.observed = cfg.at("observed").get<double>();
  b.field_max = cfg.value("field_max", 1.0);
  b.noise_max = cfg.value("noise_max", 0.0);

  const int rows = cfg.value("attention_rows", mc_n);
  SupportDistribution lemma1 = support_distribution(rows);
  b.core_nonzeros = cfg.contains("core_nonzeros")
                        ? cfg["core_nonzeros"].get<double>()
                        : lemma1.expected_core_nonzeros();

  MeasuredQuantities meas;
  if (cfg.contains("measured")) {
    const auto& m = cfg["measured"];
    meas.noise_fro = m.value("noise_fro", 0.0);
    meas.masked_noise_fro = m.value("masked_noise_fro", 0.0);
    meas.representation_error = m.value("representation_error", 0.0);
    if (m.contains("gap")) meas.gap_measured = m["gap"].get<double>();
  }
  TheoryReport rep = recoverability_report(b, meas, rows);

  json j{{"inputs",
          {{"alpha", b.alpha},
           {"beta", b.beta},
           {"lipschitz", b.lipschitz},
           {"epsilon", b.epsilon},
           {"delta", b.delta},
           {"dims", {b.dims[0], b.dims[1], b.dims[2]}},
           {"core_dims", {b.core_dims[0], b.core_dims[1], b.core_dims[2]}},
           {"observed", b.observed},
           {"field_max", b.field_max},
           {"noise_max", b.noise_max},
           {"core_nonzeros", b.core_nonzeros}}},
         {"xi", rep.xi},
         {"omega", rep.omega},
         {"lemma1",
          {{"rows", rows},
           {"expectation", rep.lemma1_expectation},
           {"expected_core_nonzeros", rep.lemma1_expected_nonzeros},
           {"p_head", std::vector<double>(lemma1.p.begin(),
                                          lemma1.p.begin() + std::min(rows, 12))}}},
         {"covering_log_bound", rep.covering_log},
         {"gap_bound", rep.gap},
         {"noise_term", rep.noise_term},
         {"representation_term", rep.representation_term},
         {"recovery_bound", rep.recovery_bound}};
  if (rep.gap_measured) {
    j["gap_measured"] = *rep.gap_measured;
    j["gap_within_bound"] = rep.gap_within_bound;
  }

  if (mc_trials > 0) {
    SupportDistribution mc = monte_carlo_support(mc_n, mc_trials, seed);
    SupportDistribution an = support_distribution(mc_n);
    SupportDistribution printed = support_distribution_unsquared_variant(mc_n);
    double printed_mass = 0.0;
    for (double p : printed.p) printed_mass += p;
    j["monte_carlo"] = {
        {"n", mc_n},
        {"trials", mc_trials},
        {"empirical_p1", mc.p[0]},
        {"analytic_p1", an.p[0]},
        {"empirical_expectation", mc.expectation},
        {"analytic_expectation", an.expectation},
        {"tv_distance", total_variation_distance(mc, an)},
        {"unsquared_variant_total_mass", printed_mass}};
  }

  std::cout << "theory report\n"
            << "  alpha=" << b.alpha << " beta=" << b.beta << " T=" << b.lipschitz
            << " eps=" << b.epsilon << " delta=" << b.delta << "\n"
            << "  xi=" << rep.xi << " omega=" << rep.omega << "\n"
            << "  E[n(z)]=" << rep.lemma1_expectation
            << "  E||S||_0=" << rep.lemma1_expected_nonzeros << "\n"
            << "  covering log bound=" << rep.covering_log << "\n"
            << "  gap bound=" << rep.gap << "\n"
            << "  recovery bound=" << rep.recovery_bound << "\n";
  if (rep.gap_measured)
    std::cout << "  measured gap=" << *rep.gap_measured << " within bound: "
              << (rep.gap_within_bound ? "yes" : "no") << "\n";
  if (!json_path.empty()) {
    std::ofstream f(json_path);
    f << j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physical-field tensor reconstruction via sparse tensor attention"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "synthesize a ground-truth field");
  std::string gen_kind, gen_spec, gen_out;
  gen->add_option("--kind", gen_kind, "radio|smooth")->required();
  gen->add_option("--spec", gen_spec, "JSON spec file")->required();
  gen->add_option("--out", gen_out, "output FT3D path")->required();

  // mask
  auto* msk = app.add_subcommand("mask", "apply noise and an observation mask");
  std::string msk_in, msk_pattern = "element", msk_noise = "none", msk_out,
              msk_mask, msk_meta;
  double msk_rate = 0.1;
  std::uint64_t msk_seed = 0;
  msk->add_option("--in", msk_in)->required();
  msk->add_option("--rate", msk_rate, "observation rate rho in (0,1]")->required();
  msk->add_option("--pattern", msk_pattern, "element|fiber");
  msk->add_option("--noise", msk_noise, "none|gaussian:SIGMA|laplace:SIGMA");
  msk->add_option("--seed", msk_seed);
  msk->add_option("--out", msk_out, "masked observations")->required();
  msk->add_option("--mask", msk_mask, "binary mask output")->required();
  msk->add_option("--meta", msk_meta, "provenance JSON (optional)");

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "attention-prior reconstruction");
  std::string rec_obs, rec_mask, rec_model = "tap", rec_window, rec_stride,
              rec_heads = "1,1,1", rec_act = "tanh", rec_domain = "linear",
              rec_out, rec_trace, rec_ckpt;
  int rec_embed = 64, rec_epochs = 2000;
  double rec_lr = 4e-3, rec_tv = 0.0, rec_rel_tol = 1e-6;
  std::uint64_t rec_seed = 0;
  rec->add_option("--obs", rec_obs)->required();
  rec->add_option("--mask", rec_mask)->required();
  rec->add_option("--model", rec_model, "tap|mhtap");
  rec->add_option("--window", rec_window, "K1,K2,K3")->required();
  rec->add_option("--stride", rec_stride, "S1,S2,S3")->required();
  rec->add_option("--embed", rec_embed, "embedding dimension M");
  rec->add_option("--heads", rec_heads, "h1,h2,h3 (mhtap)");
  rec->add_option("--activation", rec_act, "tanh|sigmoid|identity");
  rec->add_option("--lr", rec_lr);
  rec->add_option("--epochs", rec_epochs);
  rec->add_option("--rel-tol", rec_rel_tol,
                  "stop when the windowed relative loss improvement drops below this");
  rec->add_option("--tv", rec_tv, "TV regularization weight");
  rec->add_option("--seed", rec_seed);
  rec->add_option("--domain", rec_domain, "linear|log fitting domain");
  rec->add_option("--out", rec_out)->required();
  rec->add_option("--trace", rec_trace, "per-epoch CSV (optional)");
  rec->add_option("--checkpoint", rec_ckpt, "model checkpoint (optional)");

  // baseline
  auto* base = app.add_subcommand("baseline", "masked Tucker-ALS completion");
  std::string base_obs, base_mask, base_ranks, base_domain = "linear", base_out;
  int base_iters = 100;
  double base_tol = 1e-7;
  base->add_option("--obs", base_obs)->required();
  base->add_option("--mask", base_mask)->required();
  base->add_option("--ranks", base_ranks, "r1,r2,r3")->required();
  base->add_option("--iters", base_iters);
  base->add_option("--tol", base_tol);
  base->add_option("--domain", base_domain, "linear|log fitting domain");
  base->add_option("--out", base_out)->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "compare a reconstruction to truth");
  std::string ev_recon, ev_truth, ev_metric = "rmse", ev_json;
  ev->add_option("--recon", ev_recon)->required();
  ev->add_option("--truth", ev_truth)->required();
  ev->add_option("--metric", ev_metric, "rmse|slnre");
  ev->add_option("--json", ev_json, "result JSON (optional)");

  // theory
  auto* th = app.add_subcommand("theory", "evaluate the recoverability bounds");
  std::string th_config, th_json;
  int th_mc = 0, th_mc_n = 100;
  std::uint64_t th_seed = 1;
  th->add_option("--config", th_config, "bound inputs JSON")->required();
  th->add_option("--monte-carlo", th_mc, "validation trials (0 = skip)");
  th->add_option("--mc-n", th_mc_n, "score-vector length for the validation");
  th->add_option("--seed", th_seed);
  th->add_option("--json", th_json, "report JSON (optional)");

  try {
    app.parse(argc, argv);
    if (*gen) return cmd_generate(gen_kind, gen_spec, gen_out);
    if (*msk)
      return cmd_mask(msk_in, msk_rate, msk_pattern, msk_noise, msk_seed,
                      msk_out, msk_mask, msk_meta);
    if (*rec)
      return cmd_reconstruct(rec_obs, rec_mask, rec_model, rec_window,
                             rec_stride, rec_embed, rec_heads, rec_act, rec_lr,
                             rec_epochs, rec_rel_tol, rec_tv, rec_seed,
                             rec_domain, rec_out, rec_trace, rec_ckpt);
    if (*base)
      return cmd_baseline(base_obs, base_mask, base_ranks, base_iters, base_tol,
                          base_domain, base_out);
    if (*ev) return cmd_evaluate(ev_recon, ev_truth, ev_metric, ev_json);
    if (*th) return cmd_theory(th_config, th_mc, th_mc_n, th_seed, th_json);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
