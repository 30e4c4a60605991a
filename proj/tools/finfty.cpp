#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "finfty/runner.hpp"

namespace {

// Flags beat the config file, the config file beats built-in defaults.  The
// config overlay runs before CLI11 assigns any flag, so a later flag simply
// overwrites the overlaid value.
int overlay_config(int argc, char** argv, std::vector<finfty::RunConfig*> targets) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0) path = arg.substr(9);
  }
  if (path.empty()) return 0;
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "error: cannot open config file '%s'\n", path.c_str());
    return 1;
  }
  try {
    const finfty::json j = finfty::json::parse(in);
    for (finfty::RunConfig* cfg : targets) cfg->apply(j);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: config file '%s': %s\n", path.c_str(), e.what());
    return 1;
  }
  return 0;
}

void add_common(CLI::App* cmd, finfty::RunConfig& cfg, std::string& config_sink) {
  cmd->add_option("--seed", cfg.seed, "base seed for the trial streams");
  cmd->add_option("--workers", cfg.workers, "worker threads, 0 = available parallelism");
  cmd->add_option("--out", cfg.out_dir, "report directory");
  cmd->add_option("--config", config_sink,
                  "JSON config file, applied before flags (flags win)");
  cmd->add_flag("--no-json", [&cfg](std::int64_t) { cfg.emit_json = false; },
                "skip the JSON report");
  cmd->add_flag("--no-csv", [&cfg](std::int64_t) { cfg.emit_csv = false; },
                "skip the CSV tables");
}

void add_grid(CLI::App* cmd, finfty::RunConfig& cfg, bool with_dim = true) {
  if (with_dim) cmd->add_option("--dim", cfg.dim, "dimension, 1 or 2");
  cmd->add_option("--log2-side", cfg.log2_side, "torus side exponent");
  cmd->add_option("--log2-samples", cfg.log2_samples, "samples-per-axis exponent");
}

void add_family(CLI::App* cmd, finfty::RunConfig& cfg) {
  cmd->add_option("--trials", cfg.trials, "independent trials");
  cmd->add_option("--mu", cfg.mu, "base scale of the trial sequences");
  cmd->add_option("--k-max", cfg.k_max, "top scale of the trial sequences");
  cmd->add_option("--band-A", cfg.band_A, "band certificate width");
  cmd->add_option("--decay", cfg.decay, "per-scale amplitude decay");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadic maximal-inequality laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("finfty ") + finfty::kVersion);

  int exit_code = 0;
  std::string config_sink;
  std::vector<finfty::RunConfig*> all_configs;

  auto make_leaf = [&](CLI::App* parent, const std::string& name, const std::string& help,
                       const std::string& experiment) -> finfty::RunConfig& {
    CLI::App* cmd = parent->add_subcommand(name, help);
    auto cfg = std::make_shared<finfty::RunConfig>();
    cfg->experiment = experiment;
    all_configs.push_back(cfg.get());
    add_common(cmd, *cfg, config_sink);
    cmd->callback([&exit_code, cfg] { exit_code = finfty::run(*cfg); });
    return *cfg;
  };

  {
    finfty::RunConfig& cfg = make_leaf(&app, "synth", "sample, transform and round-trip "
                                       "band-limited fields", "synth");
    cfg.trials = 50;
    add_grid(app.get_subcommand("synth"), cfg);
    app.get_subcommand("synth")->add_option("--trials", cfg.trials, "independent fields");
    app.get_subcommand("synth")->add_option("--band-k", cfg.band_k,
                                            "band radius exponent of the synthesized fields");
  }

  CLI::App* verify = app.add_subcommand("verify", "measure one inequality on random trials");
  verify->require_subcommand(1);
  {
    finfty::RunConfig& cfg = make_leaf(verify, "fefferman-stein",
                                       "vector-valued maximal bound", "verify-fefferman-stein");
    cfg.seed = 7;
    CLI::App* c = verify->get_subcommand("fefferman-stein");
    add_grid(c, cfg);
    add_family(c, cfg);
    c->add_option("--p", cfg.p, "outer exponent");
    c->add_option("--q", cfg.q, "inner exponent");
    c->add_option("--r", cfg.r, "maximal-operator exponent, needs r < p and r < q");
  }
  {
    finfty::RunConfig& cfg = make_leaf(verify, "peetre",
                                       "peetre majorization by the scale-limited operator",
                                       "verify-peetre");
    cfg.seed = 11;
    cfg.trials = 10;
    cfg.k_max = 7;
    CLI::App* c = verify->get_subcommand("peetre");
    add_grid(c, cfg);
    add_family(c, cfg);
    c->add_option("--r", cfg.r, "exponent, sets sigma = d/r");
  }
  {
    finfty::RunConfig& cfg = make_leaf(verify, "lemma-pointwise",
                                       "pointwise maximal domination, uniform across scales",
                                       "verify-lemma-pointwise");
    cfg.seed = 13;
    cfg.log2_samples = 13;
    cfg.k_max = 8;
    CLI::App* c = verify->get_subcommand("lemma-pointwise");
    add_grid(c, cfg);
    add_family(c, cfg);
    c->add_option("--r", cfg.r, "inner exponent, needs r < t");
    c->add_option("--t", cfg.t, "outer exponent");
  }
  {
    finfty::RunConfig& cfg = make_leaf(verify, "thm-maximal1",
                                       "level-mu scale-limited maximal bound",
                                       "verify-thm-maximal1");
    cfg.seed = 17;
    cfg.trials = 50;
    CLI::App* c = verify->get_subcommand("thm-maximal1");
    add_grid(c, cfg);
    add_family(c, cfg);
    c->add_option("--r", cfg.r, "operator exponent, needs r < q");
    c->add_option("--q", cfg.q, "sequence exponent");
    c->add_option("--eps", cfg.eps, "scale-penalty exponent");
    c->add_option("--mu-lo", cfg.mu_lo, "lowest cube level");
    c->add_option("--mu-hi", cfg.mu_hi, "highest cube level");
  }
  {
    finfty::RunConfig& cfg = make_leaf(verify, "cor-maximal2",
                                       "level-mu peetre maximal bound", "verify-cor-maximal2");
    cfg.seed = 19;
    cfg.trials = 50;
    CLI::App* c = verify->get_subcommand("cor-maximal2");
    add_grid(c, cfg);
    add_family(c, cfg);
    c->add_option("--r", cfg.r, "exponent, sets sigma = d/r, needs r < q");
    c->add_option("--q", cfg.q, "sequence exponent");
    c->add_option("--mu-lo", cfg.mu_lo, "lowest cube level");
    c->add_option("--mu-hi", cfg.mu_hi, "highest cube level");
  }
  {
    finfty::RunConfig& cfg = make_leaf(verify, "embedding",
                                       "sequence-norm monotonicity in q plus the sup bound",
                                       "verify-embedding");
    cfg.seed = 23;
    cfg.trials = 30;
    CLI::App* c = verify->get_subcommand("embedding");
    add_grid(c, cfg);
    add_family(c, cfg);
    c->add_option("--q1", cfg.q1, "smaller exponent");
    c->add_option("--q2", cfg.q2, "larger exponent, needs q1 < q2");
  }
  {
    finfty::RunConfig& cfg = make_leaf(verify, "franke",
                                       "embedding with smoothness trade-off",
                                       "verify-franke");
    cfg.seed = 29;
    cfg.trials = 30;
    CLI::App* c = verify->get_subcommand("franke");
    add_grid(c, cfg);
    c->add_option("--trials", cfg.trials, "independent fields");
    c->add_option("--p0", cfg.p0, "source integrability");
    c->add_option("--s0", cfg.s0, "source smoothness");
    c->add_option("--q", cfg.q, "target fine exponent");
  }
  {
    finfty::RunConfig& cfg = make_leaf(verify, "sub-inequality",
                                       "sampled sup against the shifted-cube sup",
                                       "verify-sub-inequality");
    cfg.seed = 31;
    cfg.trials = 10;
    CLI::App* c = verify->get_subcommand("sub-inequality");
    c->add_option("--log2-side", cfg.log2_side, "torus side exponent");
    c->add_option("--log2-samples", cfg.log2_samples, "samples-per-axis exponent");
    add_family(c, cfg);
    c->add_option("--q", cfg.q, "sequence exponent");
  }
  {
    finfty::RunConfig& cfg = make_leaf(verify, "multiplier",
                                       "multiplier bound under a smoothness norm",
                                       "verify-multiplier");
    cfg.seed = 37;
    CLI::App* c = verify->get_subcommand("multiplier");
    c->add_option("--log2-side", cfg.log2_side, "torus side exponent");
    c->add_option("--log2-samples", cfg.log2_samples, "samples-per-axis exponent");
    c->add_option("--trials", cfg.trials, "independent fields");
    c->add_option("--q", cfg.q, "sequence exponent");
    c->add_option("--alpha", cfg.alpha, "smoothness order, 0 = just above d/min(1,q) - d/2");
    c->add_option("--tau", cfg.tau, "imaginary-power parameter");
    c->add_option("--symbol", cfg.symbol,
                  "identity, smoothed-sign or imaginary-power");
    c->add_option("--symbol-log2-side", cfg.symbol_log2_side, "symbol grid side exponent");
    c->add_option("--symbol-log2-samples", cfg.symbol_log2_samples,
                  "symbol grid samples exponent");
  }

  CLI::App* cx = app.add_subcommand("counterexample",
                                    "drive a family that breaks a dropped hypothesis");
  cx->require_subcommand(1);
  {
    finfty::RunConfig& cfg = make_leaf(cx, "modulated",
                                       "modulated envelopes at the critical decay",
                                       "counterexample-modulated");
    CLI::App* c = cx->get_subcommand("modulated");
    c->add_option("--r", cfg.r, "operator exponent");
    c->add_option("--q", cfg.q, "sequence exponent, pins alpha = r/q");
    c->add_option("--K", cfg.K, "largest scale count, needs K >= 512 for the growth fit");
  }
  {
    finfty::RunConfig& cfg = make_leaf(cx, "sharpness",
                                       "lattice of small bumps showing r < q is necessary",
                                       "counterexample-sharpness");
    CLI::App* c = cx->get_subcommand("sharpness");
    c->add_option("--M", cfg.M, "box-side exponent of one bump");
    c->add_option("--q", cfg.q, "sequence exponent");
    c->add_option("--r", cfg.r, "bounded-regime exponent, sets sigma = d/r");
    c->add_option("--mu", cfg.mu, "base cube level, needs mu <= 0");
    c->add_option("--n-lo", cfg.n_lo, "smallest lattice exponent");
    c->add_option("--n-hi", cfg.n_hi, "largest lattice exponent");
    c->add_option("--oversample", cfg.oversample, "extra resolution per cell");
  }
  {
    finfty::RunConfig& cfg = make_leaf(cx, "bounded-sum",
                                       "polynomially spaced peak series and its sup",
                                       "counterexample-bounded-sum");
    CLI::App* c = cx->get_subcommand("bounded-sum");
    c->add_option("--alpha", cfg.alpha, "peak spacing exponent, 0 = 1/2");
    c->add_option("--sum-decay", cfg.sum_decay, "peak decay exponent M");
  }

  {
    finfty::RunConfig& cfg = make_leaf(&app, "selftest",
                                       "closed-form and oracle-equivalence checks", "selftest");
    app.get_subcommand("selftest")
        ->add_option("--inject", cfg.fault, "fault hook: corrupt-mother");
  }

  CLI::App* report = app.add_subcommand("report", "operate on written reports");
  report->require_subcommand(1);
  {
    CLI::App* merge = report->add_subcommand("merge", "concatenate reports into one document");
    auto inputs = std::make_shared<std::vector<std::string>>();
    auto out = std::make_shared<std::string>("reports/merged.json");
    merge->add_option("inputs", *inputs, "report JSON files")->required();
    merge->add_option("--out", *out, "merged output path");
    merge->callback([&exit_code, inputs, out] {
      exit_code = finfty::merge_reports(*inputs, *out);
    });
  }

  const int overlay_rc = overlay_config(argc, argv, all_configs);
  if (overlay_rc != 0) return overlay_rc;
  if (const char* env_out = std::getenv("FINFTY_OUT"))
    for (finfty::RunConfig* cfg : all_configs) cfg->out_dir = env_out;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return exit_code;
}
