#include "lfp/experiments.hpp"

namespace lfp {

std::vector<std::string> preset_names() {
  return {"fig1_smooth", "fig1_rough", "fig2_xor", "fig4_asym", "fig3_sweep"};
}

InitSpec preset_init(const std::string& name) {
  if (name == "fig1_smooth") {
    return {Distribution::uniform(-0.1, 0.1), Distribution::uniform(-0.25, 0.25),
            Distribution::uniform(-1.0, 1.0), 0};
  }
  if (name == "fig1_rough") {
    return {Distribution::uniform(-2.0, 2.0), Distribution::uniform(-2.0, 2.0),
            Distribution::uniform(-1.0, 1.0), 0};
  }
  if (name == "fig2_xor" || name == "fig4_asym") {
    return {Distribution::normal(1.0), Distribution::normal(0.49),
            Distribution::uniform(-4.0, 4.0), 0};
  }
  if (name == "fig3_sweep") {
    return {Distribution::xavier_normal(), Distribution::xavier_normal(),
            Distribution::uniform(-1.0, 1.0), 0};
  }
  fail(ErrorCode::config, "unknown preset '" + name + "'");
}

CompareConfig compare_preset(const std::string& name) {
  CompareConfig cfg;
  cfg.preset = name;
  cfg.init = preset_init(name);
  cfg.train.optimizer = Optimizer::gd;
  cfg.train.learning_rate = 3e-5;
  cfg.train.stop_loss = 1e-6;
  cfg.train.record_every = 1000;
  cfg.auto_learning_rate = true;
  cfg.ridge.epsilon = 1e-6;
  cfg.ridge.intercept = InterceptMode::unpenalized;
  cfg.test_lo = -1.0;
  cfg.test_hi = 1.0;

  if (name == "fig1_smooth" || name == "fig1_rough") {
    cfg.data.kind = "random_1d";
    cfg.data.samples = 12;
    cfg.form = NetForm::one_d;
    cfg.widths = {200, 1000, 5000};
    cfg.full_width_list = {500, 1000, 2000, 4000, 8000, 16000};
    cfg.train.max_steps = 300'000;
    cfg.lattice = {20.0, 2000};
    cfg.test_points = 800;
  } else if (name == "fig2_xor" || name == "fig4_asym") {
    cfg.data.kind = name == "fig2_xor" ? "xor_2d" : "asym_2d";
    cfg.data.samples = name == "fig2_xor" ? 4 : 5;
    cfg.form = NetForm::general;
    cfg.widths = {200, 1000};
    cfg.full_width_list = {500, 1000, 2000, 4000, 8000, 16000};
    cfg.train.max_steps = 100'000;
    cfg.lattice = {24.0, 120};
    cfg.test_points = 40;
  } else {
    fail(ErrorCode::config, "unknown compare preset '" + name +
                                "' (expected fig1_smooth, fig1_rough, fig2_xor or fig4_asym)");
  }
  return cfg;
}

SweepConfig sweep_preset(const std::string& name) {
  require(name == "fig3_sweep", ErrorCode::config,
          "unknown sweep preset '" + name + "' (expected fig3_sweep)");
  SweepConfig cfg;
  cfg.init = preset_init(name);
  return cfg;
}

}  // namespace lfp
