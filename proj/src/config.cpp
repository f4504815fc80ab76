#include "ristrack/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ristrack {

using nlohmann::json;

double ExperimentConfig::pilot_input_scale() const {
  if (pilot_scaling == "none") return 1.0;
  if (pilot_scaling == "noise_normalized") {
    const double v = pilot_config().ybar_noise_var();
    return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0;
  }
  throw ConfigError("pilot_scaling must be 'noise_normalized' or 'none'");
}

void ExperimentConfig::derive_linear_powers() {
  uplink_power_mw = dbm_to_mw(uplink_power_dbm);
  downlink_power_mw = dbm_to_mw(downlink_power_dbm);
  uplink_noise_mw = dbm_to_mw(noise_density_ap_dbm_hz) * bandwidth_hz;
  downlink_noise_mw = dbm_to_mw(noise_density_ue_dbm_hz) * bandwidth_hz;
}

void ExperimentConfig::validate() const {
  mobility.validate();
  if (geometry.ris_columns == 0 || n_elements % geometry.ris_columns != 0)
    throw ConfigError("geometry.ris_columns must divide network.ris_elements");
  if (n_antennas < 1 || num_users < 1) throw ConfigError("M and K must be >= 1");
  if (num_subblocks < 1 || refine_pilot_len < 1)
    throw ConfigError("pilot lengths must be >= 1");
  if (data_blocks < 1) throw ConfigError("frames.data_blocks must be >= 1");
  if (train_frames < 2) throw ConfigError("frames.training_frames must be >= 2");
  if (!(uplink_power_mw > 0.0) || !(downlink_power_mw > 0.0))
    throw ConfigError("transmit powers must be positive");
  if (!(channel.rho > 0.0) || channel.rho > 1.0)
    throw ConfigError("channel.correlation_rho must lie in (0, 1]");
  if (channel.num_paths < 1) throw ConfigError("channel.num_paths must be >= 1");
  if (hidden_dim < 1 || gnn_layers < 1)
    throw ConfigError("network.hidden_dim and network.gnn_layers must be >= 1");
  if (training.minibatch < 1 || training.episodes_per_epoch < 1)
    throw ConfigError("training schedule must be positive");
  if (pilot_scaling != "none" && pilot_scaling != "noise_normalized")
    throw ConfigError("pilot_scaling must be 'noise_normalized' or 'none'");
  pilot_config().validate();
}

ExperimentConfig desk_scale_config() {
  ExperimentConfig c;
  c.profile = "desk_scale";
  c.geometry = default_geometry(/*ris_columns=*/4, /*carrier=*/1.0e9);
  c.mobility = make_mobility_config(5.0, 45.0, -35.0, 35.0, -20.0, 10.0, 1.0e9,
                                    deg_to_rad(10.0));
  c.channel = ChannelParams{};
  c.variant = Variant::preset("full_active");
  c.derive_linear_powers();
  c.validate();
  return c;
}

ExperimentConfig paper_scale_config() {
  ExperimentConfig c = desk_scale_config();
  c.profile = "paper_scale";
  c.geometry.ris_columns = 10;
  c.n_antennas = 8;
  c.n_elements = 100;
  c.num_users = 3;
  c.num_subblocks = 3;
  c.refine_pilot_len = 10;
  c.data_blocks = 3;
  c.train_frames = 20;
  c.hidden_dim = 512;
  c.uplink_power_dbm = 5.0;
  c.downlink_power_dbm = 10.0;
  c.training.episodes_per_epoch = 6400;
  c.training.max_epochs = 1000;
  c.training.early_stop_patience = 30;
  c.derive_linear_powers();
  c.validate();
  return c;
}

namespace {

void reject_unknown(const json& obj, const std::string& section,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok)
      throw ConfigError("config: unknown key '" +
                        (section.empty() ? key : section + "." + key) + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

ExperimentConfig apply_json(ExperimentConfig cfg, const json& j) {
  reject_unknown(j, "",
                 {"profile", "geometry", "mobility", "channel", "pilot", "power",
                  "network", "frames", "training", "evaluation", "seeds"});

  if (j.contains("geometry")) {
    const json& g = j.at("geometry");
    reject_unknown(g, "geometry",
                   {"ap_position", "ris_position", "ris_columns",
                    "carrier_frequency_hz"});
    std::vector<double> ap, ris;
    read(g, "ap_position", ap);
    read(g, "ris_position", ris);
    if (!ap.empty()) {
      if (ap.size() != 3) throw ConfigError("geometry.ap_position needs 3 entries");
      cfg.geometry.ap_position = vec(ap);
    }
    if (!ris.empty()) {
      if (ris.size() != 3) throw ConfigError("geometry.ris_position needs 3 entries");
      cfg.geometry.ris_position = vec(ris);
    }
    std::uint64_t cols = cfg.geometry.ris_columns;
    read(g, "ris_columns", cols);
    cfg.geometry.ris_columns = cols;
    double fc = cfg.geometry.carrier_freq_hz;
    read(g, "carrier_frequency_hz", fc);
    if (fc != cfg.geometry.carrier_freq_hz) {
      cfg.geometry.carrier_freq_hz = fc;
      cfg.geometry.ap_spacing = cfg.geometry.wavelength() / 2.0;
      cfg.geometry.ris_spacing = cfg.geometry.wavelength() / 2.0;
    }
  }
  if (j.contains("mobility")) {
    const json& m = j.at("mobility");
    reject_unknown(m, "mobility",
                   {"area_x", "area_y", "z_ue", "speed_mps",
                    "heading_perturbation_deg"});
    std::vector<double> ax{cfg.mobility.x_min, cfg.mobility.x_max};
    std::vector<double> ay{cfg.mobility.y_min, cfg.mobility.y_max};
    read(m, "area_x", ax);
    read(m, "area_y", ay);
    if (ax.size() != 2 || ay.size() != 2)
      throw ConfigError("mobility.area_x/area_y need 2 entries");
    double z = cfg.mobility.z_ue, v = cfg.mobility.speed_mps;
    double per = cfg.mobility.heading_perturb_rad / kPi * 180.0;
    read(m, "z_ue", z);
    read(m, "speed_mps", v);
    read(m, "heading_perturbation_deg", per);
    cfg.mobility = make_mobility_config(ax[0], ax[1], ay[0], ay[1], z, v,
                                        cfg.geometry.carrier_freq_hz,
                                        deg_to_rad(per));
  }
  if (j.contains("channel")) {
    const json& c = j.at("channel");
    reject_unknown(c, "channel",
                   {"num_paths", "rician_factor", "correlation_rho",
                    "pathloss_direct_db", "pathloss_ris_db"});
    std::uint64_t np = cfg.channel.num_paths;
    read(c, "num_paths", np);
    cfg.channel.num_paths = np;
    read(c, "rician_factor", cfg.channel.rician_factor);
    read(c, "correlation_rho", cfg.channel.rho);
    std::vector<double> pd{cfg.channel.direct_const_db, cfg.channel.direct_slope_db};
    std::vector<double> pr{cfg.channel.ris_const_db, cfg.channel.ris_slope_db};
    read(c, "pathloss_direct_db", pd);
    read(c, "pathloss_ris_db", pr);
    if (pd.size() != 2 || pr.size() != 2)
      throw ConfigError("channel.pathloss_* need [constant, slope]");
    cfg.channel.direct_const_db = pd[0];
    cfg.channel.direct_slope_db = pd[1];
    cfg.channel.ris_const_db = pr[0];
    cfg.channel.ris_slope_db = pr[1];
  }
  if (j.contains("pilot")) {
    const json& p = j.at("pilot");
    reject_unknown(p, "pilot", {"num_sensing_subblocks", "refine_pilot_len"});
    std::uint64_t l = cfg.num_subblocks, tw = cfg.refine_pilot_len;
    read(p, "num_sensing_subblocks", l);
    read(p, "refine_pilot_len", tw);
    cfg.num_subblocks = l;
    cfg.refine_pilot_len = tw;
  }
  if (j.contains("power")) {
    const json& p = j.at("power");
    reject_unknown(p, "power",
                   {"uplink_pilot_dbm", "downlink_data_dbm",
                    "noise_density_ap_dbm_hz", "noise_density_ue_dbm_hz",
                    "bandwidth_hz"});
    read(p, "uplink_pilot_dbm", cfg.uplink_power_dbm);
    read(p, "downlink_data_dbm", cfg.downlink_power_dbm);
    read(p, "noise_density_ap_dbm_hz", cfg.noise_density_ap_dbm_hz);
    read(p, "noise_density_ue_dbm_hz", cfg.noise_density_ue_dbm_hz);
    read(p, "bandwidth_hz", cfg.bandwidth_hz);
  }
  if (j.contains("network")) {
    const json& n = j.at("network");
    reject_unknown(n, "network",
                   {"ap_antennas", "ris_elements", "num_users", "hidden_dim",
                    "gnn_layers", "variant", "gnn_input", "pilot_scaling"});
    std::uint64_t m = cfg.n_antennas, nr = cfg.n_elements, k = cfg.num_users;
    std::uint64_t d = cfg.hidden_dim, dl = cfg.gnn_layers;
    read(n, "ap_antennas", m);
    read(n, "ris_elements", nr);
    read(n, "num_users", k);
    read(n, "hidden_dim", d);
    read(n, "gnn_layers", dl);
    cfg.n_antennas = m;
    cfg.n_elements = nr;
    cfg.num_users = k;
    cfg.hidden_dim = d;
    cfg.gnn_layers = dl;
    std::string variant = cfg.variant.name;
    read(n, "variant", variant);
    cfg.variant = Variant::preset(variant);
    std::string gi = cfg.gnn_input == GnnInputKind::cell ? "cell" : "hidden";
    read(n, "gnn_input", gi);
    if (gi == "cell")
      cfg.gnn_input = GnnInputKind::cell;
    else if (gi == "hidden")
      cfg.gnn_input = GnnInputKind::hidden;
    else
      throw ConfigError("network.gnn_input must be 'cell' or 'hidden'");
    read(n, "pilot_scaling", cfg.pilot_scaling);
  }
  if (j.contains("frames")) {
    const json& f = j.at("frames");
    reject_unknown(f, "frames", {"data_blocks_per_frame", "training_frames"});
    std::uint64_t n = cfg.data_blocks, u = cfg.train_frames;
    read(f, "data_blocks_per_frame", n);
    read(f, "training_frames", u);
    cfg.data_blocks = n;
    cfg.train_frames = u;
  }
  if (j.contains("training")) {
    const json& t = j.at("training");
    reject_unknown(t, "training",
                   {"episodes_per_epoch", "minibatch", "learning_rate",
                    "max_epochs", "early_stop_patience", "lr_decay_factor",
                    "lr_decay_patience", "validation_episodes", "threads"});
    std::uint64_t v;
    if (t.contains("episodes_per_epoch")) { v = t.at("episodes_per_epoch").get<std::uint64_t>(); cfg.training.episodes_per_epoch = v; }
    if (t.contains("minibatch")) { v = t.at("minibatch").get<std::uint64_t>(); cfg.training.minibatch = v; }
    read(t, "learning_rate", cfg.training.learning_rate);
    if (t.contains("max_epochs")) { v = t.at("max_epochs").get<std::uint64_t>(); cfg.training.max_epochs = v; }
    if (t.contains("early_stop_patience")) { v = t.at("early_stop_patience").get<std::uint64_t>(); cfg.training.early_stop_patience = v; }
    read(t, "lr_decay_factor", cfg.training.lr_decay_factor);
    if (t.contains("lr_decay_patience")) { v = t.at("lr_decay_patience").get<std::uint64_t>(); cfg.training.lr_decay_patience = v; }
    if (t.contains("validation_episodes")) { v = t.at("validation_episodes").get<std::uint64_t>(); cfg.training.validation_episodes = v; }
    if (t.contains("threads")) { v = t.at("threads").get<std::uint64_t>(); cfg.training.threads = v; }
  }
  if (j.contains("evaluation")) {
    const json& e = j.at("evaluation");
    reject_unknown(e, "evaluation",
                   {"episodes", "frames", "methods", "grid_resolution",
                    "interpret_frames", "frozen_nlos_maps"});
    std::uint64_t v;
    if (e.contains("episodes")) { v = e.at("episodes").get<std::uint64_t>(); cfg.evaluation.episodes = v; }
    if (e.contains("frames")) { v = e.at("frames").get<std::uint64_t>(); cfg.evaluation.frames = v; }
    read(e, "methods", cfg.evaluation.methods);
    if (e.contains("grid_resolution")) { v = e.at("grid_resolution").get<std::uint64_t>(); cfg.evaluation.grid_resolution = v; }
    if (e.contains("interpret_frames")) {
      std::vector<std::uint64_t> frames = e.at("interpret_frames").get<std::vector<std::uint64_t>>();
      cfg.evaluation.interpret_frames.assign(frames.begin(), frames.end());
    }
    read(e, "frozen_nlos_maps", cfg.evaluation.frozen_nlos_maps);
  }
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    reject_unknown(s, "seeds", {"root"});
    read(s, "root", cfg.root_seed);
  }

  // Doppler-derived block constants depend on the final carrier frequency
  cfg.mobility = make_mobility_config(
      cfg.mobility.x_min, cfg.mobility.x_max, cfg.mobility.y_min,
      cfg.mobility.y_max, cfg.mobility.z_ue, cfg.mobility.speed_mps,
      cfg.geometry.carrier_freq_hz, cfg.mobility.heading_perturb_rad);

  cfg.derive_linear_powers();
  cfg.validate();
  return cfg;
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    j = json::object();
  } else {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
  }
  std::string profile = "desk_scale";
  if (j.contains("profile")) profile = j.at("profile").get<std::string>();
  ExperimentConfig base;
  if (profile == "desk_scale")
    base = desk_scale_config();
  else if (profile == "paper_scale")
    base = paper_scale_config();
  else
    throw ConfigError("config: unknown profile '" + profile + "'");
  return apply_json(std::move(base), j);
}

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return desk_scale_config();
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["profile"] = cfg.profile;
  j["geometry"] = {
      {"ap_position", std::vector<double>(cfg.geometry.ap_position.begin(),
                                          cfg.geometry.ap_position.end())},
      {"ris_position", std::vector<double>(cfg.geometry.ris_position.begin(),
                                           cfg.geometry.ris_position.end())},
      {"ris_columns", cfg.geometry.ris_columns},
      {"carrier_frequency_hz", cfg.geometry.carrier_freq_hz}};
  j["mobility"] = {{"area_x", {cfg.mobility.x_min, cfg.mobility.x_max}},
                   {"area_y", {cfg.mobility.y_min, cfg.mobility.y_max}},
                   {"z_ue", cfg.mobility.z_ue},
                   {"speed_mps", cfg.mobility.speed_mps},
                   {"heading_perturbation_deg",
                    cfg.mobility.heading_perturb_rad * 180.0 / kPi}};
  j["channel"] = {{"num_paths", cfg.channel.num_paths},
                  {"rician_factor", cfg.channel.rician_factor},
                  {"correlation_rho", cfg.channel.rho},
                  {"pathloss_direct_db",
                   {cfg.channel.direct_const_db, cfg.channel.direct_slope_db}},
                  {"pathloss_ris_db",
                   {cfg.channel.ris_const_db, cfg.channel.ris_slope_db}}};
  j["pilot"] = {{"num_sensing_subblocks", cfg.num_subblocks},
                {"refine_pilot_len", cfg.refine_pilot_len}};
  j["power"] = {{"uplink_pilot_dbm", cfg.uplink_power_dbm},
                {"downlink_data_dbm", cfg.downlink_power_dbm},
                {"noise_density_ap_dbm_hz", cfg.noise_density_ap_dbm_hz},
                {"noise_density_ue_dbm_hz", cfg.noise_density_ue_dbm_hz},
                {"bandwidth_hz", cfg.bandwidth_hz}};
  j["network"] = {{"ap_antennas", cfg.n_antennas},
                  {"ris_elements", cfg.n_elements},
                  {"num_users", cfg.num_users},
                  {"hidden_dim", cfg.hidden_dim},
                  {"gnn_layers", cfg.gnn_layers},
                  {"variant", cfg.variant.name},
                  {"gnn_input",
                   cfg.gnn_input == GnnInputKind::cell ? "cell" : "hidden"},
                  {"pilot_scaling", cfg.pilot_scaling}};
  j["frames"] = {{"data_blocks_per_frame", cfg.data_blocks},
                 {"training_frames", cfg.train_frames}};
  j["training"] = {{"episodes_per_epoch", cfg.training.episodes_per_epoch},
                   {"minibatch", cfg.training.minibatch},
                   {"learning_rate", cfg.training.learning_rate},
                   {"max_epochs", cfg.training.max_epochs},
                   {"early_stop_patience", cfg.training.early_stop_patience},
                   {"lr_decay_factor", cfg.training.lr_decay_factor},
                   {"lr_decay_patience", cfg.training.lr_decay_patience},
                   {"validation_episodes", cfg.training.validation_episodes},
                   {"threads", cfg.training.threads}};
  j["evaluation"] = {
      {"episodes", cfg.evaluation.episodes},
      {"frames", cfg.evaluation.frames},
      {"methods", cfg.evaluation.methods},
      {"grid_resolution", cfg.evaluation.grid_resolution},
      {"interpret_frames",
       std::vector<std::uint64_t>(cfg.evaluation.interpret_frames.begin(),
                                  cfg.evaluation.interpret_frames.end())},
      {"frozen_nlos_maps", cfg.evaluation.frozen_nlos_maps}};
  j["seeds"] = {{"root", cfg.root_seed}};
  return j.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  // FNV-1a over the canonical dump; nlohmann objects sort keys, so the hash
  // is stable under field reordering in the source file
  const std::string s = config_to_json(cfg);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace ristrack
