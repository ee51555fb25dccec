#include "pirdfl/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace pirdfl {

using nlohmann::json;

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.sensor_positions = {{0, 0}, {7, 0}, {7, 7}, {0, 7}};
  c.noise_posts = {{3.5, 0}, {7, 3.5}, {3.5, 7}, {0, 3.5}};
  c.train.weight_decay = 1e-4;
  c.train.label_smoothing = 0.05;
  c.train.learning_rate = 3e-4;
  return c;
}

std::vector<SensorModel> ExperimentConfig::build_sensors(int first_k) const {
  const int n = first_k < 0 ? static_cast<int>(sensor_positions.size())
                            : std::min<int>(first_k, sensor_positions.size());
  const Vec2 center{arena_width / 2, arena_height / 2};
  std::vector<SensorModel> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 pos = sensor_positions[i];
    const double boresight = std::atan2(center.y - pos.y, center.x - pos.x);
    SensorModel s;
    s.pose.position = pos;
    s.pose.boresight = boresight;
    s.pose.fov = fov_deg * M_PI / 180.0;
    s.pose.max_range = max_range;
    s.zones.n_beams = n_beams;
    s.zones.beam_width = beam_width_deg * M_PI / 180.0;
    s.zones.gap_width = gap_width_deg * M_PI / 180.0;
    s.zones.first_sign = +1;
    s.dynamics = dynamics;
    s.validate();
    out.push_back(s);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (sensor_positions.empty())
    throw std::invalid_argument("config needs at least one sensor");
  if (preset != "desk" && preset != "paper")
    throw std::invalid_argument("preset must be desk or paper");
  if (max_persons < 1 || max_persons > kMaxPersons)
    throw std::invalid_argument("max_persons must be 1..3");
  if (!(train_minutes > 0) || !(val_minutes > 0) || !(test_minutes > 0))
    throw std::invalid_argument("data volumes must be positive");
  if (scene_seconds < window_seconds)
    throw std::invalid_argument("scenes must cover at least one window");
  pipeline.validate(window_samples());
  train.validate();
  build_sensors();
}

namespace {

json vec2_list(const std::vector<Vec2>& v) {
  json a = json::array();
  for (Vec2 p : v) a.push_back({p.x, p.y});
  return a;
}

std::vector<Vec2> parse_vec2_list(const json& a) {
  std::vector<Vec2> out;
  for (const auto& p : a) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["arena"] = {{"width", c.arena_width}, {"height", c.arena_height}};
  j["sensors"] = {{"positions", vec2_list(c.sensor_positions)},
                  {"n_beams", c.n_beams},
                  {"beam_width_deg", c.beam_width_deg},
                  {"gap_width_deg", c.gap_width_deg},
                  {"fov_deg", c.fov_deg},
                  {"max_range", c.max_range},
                  {"dynamics",
                   {{"gain", c.dynamics.gain},
                    {"b", c.dynamics.b_coeff},
                    {"c", c.dynamics.c_coeff},
                    {"sample_rate", c.dynamics.sample_rate}}}};
  j["radiometry"] = {{"env_temp", c.env_temp},
                     {"constant", c.radiometric_constant},
                     {"person_area", c.person_area},
                     {"person_radius", c.person_radius},
                     {"person_temp_min", c.person_temp_min},
                     {"person_temp_max", c.person_temp_max},
                     {"speed_min", c.speed_min},
                     {"speed_max", c.speed_max},
                     {"occlusion", c.occlusion}};
  j["noise"] = {{"gaussian_rel", c.noise_gaussian_rel},
                {"drift_rel", c.noise_drift_rel},
                {"drift_cutoff", c.drift_cutoff}};
  j["data"] = {{"train_minutes", c.train_minutes},
               {"val_minutes", c.val_minutes},
               {"test_minutes", c.test_minutes},
               {"scene_seconds", c.scene_seconds},
               {"window_seconds", c.window_seconds},
               {"train_hop_seconds", c.train_hop_seconds},
               {"eval_hop_seconds", c.eval_hop_seconds},
               {"max_persons", c.max_persons}};
  j["pipeline"] = {{"regularizer_cutoff", c.pipeline.regularizer_cutoff},
                   {"segments", c.pipeline.segments},
                   {"warp_factors", c.pipeline.warp_factors},
                   {"reshape_fraction", c.pipeline.reshape_fraction},
                   {"reshape_w_min", c.pipeline.reshape_w_min},
                   {"reshape_w_max", c.pipeline.reshape_w_max},
                   {"prominence_floor", c.pipeline.prominence_floor}};
  j["model"] = {{"preset", c.preset}};
  j["train"] = {{"learning_rate", c.train.learning_rate},
                {"weight_decay", c.train.weight_decay},
                {"label_smoothing", c.train.label_smoothing},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"epsilon", c.train.epsilon},
                {"batch_size", c.train.batch_size},
                {"max_epochs", c.train.max_epochs},
                {"patience", c.train.patience}};
  j["switches"] = {{"preprocess", c.preprocess}, {"augment", c.augment}};
  j["sweep"] = {{"train_fraction", c.sweep_train_fraction},
                {"noise_posts", vec2_list(c.noise_posts)}};
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig c = ExperimentConfig::defaults();
  if (j.contains("arena")) {
    c.arena_width = j["arena"].value("width", c.arena_width);
    c.arena_height = j["arena"].value("height", c.arena_height);
  }
  if (j.contains("sensors")) {
    const auto& s = j["sensors"];
    if (s.contains("positions")) c.sensor_positions = parse_vec2_list(s["positions"]);
    c.n_beams = s.value("n_beams", c.n_beams);
    c.beam_width_deg = s.value("beam_width_deg", c.beam_width_deg);
    c.gap_width_deg = s.value("gap_width_deg", c.gap_width_deg);
    c.fov_deg = s.value("fov_deg", c.fov_deg);
    c.max_range = s.value("max_range", c.max_range);
    if (s.contains("dynamics")) {
      const auto& d = s["dynamics"];
      c.dynamics.gain = d.value("gain", c.dynamics.gain);
      c.dynamics.b_coeff = d.value("b", c.dynamics.b_coeff);
      c.dynamics.c_coeff = d.value("c", c.dynamics.c_coeff);
      c.dynamics.sample_rate = d.value("sample_rate", c.dynamics.sample_rate);
    }
  }
  if (j.contains("radiometry")) {
    const auto& r = j["radiometry"];
    c.env_temp = r.value("env_temp", c.env_temp);
    c.radiometric_constant = r.value("constant", c.radiometric_constant);
    c.person_area = r.value("person_area", c.person_area);
    c.person_radius = r.value("person_radius", c.person_radius);
    c.person_temp_min = r.value("person_temp_min", c.person_temp_min);
    c.person_temp_max = r.value("person_temp_max", c.person_temp_max);
    c.speed_min = r.value("speed_min", c.speed_min);
    c.speed_max = r.value("speed_max", c.speed_max);
    c.occlusion = r.value("occlusion", c.occlusion);
  }
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    c.noise_gaussian_rel = n.value("gaussian_rel", c.noise_gaussian_rel);
    c.noise_drift_rel = n.value("drift_rel", c.noise_drift_rel);
    c.drift_cutoff = n.value("drift_cutoff", c.drift_cutoff);
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    c.train_minutes = d.value("train_minutes", c.train_minutes);
    c.val_minutes = d.value("val_minutes", c.val_minutes);
    c.test_minutes = d.value("test_minutes", c.test_minutes);
    c.scene_seconds = d.value("scene_seconds", c.scene_seconds);
    c.window_seconds = d.value("window_seconds", c.window_seconds);
    c.train_hop_seconds = d.value("train_hop_seconds", c.train_hop_seconds);
    c.eval_hop_seconds = d.value("eval_hop_seconds", c.eval_hop_seconds);
    c.max_persons = d.value("max_persons", c.max_persons);
  }
  if (j.contains("pipeline")) {
    const auto& p = j["pipeline"];
    c.pipeline.regularizer_cutoff =
        p.value("regularizer_cutoff", c.pipeline.regularizer_cutoff);
    c.pipeline.segments = p.value("segments", c.pipeline.segments);
    if (p.contains("warp_factors"))
      c.pipeline.warp_factors = p["warp_factors"].get<std::vector<double>>();
    c.pipeline.reshape_fraction =
        p.value("reshape_fraction", c.pipeline.reshape_fraction);
    c.pipeline.reshape_w_min = p.value("reshape_w_min", c.pipeline.reshape_w_min);
    c.pipeline.reshape_w_max = p.value("reshape_w_max", c.pipeline.reshape_w_max);
    c.pipeline.prominence_floor =
        p.value("prominence_floor", c.pipeline.prominence_floor);
  }
  if (j.contains("model")) c.preset = j["model"].value("preset", c.preset);
  if (j.contains("train")) {
    const auto& t = j["train"];
    c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
    c.train.weight_decay = t.value("weight_decay", c.train.weight_decay);
    c.train.label_smoothing = t.value("label_smoothing", c.train.label_smoothing);
    c.train.beta1 = t.value("beta1", c.train.beta1);
    c.train.beta2 = t.value("beta2", c.train.beta2);
    c.train.epsilon = t.value("epsilon", c.train.epsilon);
    c.train.batch_size = t.value("batch_size", c.train.batch_size);
    c.train.max_epochs = t.value("max_epochs", c.train.max_epochs);
    c.train.patience = t.value("patience", c.train.patience);
  }
  if (j.contains("switches")) {
    c.preprocess = j["switches"].value("preprocess", c.preprocess);
    c.augment = j["switches"].value("augment", c.augment);
  }
  if (j.contains("sweep")) {
    c.sweep_train_fraction =
        j["sweep"].value("train_fraction", c.sweep_train_fraction);
    if (j["sweep"].contains("noise_posts"))
      c.noise_posts = parse_vec2_list(j["sweep"]["noise_posts"]);
  }
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return config_from_json(text);
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write config " + path);
  os << config_to_json(cfg);
}

}  // namespace pirdfl
