#include "pirdfl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace pirdfl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

NetSpec::Preset preset_of(const ExperimentConfig& cfg) {
  return cfg.preset == "paper" ? NetSpec::Preset::kPaper : NetSpec::Preset::kDesk;
}

InferencePolicy base_policy(const ExperimentConfig& cfg, double raw_scale) {
  InferencePolicy p;
  p.dynamics = cfg.dynamics;
  p.pipeline = cfg.pipeline;
  p.preprocess = cfg.preprocess;
  p.raw_scale = raw_scale;
  return p;
}

void count_by_class(const std::vector<SignalWindow>& ws, json& out) {
  std::map<int, long> counts;
  for (const auto& w : ws) counts[w.count_label] += 1;
  for (const auto& [c, n] : counts) out[std::to_string(c)] = n;
}

}  // namespace

void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);

  const auto train = generate_split_windows(cfg, Split::kTrain);
  const auto val = generate_split_windows(cfg, Split::kVal);
  const auto test = generate_split_windows(cfg, Split::kTest);
  write_windows_file(out_dir + "/train.jsonl", train);
  write_windows_file(out_dir + "/val.jsonl", val);
  write_windows_file(out_dir + "/test.jsonl", test);

  if (cfg.augment) {
    const auto aug = generate_augmented_windows(cfg);
    write_windows_file(out_dir + "/train_aug.jsonl", aug);
  }

  json manifest;
  manifest["seeds"] = {{"master", cfg.seed},
                       {"train", split_seed(cfg, Split::kTrain)},
                       {"val", split_seed(cfg, Split::kVal)},
                       {"test", split_seed(cfg, Split::kTest)}};
  manifest["scenes_per_class"] = {{"train", scenes_per_class(cfg, Split::kTrain)},
                                  {"val", scenes_per_class(cfg, Split::kVal)},
                                  {"test", scenes_per_class(cfg, Split::kTest)}};
  json wc;
  count_by_class(train, wc["train"]);
  count_by_class(val, wc["val"]);
  count_by_class(test, wc["test"]);
  manifest["window_counts"] = wc;
  manifest["raw_scale"] = raw_scale_from(train);
  manifest["config"] = json::parse(config_to_json(cfg));
  std::ofstream os(out_dir + "/manifest.json", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write manifest");
  os << manifest.dump(2) << "\n";
}

std::vector<TrainSample> build_samples(const ExperimentConfig& cfg,
                                       const std::vector<SignalWindow>& windows,
                                       const std::string& target,
                                       double raw_scale) {
  int want_m = -1;
  if (target.rfind("localizer-", 0) == 0)
    want_m = std::stoi(target.substr(10));
  else if (target != "counter")
    throw std::invalid_argument("unknown target " + target);

  const InferencePolicy policy = base_policy(cfg, raw_scale);
  std::vector<TrainSample> samples;
  for (const auto& w : windows) {
    if (want_m >= 0 && w.count_label != want_m) continue;
    if (!cfg.preprocess && w.voltages.empty()) continue;  // DHF-only augment rows
    bool silent = false;
    auto segs = window_features(policy, WindowSignal::strip(w), &silent);
    if (silent) continue;
    TrainSample s;
    s.segs = std::move(segs);
    s.label.count = w.count_label;
    s.label.positions = w.positions;
    samples.push_back(std::move(s));
  }
  return samples;
}

namespace {

std::vector<SignalWindow> load_training_windows(const ExperimentConfig& cfg,
                                                const std::string& data_dir) {
  auto windows = read_windows_file(data_dir + "/train.jsonl");
  if (cfg.augment && cfg.preprocess &&
      fs::exists(data_dir + "/train_aug.jsonl")) {
    auto aug = read_windows_file(data_dir + "/train_aug.jsonl");
    for (auto& w : aug) windows.push_back(std::move(w));
  }
  return windows;
}

double manifest_raw_scale(const std::string& data_dir) {
  std::ifstream is(data_dir + "/manifest.json");
  if (!is) return 1.0;
  json m = json::parse(is);
  return m.value("raw_scale", 1.0);
}

TrainedTarget train_one(const ExperimentConfig& cfg,
                        const std::vector<SignalWindow>& train_windows,
                        const std::vector<SignalWindow>& val_windows,
                        double raw_scale, const std::string& target,
                        const std::string& out_dir) {
  const int n_sensors = static_cast<int>(cfg.sensor_positions.size());
  std::unique_ptr<PirNet> net;
  if (target == "counter") {
    net = std::make_unique<PirNet>(NetSpec::counting(n_sensors, preset_of(cfg)),
                                   Rng::mix(cfg.seed, 0xc0));
  } else {
    const int m = std::stoi(target.substr(10));
    net = std::make_unique<PirNet>(
        NetSpec::localization(n_sensors, m, preset_of(cfg)),
        Rng::mix(cfg.seed, 0x10c + m));
  }

  auto train_samples = build_samples(cfg, train_windows, target, raw_scale);
  auto val_samples = build_samples(cfg, val_windows, target, raw_scale);
  TrainConfig tc = cfg.train;
  std::uint64_t tag = 0xcbf29ce484222325ULL;  // fnv-1a over the target name
  for (char ch : target) tag = (tag ^ static_cast<unsigned char>(ch)) * 0x100000001b3ULL;
  tc.rng_seed = Rng::mix(cfg.seed, tag);

  TrainedTarget out;
  out.target = target;
  out.result = train_loop(*net, train_samples, val_samples, tc);
  out.checkpoint_path = out_dir + "/" + target + ".ckpt";
  net->params().save_file(out.checkpoint_path, target);
  write_curves_csv(out.result.train_losses, out.result.val_losses,
                   out_dir + "/" + target + "_curves.csv");
  return out;
}

}  // namespace

std::vector<TrainedTarget> cmd_train(const ExperimentConfig& cfg,
                                     const std::string& data_dir,
                                     const std::string& target,
                                     const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  const auto train_windows = load_training_windows(cfg, data_dir);
  const auto val_windows = read_windows_file(data_dir + "/val.jsonl");
  const double raw_scale = manifest_raw_scale(data_dir);

  std::vector<std::string> targets;
  if (target == "all") {
    targets = {"counter"};
    for (int m = 1; m <= cfg.max_persons; ++m)
      targets.push_back("localizer-" + std::to_string(m));
  } else {
    targets = {target};
  }

  std::vector<TrainedTarget> results;
  for (const auto& t : targets)
    results.push_back(
        train_one(cfg, train_windows, val_windows, raw_scale, t, out_dir));

  // checkpoint manifest names the M of each localization net
  json manifest;
  manifest["preset"] = cfg.preset;
  manifest["n_sensors"] = static_cast<int>(cfg.sensor_positions.size());
  manifest["preprocess"] = cfg.preprocess;
  manifest["raw_scale"] = raw_scale;
  json locs;
  for (const auto& r : results) {
    if (r.target == "counter")
      manifest["counter"] = fs::path(r.checkpoint_path).filename().string();
    else
      locs[r.target.substr(10)] =
          fs::path(r.checkpoint_path).filename().string();
  }
  if (!locs.is_null()) manifest["localizers"] = locs;
  std::ofstream os(out_dir + "/checkpoints.json", std::ios::binary);
  os << manifest.dump(2) << "\n";
  return results;
}

InferencePolicy LoadedModels::policy(const ExperimentConfig& cfg) const {
  InferencePolicy p = base_policy(cfg, raw_scale);
  p.counter = counter.get();
  for (int m = 0; m < kMaxPersons; ++m) p.localizers[m] = localizers[m].get();
  return p;
}

LoadedModels load_models(const ExperimentConfig& cfg, const std::string& ckpt_dir) {
  std::ifstream is(ckpt_dir + "/checkpoints.json");
  if (!is) throw std::runtime_error("no checkpoint manifest in " + ckpt_dir);
  const json manifest = json::parse(is);
  const int n_sensors = manifest.value("n_sensors", 4);
  const NetSpec::Preset preset = manifest.value("preset", "desk") == "paper"
                                     ? NetSpec::Preset::kPaper
                                     : NetSpec::Preset::kDesk;
  LoadedModels models;
  models.raw_scale = manifest.value("raw_scale", 1.0);
  if (manifest.contains("counter")) {
    models.counter = std::make_unique<PirNet>(NetSpec::counting(n_sensors, preset), 0);
    ModelParams::load_file(ckpt_dir + "/" + manifest["counter"].get<std::string>(),
                           models.counter->params());
  }
  if (manifest.contains("localizers")) {
    for (const auto& [m_str, file] : manifest["localizers"].items()) {
      const int m = std::stoi(m_str);
      if (m < 1 || m > kMaxPersons)
        throw std::runtime_error("checkpoint manifest names localizer M=" + m_str);
      models.localizers[m - 1] = std::make_unique<PirNet>(
          NetSpec::localization(n_sensors, m, preset), 0);
      ModelParams::load_file(ckpt_dir + "/" + file.get<std::string>(),
                             models.localizers[m - 1]->params());
    }
  }
  return models;
}

EvalReport cmd_evaluate(const ExperimentConfig& cfg, const std::string& data_dir,
                        const std::string& ckpt_dir, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto test = read_windows_file(data_dir + "/test.jsonl");
  const LoadedModels models = load_models(cfg, ckpt_dir);
  const EvalReport report =
      evaluate_windows(models.policy(cfg), test, cfg.max_persons);
  write_report_json(report, out_dir + "/report.json");
  write_confusion_csv(report, out_dir + "/confusion.csv");
  write_cdf_csv(report, out_dir + "/cdf.csv");
  return report;
}

namespace {

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& axis,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << axis << ",accuracy,f1_1,f1_2,f1_3,loc1_mean,loc1_std,loc2_mean,"
        "loc2_std,loc3_mean,loc3_std,overall_loc_mean\n";
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%g,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  r.axis_value, r.report.accuracy, r.report.f1[1], r.report.f1[2],
                  r.report.f1[3], r.report.loc_mean[0], r.report.loc_std[0],
                  r.report.loc_mean[1], r.report.loc_std[1], r.report.loc_mean[2],
                  r.report.loc_std[2], r.report.overall_loc_mean());
    os << buf;
  }
}

}  // namespace

std::vector<SweepRow> cmd_sweep(const ExperimentConfig& cfg,
                                const std::string& axis,
                                const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  std::vector<SweepRow> rows;

  if (axis == "sensors") {
    const int max_k = static_cast<int>(cfg.sensor_positions.size());
    for (int k = 1; k <= max_k; ++k) {
      ExperimentConfig sub = cfg;
      sub.sensor_positions.assign(cfg.sensor_positions.begin(),
                                  cfg.sensor_positions.begin() + k);
      sub.train_minutes = cfg.train_minutes * cfg.sweep_train_fraction;
      const std::string dir = out_dir + "/sensors_" + std::to_string(k);
      cmd_simulate(sub, dir + "/data");
      cmd_train(sub, dir + "/data", "all", dir + "/ckpt");
      SweepRow row;
      row.axis_value = k;
      row.report = cmd_evaluate(sub, dir + "/data", dir + "/ckpt", dir + "/eval");
      rows.push_back(std::move(row));
    }
  } else if (axis == "train-length") {
    for (double f : {0.2, 0.4, 0.6, 0.8, 1.0}) {
      ExperimentConfig sub = cfg;
      sub.train_minutes = cfg.train_minutes * f;
      char name[32];
      std::snprintf(name, sizeof name, "frac_%g", f);
      const std::string dir = out_dir + "/" + name;
      cmd_simulate(sub, dir + "/data");
      cmd_train(sub, dir + "/data", "all", dir + "/ckpt");
      SweepRow row;
      row.axis_value = f;
      row.report = cmd_evaluate(sub, dir + "/data", dir + "/ckpt", dir + "/eval");
      rows.push_back(std::move(row));
    }
  } else if (axis == "noise-sources") {
    ExperimentConfig base = cfg;
    base.train_minutes = cfg.train_minutes * cfg.sweep_train_fraction;
    const std::string train_dir = out_dir + "/clean";
    cmd_simulate(base, train_dir + "/data");
    cmd_train(base, train_dir + "/data", "all", train_dir + "/ckpt");
    const LoadedModels models = load_models(base, train_dir + "/ckpt");
    for (int k = 0; k <= static_cast<int>(cfg.noise_posts.size()); ++k) {
      const auto test = generate_split_windows(base, Split::kTest, -1, k);
      SweepRow row;
      row.axis_value = k;
      row.report = evaluate_windows(models.policy(base), test, base.max_persons);
      rows.push_back(std::move(row));
    }
  } else {
    throw std::invalid_argument("unknown sweep axis " + axis);
  }

  write_sweep_csv(rows, axis, out_dir + "/sweep.csv");
  return rows;
}

SeparationCase make_separation_case(const ExperimentConfig& cfg,
                                    std::uint64_t seed, double speed_a,
                                    double speed_b, double duration_s) {
  // Two persons pace constant-radius arcs about a single corner sensor, so
  // each crosses detection zones at a steady rate and the per-person DHF
  // spectra concentrate at speed-dependent lines.
  Scene scene;
  scene.arena = {cfg.arena_width, cfg.arena_height};
  scene.sensors = cfg.build_sensors(1);
  scene.duration = duration_s;
  scene.occlusion = false;
  scene.env_temp = cfg.env_temp;
  scene.radiometric_constant = cfg.radiometric_constant;
  scene.rng_seed = seed;

  const double peak = typical_single_person_peak(scene);
  scene.noise.gaussian_std = 0.005 * peak;
  scene.noise.drift_std = 0.0;

  const Vec2 origin = scene.sensors[0].pose.position;
  auto arc = [&](double radius, double speed) {
    // back-and-forth sweep across the field of view
    Trajectory t;
    const double lo = 8.0 * M_PI / 180.0, hi = 82.0 * M_PI / 180.0;
    const int steps = 40;
    const double sweep_time = radius * (hi - lo) / speed;
    const int sweeps = static_cast<int>(std::ceil(duration_s / sweep_time)) + 1;
    for (int s = 0; s <= sweeps; ++s) {
      for (int i = (s == 0 ? 0 : 1); i <= steps; ++i) {
        const double f = static_cast<double>(i) / steps;
        const double a = (s % 2 == 0) ? lo + f * (hi - lo) : hi - f * (hi - lo);
        t.waypoints.push_back(
            {origin.x + radius * std::cos(a), origin.y + radius * std::sin(a)});
        if (t.waypoints.size() > 1) t.leg_speeds.push_back(speed);
      }
    }
    return t;
  };

  Person p1, p2;
  p1.state.effective_area = cfg.person_area;
  p1.state.radius = cfg.person_radius;
  p1.state.surface_temp = 305.0;
  p2.state = p1.state;
  p1.trajectory = arc(4.0, speed_a);
  p2.trajectory = arc(3.55, speed_b);
  scene.persons = {p1, p2};
  scene.validate();

  const SceneTrace trace = simulate_scene(scene, /*record_per_person=*/true);
  SeparationCase c;
  c.mixture = trace.dhf;
  c.truth = trace.person_dhf;
  return c;
}

int counting_net_vote(const InferencePolicy& policy,
                      const std::vector<SignalWindow>& windows) {
  std::map<int, int> votes;
  for (const auto& w : windows)
    votes[infer(policy, WindowSignal::strip(w)).count] += 1;
  int best = 0, best_votes = -1;
  for (const auto& [count, n] : votes)
    if (n > best_votes) {
      best = count;
      best_votes = n;
    }
  return best;
}

BaselineReport cmd_baseline(const ExperimentConfig& cfg,
                            const std::string& out_dir,
                            const std::string& count_source,
                            const std::string& ckpt_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  ScicaConfig ica;
  ica.n_components = 20;
  ica.seed = cfg.seed;

  std::unique_ptr<LoadedModels> models;
  if (count_source == "counting_net") {
    models = std::make_unique<LoadedModels>(load_models(cfg, ckpt_dir));
  } else if (count_source != "ground_truth") {
    throw std::invalid_argument("count source must be ground_truth or counting_net");
  }

  const double duration = 24.0;
  auto run_case = [&](const std::string& label, double va, double vb,
                      std::uint64_t seed) {
    const SeparationCase c = make_separation_case(cfg, seed, va, vb, duration);
    int n_sources = static_cast<int>(c.truth.size());
    if (models) {
      SeriesBundle b;
      b.sample_rate = cfg.dynamics.sample_rate;
      b.dhf = c.mixture;  // already DHF domain, windows carry it as such
      auto wins = window_bundle(b, cfg.window_seconds, cfg.eval_hop_seconds,
                                cfg.pipeline.segments, "none");
      n_sources = std::max(1, counting_net_vote(models->policy(cfg), wins));
    }
    BaselineRow row;
    row.label = label;
    row.speed_a = va;
    row.speed_b = vb;
    row.seed = seed;
    row.score = evaluate_separation_case(c, n_sources, ica);
    return row;
  };

  BaselineReport report;
  const int repeats = 3;
  double disjoint_sum = 0.0;
  for (int r = 0; r < repeats; ++r) {
    auto row = run_case("disjoint", 0.6, 1.4, Rng::mix(cfg.seed, 0xb100 + r));
    disjoint_sum += row.score.mean_correlation;
    report.rows.push_back(std::move(row));
  }
  report.disjoint_mean = disjoint_sum / repeats;

  const std::vector<std::pair<double, double>> sweep = {
      {0.8, 1.15}, {0.85, 1.12}, {0.95, 1.05}};
  for (std::size_t s = 0; s < sweep.size(); ++s) {
    double sum = 0.0;
    for (int r = 0; r < repeats; ++r) {
      auto row = run_case("overlap_" + std::to_string(s), sweep[s].first,
                          sweep[s].second, Rng::mix(cfg.seed, 0xb200 + 16 * s + r));
      sum += row.score.mean_correlation;
      report.rows.push_back(std::move(row));
    }
    report.overlap_sweep.push_back(sum / repeats);
  }

  std::ofstream os(out_dir + "/baseline.csv", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write baseline.csv");
  os << "case,speed_a,speed_b,seed,mean_correlation,residual_rms\n";
  char buf[192];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%.2f,%.2f,%llu,%.6f,%.6g\n",
                  r.label.c_str(), r.speed_a, r.speed_b,
                  static_cast<unsigned long long>(r.seed),
                  r.score.mean_correlation, r.score.residual_rms);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "summary_disjoint,,,,%.6f,\n", report.disjoint_mean);
  os << buf;
  for (std::size_t s = 0; s < report.overlap_sweep.size(); ++s) {
    std::snprintf(buf, sizeof buf, "summary_overlap_%zu,%.2f,%.2f,,%.6f,\n", s,
                  sweep[s].first, sweep[s].second, report.overlap_sweep[s]);
    os << buf;
  }
  return report;
}

void cmd_augment(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  const auto aug = generate_augmented_windows(cfg);
  write_windows_file(out_dir + "/train_aug.jsonl", aug);
}

}  // namespace pirdfl
