#include "pirdfl/window.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace pirdfl {

std::vector<SignalWindow> window_dataset(const SceneTrace& trace,
                                         long scene_id, double window_seconds,
                                         double hop_seconds, int segments) {
  const double fs = trace.sample_rate;
  const int d = static_cast<int>(window_seconds * fs);
  if (d <= 0 || segments <= 0 || d % segments != 0)
    throw std::invalid_argument("segments must divide the window length");
  const int t_len = d / segments;
  const int ns = static_cast<int>(trace.dhf.size());
  const std::size_t np = trace.positions.size();

  std::vector<SignalWindow> out;
  for (int w = 0;; ++w) {
    const int start = static_cast<int>(std::floor(w * hop_seconds * fs));
    if (start + d > trace.n_samples) break;
    SignalWindow win;
    win.n_sensors = ns;
    win.n_samples = d;
    win.scene_id = scene_id;
    win.t0 = start / fs;
    win.count_label = static_cast<int>(np);
    win.voltages.resize(static_cast<std::size_t>(ns) * d);
    for (int s = 0; s < ns; ++s)
      for (int i = 0; i < d; ++i)
        win.voltages[static_cast<std::size_t>(s) * d + i] =
            trace.voltage[s][start + i];
    win.positions.assign(np, std::vector<Vec2>(segments));
    for (std::size_t p = 0; p < np; ++p)
      for (int k = 0; k < segments; ++k)
        win.positions[p][k] = trace.positions[p][start + k * t_len + t_len / 2];
    out.push_back(std::move(win));
  }
  return out;
}

namespace {

nlohmann::json to_json(const SignalWindow& w) {
  nlohmann::json j;
  j["n_sensors"] = w.n_sensors;
  j["n_samples"] = w.n_samples;
  j["scene_id"] = w.scene_id;
  j["t0"] = w.t0;
  j["count"] = w.count_label;
  j["augment"] = w.augment;
  if (!w.voltages.empty()) j["voltages"] = w.voltages;
  if (!w.dhf.empty()) j["dhf"] = w.dhf;
  auto pos = nlohmann::json::array();
  for (const auto& person : w.positions) {
    auto pp = nlohmann::json::array();
    for (Vec2 v : person) pp.push_back({v.x, v.y});
    pos.push_back(pp);
  }
  j["positions"] = pos;
  return j;
}

SignalWindow from_json(const nlohmann::json& j) {
  SignalWindow w;
  w.n_sensors = j.at("n_sensors").get<int>();
  w.n_samples = j.at("n_samples").get<int>();
  w.scene_id = j.at("scene_id").get<long>();
  w.t0 = j.at("t0").get<double>();
  w.count_label = j.at("count").get<int>();
  w.augment = j.at("augment").get<std::string>();
  if (j.contains("voltages")) w.voltages = j.at("voltages").get<std::vector<double>>();
  if (j.contains("dhf")) w.dhf = j.at("dhf").get<std::vector<double>>();
  for (const auto& pp : j.at("positions")) {
    std::vector<Vec2> person;
    for (const auto& v : pp) person.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    w.positions.push_back(std::move(person));
  }
  return w;
}

}  // namespace

void write_windows_jsonl(std::ostream& os,
                         const std::vector<SignalWindow>& windows) {
  for (const auto& w : windows) os << to_json(w).dump() << '\n';
}

std::vector<SignalWindow> read_windows_jsonl(std::istream& is) {
  std::vector<SignalWindow> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(from_json(nlohmann::json::parse(line)));
  }
  return out;
}

void write_windows_file(const std::string& path,
                        const std::vector<SignalWindow>& windows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_windows_jsonl(os, windows);
}

std::vector<SignalWindow> read_windows_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_windows_jsonl(is);
}

}  // namespace pirdfl
