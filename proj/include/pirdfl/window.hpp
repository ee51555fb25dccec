#pragma once
#include <iosfwd>
#include <string>
#include <vector>

#include "pirdfl/simulator.hpp"

namespace pirdfl {

/// One multi-sensor sample window plus its labels. `dhf` is filled once the
/// window has been inverse-filtered (or when it was produced by a DHF-domain
/// augmentation and no voltage exists for it).
struct SignalWindow {
  int n_sensors = 0;
  int n_samples = 0;
  std::vector<double> voltages;  ///< n_sensors x n_samples row-major; may be empty
  std::vector<double> dhf;       ///< same layout; empty when absent
  int count_label = 0;
  std::vector<std::vector<Vec2>> positions;  ///< [person][segment], meters
  long scene_id = 0;
  double t0 = 0.0;               ///< window start time within the scene
  std::string augment = "none";
};

/// Cuts a simulated trace into windows. Sample indices are floor-aligned:
/// window w starts at sample floor(w * hop * fs). Per-person labels hold the
/// position at the center instant of each of the K segments.
std::vector<SignalWindow> window_dataset(const SceneTrace& trace,
                                         long scene_id, double window_seconds,
                                         double hop_seconds, int segments);

/// JSONL persistence; one window per line, keys sorted, values round-trip
/// exactly.
void write_windows_jsonl(std::ostream& os,
                         const std::vector<SignalWindow>& windows);
std::vector<SignalWindow> read_windows_jsonl(std::istream& is);
void write_windows_file(const std::string& path,
                        const std::vector<SignalWindow>& windows);
std::vector<SignalWindow> read_windows_file(const std::string& path);

}  // namespace pirdfl
