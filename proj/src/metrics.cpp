#include "pirdfl/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "pirdfl/parallel.hpp"

namespace pirdfl {

double EvalReport::overall_loc_mean() const {
  double sum = 0.0;
  long n = 0;
  for (const auto& errs : loc_errors) {
    for (double e : errs) sum += e;
    n += static_cast<long>(errs.size());
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

double f1_from_confusion(const std::vector<std::vector<long>>& confusion,
                         int cls) {
  const int n = static_cast<int>(confusion.size());
  long tp = confusion[cls][cls], row = 0, col = 0;
  for (int i = 0; i < n; ++i) {
    row += confusion[cls][i];
    col += confusion[i][cls];
  }
  if (row == 0 || col == 0 || tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(col);
  const double recall = static_cast<double>(tp) / static_cast<double>(row);
  return 2.0 * precision * recall / (precision + recall);
}

EvalReport evaluate_windows(const InferencePolicy& policy,
                            const std::vector<SignalWindow>& windows,
                            int max_persons) {
  const auto t0 = std::chrono::steady_clock::now();
  EvalReport r;
  const int classes = max_persons + 1;
  r.confusion.assign(classes, std::vector<long>(classes, 0));
  r.total_windows = static_cast<long>(windows.size());

  struct PerWindow {
    int true_count = 0, pred = 0;
    bool silent = false;
    std::vector<double> errors;
  };
  std::vector<PerWindow> results(windows.size());

  parallel_for(static_cast<long>(windows.size()), [&](long i) {
    const SignalWindow& w = windows[i];
    PerWindow& pw = results[i];
    pw.true_count = w.count_label;
    const InferenceResult res = infer(policy, WindowSignal::strip(w));
    pw.silent = res.silent;
    pw.pred = std::min(res.count, max_persons);
    if (res.count >= 1 && res.count == w.count_label) {
      // matched per-person per-segment errors under the best assignment
      const LocalizationPit pit = localization_loss(res.positions, w.positions);
      for (std::size_t m = 0; m < res.positions.size(); ++m)
        for (std::size_t k = 0; k < res.positions[m].size(); ++k)
          pw.errors.push_back(
              (res.positions[m][k] - w.positions[pit.perm[m]][k]).norm());
    }
  });

  long correct = 0;
  for (const auto& pw : results) {
    r.confusion[pw.true_count][pw.pred] += 1;
    if (pw.silent) ++r.silent_windows;
    if (pw.pred == pw.true_count) ++correct;
    if (!pw.errors.empty()) {
      auto& pool = r.loc_errors[pw.true_count - 1];
      pool.insert(pool.end(), pw.errors.begin(), pw.errors.end());
      r.loc_windows[pw.true_count - 1] += 1;
    }
  }
  r.accuracy = windows.empty()
                   ? 0.0
                   : static_cast<double>(correct) / static_cast<double>(windows.size());
  r.f1.resize(classes);
  for (int c = 0; c < classes; ++c) r.f1[c] = f1_from_confusion(r.confusion, c);
  for (int m = 0; m < kMaxPersons; ++m) {
    const auto& errs = r.loc_errors[m];
    if (errs.empty()) continue;
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= static_cast<double>(errs.size());
    double var = 0.0;
    for (double e : errs) var += (e - mean) * (e - mean);
    r.loc_mean[m] = mean;
    r.loc_std[m] = std::sqrt(var / static_cast<double>(errs.size()));
  }
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<std::pair<double, double>> error_cdf(std::vector<double> samples,
                                                 int points) {
  std::vector<std::pair<double, double>> cdf;
  if (samples.empty() || points < 1) return cdf;
  std::sort(samples.begin(), samples.end());
  const double max_err = samples.back();
  for (int i = 0; i < points; ++i) {
    const double level = max_err * static_cast<double>(i + 1) / points;
    const auto it = std::upper_bound(samples.begin(), samples.end(), level);
    cdf.push_back({level, static_cast<double>(it - samples.begin()) /
                              static_cast<double>(samples.size())});
  }
  return cdf;
}

void write_report_json(const EvalReport& r, const std::string& path) {
  nlohmann::json j;
  j["accuracy"] = r.accuracy;
  j["total_windows"] = r.total_windows;
  j["silent_windows"] = r.silent_windows;
  j["confusion"] = r.confusion;
  j["f1"] = r.f1;
  for (int m = 0; m < kMaxPersons; ++m) {
    const std::string key = "loc_" + std::to_string(m + 1);
    j[key] = {{"mean", r.loc_mean[m]},
              {"std", r.loc_std[m]},
              {"windows", r.loc_windows[m]},
              {"samples", static_cast<long>(r.loc_errors[m].size())}};
  }
  j["overall_loc_mean"] = r.overall_loc_mean();
  j["runtime_seconds"] = r.runtime_seconds;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << j.dump(2) << "\n";
}

void write_confusion_csv(const EvalReport& r, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "true\\pred";
  for (std::size_t c = 0; c < r.confusion.size(); ++c) os << "," << c;
  os << "\n";
  for (std::size_t t = 0; t < r.confusion.size(); ++t) {
    os << t;
    for (long v : r.confusion[t]) os << "," << v;
    os << "\n";
  }
}

void write_cdf_csv(const EvalReport& r, const std::string& path, int points) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "persons,error_m,cdf\n";
  char buf[64];
  for (int m = 0; m < kMaxPersons; ++m) {
    for (const auto& [err, frac] : error_cdf(r.loc_errors[m], points)) {
      std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", m + 1, err, frac);
      os << buf;
    }
  }
}

void write_curves_csv(const std::vector<double>& train_losses,
                      const std::vector<double>& val_losses,
                      const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "epoch,train_loss,val_loss\n";
  char buf[96];
  for (std::size_t e = 0; e < train_losses.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", e + 1, train_losses[e],
                  val_losses[e]);
    os << buf;
  }
}

}  // namespace pirdfl
