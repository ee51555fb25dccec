#pragma once
#include <array>
#include <string>
#include <vector>

#include "pirdfl/net.hpp"
#include "pirdfl/window.hpp"

namespace pirdfl {

/// Counting and localization quality on a labeled window set.
struct EvalReport {
  std::vector<std::vector<long>> confusion;  ///< [true][pred], (P+1)^2
  std::vector<double> f1;                    ///< per class 0..P
  double accuracy = 0.0;
  long total_windows = 0;
  long silent_windows = 0;
  /// Per-segment matched euclidean errors pooled by true person count 1..P;
  /// collected from windows whose predicted count equals the true count.
  std::array<std::vector<double>, kMaxPersons> loc_errors;
  std::array<double, kMaxPersons> loc_mean{};
  std::array<double, kMaxPersons> loc_std{};
  std::array<long, kMaxPersons> loc_windows{};
  double runtime_seconds = 0.0;

  double overall_loc_mean() const;
};

double f1_from_confusion(const std::vector<std::vector<long>>& confusion,
                         int cls);

EvalReport evaluate_windows(const InferencePolicy& policy,
                            const std::vector<SignalWindow>& windows,
                            int max_persons = kMaxPersons);

/// CDF over error samples evaluated at `points` evenly spaced levels from 0
/// to the maximum sample (inclusive); (error, fraction <= error) pairs.
std::vector<std::pair<double, double>> error_cdf(std::vector<double> samples,
                                                 int points);

void write_report_json(const EvalReport& r, const std::string& path);
void write_confusion_csv(const EvalReport& r, const std::string& path);
void write_cdf_csv(const EvalReport& r, const std::string& path, int points = 50);
void write_curves_csv(const std::vector<double>& train_losses,
                      const std::vector<double>& val_losses,
                      const std::string& path);

}  // namespace pirdfl
