#pragma once

// Cascaded pumping stages with SLM steps N^n.

#include <vector>

#include "core/model.hpp"

namespace oampump {

enum class DigitMode { Unsigned, Balanced };

struct StagePlan {
  long long delta_l = 0;
  int base = 10;
  DigitMode mode = DigitMode::Unsigned;
  std::vector<int> digits;  // c_n for n = 0 .. q-1; stage n shifts by c_n N^n

  /// Pump cycles of stage n: c_n / 2 (sign gives the loop orientation).
  double cycles(int n) const { return 0.5 * digits.at(n); }
  /// Total pump time in units of T: sum |c_n| / 2.
  double total_periods() const;
  long long value() const;
  long long step(int n) const;
};

StagePlan plan_switch(long long delta_l, int base, int stages, DigitMode mode = DigitMode::Unsigned);

struct PlanBounds {
  int max_stages = 0;          // ceil(log_N l_max)
  double max_periods = 0.0;    // (N / 2) log_N l_max
};

PlanBounds plan_bounds(long long l_max, int base);

struct StageRun {
  int stage = 0;
  long long step = 1;
  double cycles = 0.0;
  double mean_before = 0.0;
  double mean_after = 0.0;
};

struct MultistageRun {
  std::vector<StageRun> stages;
  double initial_mean = 0.0;
  double final_mean = 0.0;
  double displacement = 0.0;
  int l_min = 0;
  std::vector<double> probabilities;  // final P_l for l = l_min, l_min + 1, ...
};

/// Simulates the plan stage by stage (largest step first), starting from the
/// lower-band Wannier state of the first active stage at l0. Each stage runs
/// the default loop of `period` with alpha = pi / N^n; photon amplitudes in
/// different residue classes mod N^n evolve on separate chains.
MultistageRun execute_plan(const StagePlan& plan, const RiceMeleParams& p, double period,
                           int l0 = 0);

}  // namespace oampump
