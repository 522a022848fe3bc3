#include "core/multistage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "core/dynamics.hpp"
#include "core/error.hpp"

namespace oampump {

double StagePlan::total_periods() const {
  double s = 0.0;
  for (int c : digits) s += 0.5 * std::abs(c);
  return s;
}

long long StagePlan::step(int n) const {
  long long m = 1;
  for (int i = 0; i < n; ++i) m *= base;
  return m;
}

long long StagePlan::value() const {
  long long v = 0;
  for (int n = 0; n < static_cast<int>(digits.size()); ++n) v += digits[n] * step(n);
  return v;
}

namespace {

long long ipow(long long b, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) {
    require(r <= std::numeric_limits<long long>::max() / b, "base^stages overflows",
            ErrorCode::Unrepresentable);
    r *= b;
  }
  return r;
}

struct Best {
  long long cost;
  std::vector<int> digits;
};

// Minimum sum |c_n| over representations with |c_n| <= N-1.
Best balanced(long long v, int base, int n, int stages, std::map<std::pair<long long, int>, Best>& memo) {
  constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
  if (n == stages) return {v == 0 ? 0 : kInf, {}};
  const auto key = std::make_pair(v, n);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  const long long r = ((v % base) + base) % base;
  std::vector<long long> choices{r};
  if (r != 0) choices.push_back(r - base);
  // Prefer the smaller magnitude, then the positive digit, on ties.
  std::sort(choices.begin(), choices.end(), [](long long a, long long b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a > b;
  });
  Best best{kInf, {}};
  for (long long d : choices) {
    Best sub = balanced((v - d) / base, base, n + 1, stages, memo);
    if (sub.cost >= kInf) continue;
    if (sub.cost + std::abs(d) < best.cost) {
      best.cost = sub.cost + std::abs(d);
      best.digits = {static_cast<int>(d)};
      best.digits.insert(best.digits.end(), sub.digits.begin(), sub.digits.end());
    }
  }
  memo[key] = best;
  return best;
}

}  // namespace

StagePlan plan_switch(long long delta_l, int base, int stages, DigitMode mode) {
  require(base >= 2, "base N must be at least 2");
  require(stages >= 1, "need at least one stage");
  StagePlan plan;
  plan.delta_l = delta_l;
  plan.base = base;
  plan.mode = mode;
  const std::string what = "delta l = " + std::to_string(delta_l) + " is not representable in " +
                           std::to_string(stages) + " stages of base " + std::to_string(base);
  if (mode == DigitMode::Unsigned) {
    const long long cap = ipow(base, stages);
    if (delta_l >= cap || delta_l <= -cap) throw Error(ErrorCode::Unrepresentable, what);
    const int sign = delta_l < 0 ? -1 : 1;
    long long v = std::abs(delta_l);
    for (int n = 0; n < stages; ++n) {
      plan.digits.push_back(sign * static_cast<int>(v % base));
      v /= base;
    }
  } else {
    ipow(base, stages);
    std::map<std::pair<long long, int>, Best> memo;
    Best b = balanced(delta_l, base, 0, stages, memo);
    if (b.digits.size() != static_cast<std::size_t>(stages)) throw Error(ErrorCode::Unrepresentable, what);
    plan.digits = b.digits;
  }
  return plan;
}

PlanBounds plan_bounds(long long l_max, int base) {
  require(l_max >= 1, "l_max must be at least 1");
  require(base >= 2, "base N must be at least 2");
  PlanBounds b;
  long long reach = 1;
  while (reach < l_max) {
    reach *= base;
    ++b.max_stages;
  }
  b.max_periods = 0.5 * base * std::log(static_cast<double>(l_max)) / std::log(static_cast<double>(base));
  return b;
}

MultistageRun execute_plan(const StagePlan& plan, const RiceMeleParams& p, double period, int l0) {
  require(plan.value() == plan.delta_l, "plan digits do not add up to delta l");
  require(period > 0.0, "pump period must be positive");
  const int q = static_cast<int>(plan.digits.size());
  long long reach = 0, top = 1;
  for (int n = 0; n < q; ++n) {
    reach += std::abs(static_cast<long long>(plan.digits[n])) * plan.step(n);
    top = std::max(top, plan.step(n));
  }
  const int pad = 24;
  const long long lo = l0 - reach - 2 * pad * top, hi = l0 + reach + 2 * pad * top;
  require(hi - lo < 5'000'000, "plan spans too many OAM sites to simulate");
  std::vector<cplx> amp(static_cast<std::size_t>(hi - lo + 1), 0.0);
  auto at = [&](long long l) -> cplx& { return amp.at(static_cast<std::size_t>(l - lo)); };
  auto mean = [&] {
    double s = 0.0, w = 0.0;
    for (std::size_t i = 0; i < amp.size(); ++i) {
      const double pr = std::norm(amp[i]);
      s += pr * static_cast<double>(lo + static_cast<long long>(i));
      w += pr;
    }
    return s / w;
  };

  MultistageRun run;
  bool prepared = false;
  for (int n = q - 1; n >= 0; --n) {
    const int c = plan.digits[n];
    const long long M = plan.step(n);
    RiceMeleParams sp = p;
    sp.alpha0 = sp.alpha1 = kPi / static_cast<double>(M);
    if (!prepared) {
      if (c == 0 && n > 0) continue;
      require(l0 % (2 * M) == 0, "start site must sit on an even site of the first stage");
      const LatticeConfig lat = LatticeConfig::centered(l0, 2 * pad, static_cast<int>(M));
      const LatticeState w = wannier_state(lat, sp, {0.0, 0.0}, Band::Lower, static_cast<int>(l0 / (2 * M)));
      for (int i = 0; i < lat.site_count(); ++i) at(lat.oam(i)) = w.amplitudes[i];
      run.initial_mean = mean();
      prepared = true;
    }
    if (c == 0) continue;
    StageRun sr;
    sr.stage = n;
    sr.step = M;
    sr.cycles = 0.5 * c;
    sr.mean_before = mean();
    PumpProblem pr;
    pr.params = sp;
    pr.schedule = default_pump_loop(sp, period, c > 0 ? Orientation::Clockwise : Orientation::Counterclockwise,
                                    0.5 * std::abs(c));
    const double t_end = 0.5 * std::abs(c) * period;
    for (long long r = 0; r < M; ++r) {
      long long first = std::numeric_limits<long long>::max(), last = std::numeric_limits<long long>::min();
      for (long long l = lo + ((r - lo) % M + M) % M; l <= hi; l += M)
        if (std::norm(at(l)) > 1e-16) {
          first = std::min(first, l);
          last = std::max(last, l);
        }
      if (first > last) continue;
      LatticeConfig lat;
      lat.step = static_cast<int>(M);
      lat.l_min = static_cast<int>(first - (pad + std::abs(c)) * M);
      lat.l_max = static_cast<int>(last + (pad + std::abs(c)) * M);
      require(lat.l_min >= lo && lat.l_max <= hi, "stage lattice leaves the simulated window");
      LatticeState s{lat, Eigen::VectorXcd::Zero(lat.site_count()), 0.0};
      for (int i = 0; i < lat.site_count(); ++i) s.amplitudes[i] = at(lat.oam(i));
      const Trajectory tr = evolve(s, pr, {t_end});
      for (int i = 0; i < lat.site_count(); ++i) at(lat.oam(i)) = tr.states.back().amplitudes[i];
    }
    sr.mean_after = mean();
    run.stages.push_back(sr);
  }
  if (!prepared) {
    at(l0) = 1.0;
    run.initial_mean = mean();
  }
  run.final_mean = mean();
  run.displacement = run.final_mean - run.initial_mean;
  run.l_min = static_cast<int>(lo);
  for (const cplx& a : amp) run.probabilities.push_back(std::norm(a));
  return run;
}

}  // namespace oampump
