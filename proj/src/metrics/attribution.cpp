#include "agetrack/errors.hpp"
#include "agetrack/metrics.hpp"

namespace agetrack {

namespace {

Json fraction_json(const std::optional<Fraction>& f) {
  if (!f) return nullptr;
  return {{"value", f->to_double()}, {"exact", f->str()}};
}

void check_unit(const Fraction& f, const char* name) {
  if (f < Fraction(0) || f > Fraction(1)) {
    throw ValidationError(std::string("attribution: ") + name + " = " + f.str() + " is outside [0, 1]");
  }
}

}  // namespace

AttributionProfile attribution_profile(Fraction p1, Fraction p2, Fraction p3, bool abstained) {
  check_unit(p1, "acc_p1");
  check_unit(p2, "acc_p2");
  check_unit(p3, "acc_p3");
  AttributionProfile a;
  a.acc_p1 = p1;
  a.acc_p2 = p2;
  a.acc_p3 = p3;
  a.abstained = abstained;
  if (abstained) {
    a.anomaly = p1 > p3;
    if (!a.anomaly) {
      a.util_err = Fraction(1) - p3;
      a.joint_err = p3 - p1;
    }
    return a;
  }
  a.anomaly = p1 > p2 || p2 > p3;
  if (!a.anomaly) {
    a.util_err = Fraction(1) - p3;
    a.write_err = p3 - p2;
    a.read_err = p2 - p1;
  }
  return a;
}

AttributionProfile attribution_profile(double p1, double p2, double p3, bool abstained) {
  return attribution_profile(Fraction::from_double(p1), Fraction::from_double(p2), Fraction::from_double(p3),
                             abstained);
}

std::optional<AttributionProfile> run_attribution(const RunResult& result) {
  // Keyword scores are k/n with small n, so summing them as fractions is exact.
  Fraction sums[3];
  int counts[3] = {0, 0, 0};
  const char* names[3] = {"P1", "P2", "P3"};
  for (const auto& s : result.sessions) {
    for (const auto& p : s.probes) {
      for (int c = 0; c < 3; ++c) {
        auto it = p.condition_scores.find(names[c]);
        if (it == p.condition_scores.end()) continue;
        sums[c] = sums[c] + Fraction::from_double(it->second, 10'000);
        ++counts[c];
      }
    }
  }
  if (counts[0] == 0 || counts[2] == 0) return std::nullopt;
  auto mean = [&](int c) { return Fraction(sums[c].num(), sums[c].den() * counts[c]); };
  const bool abstained = counts[1] == 0;
  return attribution_profile(mean(0), abstained ? mean(0) : mean(1), mean(2), abstained);
}

Json AttributionProfile::to_json() const {
  return {{"acc_p1", fraction_json(acc_p1)},
          {"acc_p2", abstained ? Json(nullptr) : fraction_json(acc_p2)},
          {"acc_p3", fraction_json(acc_p3)},
          {"anomaly", anomaly},
          {"abstained", abstained},
          {"util_err", fraction_json(util_err)},
          {"write_err", fraction_json(write_err)},
          {"read_err", fraction_json(read_err)},
          {"joint_err", fraction_json(joint_err)}};
}

}  // namespace agetrack
