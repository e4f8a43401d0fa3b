// Runs the twelve acceptance criteria and prints one line per criterion.
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gph/checks.hpp"

namespace {

struct Criterion {
  int id;
  double limit_seconds;
  std::function<gph::CheckRecord()> run;
};

}  // namespace

int main() {
  using namespace gph;
  const std::vector<Criterion> criteria{
      {1, 60, [] { return check_duhamel_oracle(OracleParams{}); }},
      {2, 60, [] { return check_integral_residual(OracleParams{}); }},
      {3, 10, [] { return check_randomized_estimate(RandomizedParams{}); }},
      {4, 120, [] { return check_factorial_decay(DecayParams{}); }},
      {5, 120, [] { return check_cauchy(CauchyParams{}); }},
      {6, 30, [] { return check_continuity_lemma(ContinuityParams{}); }},
      {7, 120, [] { return check_modulus_scaling(ModulusParams{}); }},
      {8, 30, [] { return check_expansion_example1(ExpansionCheckParams{}); }},
      {9, 5, [] { return check_randomization_identities(IdentityParams{}); }},
      {10, 60, [] { return check_nls(NlsCheckParams{}); }},
      {11, 5, [] { return check_simplex(SimplexParams{}); }},
      {12, 5, [] { return check_nonresonant(NonresonantParams{}); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    CheckRecord rec;
    bool ok = false;
    std::string detail;
    try {
      rec = c.run();
      const bool in_time = rec.seconds < c.limit_seconds;
      ok = rec.pass && in_time;
      detail = rec.summary;
      if (!in_time) detail += " [runtime limit exceeded]";
    } catch (const std::exception& e) {
      detail = std::string("error: ") + e.what();
    }
    if (!ok) ++failed;
    std::printf("%s criterion %2d %-28s %7.2fs/<%gs  %s\n", ok ? "PASS" : "FAIL", c.id, rec.name.c_str(), rec.seconds,
                c.limit_seconds, detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
