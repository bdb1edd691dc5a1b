// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "preservers/classify.hpp"
#include "preservers/genfuzz.hpp"

using namespace preservers;

namespace {

const Tolerances kTol;

int g_failures = 0;

void report(int index, const std::string& name, bool ok,
            const std::string& note = {}) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << index << ": " << name;
  if (!note.empty()) std::cout << " (" << note << ")";
  std::cout << "\n";
  if (!ok) ++g_failures;
}

bool multiset_close(std::vector<double> a, std::vector<double> b, double eps) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > eps) return false;
  return true;
}

// Shared pool of 100 seeded canonical forms at desk scale.
std::vector<CanonicalForm> criterion_pool() {
  std::vector<CanonicalForm> pool;
  for (int i = 0; i < 100; ++i) {
    Rng rng = Rng::derive(0xACCE97, 1, i);
    int m = rng.uniform_int(2, 4), n = rng.uniform_int(2, 4);
    int q1 = rng.uniform_int(0, 3);
    int q2 = rng.uniform_int(q1 == 0 ? 1 : 0, 3 - q1);
    int r = q1 * m + q2 * n + rng.uniform_int(0, 2);
    int s = q1 * n + q2 * m + rng.uniform_int(0, 2);
    r = std::min(r, 20);
    s = std::min(s, 20);
    Field f = i % 2 ? Field::Real : Field::Complex;
    pool.push_back(random_canonical(m, n, r, s, f, q1, q2, rng));
  }
  return pool;
}

void criterion_round_trip(const std::vector<CanonicalForm>& pool) {
  Tolerances tol;
  tol.residual = 1e-8;
  int bad = 0;
  for (const CanonicalForm& c : pool) {
    LinMap phi = build(c);
    DecomposeResult res = decompose(phi, kTol);
    const auto* rec = std::get_if<CanonicalForm>(&res);
    if (!rec || !maps_equal(build(*rec), phi, tol) ||
        !multiset_close(rec->q1, c.q1, 1e-9) ||
        !multiset_close(rec->q2, c.q2, 1e-9))
      ++bad;
  }
  std::ostringstream note;
  note << bad << "/100 failed";
  report(1, "canonical round trip over 100 seeded forms", bad == 0,
         note.str());
}

void criterion_refutation(const std::vector<CanonicalForm>& pool) {
  int refuted = 0, bad_witness = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    LinMap phi = perturb(build(pool[i]), 0.1, 0xBEEF00 + i);
    DecomposeResult res = decompose(phi, kTol);
    const auto* fail = std::get_if<DecomposeFailure>(&res);
    if (!fail) continue;
    ++refuted;
    if (fail->kind == FailureKind::NotPreserver) {
      const auto& [a, b] = *fail->witness;
      if (!is_disjoint(a, b, kTol) ||
          is_disjoint(apply(phi, a), apply(phi, b), kTol))
        ++bad_witness;
    }
  }
  std::ostringstream note;
  note << refuted << "/100 refuted, " << bad_witness << " bad witnesses";
  report(2, "refutation soundness under 0.1 perturbation",
         refuted >= 99 && bad_witness == 0, note.str());
}

void criterion_tcp_equivalence() {
  int bad_fwd = 0;
  for (int t = 0; t < 10000; ++t) {
    Rng rng = Rng::derive(0xACCE97, 3, t);
    int m = rng.uniform_int(2, 4), n = rng.uniform_int(2, 4);
    Field f = t % 2 ? Field::Real : Field::Complex;
    auto [a, b] = random_disjoint_pair(m, n, f, rng);
    double scale = std::max(1.0, a.max_norm() * a.max_norm() * b.max_norm());
    if (tcp_residual(a, b) > 1e-10 * scale) ++bad_fwd;
  }
  int bad_bwd = 0;
  int produced = 0;
  for (int t = 0; produced < 10000; ++t) {
    Rng rng = Rng::derive(0xACCE97, 4, t);
    int m = rng.uniform_int(2, 4), n = rng.uniform_int(2, 4);
    Field f = t % 2 ? Field::Real : Field::Complex;
    Mat a = random_gaussian(m, n, f, rng);
    Mat b = random_gaussian(m, n, f, rng);
    double pair_scale = std::max(1.0, a.max_norm() * b.max_norm());
    if (disjoint_residual(a, b) <= 1e-3 * pair_scale) continue;
    ++produced;
    double scale = std::max(1.0, a.max_norm() * a.max_norm() * b.max_norm());
    if (tcp_residual(a, b) <= 1e-6 * scale) ++bad_bwd;
  }
  std::ostringstream note;
  note << bad_fwd << " forward, " << bad_bwd << " backward violations";
  report(3, "triple-condition equivalence on 2x10^4 pairs",
         bad_fwd == 0 && bad_bwd == 0, note.str());
}

void criterion_triple_equivalence() {
  int disagreements = 0, polarity_errors = 0;
  for (int i = 0; i < 100; ++i) {
    Rng rng = Rng::derive(0xACCE97, 5, i);
    bool unit = i < 50;
    int m = rng.uniform_int(2, 3), n = rng.uniform_int(2, 3);
    int q1 = rng.uniform_int(0, 1);
    int q2 = rng.uniform_int(q1 == 0 ? 1 : 0, 1);
    int r = q1 * m + q2 * n + rng.uniform_int(0, 2);
    int s = q1 * n + q2 * m + rng.uniform_int(0, 2);
    Field f = i % 2 ? Field::Real : Field::Complex;
    CanonicalForm c = random_canonical(m, n, r, s, f, q1, q2, rng);
    for (double& v : c.q1) v = unit ? 1.0 : 1.0 + 0.1 + rng.uniform();
    for (double& v : c.q2) v = unit ? 1.0 : 1.0 + 0.1 + rng.uniform();
    std::sort(c.q1.begin(), c.q1.end(), std::greater<>());
    std::sort(c.q2.begin(), c.q2.end(), std::greater<>());
    LinMap phi = build(c);
    ClassifierVerdict a = check_triple_homomorphism(phi, kTol);
    ClassifierVerdict b = check_partial_isometry_preserver(phi, kTol);
    if (a.verdict != b.verdict) ++disagreements;
    if ((a.verdict == Verdict::Yes) != unit) ++polarity_errors;
  }
  std::ostringstream note;
  note << disagreements << " disagreements, " << polarity_errors
       << " wrong polarities";
  report(4, "triple-homomorphism vs partial-isometry agreement on 100 maps",
         disagreements == 0 && polarity_errors == 0, note.str());
}

bool schatten_sampled_yes(const LinMap& phi, double p, std::uint64_t seed) {
  for (int t = 0; t < 500; ++t) {
    Rng rng = Rng::derive(seed, 6, t);
    Mat a = t % 2 ? random_rank_two(phi.m, phi.n, phi.field, rng)
                  : Mat(phi.field,
                        cxd(rng.log_uniform(0.1, 10.0)) *
                            (random_unitary(phi.m, phi.field, rng).a.leftCols(1) *
                             random_unitary(phi.n, phi.field, rng)
                                 .a.topRows(1)));
    double na = schatten_norm(a, p);
    if (std::abs(schatten_norm(apply(phi, a), p) - na) > 1e-9 * na)
      return false;
  }
  return true;
}

void criterion_schatten() {
  int mismatches = 0;
  for (double p : {1.0, 3.0, 4.0}) {
    for (int i = 0; i < 40; ++i) {
      Rng rng = Rng::derive(0xACCE97 + static_cast<int>(p), 7, i);
      int m = rng.uniform_int(2, 3), n = rng.uniform_int(2, 3);
      int q1 = rng.uniform_int(0, 1);
      int q2 = rng.uniform_int(q1 == 0 ? 1 : 0, 1);
      CanonicalForm c = random_canonical(m, n, q1 * m + q2 * n + 1,
                                         q1 * n + q2 * m + 1,
                                         i % 2 ? Field::Real : Field::Complex,
                                         q1, q2, rng);
      double sp = 0.0;
      for (double v : c.q1) sp += std::pow(v, p);
      for (double v : c.q2) sp += std::pow(v, p);
      sp = std::pow(sp, 1.0 / p);
      // First 20 exactly normalized, last 20 scaled off by 1.05..2.
      double target = i < 20 ? 1.0 : 1.05 + 0.95 * rng.uniform();
      for (double& v : c.q1) v *= target / sp;
      for (double& v : c.q2) v *= target / sp;
      LinMap phi = build(c);
      ClassifierVerdict v = check_schatten_isometry(phi, p, kTol);
      bool sampled = schatten_sampled_yes(phi, p, 0xF00D + i);
      if ((v.verdict == Verdict::Yes) != sampled ||
          (v.verdict == Verdict::Yes) != (i < 20))
        ++mismatches;
    }
  }
  std::ostringstream note;
  note << mismatches << " mismatches over 120 maps";
  report(5, "schatten isometry classification matches sampling", mismatches == 0,
         note.str());
}

void criterion_kyfan() {
  Rng rng = Rng::derive(0xACCE97, 8, 0);
  CanonicalForm c = random_canonical(2, 2, 5, 5, Field::Complex, 1, 1, rng);
  c.q1 = {0.5};
  c.q2 = {0.5};
  LinMap phi = build(c);
  int wrong = 0;
  for (int k = 1; k <= 5; ++k) {
    ClassifierVerdict v = check_kyfan_isometry(phi, k, 2, kTol);
    bool expect_yes = k >= 4;
    if ((v.verdict == Verdict::Yes) != expect_yes) ++wrong;

    bool sampled = true;
    for (int t = 0; t < 500 && sampled; ++t) {
      Rng srng = Rng::derive(0xACCE97, 9, 1000 * k + t);
      Mat a = t % 2
                  ? random_rank_two(2, 2, Field::Complex, srng)
                  : Mat(Field::Complex,
                        cxd(srng.log_uniform(0.1, 10.0)) *
                            (random_unitary(2, Field::Complex, srng).a.leftCols(1) *
                             random_unitary(2, Field::Complex, srng).a.topRows(1)));
      double na = kyfan_norm(a, 2);
      if (std::abs(kyfan_norm(apply(phi, a), k) - na) > 1e-9 * na)
        sampled = false;
    }
    if (sampled != (v.verdict == Verdict::Yes)) ++wrong;
  }
  std::ostringstream note;
  note << wrong << " wrong verdicts over k in 1..5";
  report(6, "ky fan verdicts flip exactly at k = 4", wrong == 0, note.str());
}

void criterion_closure() {
  int witnesses = 0;
  for (int i = 0; i < 50; ++i) {
    Rng rng = Rng::derive(0xACCE97, 10, i);
    int m = rng.uniform_int(2, 4), n = rng.uniform_int(2, 4);
    int q1 = rng.uniform_int(0, 2);
    int q2 = rng.uniform_int(q1 == 0 ? 1 : 0, 2 - q1);
    CanonicalForm c = random_canonical(
        m, n, q1 * m + q2 * n + rng.uniform_int(0, 2),
        q1 * n + q2 * m + rng.uniform_int(0, 2),
        i % 2 ? Field::Real : Field::Complex, q1, q2, rng);
    SampledCheck sc =
        verify_preserver_sampled(build(c), 1000, 0xD15C0 + i, kTol);
    if (!sc.ok) ++witnesses;
  }
  std::ostringstream note;
  note << witnesses << " maps produced witnesses";
  report(7, "sampled disjointness closure on 50 maps x 1000 pairs",
         witnesses == 0, note.str());
}

int run_capture(const std::string& cmd, std::string& out) {
  std::string full = cmd + " 2>/dev/null";
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) return -1;
  char buf[4096];
  out.clear();
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  int status = pclose(pipe);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_cli_determinism() {
  std::string cmd = std::string(CLI_BINARY_PATH) +
                    " fuzz --trials 20 --max-dim 3 --seed 7";
  std::string out1, out2;
  int code1 = run_capture(cmd, out1);
  int code2 = run_capture(cmd, out2);
  bool ok = code1 == 0 && code2 == 0 && !out1.empty() && out1 == out2;
  std::ostringstream note;
  note << "exit codes " << code1 << "/" << code2 << ", "
       << (out1 == out2 ? "identical" : "differing") << " reports";
  report(8, "fuzz reports are byte-identical and clean", ok, note.str());
}

}  // namespace

int main() {
  std::vector<CanonicalForm> pool = criterion_pool();
  criterion_round_trip(pool);
  criterion_refutation(pool);
  criterion_tcp_equivalence();
  criterion_triple_equivalence();
  criterion_schatten();
  criterion_kyfan();
  criterion_closure();
  criterion_cli_determinism();
  if (g_failures) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all 8 criteria passed\n";
  return 0;
}
