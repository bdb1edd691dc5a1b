#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "preservers/io.hpp"

using namespace preservers;
using nlohmann::json;

namespace {

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

Field parse_field(const std::string& s) {
  if (s == "real") return Field::Real;
  if (s == "complex") return Field::Complex;
  throw CLI::ValidationError("--field must be real or complex");
}

int run_decompose(const std::string& path, double tol_val, std::uint64_t seed,
                  int trials) {
  LinMap phi = read_map_file(path);
  Tolerances tol;
  tol.residual = tol_val;
  tol.rank_cut = tol_val;
  DecomposeResult res = decompose(phi, tol);
  if (const auto* fail = std::get_if<DecomposeFailure>(&res)) {
    emit(failure_to_json(*fail, phi.field));
    return fail->kind == FailureKind::NumericalBreakdown ? 3 : 2;
  }
  // Extra sampled screen on top of the structural post-verification.
  SampledCheck sc = verify_preserver_sampled(phi, trials, seed, tol);
  if (!sc.ok) {
    DecomposeFailure fail;
    fail.kind = FailureKind::NotPreserver;
    fail.witness = sc.witness;
    fail.residual = disjoint_residual(apply(phi, sc.witness->first),
                                      apply(phi, sc.witness->second));
    emit(failure_to_json(fail, phi.field));
    return 2;
  }
  emit(canonical_to_json(std::get<CanonicalForm>(res)));
  return 0;
}

int run_check(const std::string& path, const std::string& cls, double p,
              int k, int kprime) {
  LinMap phi = read_map_file(path);
  Tolerances tol;
  ClassifierVerdict v;
  if (cls == "disjoint") {
    DecomposeResult res = decompose(phi, tol);
    if (const auto* fail = std::get_if<DecomposeFailure>(&res)) {
      v.verdict = fail->kind == FailureKind::NotPreserver ? Verdict::No
                                                          : Verdict::Inapplicable;
      v.detail = fail->kind == FailureKind::NotPreserver ? "NOT_PRESERVER"
                 : fail->kind == FailureKind::DegenerateDomain
                     ? "DEGENERATE_DOMAIN"
                     : "NUMERICAL_BREAKDOWN";
      if (fail->witness) v.witness = {fail->witness->first, fail->witness->second};
    } else {
      v.verdict = Verdict::Yes;
      v.certificate = std::get<CanonicalForm>(res);
    }
  } else if (cls == "zero-triple") {
    v = check_zero_triple_preserver(phi, tol);
  } else if (cls == "triple-hom") {
    v = check_triple_homomorphism(phi, tol);
  } else if (cls == "pisom") {
    v = check_partial_isometry_preserver(phi, tol);
  } else if (cls == "schatten") {
    v = check_schatten_isometry(phi, p, tol);
  } else {
    v = check_kyfan_isometry(phi, k, kprime, tol);
  }
  emit(verdict_to_json(v, phi.field));
  switch (v.verdict) {
    case Verdict::Yes:
      return 0;
    case Verdict::No:
      return 2;
    default:
      return 4;
  }
}

int run_gen(const std::string& kind, int m, int n, int r, int s, int q1,
            int q2, int rank, Field field, std::uint64_t seed,
            double perturb_eps) {
  if (kind == "canonical") {
    if (r < 0) r = q1 * m + q2 * n;
    if (s < 0) s = q1 * n + q2 * m;
    CanonicalForm c = random_canonical(m, n, r, s, field, q1, q2, seed);
    LinMap phi = build(c);
    if (perturb_eps > 0.0) phi = perturb(phi, perturb_eps, seed);
    emit(map_to_json(phi));
    return 0;
  }
  if (kind == "disjoint-pair") {
    auto [a, b] = random_disjoint_pair(m, n, field, seed);
    emit(json{{"field", field == Field::Real ? "real" : "complex"},
              {"A", mat_to_json(a)},
              {"B", mat_to_json(b)}});
    return 0;
  }
  Mat p = random_partial_isometry(m, n, rank, field, seed);
  emit(json{{"field", field == Field::Real ? "real" : "complex"},
            {"matrix", mat_to_json(p)}});
  return 0;
}

int run_fuzz(int trials, int max_dim, std::uint64_t seed) {
  FuzzConfig cfg;
  cfg.trials = trials;
  cfg.max_dim = max_dim;
  cfg.seed = seed;
  FuzzReport report = fuzz_equivalences(cfg);
  emit(report_to_json(report));
  return report.total_failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disjointness, triple-product, and norm preserver toolkit"};
  app.require_subcommand(1);

  std::string input, cls = "disjoint", kind = "canonical", field_str = "complex";
  double tol = 1e-9, p = 1.0, perturb_eps = 0.0;
  std::uint64_t seed = 0;
  int trials = 1000, k = 1, kprime = 2;
  int m = 2, n = 2, r = -1, s = -1, q1 = 1, q2 = 0, rank = 1;
  int fuzz_trials = 100, max_dim = 3;

  CLI::App* dec = app.add_subcommand("decompose", "Recover block form or refute");
  dec->add_option("input", input, "map file")->required();
  dec->add_option("--tol", tol, "relative tolerance");
  dec->add_option("--seed", seed, "sampling seed");
  dec->add_option("--trials", trials, "post-verification sample size");

  CLI::App* chk = app.add_subcommand("check", "Classify a map");
  chk->add_option("input", input, "map file")->required();
  chk->add_option("--class", cls, "property class")
      ->required()
      ->check(CLI::IsMember(
          {"disjoint", "zero-triple", "triple-hom", "pisom", "schatten", "kyfan"}));
  CLI::Option* opt_p = chk->add_option("--p", p, "Schatten exponent");
  CLI::Option* opt_k = chk->add_option("--k", k, "target Ky Fan index");
  CLI::Option* opt_kp = chk->add_option("--kprime", kprime, "source Ky Fan index");

  CLI::App* gen = app.add_subcommand("gen", "Generate seeded inputs");
  gen->add_option("--kind", kind, "object kind")
      ->check(CLI::IsMember({"canonical", "disjoint-pair", "pisom"}));
  gen->add_option("--m", m);
  gen->add_option("--n", n);
  gen->add_option("--r", r);
  gen->add_option("--s", s);
  gen->add_option("--q1", q1);
  gen->add_option("--q2", q2);
  gen->add_option("--rank", rank);
  gen->add_option("--field", field_str)->check(CLI::IsMember({"real", "complex"}));
  gen->add_option("--seed", seed);
  gen->add_option("--perturb", perturb_eps, "post-build perturbation size");

  CLI::App* fz = app.add_subcommand("fuzz", "Run the randomized property suite");
  fz->add_option("--trials", fuzz_trials);
  fz->add_option("--max-dim", max_dim);
  fz->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (dec->parsed()) return run_decompose(input, tol, seed, trials);
    if (chk->parsed()) {
      if (cls == "schatten" && opt_p->count() == 0) {
        std::cerr << "--p is required for --class schatten\n";
        return 1;
      }
      if (cls == "kyfan" && (opt_k->count() == 0 || opt_kp->count() == 0)) {
        std::cerr << "--k and --kprime are required for --class kyfan\n";
        return 1;
      }
      return run_check(input, cls, p, k, kprime);
    }
    if (gen->parsed())
      return run_gen(kind, m, n, r, s, q1, q2, rank, parse_field(field_str),
                     seed, perturb_eps);
    return run_fuzz(fuzz_trials, max_dim, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
