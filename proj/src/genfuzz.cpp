#include "preservers/genfuzz.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "preservers/classify.hpp"

namespace preservers {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng Rng::derive(std::uint64_t master, std::uint64_t stream,
                std::uint64_t trial) {
  return Rng(splitmix(splitmix(master ^ splitmix(stream)) + trial));
}

double Rng::uniform() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::gauss() {
  double u = 1.0 - uniform();  // (0, 1]
  double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

double Rng::log_uniform(double lo, double hi) {
  return std::exp(std::log(lo) + uniform() * (std::log(hi) - std::log(lo)));
}

int Rng::uniform_int(int lo, int hi) {
  int span = hi - lo + 1;
  int v = lo + static_cast<int>(uniform() * span);
  return std::min(v, hi);
}

Mat random_gaussian(int m, int n, Field field, Rng& rng) {
  Eigen::MatrixXcd g(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double re = rng.gauss();
      double im = field == Field::Complex ? rng.gauss() : 0.0;
      g(i, j) = cxd(re, im);
    }
  return Mat(field, std::move(g));
}

Mat random_unitary(int d, Field field, Rng& rng) {
  if (d < 1) throw std::invalid_argument("random_unitary: d must be positive");
  Mat g = random_gaussian(d, d, field, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g.a);
  Eigen::MatrixXcd q =
      qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
  // Phase fix on the triangular factor's diagonal makes the draw Haar.
  for (int i = 0; i < d; ++i) {
    cxd rii = qr.matrixQR()(i, i);
    double mag = std::abs(rii);
    q.col(i) *= mag > 0.0 ? rii / mag : cxd(1.0, 0.0);
  }
  if (field == Field::Real) q = q.real().cast<cxd>();
  return Mat(field, std::move(q));
}

Mat random_unitary(int d, Field field, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 1, 0);
  return random_unitary(d, field, rng);
}

CanonicalForm random_canonical(int m, int n, int r, int s, Field field,
                               int q1, int q2, Rng& rng) {
  if (q1 < 0 || q2 < 0 || r < q1 * m + q2 * n || s < q1 * n + q2 * m)
    throw std::invalid_argument("random_canonical: infeasible block counts");
  CanonicalForm c;
  c.m = m, c.n = n, c.r = r, c.s = s;
  c.field = field;
  c.U = random_unitary(r, field, rng);
  c.V = random_unitary(s, field, rng);
  auto draw = [&](int cnt) {
    std::vector<double> q(cnt);
    for (double& v : q) v = rng.log_uniform(0.1, 10.0);
    std::sort(q.begin(), q.end(), std::greater<>());
    return q;
  };
  c.q1 = draw(q1);
  c.q2 = draw(q2);
  return c;
}

CanonicalForm random_canonical(int m, int n, int r, int s, Field field,
                               int q1, int q2, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 2, 0);
  return random_canonical(m, n, r, s, field, q1, q2, rng);
}

std::pair<Mat, Mat> random_disjoint_pair(int m, int n, Field field, Rng& rng,
                                         bool rank_one, bool unit_weights) {
  if (m < 2 || n < 2)
    throw std::invalid_argument("random_disjoint_pair: need m, n >= 2");
  int h = std::min(m, n);
  int k1 = 1, k2 = 1;
  // Rank-one supports with probability >= 1/2, larger supports otherwise.
  if (!rank_one && rng.uniform() < 0.5 && h > 2) {
    k1 = rng.uniform_int(1, h - 1);
    k2 = rng.uniform_int(1, h - k1);
  }
  std::vector<int> idx(h);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = h - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.uniform_int(0, i)]);

  Mat u = random_unitary(m, field, rng);
  Mat v = random_unitary(n, field, rng);
  Eigen::MatrixXcd d1 = Eigen::MatrixXcd::Zero(m, n);
  Eigen::MatrixXcd d2 = Eigen::MatrixXcd::Zero(m, n);
  for (int t = 0; t < k1; ++t)
    d1(idx[t], idx[t]) = unit_weights ? 1.0 : rng.log_uniform(0.1, 10.0);
  for (int t = 0; t < k2; ++t)
    d2(idx[k1 + t], idx[k1 + t]) =
        unit_weights ? 1.0 : rng.log_uniform(0.1, 10.0);
  Mat A(field, u.a * d1 * v.a);
  Mat B(field, u.a * d2 * v.a);
  return {std::move(A), std::move(B)};
}

std::pair<Mat, Mat> random_disjoint_pair(int m, int n, Field field,
                                         std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 3, 0);
  return random_disjoint_pair(m, n, field, rng);
}

Mat random_partial_isometry(int m, int n, int rank, Field field, Rng& rng) {
  if (rank < 0 || rank > std::min(m, n))
    throw std::invalid_argument("random_partial_isometry: rank out of range");
  if (rank == 0) return Mat::zero(field, m, n);
  Mat u = random_unitary(m, field, rng);
  Mat v = random_unitary(n, field, rng);
  return Mat(field, u.a.leftCols(rank) * v.a.topRows(rank));
}

Mat random_partial_isometry(int m, int n, int rank, Field field,
                            std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 4, 0);
  return random_partial_isometry(m, n, rank, field, rng);
}

Mat random_rank_two(int m, int n, Field field, Rng& rng) {
  Mat u = random_unitary(m, field, rng);
  Mat v = random_unitary(n, field, rng);
  Eigen::Vector2cd w(rng.log_uniform(0.1, 10.0), rng.log_uniform(0.1, 10.0));
  return Mat(field,
             u.a.leftCols(2) * w.asDiagonal() * v.a.leftCols(2).adjoint());
}

LinMap perturb(const LinMap& phi, double epsilon, std::uint64_t seed) {
  if (epsilon < 0.0) throw std::invalid_argument("perturb: epsilon < 0");
  Rng rng = Rng::derive(seed, 5, 0);
  int target = rng.uniform_int(0, phi.m * phi.n - 1);
  Mat noise = random_gaussian(phi.r, phi.s, phi.field, rng);
  double nm = noise.max_norm();
  if (nm > 0.0) noise = (1.0 / nm) * noise;
  LinMap out = phi;
  out.images[target] = out.images[target] + epsilon * noise;
  return out;
}

namespace {

struct PropertyRunner {
  const FuzzConfig& cfg;
  int prop_index = 0;
  std::vector<PropertyResult> results;

  template <typename Fn>
  void run(const std::string& name, Fn&& trial_fn) {
    PropertyResult pr;
    pr.name = name;
    pr.trials = cfg.trials;
    for (int t = 0; t < cfg.trials; ++t) {
      Rng rng = Rng::derive(cfg.seed, 1000 + prop_index, t);
      std::string why = trial_fn(t, rng);
      if (!why.empty()) {
        ++pr.failures;
        if (pr.first_counterexample.empty()) {
          std::ostringstream os;
          os << "trial " << t << ": " << why;
          pr.first_counterexample = os.str();
        }
      }
    }
    ++prop_index;
    results.push_back(std::move(pr));
  }
};

std::string fmt_residual(const char* what, double v) {
  std::ostringstream os;
  os << what << "=" << v;
  return os.str();
}

Field pick_field(Rng& rng) {
  return rng.uniform() < 0.5 ? Field::Real : Field::Complex;
}

// Random feasible canonical parameters at desk scale.
CanonicalForm draw_canonical(Rng& rng, int max_dim, bool identity_q) {
  int m = rng.uniform_int(2, std::max(2, max_dim));
  int n = rng.uniform_int(2, std::max(2, max_dim));
  int q1 = rng.uniform_int(0, 2);
  int q2 = rng.uniform_int(0, 2 - q1);
  if (q1 + q2 == 0) q1 = 1;
  int r = q1 * m + q2 * n + rng.uniform_int(0, 2);
  int s = q1 * n + q2 * m + rng.uniform_int(0, 2);
  CanonicalForm c =
      random_canonical(m, n, r, s, pick_field(rng), q1, q2, rng);
  if (identity_q) {
    std::fill(c.q1.begin(), c.q1.end(), 1.0);
    std::fill(c.q2.begin(), c.q2.end(), 1.0);
  }
  return c;
}

bool same_multiset(std::vector<double> a, std::vector<double> b, double eps) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > eps) return false;
  return true;
}

}  // namespace

FuzzReport fuzz_equivalences(const FuzzConfig& cfg) {
  Tolerances tol;
  PropertyRunner runner{cfg};
  const int md = std::max(2, cfg.max_dim);

  runner.run("svd-reconstruction", [&](int, Rng& rng) -> std::string {
    int m = rng.uniform_int(2, md), n = rng.uniform_int(2, md);
    Mat a = random_gaussian(m, n, pick_field(rng), rng);
    SvdResult svd = compact_svd(a, tol);
    Eigen::MatrixXcd rec = svd.left.a *
                           Eigen::Map<const Eigen::VectorXd>(
                               svd.singulars.data(), svd.singulars.size())
                               .cast<cxd>()
                               .asDiagonal() *
                           svd.right.a.adjoint();
    double smax = svd.singulars.empty() ? 0.0 : svd.singulars[0];
    double res = (rec - a.a).cwiseAbs().maxCoeff();
    if (res > 1e-10 * std::max(1.0, smax)) return fmt_residual("residual", res);
    return {};
  });

  runner.run("disjoint-pair-triple-condition-forward", [&](int, Rng& rng) -> std::string {
    int m = rng.uniform_int(2, md), n = rng.uniform_int(2, md);
    auto [a, b] = random_disjoint_pair(m, n, pick_field(rng), rng);
    double scale = std::max(1.0, a.max_norm() * a.max_norm() * b.max_norm());
    double dres = disjoint_residual(a, b);
    double tres = tcp_residual(a, b);
    if (dres > 1e-11 * std::max(1.0, a.max_norm() * b.max_norm()))
      return fmt_residual("disjoint_residual", dres);
    if (tres > 1e-11 * scale) return fmt_residual("tcp_residual", tres);
    return {};
  });

  runner.run("triple-condition-backward", [&](int, Rng& rng) -> std::string {
    int m = rng.uniform_int(2, md), n = rng.uniform_int(2, md);
    Field f = pick_field(rng);
    Mat a = random_gaussian(m, n, f, rng);
    Mat b = random_gaussian(m, n, f, rng);
    double scale = std::max(1.0, a.max_norm() * a.max_norm() * b.max_norm());
    if (disjoint_residual(a, b) <=
        1e-3 * std::max(1.0, a.max_norm() * b.max_norm()))
      return {};  // not a generic pair; vacuous trial
    double tres = tcp_residual(a, b);
    if (tres <= 1e-6 * scale) return fmt_residual("tcp_residual", tres);
    return {};
  });

  runner.run("polarization-trilinear", [&](int, Rng& rng) -> std::string {
    int m = rng.uniform_int(2, md), n = rng.uniform_int(2, md);
    Field f = pick_field(rng);
    Mat a = random_gaussian(m, n, f, rng);
    Mat b = random_gaussian(m, n, f, rng);
    Mat c = random_gaussian(m, n, f, rng);
    Mat lhs = 2.0 * jordan_triple(a, b, c);
    Mat rhs = jordan_triple(a + c, b, a + c) - jordan_triple(a, b, a) -
              jordan_triple(c, b, c);
    double scale = std::max(
        1.0, a.max_norm() * b.max_norm() * std::max(a.max_norm(), c.max_norm()));
    double res = (lhs - rhs).max_norm();
    if (res > 1e-10 * scale) return fmt_residual("residual", res);
    return {};
  });

  runner.run("polarization-four-cube", [&](int, Rng& rng) -> std::string {
    int m = rng.uniform_int(2, md), n = rng.uniform_int(2, md);
    Mat a = random_gaussian(m, n, Field::Complex, rng);
    Mat b = random_gaussian(m, n, Field::Complex, rng);
    Mat lhs = 4.0 * jordan_triple(a, b, a);
    Mat rhs = cube(b + a) + cube(b - a) -
              cube(b + cxd(0, 1) * a) - cube(b - cxd(0, 1) * a);
    double nb = std::max(a.max_norm(), b.max_norm());
    double res = (lhs - rhs).max_norm();
    if (res > 1e-10 * std::max(1.0, nb * nb * nb))
      return fmt_residual("residual", res);
    return {};
  });

  runner.run("canonical-round-trip", [&](int t, Rng& rng) -> std::string {
    CanonicalForm c = draw_canonical(rng, md, false);
    LinMap phi = build(c);
    if (cfg.sabotage)
      phi = perturb(phi, 0.05, splitmix(cfg.seed + t));
    DecomposeResult res = decompose(phi, tol);
    if (std::holds_alternative<DecomposeFailure>(res))
      return "decompose failed";
    const CanonicalForm& rec = std::get<CanonicalForm>(res);
    if (!maps_equal(build(rec), phi, tol)) return "rebuild mismatch";
    if (!same_multiset(rec.q1, c.q1, 1e-9) || !same_multiset(rec.q2, c.q2, 1e-9))
      return "Q multiset mismatch";
    return {};
  });

  runner.run("canonical-preserves-sampled-disjointness",
             [&](int, Rng& rng) -> std::string {
    CanonicalForm c = draw_canonical(rng, md, false);
    LinMap phi = build(c);
    SampledCheck sc = verify_preserver_sampled(
        phi, 50, splitmix(cfg.seed ^ 0xABCDULL), tol);
    if (!sc.ok) return "sampled disjointness witness found";
    return {};
  });

  runner.run("triple-hom-equals-pisom-preserver",
             [&](int t, Rng& rng) -> std::string {
    bool identity_q = t % 2 == 0;
    CanonicalForm c = draw_canonical(rng, md, identity_q);
    LinMap phi = build(c);
    ClassifierVerdict vh = check_triple_homomorphism(phi, tol);
    ClassifierVerdict vp = check_partial_isometry_preserver(phi, tol);
    if (vh.verdict != vp.verdict) return "classifier disagreement";
    bool expect_yes = identity_q;
    if ((vh.verdict == Verdict::Yes) != expect_yes)
      return expect_yes ? "expected Yes" : "expected No";
    return {};
  });

  runner.run("norm-unitary-invariance", [&](int, Rng& rng) -> std::string {
    int m = rng.uniform_int(2, md), n = rng.uniform_int(2, md);
    Field f = pick_field(rng);
    Mat a = random_gaussian(m, n, f, rng);
    Mat u = random_unitary(m, f, rng);
    Mat v = random_unitary(n, f, rng);
    Mat b = u * a * v;
    double s1 = schatten_norm(a, 3.0), s2 = schatten_norm(b, 3.0);
    if (std::abs(s1 - s2) > 1e-9 * std::max(1.0, s1))
      return fmt_residual("schatten_gap", std::abs(s1 - s2));
    int k = rng.uniform_int(1, std::min(m, n));
    double f1 = kyfan_norm(a, k), f2 = kyfan_norm(b, k);
    if (std::abs(f1 - f2) > 1e-9 * std::max(1.0, f1))
      return fmt_residual("kyfan_gap", std::abs(f1 - f2));
    return {};
  });

  FuzzReport report;
  report.config = cfg;
  report.properties = std::move(runner.results);
  for (const PropertyResult& pr : report.properties)
    report.total_failures += pr.failures;
  return report;
}

}  // namespace preservers
