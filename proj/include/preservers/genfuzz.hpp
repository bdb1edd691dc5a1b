#ifndef PRESERVERS_GENFUZZ_HPP
#define PRESERVERS_GENFUZZ_HPP

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "preservers/canonical.hpp"

namespace preservers {

// Deterministic stream: identical (master, stream, trial) triples yield
// bit-identical draws on the same build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  static Rng derive(std::uint64_t master, std::uint64_t stream,
                    std::uint64_t trial);

  double uniform();  // [0, 1)
  double gauss();
  double log_uniform(double lo, double hi);
  int uniform_int(int lo, int hi);  // inclusive bounds

 private:
  std::mt19937_64 eng_;
};

Mat random_gaussian(int m, int n, Field field, Rng& rng);

// Haar-distributed d x d unitary (orthogonal in the real case).
Mat random_unitary(int d, Field field, Rng& rng);
Mat random_unitary(int d, Field field, std::uint64_t seed);

CanonicalForm random_canonical(int m, int n, int r, int s, Field field,
                               int q1, int q2, std::uint64_t seed);
CanonicalForm random_canonical(int m, int n, int r, int s, Field field,
                               int q1, int q2, Rng& rng);

// Disjoint pair via a shared Haar frame with disjoint diagonal supports.
// rank_one forces singleton supports; unit_weights makes the pair two
// disjoint rank-one partial isometries.
std::pair<Mat, Mat> random_disjoint_pair(int m, int n, Field field, Rng& rng,
                                         bool rank_one = false,
                                         bool unit_weights = false);
std::pair<Mat, Mat> random_disjoint_pair(int m, int n, Field field,
                                         std::uint64_t seed);

Mat random_partial_isometry(int m, int n, int rank, Field field,
                            std::uint64_t seed);
Mat random_partial_isometry(int m, int n, int rank, Field field, Rng& rng);

// Rank <= 2 matrix s1*u1 v1^* + s2*u2 v2^* with Haar orthonormal pairs and
// log-uniform weights in [0.1, 10].
Mat random_rank_two(int m, int n, Field field, Rng& rng);

// Adds epsilon times a random unit-max-norm matrix to one uniformly
// chosen basis image.
LinMap perturb(const LinMap& phi, double epsilon, std::uint64_t seed);

struct FuzzConfig {
  int trials = 100;
  int max_dim = 3;
  std::uint64_t seed = 0;
  // Test hook: corrupts each generated canonical map before checking, so
  // the harness can be shown to report failures.
  bool sabotage = false;
};

struct PropertyResult {
  std::string name;
  int trials = 0;
  int failures = 0;
  std::string first_counterexample;  // empty when all trials pass
};

struct FuzzReport {
  FuzzConfig config;
  std::vector<PropertyResult> properties;
  int total_failures = 0;
};

FuzzReport fuzz_equivalences(const FuzzConfig& config);

}  // namespace preservers

#endif
