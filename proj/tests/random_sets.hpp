#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "adasample/geometry.hpp"
#include "test_support.hpp"

namespace testing_support {

// A family of sets in dimension n, each feasible by construction and together
// covering every ConstraintSet variant.
inline std::vector<adasample::ConstraintSetd> sample_sets(std::mt19937_64& rng, Eigen::Index n) {
  using Set = adasample::ConstraintSetd;
  using Vec = Eigen::VectorXd;
  std::vector<Set> sets;
  sets.push_back(Set::non_negative_orthant(n));
  const Vec lo = uniform_vector(rng, n, -1.0, 0.0);
  sets.push_back(Set::box(lo, lo + uniform_vector(rng, n, 0.0, 2.0)));
  sets.push_back(Set::unit_simplex(n));
  const Vec normal = normal_vector(rng, n);
  sets.push_back(Set::halfspace(normal, 0.3));
  sets.push_back(Set::hyperplane(normal, -0.2));
  sets.push_back(Set::affine_linearization(normal_vector(rng, n), 0.4, normal_vector(rng, n)));
  sets.push_back(Set::intersection({Set::non_negative_orthant(n), Set::hyperplane(Vec::Ones(n), 1.0)}));
  // Return-style constraint on the simplex; the offset stays below max(a) so the
  // vertex at argmax a is feasible.
  const Vec a = uniform_vector(rng, n, 0.9, 1.2);
  sets.push_back(Set::intersection({Set::unit_simplex(n), Set::halfspace(a, 0.5 * (a.mean() + a.maxCoeff()))}));
  // The box corner sign(normal) reaches |normal|_1, so this offset leaves a nonempty interior.
  sets.push_back(Set::intersection(
      {Set::box(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)), Set::halfspace(normal, 0.3 * normal.lpNorm<1>())}));
  // Three members, so this goes through Dykstra rather than the multiplier search.
  sets.push_back(Set::intersection({Set::non_negative_orthant(n), Set::box(Vec::Constant(n, -1.0), Vec::Constant(n, 0.8)),
                                    Set::hyperplane(Vec::Ones(n), 0.5)}));
  sets.push_back(Set::whole(n));
  if (n >= 2) sets.push_back(Set::product({Set::unit_simplex(n - 1), Set::whole(1)}));
  return sets;
}

}  // namespace testing_support
