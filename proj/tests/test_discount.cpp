#include <doctest.h>

#include <random>
#include <vector>

#include "support.hpp"

using namespace evspec;
using testsupport::bakers;

namespace {

MembershipSpecification spec_with(std::map<int, MembershipInterval> per_subset, int home,
                                  double falsity = 0.0) {
  MembershipSpecification spec;
  spec.id = "q";
  spec.home = home;
  spec.subset_count = static_cast<int>(per_subset.size());
  spec.per_subset = std::move(per_subset);
  spec.falsity = falsity;
  return spec;
}

struct RefinedSetup {
  testsupport::BakersInstance instance = bakers();
  Partition partition = Partition::from_subsets({{"e1", "e4"}, {"e2", "e3"}});
  std::vector<MembershipSpecification> specs =
      specify_all(partition, instance.prior, instance.evidence);
};

}  // namespace

TEST_SUITE("discount") {

TEST_CASE("falsity discounting of the reference evidence") {
  RefinedSetup setup;
  const auto& frame = setup.instance.frame;
  const auto& evidence = setup.instance.evidence;

  auto [e2d, alpha2] = falsity_discount(evidence[1], setup.specs[1]);
  CHECK(alpha2 == doctest::Approx(0.7648).epsilon(1e-9));
  CHECK(e2d.bpa.mass(Proposition::make(frame, {"bi"}, {"E1", "E2"})) ==
        doctest::Approx(0.5354).epsilon(5e-4));
  CHECK(e2d.bpa.theta_mass() == doctest::Approx(0.4646).epsilon(5e-4));

  auto [e3d, alpha3] = falsity_discount(evidence[2], setup.specs[2]);
  CHECK(alpha3 == doctest::Approx(0.7732).epsilon(1e-9));
  CHECK(e3d.bpa.mass(Proposition::make(frame, {"ro", "ri"}, {"E2"})) ==
        doctest::Approx(0.4639).epsilon(5e-4));

  SUBCASE("no falsity leaves the evidence unchanged") {
    auto [e1d, alpha1] = falsity_discount(evidence[0], setup.specs[0]);
    CHECK(alpha1 == doctest::Approx(1.0));
    CHECK(e1d.bpa == evidence[0].bpa);
    auto [e4d, alpha4] = falsity_discount(evidence[3], setup.specs[3]);
    CHECK(alpha4 == doctest::Approx(1.0));
    CHECK(e4d.bpa == evidence[3].bpa);
  }

  SUBCASE("specification must belong to the evidence") {
    CHECK_THROWS_AS(falsity_discount(evidence[0], setup.specs[1]), Error);
  }
}

TEST_CASE("subset credibilities of the reference evidence") {
  RefinedSetup setup;
  // Canonical numbering: subset 1 holds e1 and e4, subset 2 holds e2 and e3.
  auto cv1 = subset_credibilities(setup.specs[0]);
  CHECK(cv1.alpha.at(2) == doctest::Approx(0.0981).epsilon(5e-4));
  CHECK(cv1.alpha.at(1) == doctest::Approx(0.7321).epsilon(5e-4));
  CHECK(cv1.alpha.at(3) == doctest::Approx(0.0));

  auto cv2 = subset_credibilities(setup.specs[1]);
  CHECK(cv2.alpha.at(2) == doctest::Approx(0.4310).epsilon(5e-4));
  CHECK(cv2.alpha.at(1) == doctest::Approx(0.2480).epsilon(5e-4));

  auto cv3 = subset_credibilities(setup.specs[2]);
  CHECK(cv3.alpha.at(2) == doctest::Approx(0.4182).epsilon(5e-4));
  CHECK(cv3.alpha.at(1) == doctest::Approx(0.2632).epsilon(5e-4));

  auto cv4 = subset_credibilities(setup.specs[3]);
  CHECK(cv4.alpha.at(2) == doctest::Approx(0.3870).epsilon(5e-4));
  CHECK(cv4.alpha.at(1) == doctest::Approx(0.5420).epsilon(5e-4));
}

TEST_CASE("credibility axioms") {
  SUBCASE("zero plausibility discounts entirely") {
    auto cv = subset_credibilities(
        spec_with({{1, {0.0, 1.0}}, {2, {0.0, 0.0}}}, 1));
    CHECK(cv.alpha.at(2) == doctest::Approx(0.0));
  }
  SUBCASE("sole fully plausible subset is not discounted") {
    auto cv = subset_credibilities(
        spec_with({{1, {0.0, 1.0}}, {2, {0.0, 0.0}}, {3, {0.0, 0.0}}}, 1));
    CHECK(cv.alpha.at(1) == doctest::Approx(1.0));
  }
  SUBCASE("sole subset at plausibility a keeps credibility a") {
    for (double a : {0.25, 0.5, 0.9}) {
      auto cv = subset_credibilities(spec_with({{1, {0.0, a}}, {2, {0.0, 0.0}}}, 1));
      CHECK(cv.alpha.at(1) == doctest::Approx(a).epsilon(1e-12));
    }
  }
  SUBCASE("n fully plausible subsets share credibility 1/n") {
    auto cv = subset_credibilities(
        spec_with({{1, {0.0, 1.0}}, {2, {0.0, 1.0}}, {3, {0.0, 1.0}}}, 2));
    for (int s = 1; s <= 3; ++s) CHECK(cv.alpha.at(s) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("all plausibilities zero is a membership error") {
    CHECK_THROWS_AS(
        subset_credibilities(spec_with({{1, {0.0, 0.0}}, {2, {0.0, 0.0}}}, 1)), Error);
  }
}

TEST_CASE("credibility axioms hold on random specifications") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 300; ++trial) {
    CAPTURE(trial);
    const int subsets = 2 + static_cast<int>(rng() % 4);
    const int home = 1 + static_cast<int>(rng() % subsets);
    std::map<int, MembershipInterval> per_subset;
    const bool committed = rng() % 3 == 0;
    for (int s = 1; s <= subsets; ++s) {
      double pls = 0.01 * static_cast<double>(rng() % 101);
      if (s == home && committed) pls = 1.0;
      double bel = (s == home && committed) ? 0.01 * static_cast<double>(rng() % 101) : 0.0;
      per_subset[s] = {bel, pls};
    }
    bool all_zero = true;
    for (const auto& [s, interval] : per_subset)
      if (interval.pls > 0.0) all_zero = false;
    if (all_zero) per_subset[home].pls = 0.5;

    auto spec = spec_with(per_subset, home);
    auto cv = subset_credibilities(spec);
    const double bel_home = per_subset.at(home).bel;
    for (const auto& [s, alpha] : cv.alpha) {
      CHECK(alpha >= -1e-12);
      CHECK(alpha <= 1.0 + 1e-12);
      if (per_subset.at(s).pls == 0.0 && s != home) CHECK(alpha == doctest::Approx(0.0));
    }
    CHECK(cv.alpha.at(home) >= bel_home - 1e-12);
  }
}

TEST_CASE("subset discounting of the reference evidence") {
  RefinedSetup setup;
  const auto& frame = setup.instance.frame;
  const auto& evidence = setup.instance.evidence;

  auto cv1 = subset_credibilities(setup.specs[0]);
  auto toward_home = subset_discount(evidence[0], cv1, 1);
  CHECK(toward_home.bpa.mass(Proposition::make(frame, {"bo"}, {"E1"})) ==
        doctest::Approx(0.5856).epsilon(5e-4));

  // e2 discounted for falsity first, then toward the subset holding e2.
  auto [e2d, alpha2] = falsity_discount(evidence[1], setup.specs[1]);
  auto cv2 = subset_credibilities(setup.specs[1]);
  auto e2_home = subset_discount(e2d, cv2, 2);
  CHECK(e2_home.bpa.mass(Proposition::make(frame, {"bi"}, {"E1", "E2"})) ==
        doctest::Approx(0.2308).epsilon(5e-4));

  SUBCASE("zero credibility empties the evidence") {
    auto vacuous = subset_discount(evidence[0], cv1, 3);
    CHECK(vacuous.bpa == MassFunction::vacuous(frame));
  }
  SUBCASE("missing subset index is a lookup error") {
    CHECK_THROWS_AS(subset_discount(evidence[0], cv1, 9), Error);
    CHECK_THROWS_AS(subset_discount(evidence[1], cv1, 1), Error);
  }
}

TEST_CASE("falsity discounting across a store latches the flag") {
  RefinedSetup setup;
  EvidenceStore store(setup.instance.evidence);
  CHECK_FALSE(store.discounted());
  auto results = falsity_discount_all(store, setup.specs);
  CHECK(store.discounted());
  REQUIRE(results.size() == 4);
  CHECK(results[1].alpha == doctest::Approx(0.7648).epsilon(1e-9));
  CHECK(store.items()[1].bpa.theta_mass() == doctest::Approx(0.4646).epsilon(5e-4));

  SUBCASE("specifications must cover the store") {
    EvidenceStore fresh(setup.instance.evidence);
    std::vector<MembershipSpecification> partial(setup.specs.begin(), setup.specs.end() - 1);
    CHECK_THROWS_AS(falsity_discount_all(fresh, partial), Error);
  }
}

TEST_CASE("double discounting multiplies the credibilities") {
  auto instance = bakers();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    double k1 = 0.01 * static_cast<double>(rng() % 90);
    double k2 = 0.01 * static_cast<double>(rng() % 90);
    const auto& bpa = instance.evidence[trial % 4].bpa;
    auto twice = discount(discount(bpa, 1.0 - k1), 1.0 - k2);
    auto once = discount(bpa, (1.0 - k1) * (1.0 - k2));
    CHECK(twice.theta_mass() == doctest::Approx(once.theta_mass()).epsilon(1e-9));
    for (const auto& [key, mass] : once.focal())
      CHECK(twice.mass(once.proposition(key)) == doctest::Approx(mass).epsilon(1e-9));
  }
}

}  // TEST_SUITE
