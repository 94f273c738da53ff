#include <doctest.h>

#include "ctgca/gca.hpp"

using namespace ctgca;

TEST_CASE("region enumeration") {
  CHECK(all_regions().size() == 13);
  // names round-trip
  for (GcaRegion r : all_regions()) CHECK(region_from_name(region_name(r)) == r);
  CHECK_THROWS_AS(region_from_name("hippocampus"), FormatError);

  // homologue pairing is symmetric and the third ventricle stands alone
  for (GcaRegion r : all_regions()) {
    const auto p = homologous_partner(r);
    if (r == GcaRegion::kThirdVentricle) {
      CHECK(!p.has_value());
    } else {
      REQUIRE(p.has_value());
      CHECK(*p != r);
      CHECK(homologous_partner(*p).value() == r);
    }
  }

  CHECK(!is_ventricular(GcaRegion::kFrontalL));
  CHECK(!is_ventricular(GcaRegion::kParietoOccipitalR));
  CHECK(is_ventricular(GcaRegion::kFrontalHornL));
  CHECK(is_ventricular(GcaRegion::kThirdVentricle));
}

TEST_CASE("total score") {
  std::array<int, kNumRegions> zeros{};
  CHECK(total_score(make_rating("s1", "r1", zeros)) == 0);

  std::array<int, kNumRegions> threes{};
  threes.fill(3);
  CHECK(total_score(make_rating("s1", "r1", threes)) == 39);

  // six regions at 2, seven at 1
  std::array<int, kNumRegions> mix{};
  for (int i = 0; i < 6; ++i) mix[i] = 2;
  for (int i = 6; i < 13; ++i) mix[i] = 1;
  CHECK(total_score(make_rating("s1", "r1", mix)) == 19);

  GcaRating gap = make_rating("s1", "r1", mix);
  gap.set_unassessable(GcaRegion::kTemporalL);
  CHECK_THROWS_AS(total_score(gap), IncompleteRatingError);
}

TEST_CASE("score bounds") {
  GcaRating r;
  CHECK_THROWS_AS(r.set_score(GcaRegion::kFrontalL, 4), DomainError);
  CHECK_THROWS_AS(r.set_score(GcaRegion::kFrontalL, -1), DomainError);
  r.set_score(GcaRegion::kFrontalL, 3);
  CHECK(r.score(GcaRegion::kFrontalL) == 3);
  CHECK_THROWS_AS(r.score(GcaRegion::kFrontalR), NotAssessableError);
}

TEST_CASE("severity boundaries cover 0..39 exactly") {
  CHECK(classify_severity(0) == Severity::kMild);
  CHECK(classify_severity(11) == Severity::kMild);
  CHECK(classify_severity(12) == Severity::kModerate);
  CHECK(classify_severity(21) == Severity::kModerate);
  CHECK(classify_severity(22) == Severity::kSevere);
  CHECK(classify_severity(39) == Severity::kSevere);

  // monotone, with exactly two boundary jumps
  int jumps = 0;
  for (int t = 1; t <= 39; ++t) {
    const int a = static_cast<int>(classify_severity(t - 1));
    const int b = static_cast<int>(classify_severity(t));
    CHECK(b >= a);
    if (b != a) {
      ++jumps;
      CHECK((t == 12 || t == 22));
    }
  }
  CHECK(jumps == 2);

  CHECK_THROWS_AS(classify_severity(-1), DomainError);
  CHECK_THROWS_AS(classify_severity(40), DomainError);

  CHECK(severity_label(Severity::kMild) == "mild");
  CHECK(severity_label(Severity::kModerate) == "moderate");
  CHECK(severity_label(Severity::kSevere) == "severe");
}

TEST_CASE("homologous imputation") {
  std::array<int, kNumRegions> scores{};
  scores[static_cast<int>(GcaRegion::kFrontalR)] = 2;
  GcaRating r = make_rating("s9", "r1", scores);
  r.set_unassessable(GcaRegion::kFrontalL);

  const GcaRating imputed = impute_homologous(r);
  CHECK(imputed.score(GcaRegion::kFrontalL) == 2);
  CHECK_NOTHROW(total_score(imputed));

  // identity when nothing is missing
  const GcaRating full = make_rating("s9", "r1", scores);
  const GcaRating same = impute_homologous(full);
  for (GcaRegion reg : all_regions()) CHECK(same.score(reg) == full.score(reg));

  // both partners missing
  GcaRating both = make_rating("s9", "r1", scores);
  both.set_unassessable(GcaRegion::kFrontalL);
  both.set_unassessable(GcaRegion::kFrontalR);
  CHECK_THROWS_AS(impute_homologous(both), NotAssessableError);

  // third ventricle has no homologue
  GcaRating tv = make_rating("s9", "r1", scores);
  tv.set_unassessable(GcaRegion::kThirdVentricle);
  CHECK_THROWS_AS(impute_homologous(tv), NotAssessableError);
}

TEST_CASE("rating csv round trip") {
  std::array<int, kNumRegions> a{}, b{}, c{};
  a.fill(3);
  for (int i = 0; i < 13; ++i) b[i] = i % 4;
  GcaRating r1 = make_rating("scan_0001", "rater1", a);
  GcaRating r2 = make_rating("scan_0002", "rater1", b);
  GcaRating r3 = make_rating("scan_0002", "rater2", c);
  r3.set_unassessable(GcaRegion::kTemporalHornR);

  const std::string text = write_rating_csv({r1, r2, r3});
  const auto parsed = parse_rating_csv(text);
  REQUIRE(parsed.size() == 3);
  CHECK(write_rating_csv(parsed) == text);  // write . parse = identity
  CHECK(total_score(parsed[0]) == 39);
  CHECK(parsed[2].assessable[static_cast<int>(GcaRegion::kTemporalHornR)] == false);
}

TEST_CASE("rating csv rejects bad input") {
  const std::string header =
      "scan_id,rater_id,frontal_l,frontal_r,temporal_l,temporal_r,"
      "parieto_occipital_l,parieto_occipital_r,frontal_horn_l,frontal_horn_r,"
      "temporal_horn_l,temporal_horn_r,occipital_horn_l,occipital_horn_r,"
      "third_ventricle\n";

  CHECK_THROWS_AS(parse_rating_csv(""), FormatError);
  CHECK_THROWS_AS(parse_rating_csv("scan_id,rater_id,nope\n"), FormatError);

  // out-of-range cell names the row
  try {
    parse_rating_csv(header + "s1,r1,4,0,0,0,0,0,0,0,0,0,0,0,0\n");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }

  // wrong field count
  CHECK_THROWS_AS(parse_rating_csv(header + "s1,r1,0,0\n"), FormatError);

  // duplicate (scan, rater)
  const std::string row = "s1,r1,0,0,0,0,0,0,0,0,0,0,0,0,0\n";
  CHECK_THROWS_AS(parse_rating_csv(header + row + row), FormatError);

  // same scan under two raters is fine
  const std::string row2 = "s1,r2,1,1,1,1,1,1,1,1,1,1,1,1,1\n";
  CHECK_NOTHROW(parse_rating_csv(header + row + row2));

  // unknown column header
  std::string bad_header = header;
  bad_header.replace(bad_header.find("temporal_l"), 10, "temporal_x");
  CHECK_THROWS_AS(parse_rating_csv(bad_header + row), FormatError);
}

TEST_CASE("cohort record validation") {
  CohortRecord r;
  r.scan_id = "s1";
  r.cohort = "synthetic";
  r.age = 80;
  CHECK_NOTHROW(r.validate());
  r.amt_score = 11;
  CHECK_THROWS_AS(r.validate(), DomainError);
  r.amt_score = 9;
  r.age = -1;
  CHECK_THROWS_AS(r.validate(), DomainError);
}
