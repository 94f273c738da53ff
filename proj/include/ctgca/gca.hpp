#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ctgca/errors.hpp"

namespace ctgca {

// The 13 regions of the global cortical atrophy scale: six sulcal regions
// (three lobes x two hemispheres), six ventricular horns, and the midline
// third ventricle. Enum order fixes CSV column order everywhere.
enum class GcaRegion : int {
  kFrontalL = 0,
  kFrontalR,
  kTemporalL,
  kTemporalR,
  kParietoOccipitalL,
  kParietoOccipitalR,
  kFrontalHornL,
  kFrontalHornR,
  kTemporalHornL,
  kTemporalHornR,
  kOccipitalHornL,
  kOccipitalHornR,
  kThirdVentricle,
};

inline constexpr int kNumRegions = 13;
inline constexpr int kMaxRegionScore = 3;
inline constexpr int kMaxTotalScore = 39;

// All regions in enum order, for range-for loops.
const std::array<GcaRegion, kNumRegions>& all_regions();

// Snake-case region name as used in CSV headers ("frontal_l", ...).
const std::string& region_name(GcaRegion r);
GcaRegion region_from_name(const std::string& name);  // FormatError if unknown

// Left-right homologue; empty for the (midline) third ventricle.
std::optional<GcaRegion> homologous_partner(GcaRegion r);

// True for the six horns + third ventricle, false for the sulcal regions.
bool is_ventricular(GcaRegion r);

// One rater's sheet for one scan: a 0-3 score per region, with regions that
// could not be assessed flagged instead of scored.
struct GcaRating {
  std::string scan_id;
  std::string rater_id;
  std::array<int, kNumRegions> scores{};        // valid only where assessable
  std::array<bool, kNumRegions> assessable{};   // default all false

  int score(GcaRegion r) const;                 // NotAssessableError if flagged
  void set_score(GcaRegion r, int value);       // DomainError if outside 0-3
  void set_unassessable(GcaRegion r);
};

// Fully-assessable rating with the given per-region scores.
GcaRating make_rating(const std::string& scan_id, const std::string& rater_id,
                      const std::array<int, kNumRegions>& scores);

// Sum of the 13 scores. Throws IncompleteRatingError while any region is
// unassessable — callers impute first (explicitly, so the rule stays visible).
int total_score(const GcaRating& r);

enum class Severity : int { kMild = 0, kModerate = 1, kSevere = 2 };

// 0-11 mild, 12-21 moderate, 22-39 severe. Out-of-range totals -> DomainError.
Severity classify_severity(int total);
const std::string& severity_label(Severity s);  // "mild" / "moderate" / "severe"

// Fills each unassessable lateral region with its homologous partner's score.
// Throws NotAssessableError (naming the region) when both partners are
// missing or the third ventricle itself is missing.
GcaRating impute_homologous(const GcaRating& r);

// Rating sheets as CSV: header scan_id,rater_id then the 13 region columns in
// enum order; cells are 0-3 or NA. Strict parse: unknown columns, bad cells,
// or duplicate (scan_id, rater_id) raise FormatError citing the row.
std::vector<GcaRating> parse_rating_csv(const std::string& text);
std::string write_rating_csv(const std::vector<GcaRating>& ratings);

// Demographic / clinical covariates for one scan.
struct CohortRecord {
  std::string scan_id;
  std::string cohort;  // "orchard" | "ocs" | "legacy" | "synthetic"
  double age = 0;
  std::string sex;     // "m" | "f" | empty when unknown
  std::optional<int> amt_score;          // 0-10
  std::optional<int> ocs_tasks_impaired; // >= 0
  void validate() const;                 // DomainError on bad ranges
};

}  // namespace ctgca
