#include "ctgca/gca.hpp"

#include <set>
#include <sstream>

namespace ctgca {
namespace {

const std::array<std::string, kNumRegions> kRegionNames = {
    "frontal_l",        "frontal_r",
    "temporal_l",       "temporal_r",
    "parieto_occipital_l", "parieto_occipital_r",
    "frontal_horn_l",   "frontal_horn_r",
    "temporal_horn_l",  "temporal_horn_r",
    "occipital_horn_l", "occipital_horn_r",
    "third_ventricle",
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

const std::array<GcaRegion, kNumRegions>& all_regions() {
  static const std::array<GcaRegion, kNumRegions> regions = [] {
    std::array<GcaRegion, kNumRegions> r{};
    for (int i = 0; i < kNumRegions; ++i) r[i] = static_cast<GcaRegion>(i);
    return r;
  }();
  return regions;
}

const std::string& region_name(GcaRegion r) {
  return kRegionNames[static_cast<size_t>(r)];
}

GcaRegion region_from_name(const std::string& name) {
  for (int i = 0; i < kNumRegions; ++i)
    if (kRegionNames[i] == name) return static_cast<GcaRegion>(i);
  throw FormatError("unknown GCA region name: \"" + name + "\"");
}

std::optional<GcaRegion> homologous_partner(GcaRegion r) {
  const int i = static_cast<int>(r);
  if (r == GcaRegion::kThirdVentricle) return std::nullopt;
  // L/R pairs are adjacent in enum order, left first.
  return static_cast<GcaRegion>(i % 2 == 0 ? i + 1 : i - 1);
}

bool is_ventricular(GcaRegion r) {
  return static_cast<int>(r) >= static_cast<int>(GcaRegion::kFrontalHornL);
}

int GcaRating::score(GcaRegion r) const {
  const auto i = static_cast<size_t>(r);
  if (!assessable[i])
    throw NotAssessableError(scan_id + ": region " + region_name(r) +
                             " is not assessable");
  return scores[i];
}

void GcaRating::set_score(GcaRegion r, int value) {
  if (value < 0 || value > kMaxRegionScore)
    throw DomainError("GCA score must be 0-3, got " + std::to_string(value));
  const auto i = static_cast<size_t>(r);
  scores[i] = value;
  assessable[i] = true;
}

void GcaRating::set_unassessable(GcaRegion r) {
  const auto i = static_cast<size_t>(r);
  scores[i] = 0;
  assessable[i] = false;
}

GcaRating make_rating(const std::string& scan_id, const std::string& rater_id,
                      const std::array<int, kNumRegions>& scores) {
  GcaRating r;
  r.scan_id = scan_id;
  r.rater_id = rater_id;
  for (int i = 0; i < kNumRegions; ++i)
    r.set_score(static_cast<GcaRegion>(i), scores[i]);
  return r;
}

int total_score(const GcaRating& r) {
  int total = 0;
  for (int i = 0; i < kNumRegions; ++i) {
    if (!r.assessable[i])
      throw IncompleteRatingError(
          r.scan_id + ": cannot total an incomplete rating; region " +
          kRegionNames[i] + " is unassessable (impute first)");
    total += r.scores[i];
  }
  return total;
}

Severity classify_severity(int total) {
  if (total < 0 || total > kMaxTotalScore)
    throw DomainError("GCA total must be 0-39, got " + std::to_string(total));
  if (total <= 11) return Severity::kMild;
  if (total <= 21) return Severity::kModerate;
  return Severity::kSevere;
}

const std::string& severity_label(Severity s) {
  static const std::array<std::string, 3> labels = {"mild", "moderate", "severe"};
  return labels[static_cast<size_t>(s)];
}

GcaRating impute_homologous(const GcaRating& r) {
  GcaRating out = r;
  for (GcaRegion region : all_regions()) {
    const auto i = static_cast<size_t>(region);
    if (r.assessable[i]) continue;
    const auto partner = homologous_partner(region);
    if (!partner.has_value())
      throw NotAssessableError(r.scan_id + ": region " + region_name(region) +
                               " has no homologue; the region may not be assessable");
    const auto j = static_cast<size_t>(*partner);
    if (!r.assessable[j])
      throw NotAssessableError(r.scan_id + ": region " + region_name(region) +
                               " and its homologue are both missing; the region may"
                               " not be assessable");
    out.scores[i] = r.scores[j];
    out.assessable[i] = true;
  }
  return out;
}

std::vector<GcaRating> parse_rating_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("rating CSV: empty input");
  const auto header = split_fields(line);
  if (header.size() != 2 + kNumRegions)
    throw FormatError("rating CSV: header has " + std::to_string(header.size()) +
                      " columns, expected " + std::to_string(2 + kNumRegions));
  if (header[0] != "scan_id" || header[1] != "rater_id")
    throw FormatError("rating CSV: header must start scan_id,rater_id");
  for (int i = 0; i < kNumRegions; ++i)
    if (header[2 + i] != kRegionNames[i])
      throw FormatError("rating CSV: unknown column \"" + header[2 + i] +
                        "\" (expected \"" + kRegionNames[i] + "\")");

  std::vector<GcaRating> out;
  std::set<std::pair<std::string, std::string>> seen;
  size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = split_fields(line);
    if (f.size() != 2 + kNumRegions)
      throw FormatError("rating CSV row " + std::to_string(row) + ": has " +
                        std::to_string(f.size()) + " fields, expected " +
                        std::to_string(2 + kNumRegions));
    GcaRating r;
    r.scan_id = f[0];
    r.rater_id = f[1];
    if (r.scan_id.empty())
      throw FormatError("rating CSV row " + std::to_string(row) + ": empty scan_id");
    if (!seen.insert({r.scan_id, r.rater_id}).second)
      throw FormatError("rating CSV row " + std::to_string(row) +
                        ": duplicate (scan_id, rater_id) = (" + r.scan_id + ", " +
                        r.rater_id + ")");
    for (int i = 0; i < kNumRegions; ++i) {
      const std::string& cell = f[2 + i];
      if (cell == "NA") {
        r.set_unassessable(static_cast<GcaRegion>(i));
      } else if (cell.size() == 1 && cell[0] >= '0' && cell[0] <= '3') {
        r.set_score(static_cast<GcaRegion>(i), cell[0] - '0');
      } else {
        throw FormatError("rating CSV row " + std::to_string(row) + ", column " +
                          kRegionNames[i] + ": bad cell \"" + cell +
                          "\" (expected 0-3 or NA)");
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string write_rating_csv(const std::vector<GcaRating>& ratings) {
  std::ostringstream out;
  out << "scan_id,rater_id";
  for (const auto& n : kRegionNames) out << ',' << n;
  out << '\n';
  for (const auto& r : ratings) {
    out << r.scan_id << ',' << r.rater_id;
    for (int i = 0; i < kNumRegions; ++i) {
      if (r.assessable[i])
        out << ',' << r.scores[i];
      else
        out << ",NA";
    }
    out << '\n';
  }
  return out.str();
}

void CohortRecord::validate() const {
  if (scan_id.empty()) throw DomainError("CohortRecord: empty scan_id");
  if (!(age >= 0)) throw DomainError("CohortRecord " + scan_id + ": age must be >= 0");
  if (amt_score && (*amt_score < 0 || *amt_score > 10))
    throw DomainError("CohortRecord " + scan_id + ": amt_score must be 0-10");
  if (ocs_tasks_impaired && *ocs_tasks_impaired < 0)
    throw DomainError("CohortRecord " + scan_id + ": ocs_tasks_impaired must be >= 0");
}

}  // namespace ctgca
