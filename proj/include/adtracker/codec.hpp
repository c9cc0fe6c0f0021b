#pragma once

// JSON encoding of domain values. This is the canonical record layout used
// by the store, fixture files (JSON Lines) and the HTTP API.

#include <istream>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "adtracker/domain.hpp"

namespace adtracker::codec {

using nlohmann::json;

json to_json(const domain::InsightRange& r);
json to_json(const domain::AdRecord& ad, bool include_seen = true);
json to_json(const domain::JobSpec& spec);
json to_json(const domain::Violation& v);

json regional_to_json(const std::vector<domain::RegionalShare>& shares);
json demographic_to_json(const std::vector<domain::DemographicShare>& shares);
std::vector<domain::RegionalShare> regional_from_json(const json& j);
std::vector<domain::DemographicShare> demographic_from_json(const json& j);

// Throws Error(MalformedPayload) on structural problems. Does not check
// record invariants; use domain::validate_ad for that.
domain::AdRecord ad_from_json(const json& j);

// Unknown enum tokens, missing fields and alias country names are resolved
// here; the result is either a spec that passed validate_job_spec or every
// violation found.
std::variant<domain::JobSpec, std::vector<domain::Violation>> job_spec_from_json(const json& j);

struct JsonLinesResult {
  std::vector<domain::AdRecord> records;
  std::size_t skipped = 0;
};

// One AdRecord object per line. Blank lines are ignored; lines that fail to
// decode or validate are counted in `skipped`.
JsonLinesResult read_ad_lines(std::istream& in);
void write_ad_lines(std::ostream& out, const std::vector<domain::AdRecord>& ads);

}  // namespace adtracker::codec
