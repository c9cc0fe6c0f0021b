#include "adtracker/codec.hpp"

#include <algorithm>
#include <string>

namespace adtracker::codec {

using namespace adtracker::domain;

namespace {

[[noreturn]] void bad_payload(const std::string& why) {
  throw Error(ErrorCode::MalformedPayload, why);
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string req_string(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v || !v->is_string()) bad_payload(std::string("missing string field ") + key);
  return v->get<std::string>();
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) return std::nullopt;
  if (!v->is_string()) bad_payload(std::string("field is not a string: ") + key);
  return v->get<std::string>();
}

Timestamp req_time(const json& j, const char* key) {
  auto t = try_parse_rfc3339(req_string(j, key));
  if (!t) bad_payload(std::string("bad timestamp in ") + key);
  return *t;
}

std::optional<Timestamp> opt_time(const json& j, const char* key) {
  auto s = opt_string(j, key);
  if (!s) return std::nullopt;
  auto t = try_parse_rfc3339(*s);
  if (!t) bad_payload(std::string("bad timestamp in ") + key);
  return t;
}

std::uint64_t as_count(const json& v, const char* what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  bad_payload(std::string("expected non-negative integer in ") + what);
}

std::optional<InsightRange> opt_range(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) return std::nullopt;
  if (v->is_string()) {
    try {
      return parse_insight_range(v->get<std::string>());
    } catch (const Error& e) {
      bad_payload(e.what());
    }
  }
  if (!v->is_object() || !v->contains("lower") || !v->contains("upper")) {
    bad_payload(std::string("range field malformed: ") + key);
  }
  return InsightRange{as_count(v->at("lower"), key), as_count(v->at("upper"), key)};
}

double as_percentage(const json& v) {
  if (!v.is_number()) bad_payload("percentage is not a number");
  return v.get<double>();
}

std::string upper_token(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

}  // namespace

json to_json(const InsightRange& r) { return json{{"lower", r.lower}, {"upper", r.upper}}; }

json regional_to_json(const std::vector<RegionalShare>& shares) {
  json arr = json::array();
  for (const auto& s : shares) {
    arr.push_back({{"country_code", s.country_code},
                   {"region_name", s.region_name},
                   {"percentage", s.percentage}});
  }
  return arr;
}

json demographic_to_json(const std::vector<DemographicShare>& shares) {
  json arr = json::array();
  for (const auto& s : shares) {
    arr.push_back({{"age_range", s.age_range},
                   {"gender", std::string(to_string(s.gender))},
                   {"percentage", s.percentage}});
  }
  return arr;
}

std::vector<RegionalShare> regional_from_json(const json& j) {
  if (!j.is_array()) bad_payload("regional_distribution is not an array");
  std::vector<RegionalShare> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_object()) bad_payload("regional share is not an object");
    out.push_back({req_string(e, "country_code"), req_string(e, "region_name"),
                   as_percentage(e.at("percentage"))});
  }
  return out;
}

std::vector<DemographicShare> demographic_from_json(const json& j) {
  if (!j.is_array()) bad_payload("demographic_distribution is not an array");
  std::vector<DemographicShare> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_object()) bad_payload("demographic share is not an object");
    auto gender = parse_gender(req_string(e, "gender"));
    if (!gender) bad_payload("unknown gender");
    if (!e.contains("percentage")) bad_payload("demographic share without percentage");
    out.push_back({req_string(e, "age_range"), *gender, as_percentage(e.at("percentage"))});
  }
  return out;
}

json to_json(const AdRecord& ad, bool include_seen) {
  json j;
  j["ad_id"] = ad.ad_id;
  j["page_id"] = ad.page_id;
  j["page_name"] = ad.page_name;
  j["creation_time"] = format_rfc3339(ad.creation_time);
  j["body"] = ad.body;
  auto put = [&](const char* key, const std::optional<std::string>& v) {
    if (v) j[key] = *v;
  };
  put("link_caption", ad.link_caption);
  put("link_description", ad.link_description);
  put("link_title", ad.link_title);
  put("snapshot_url", ad.snapshot_url);
  if (ad.spend) j["spend"] = to_json(*ad.spend);
  put("currency", ad.currency);
  put("funded_entity", ad.funded_entity);
  if (ad.delivery_start) j["delivery_start"] = format_rfc3339(*ad.delivery_start);
  if (ad.delivery_stop) j["delivery_stop"] = format_rfc3339(*ad.delivery_stop);
  if (ad.impressions) j["impressions"] = to_json(*ad.impressions);
  if (ad.potential_reach) j["potential_reach"] = to_json(*ad.potential_reach);
  j["regional_distribution"] = regional_to_json(ad.regional_distribution);
  j["demographic_distribution"] = demographic_to_json(ad.demographic_distribution);
  if (include_seen) {
    if (ad.first_seen) j["first_seen"] = format_rfc3339(*ad.first_seen);
    if (ad.last_seen) j["last_seen"] = format_rfc3339(*ad.last_seen);
  }
  return j;
}

AdRecord ad_from_json(const json& j) {
  if (!j.is_object()) bad_payload("ad record is not an object");
  AdRecord ad;
  ad.ad_id = req_string(j, "ad_id");
  ad.page_id = req_string(j, "page_id");
  ad.page_name = opt_string(j, "page_name").value_or("");
  ad.creation_time = req_time(j, "creation_time");
  ad.body = opt_string(j, "body").value_or("");
  ad.link_caption = opt_string(j, "link_caption");
  ad.link_description = opt_string(j, "link_description");
  ad.link_title = opt_string(j, "link_title");
  ad.snapshot_url = opt_string(j, "snapshot_url");
  ad.spend = opt_range(j, "spend");
  ad.currency = opt_string(j, "currency");
  ad.funded_entity = opt_string(j, "funded_entity");
  ad.delivery_start = opt_time(j, "delivery_start");
  ad.delivery_stop = opt_time(j, "delivery_stop");
  ad.impressions = opt_range(j, "impressions");
  ad.potential_reach = opt_range(j, "potential_reach");
  if (const json* v = find(j, "regional_distribution")) ad.regional_distribution = regional_from_json(*v);
  if (const json* v = find(j, "demographic_distribution")) {
    ad.demographic_distribution = demographic_from_json(*v);
  }
  ad.first_seen = opt_time(j, "first_seen");
  ad.last_seen = opt_time(j, "last_seen");
  return ad;
}

json to_json(const JobSpec& spec) {
  json platforms = json::array();
  for (auto p : spec.platforms) platforms.push_back(std::string(to_string(p)));
  return json{{"search_term", spec.search_term},
              {"reached_countries", spec.reached_countries},
              {"active_status", std::string(to_string(spec.active_status))},
              {"category", std::string(to_string(spec.category))},
              {"platforms", platforms},
              {"visibility", std::string(to_string(spec.visibility))}};
}

json to_json(const Violation& v) {
  json j{{"kind", std::string(to_string(v.kind))}, {"field", v.field}};
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

std::variant<JobSpec, std::vector<Violation>> job_spec_from_json(const json& j) {
  std::vector<Violation> violations;
  if (!j.is_object()) {
    violations.push_back({ViolationKind::MissingField, "", "body must be a JSON object"});
    return violations;
  }

  JobSpec spec;
  auto token = [&](const char* key, bool required) -> std::optional<std::string> {
    const json* v = find(j, key);
    if (!v) {
      if (required) violations.push_back({ViolationKind::MissingField, key, ""});
      return std::nullopt;
    }
    if (!v->is_string()) {
      violations.push_back({ViolationKind::UnknownEnumToken, key, v->dump()});
      return std::nullopt;
    }
    return v->get<std::string>();
  };

  if (const json* v = find(j, "search_term"); v && v->is_string()) {
    spec.search_term = v->get<std::string>();
  } else if (!v) {
    violations.push_back({ViolationKind::MissingField, "search_term", ""});
  } else {
    violations.push_back({ViolationKind::EmptySearchTerm, "search_term", "not a string"});
  }

  if (const json* v = find(j, "reached_countries"); v && v->is_array()) {
    for (const auto& c : *v) {
      if (!c.is_string()) {
        violations.push_back({ViolationKind::UnknownCountryCode, "reached_countries", c.dump()});
        continue;
      }
      auto label = c.get<std::string>();
      spec.reached_countries.push_back(resolve_country(label).value_or(label));
    }
  } else {
    violations.push_back({ViolationKind::MissingField, "reached_countries", ""});
  }

  if (auto t = token("active_status", true)) {
    if (auto v = parse_active_status(upper_token(*t))) {
      spec.active_status = *v;
    } else {
      violations.push_back({ViolationKind::UnknownEnumToken, "active_status", *t});
    }
  }
  if (auto t = token("category", true)) {
    if (auto v = parse_category(upper_token(*t))) {
      spec.category = *v;
    } else {
      violations.push_back({ViolationKind::UnknownEnumToken, "category", *t});
    }
  }
  if (auto t = token("visibility", false)) {
    if (auto v = parse_visibility(upper_token(*t))) {
      spec.visibility = *v;
    } else {
      violations.push_back({ViolationKind::UnknownEnumToken, "visibility", *t});
    }
  }

  if (const json* v = find(j, "platforms"); v && v->is_array()) {
    for (const auto& p : *v) {
      std::optional<Platform> platform;
      if (p.is_string()) platform = parse_platform(upper_token(p.get<std::string>()));
      if (platform) {
        spec.platforms.push_back(*platform);
      } else {
        violations.push_back(
            {ViolationKind::UnknownEnumToken, "platforms", p.is_string() ? p.get<std::string>() : p.dump()});
      }
    }
  } else {
    violations.push_back({ViolationKind::MissingField, "platforms", ""});
  }

  for (auto& v : validate_job_spec(spec)) {
    // Structural problems already reported above would otherwise show twice.
    bool duplicate = std::any_of(violations.begin(), violations.end(), [&](const Violation& seen) {
      return seen.field == v.field &&
             (seen.kind == ViolationKind::MissingField || seen.kind == v.kind);
    });
    if (!duplicate) violations.push_back(std::move(v));
  }
  if (!violations.empty()) return violations;
  return spec;
}

JsonLinesResult read_ad_lines(std::istream& in) {
  JsonLinesResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto ad = ad_from_json(json::parse(line));
      if (is_valid_ad(ad)) {
        result.records.push_back(std::move(ad));
        continue;
      }
    } catch (const json::exception&) {
    } catch (const Error&) {
    }
    ++result.skipped;
  }
  return result;
}

void write_ad_lines(std::ostream& out, const std::vector<AdRecord>& ads) {
  for (const auto& ad : ads) out << to_json(ad, false).dump() << '\n';
}

}  // namespace adtracker::codec
