#include "histopheno/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "histopheno/csv.hpp"

namespace histopheno {

namespace {

const std::set<std::string> kClinicalColumns{
    "differentiation", "histological_type", "t_stage",
    "metastasis_5yr",  "dmfs_years",        "event"};

std::optional<Differentiation> parse_differentiation(const std::string& token,
                                                     const std::string& where) {
  if (token.empty()) return std::nullopt;
  if (token == "MD" || token == "WD") return Differentiation::MD;  // well merged into MD
  if (token == "PD") return Differentiation::PD;
  throw ParseError(where + ": unknown differentiation '" + token + "'");
}

std::optional<HistologicalType> parse_histology(const std::string& token,
                                                const std::string& where) {
  if (token.empty()) return std::nullopt;
  if (token == "adenocarcinoma") return HistologicalType::Adenocarcinoma;
  if (token == "mucinous") return HistologicalType::Mucinous;
  throw ParseError(where + ": unknown histological type '" + token + "'");
}

std::optional<TStage> parse_t_stage(const std::string& token, const std::string& where) {
  if (token.empty()) return std::nullopt;
  if (token == "pT3") return TStage::pT3;
  if (token == "pT4") return TStage::pT4;
  throw ParseError(where + ": unknown T stage '" + token + "'");
}

std::optional<int> parse_binary(const std::string& token, const std::string& where) {
  if (token.empty()) return std::nullopt;
  const long long v = parse_int(token, where);
  if (v != 0 && v != 1) throw ParseError(where + ": expected 0 or 1");
  return static_cast<int>(v);
}

std::optional<double> parse_optional_double(const std::string& token, const std::string& where) {
  if (token.empty()) return std::nullopt;
  return parse_double(token, where);
}

CohortTable from_table(const CsvTable& table) {
  const int col_id = table.require_column("slide_id");
  const int col_diff = table.column_index("differentiation");
  const int col_hist = table.column_index("histological_type");
  const int col_stage = table.column_index("t_stage");
  const int col_meta = table.column_index("metastasis_5yr");
  const int col_dmfs = table.column_index("dmfs_years");
  const int col_event = table.column_index("event");

  CohortTable cohort;
  std::vector<int> feature_cols;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (static_cast<int>(c) == col_id) continue;
    if (kClinicalColumns.count(table.columns[c])) continue;
    feature_cols.push_back(static_cast<int>(c));
    cohort.feature_names.push_back(table.columns[c]);
  }

  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::ostringstream wh;
    wh << table.path << ":" << table.row_lines[r];
    const std::string where = wh.str();
    const auto& row = table.rows[r];
    if (row[col_id].empty()) throw ParseError(where + ": empty slide_id");
    if (!seen.insert(row[col_id]).second) {
      throw ValidationError(where + ": duplicate slide_id '" + row[col_id] + "'");
    }
    cohort.ids.push_back(row[col_id]);
    std::vector<double> feats;
    feats.reserve(feature_cols.size());
    for (const int c : feature_cols) {
      feats.push_back(row[c].empty() ? std::numeric_limits<double>::quiet_NaN()
                                     : parse_double(row[c], where));
    }
    cohort.features.push_back(std::move(feats));
    cohort.differentiation.push_back(
        col_diff >= 0 ? parse_differentiation(row[col_diff], where) : std::nullopt);
    cohort.histological_type.push_back(
        col_hist >= 0 ? parse_histology(row[col_hist], where) : std::nullopt);
    cohort.t_stage.push_back(col_stage >= 0 ? parse_t_stage(row[col_stage], where)
                                            : std::nullopt);
    cohort.metastasis_5yr.push_back(col_meta >= 0 ? parse_binary(row[col_meta], where)
                                                  : std::nullopt);
    const auto dmfs =
        col_dmfs >= 0 ? parse_optional_double(row[col_dmfs], where) : std::nullopt;
    const auto event = col_event >= 0 ? parse_binary(row[col_event], where) : std::nullopt;
    if (dmfs.has_value() != event.has_value()) {
      throw ValidationError(where + ": dmfs_years and event must be present together");
    }
    if (dmfs && (*dmfs < 0.0 || !std::isfinite(*dmfs))) {
      throw ValidationError(where + ": negative follow-up time");
    }
    cohort.dmfs_years.push_back(dmfs);
    cohort.event.push_back(event);
  }
  return cohort;
}

}  // namespace

CohortTable load_cohort(const std::filesystem::path& path) {
  return from_table(read_csv(path));
}

CohortTable load_cohort_joined(const std::filesystem::path& features_path,
                               const std::filesystem::path& clinical_path) {
  const CsvTable feats = read_csv(features_path);
  const CohortTable clinical = from_table(read_csv(clinical_path));

  const int col_id = feats.require_column("slide_id");
  std::map<std::string, std::size_t> feature_row;
  for (std::size_t r = 0; r < feats.rows.size(); ++r) {
    if (!feature_row.emplace(feats.rows[r][col_id], r).second) {
      throw ValidationError(feats.path + ": duplicate slide_id '" + feats.rows[r][col_id] + "'");
    }
  }

  CohortTable joined;
  for (std::size_t c = 0; c < feats.columns.size(); ++c) {
    if (static_cast<int>(c) == col_id) continue;
    joined.feature_names.push_back(feats.columns[c]);
  }
  for (const std::string& extra : clinical.feature_names) {
    joined.feature_names.push_back(extra);
  }

  for (std::size_t r = 0; r < clinical.size(); ++r) {
    const auto it = feature_row.find(clinical.ids[r]);
    if (it == feature_row.end()) {
      throw ValidationError("join: no feature row for slide '" + clinical.ids[r] + "'");
    }
    joined.ids.push_back(clinical.ids[r]);
    std::vector<double> feats_row;
    const auto& src = feats.rows[it->second];
    std::ostringstream wh;
    wh << feats.path << ":" << feats.row_lines[it->second];
    for (std::size_t c = 0; c < feats.columns.size(); ++c) {
      if (static_cast<int>(c) == col_id) continue;
      feats_row.push_back(src[c].empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : parse_double(src[c], wh.str()));
    }
    for (const double v : clinical.features[r]) feats_row.push_back(v);
    joined.features.push_back(std::move(feats_row));
    joined.differentiation.push_back(clinical.differentiation[r]);
    joined.histological_type.push_back(clinical.histological_type[r]);
    joined.t_stage.push_back(clinical.t_stage[r]);
    joined.metastasis_5yr.push_back(clinical.metastasis_5yr[r]);
    joined.dmfs_years.push_back(clinical.dmfs_years[r]);
    joined.event.push_back(clinical.event[r]);
  }
  return joined;
}

std::string cohort_csv(const CohortTable& table) {
  std::ostringstream out;
  out << "slide_id";
  for (const std::string& name : table.feature_names) out << ',' << name;
  out << ",differentiation,histological_type,t_stage,metastasis_5yr,dmfs_years,event\n";
  for (std::size_t r = 0; r < table.size(); ++r) {
    out << table.ids[r];
    for (const double v : table.features[r]) {
      out << ',';
      if (!std::isnan(v)) out << format_double(v);
    }
    out << ',';
    if (table.differentiation[r]) {
      out << (*table.differentiation[r] == Differentiation::PD ? "PD" : "MD");
    }
    out << ',';
    if (table.histological_type[r]) {
      out << (*table.histological_type[r] == HistologicalType::Mucinous ? "mucinous"
                                                                        : "adenocarcinoma");
    }
    out << ',';
    if (table.t_stage[r]) out << (*table.t_stage[r] == TStage::pT4 ? "pT4" : "pT3");
    out << ',';
    if (table.metastasis_5yr[r]) out << *table.metastasis_5yr[r];
    out << ',';
    if (table.dmfs_years[r]) out << format_double(*table.dmfs_years[r]);
    out << ',';
    if (table.event[r]) out << *table.event[r];
    out << '\n';
  }
  return out.str();
}

}  // namespace histopheno
