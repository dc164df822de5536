#include "opial/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace opial {

namespace {

struct IdName {
  FunctionalId id;
  std::string_view name;
};

constexpr std::array<IdName, 15> kIdNames{{
    {FunctionalId::thm1_lower, "thm1-lower"},
    {FunctionalId::thm1_upper, "thm1-upper"},
    {FunctionalId::corollary, "corollary"},
    {FunctionalId::thm2, "thm2"},
    {FunctionalId::thm3, "thm3"},
    {FunctionalId::weighted_lower, "weighted-lower"},
    {FunctionalId::weighted_upper, "weighted-upper"},
    {FunctionalId::wirtinger, "wirtinger"},
    {FunctionalId::o9_1, "o9-1"},
    {FunctionalId::o9_2, "o9-2"},
    {FunctionalId::o15, "o15"},
    {FunctionalId::o18, "o18"},
    {FunctionalId::rtwo, "rtwo"},
    {FunctionalId::r4_split, "r4-split"},
    {FunctionalId::troy, "troy"},
}};

}  // namespace

std::string_view to_string(FunctionalId id) {
  for (const auto& entry : kIdNames) {
    if (entry.id == id) return entry.name;
  }
  return "unknown";
}

std::optional<FunctionalId> parse_functional_id(std::string_view text) {
  for (const auto& entry : kIdNames) {
    if (entry.name == text) return entry.id;
  }
  return std::nullopt;
}

std::vector<FunctionalId> all_functional_ids() {
  std::vector<FunctionalId> ids;
  for (const auto& entry : kIdNames) ids.push_back(entry.id);
  return ids;
}

double relative_difference(double a, double b) noexcept {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

bool IneqReport::holds(double rel_tol) const noexcept {
  const auto link_ok = [rel_tol](double small, double large) {
    return small - large <= rel_tol * std::max(std::abs(small), std::abs(large));
  };
  if (middle && !link_ok(lhs, *middle)) return false;
  return link_ok(tightest_lhs(), rhs);
}

bool IneqReport::has_note(std::string_view note) const {
  return std::find(notes.begin(), notes.end(), note) != notes.end();
}

IneqReport make_report(FunctionalId id, double lhs, std::optional<double> middle, double rhs,
                       std::size_t m, bool exact, double equality_tol) {
  IneqReport report;
  report.functional = id;
  report.lhs = lhs;
  report.middle = middle;
  report.rhs = rhs;
  report.m = m;
  report.exact = exact;
  report.tolerance = equality_tol;
  const double tight = report.tightest_lhs();
  report.slack = rhs - tight;
  report.ratio = rhs == 0.0 ? 0.0 : tight / rhs;
  report.equality = report.slack <= equality_tol * std::max(1.0, std::abs(rhs));
  return report;
}

nlohmann::json to_json(const IneqReport& report) {
  nlohmann::json terms = nlohmann::json::object();
  terms["lhs"] = report.lhs;
  if (report.middle) terms["middle"] = *report.middle;
  terms["rhs"] = report.rhs;
  for (const auto& [name, value] : report.extra_terms) terms[name] = value;

  nlohmann::json out;
  out["functional"] = std::string(to_string(report.functional));
  if (report.functional == FunctionalId::thm2) out["n"] = report.order;
  out["terms"] = std::move(terms);
  out["slack"] = report.slack;
  out["ratio"] = report.ratio;
  out["equality"] = report.equality;
  out["m"] = report.m;
  out["exact"] = report.exact;
  out["tolerance"] = report.tolerance;
  out["notes"] = report.notes;
  return out;
}

}  // namespace opial
