#include "opial/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "opial/functionals.hpp"
#include "opial/oracle.hpp"
#include "opial/report.hpp"
#include "opial/sharpness.hpp"

namespace opial::cli {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;

constexpr double kDefaultVerifyTol = 1e-10;
constexpr double kDefaultSearchTol = 1e-9;

class UsageError : public Error {
 public:
  using Error::Error;
};

double number_at(const json& doc, const std::string& pointer) {
  if (!doc.is_number()) throw SpecError(pointer, "expected a number");
  const double v = doc.get<double>();
  if (!std::isfinite(v)) throw SpecError(pointer, "must be finite");
  return v;
}

const json& member(const json& obj, const std::string& key, const std::string& pointer) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SpecError(pointer, "missing field \"" + key + "\"");
  return *it;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_atomically(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw UsageError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw UsageError("cannot move report into place at " + path + ": " + ec.message());
  }
}

void emit(const RunConfig& config, std::ostream& out, const std::string& text) {
  if (config.out_path.empty()) {
    out << text;
  } else {
    write_atomically(config.out_path, text);
  }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

FunctionalId functional_id(const RunConfig& config) {
  const auto id = parse_functional_id(config.functional);
  if (!id) throw UsageError("unknown functional id \"" + config.functional + "\"");
  return *id;
}

std::optional<DiscreteIdentity> discrete_kind(FunctionalId id) {
  switch (id) {
    case FunctionalId::o9_1: return DiscreteIdentity::o9_1;
    case FunctionalId::o9_2: return DiscreteIdentity::o9_2;
    case FunctionalId::o15: return DiscreteIdentity::o15;
    case FunctionalId::o18: return DiscreteIdentity::o18;
    case FunctionalId::rtwo: return DiscreteIdentity::rtwo;
    case FunctionalId::r4_split: return DiscreteIdentity::r4_split;
    default: return std::nullopt;
  }
}

EvalOptions eval_options(const RunConfig& config) {
  EvalOptions opts;
  opts.equality_tol = config.tol.value_or(kDefaultVerifyTol);
  opts.project_zero_mean = config.project_zero_mean;
  return opts;
}

QuantizedModel model_for(const RunConfig& config) {
  if (config.dist_path.empty()) throw UsageError("--dist is required for this functional");
  return quantize(load_distribution(config.dist_path), config.m);
}

void require_split(const RunConfig& config) {
  if (!std::isfinite(config.c)) throw UsageError("corollary needs --c");
}

IneqReport verify_report(const RunConfig& config, FunctionalId id) {
  const EvalOptions opts = eval_options(config);

  if (id == FunctionalId::troy) {
    return troy_report(troy_comparison(config.p, load_node_function(config.psi_spec), config.m, opts),
                       opts);
  }
  if (const auto which = discrete_kind(id)) {
    // A bare value vector is the sequence itself; otherwise psi on the nodes.
    const NodeFunction psi = load_node_function(config.psi_spec);
    std::vector<double> a = psi.kind == NodeKind::values && config.dist_path.empty()
                                ? psi.values
                                : resolve(psi, model_for(config));
    return discrete_identities(a, *which, opts, config.k);
  }
  if (id == FunctionalId::corollary) {
    require_split(config);
    if (config.dist_path.empty()) throw UsageError("--dist is required for this functional");
    return corollary_split(load_distribution(config.dist_path), load_node_function(config.psi_spec),
                           config.c, config.m, opts);
  }

  const QuantizedModel model = model_for(config);
  const std::vector<double> psi = resolve(load_node_function(config.psi_spec), model);
  switch (id) {
    case FunctionalId::thm1_lower: return opial_terms(model, psi, Direction::below, opts);
    case FunctionalId::thm1_upper: return opial_terms(model, psi, Direction::above, opts);
    case FunctionalId::thm2: return theorem2_terms(model, psi, config.n, opts);
    case FunctionalId::thm3: return theorem3_terms(model, psi, opts);
    case FunctionalId::weighted_lower:
    case FunctionalId::weighted_upper: {
      const std::vector<double> chi = resolve(load_node_function(config.chi_spec), model);
      const Direction dir =
          id == FunctionalId::weighted_lower ? Direction::below : Direction::above;
      return weighted_opial_terms(model, psi, chi, dir, opts);
    }
    case FunctionalId::wirtinger: {
      IneqReport report = wirtinger_terms(model, psi, opts);
      // The bound is a theorem for continuous laws only; any atom makes it a heuristic.
      if (!load_distribution(config.dist_path).atoms().empty() && !report.has_note("heuristic")) {
        report.notes.emplace_back("heuristic");
      }
      return report;
    }
    default: break;
  }
  throw UsageError("verify does not handle " + config.functional);
}

int run_verify(const RunConfig& config, std::ostream& out) {
  const FunctionalId id = functional_id(config);
  const IneqReport report = verify_report(config, id);
  emit(config, out, dump(to_json(report)));
  return report.holds(config.tol.value_or(kDefaultVerifyTol)) ? kExitOk : kExitViolation;
}

json terms_json(double lhs, std::optional<double> middle, double rhs) {
  json t{{"lhs", lhs}};
  if (middle) t["middle"] = *middle;
  t["rhs"] = rhs;
  return t;
}

int run_oracle_diff(const RunConfig& config, std::ostream& out) {
  const FunctionalId id = functional_id(config);
  const EvalOptions opts = eval_options(config);
  const QuantizedModel model = model_for(config);
  std::vector<double> psi = resolve(load_node_function(config.psi_spec), model);
  if (id == FunctionalId::wirtinger && config.project_zero_mean) {
    double mean = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) mean += model.mass()[i] * psi[i];
    for (double& v : psi) v -= mean;
  }
  std::vector<double> chi;

  IneqReport fast;
  switch (id) {
    case FunctionalId::thm1_lower: fast = opial_terms(model, psi, Direction::below, opts); break;
    case FunctionalId::thm1_upper: fast = opial_terms(model, psi, Direction::above, opts); break;
    case FunctionalId::corollary:
      require_split(config);
      fast = corollary_terms(model, psi, config.c, opts);
      break;
    case FunctionalId::thm2: fast = theorem2_terms(model, psi, config.n, opts); break;
    case FunctionalId::thm3: fast = theorem3_terms(model, psi, opts); break;
    case FunctionalId::weighted_lower:
    case FunctionalId::weighted_upper:
      chi = resolve(load_node_function(config.chi_spec), model);
      fast = weighted_opial_terms(model, psi, chi,
                                  id == FunctionalId::weighted_lower ? Direction::below
                                                                     : Direction::above,
                                  opts);
      break;
    case FunctionalId::wirtinger: fast = wirtinger_terms(model, psi, opts); break;
    default: throw UsageError("oracle-diff has no enumeration for " + config.functional);
  }

  oracle::Request request;
  request.functional = id;
  request.psi = psi;
  request.chi = chi;
  request.n = config.n;
  request.split = config.c;
  request.budget = oracle_budget();
  const oracle::Terms slow = oracle::enumerate_functional(model, request);

  double rel_err = std::max(relative_difference(fast.lhs, slow.lhs),
                            relative_difference(fast.rhs, slow.rhs));
  if (fast.middle && slow.middle) {
    rel_err = std::max(rel_err, relative_difference(*fast.middle, *slow.middle));
  }
  json doc{{"functional", config.functional}};
  if (id == FunctionalId::thm2) doc["n"] = config.n;
  doc["fast"] = terms_json(fast.lhs, fast.middle, fast.rhs);
  doc["oracle"] = terms_json(slow.lhs, slow.middle, slow.rhs);
  doc["rel_err"] = rel_err;
  doc["tolerance"] = config.oracle_tol;
  doc["m"] = model.size();
  doc["agree"] = rel_err <= config.oracle_tol;
  emit(config, out, dump(doc));
  return rel_err <= config.oracle_tol ? kExitOk : kExitViolation;
}

int run_sharpness(const RunConfig& config, std::ostream& out) {
  const FunctionalId id = functional_id(config);
  if (id == FunctionalId::wirtinger) {
    const sharpness::WirtingerConstant wc = config.dist_path.empty()
                                                ? sharpness::wirtinger_best_constant(config.m)
                                                : sharpness::wirtinger_best_constant(model_for(config));
    json doc = sharpness::to_json(wc.extremal);
    doc["functional"] = config.functional;
    doc["c_m"] = wc.c_m;
    doc["residual"] = wc.residual;
    emit(config, out, dump(doc));
    return kExitOk;
  }
  if (id != FunctionalId::thm1_lower && id != FunctionalId::thm1_upper) {
    throw UsageError("sharpness supports thm1-lower, thm1-upper and wirtinger");
  }
  const QuantizedModel model = model_for(config);
  sharpness::AscentOptions opts;
  opts.seed = config.seed;
  const auto result = sharpness::maximize_ratio_opial(
      model, id == FunctionalId::thm1_lower ? Direction::below : Direction::above, opts);
  json doc = sharpness::to_json(result);
  doc["functional"] = config.functional;
  emit(config, out, dump(doc));
  return result.ratio_star <= 1.0 + 1e-9 ? kExitOk : kExitViolation;
}

int run_converge(const RunConfig& config, std::ostream& out) {
  const FunctionalId id = functional_id(config);
  std::vector<std::size_t> grids = config.grids;
  if (grids.empty()) grids = {16, 64, 256, 1024};
  const auto table = sharpness::convergence_study(id, config.n, grids, eval_options(config));
  emit(config, out, config.format == Format::csv ? sharpness::to_csv(table) : dump(sharpness::to_json(table)));
  return kExitOk;
}

int run_search(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const FunctionalId id = functional_id(config);
  sharpness::SearchOptions opts;
  opts.trials = config.trials;
  opts.seed = config.seed;
  opts.m_max = config.m_max;
  opts.tol = config.tol.value_or(kDefaultSearchTol);
  opts.n = config.n > 1 ? config.n : 0;
  EvalOptions eval;
  eval.equality_tol = kDefaultVerifyTol;
  const auto result = sharpness::search_counterexample(id, opts, eval);

  json doc{{"functional", config.functional},
           {"trials_run", result.trials_run},
           {"seed", config.seed},
           {"m_max", config.m_max},
           {"tolerance", opts.tol}};
  int code = kExitOk;
  if (result.counterexample) {
    const auto& found = *result.counterexample;
    doc["counterexample"] = {{"instance", sharpness::to_json(found.instance)},
                             {"report", to_json(found.report)},
                             {"heuristic", found.heuristic}};
    if (found.heuristic) {
      err << "note: violation in heuristic class (" << config.functional << "), logged only\n";
    } else {
      code = kExitViolation;
    }
  } else {
    doc["counterexample"] = nullptr;
  }
  emit(config, out, dump(doc));
  return code;
}

std::vector<std::size_t> parse_grids(const std::string& text) {
  std::vector<std::size_t> grids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      grids.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError("--grids: \"" + item + "\" is not a positive integer");
    }
  }
  return grids;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::verify: return "verify";
    case Command::oracle_diff: return "oracle-diff";
    case Command::sharpness: return "sharpness";
    case Command::converge: return "converge";
    case Command::search: return "search";
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view text) {
  for (Command c : {Command::verify, Command::oracle_diff, Command::sharpness, Command::converge,
                    Command::search}) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line and column.
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SpecError(origin + ":" + std::to_string(line) + ":" + std::to_string(col),
                    "malformed JSON");
  }
}

Distribution parse_distribution(const json& doc) {
  if (!doc.is_object()) throw SpecError("", "distribution spec must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "atoms" && key != "pieces") throw SpecError("/" + key, "unknown field");
  }
  std::vector<Atom> atoms;
  std::vector<Piece> pieces;
  if (const auto it = doc.find("atoms"); it != doc.end()) {
    if (!it->is_array()) throw SpecError("/atoms", "expected an array of [x, p] pairs");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string ptr = "/atoms/" + std::to_string(i);
      const json& pair = (*it)[i];
      if (!pair.is_array() || pair.size() != 2) throw SpecError(ptr, "expected [x, p]");
      const double x = number_at(pair[0], ptr + "/0");
      const double p = number_at(pair[1], ptr + "/1");
      if (p < 0.0) throw SpecError(ptr + "/1", "mass must be nonnegative");
      atoms.push_back({x, p});
    }
  }
  if (const auto it = doc.find("pieces"); it != doc.end()) {
    if (!it->is_array()) throw SpecError("/pieces", "expected an array of {lo, hi, mass}");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string ptr = "/pieces/" + std::to_string(i);
      const json& obj = (*it)[i];
      if (!obj.is_object()) throw SpecError(ptr, "expected {lo, hi, mass}");
      const double lo = number_at(member(obj, "lo", ptr), ptr + "/lo");
      const double hi = number_at(member(obj, "hi", ptr), ptr + "/hi");
      const double mass = number_at(member(obj, "mass", ptr), ptr + "/mass");
      if (!(lo < hi)) throw SpecError(ptr, "needs lo < hi");
      if (mass < 0.0) throw SpecError(ptr + "/mass", "mass must be nonnegative");
      pieces.push_back({lo, hi, mass});
    }
  }
  if (atoms.empty() && pieces.empty()) throw SpecError("", "distribution has neither atoms nor pieces");
  try {
    return Distribution::create(std::move(atoms), std::move(pieces));
  } catch (const InvalidArgument& e) {
    throw SpecError("", e.what());
  }
}

json canonical_json(const Distribution& dist) {
  json atoms = json::array();
  for (const Atom& a : dist.atoms()) atoms.push_back({a.location, a.mass});
  json pieces = json::array();
  for (const Piece& p : dist.pieces()) pieces.push_back({{"lo", p.lo}, {"hi", p.hi}, {"mass", p.mass}});
  return {{"atoms", std::move(atoms)}, {"pieces", std::move(pieces)}};
}

NodeFunction parse_node_function(const json& doc, const std::string& pointer) {
  if (doc.is_array()) {
    std::vector<double> values;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      values.push_back(number_at(doc[i], pointer + "/" + std::to_string(i)));
    }
    return NodeFunction::from_values(std::move(values));
  }
  if (!doc.is_object()) throw SpecError(pointer, "function spec must be an object or array");
  const json& kind = member(doc, "kind", pointer);
  if (!kind.is_string()) throw SpecError(pointer + "/kind", "expected a string");
  const std::string name = kind.get<std::string>();
  if (name == "constant") {
    const auto it = doc.find("level");
    return NodeFunction::constant(it == doc.end() ? 1.0 : number_at(*it, pointer + "/level"));
  }
  if (name == "identity") return NodeFunction::identity();
  if (name == "cos_pi_F") return NodeFunction::cos_pi_F();
  if (name == "step") {
    return NodeFunction::step(number_at(member(doc, "threshold", pointer), pointer + "/threshold"),
                              number_at(member(doc, "low", pointer), pointer + "/low"),
                              number_at(member(doc, "high", pointer), pointer + "/high"));
  }
  if (name == "values") {
    const json& values = member(doc, "values", pointer);
    if (!values.is_array()) throw SpecError(pointer + "/values", "expected an array");
    return parse_node_function(values, pointer + "/values");
  }
  throw SpecError(pointer + "/kind", "unknown kind \"" + name + "\"");
}

json to_json(const NodeFunction& fn) {
  json doc{{"kind", std::string(to_string(fn.kind))}};
  switch (fn.kind) {
    case NodeKind::values: doc["values"] = fn.values; break;
    case NodeKind::constant: doc["level"] = fn.level; break;
    case NodeKind::step:
      doc["threshold"] = fn.threshold;
      doc["low"] = fn.low;
      doc["high"] = fn.high;
      break;
    case NodeKind::identity:
    case NodeKind::cos_pi_F: break;
  }
  return doc;
}

NodeFunction load_node_function(const std::string& spec) {
  if (spec == "constant") return NodeFunction::constant();
  if (spec == "identity") return NodeFunction::identity();
  if (spec == "cos_pi_F") return NodeFunction::cos_pi_F();
  const auto first = spec.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (spec[first] == '{' || spec[first] == '[')) {
    return parse_node_function(parse_json_text(spec, "<inline>"));
  }
  if (!std::filesystem::exists(spec)) {
    throw UsageError("function spec \"" + spec + "\" is neither a known family nor a readable file");
  }
  try {
    return parse_node_function(parse_json_text(read_file(spec), spec));
  } catch (const SpecError& e) {
    if (e.where().rfind(spec, 0) == 0) throw;
    throw SpecError(spec + "#" + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  }
}

Distribution load_distribution(const std::string& path) {
  const json doc = parse_json_text(read_file(path), path);
  try {
    return parse_distribution(doc);
  } catch (const SpecError& e) {
    throw SpecError(path + "#" + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  }
}

std::uint64_t oracle_budget() {
  const char* env = std::getenv("OPIAL_BUDGET");
  if (env == nullptr || *env == '\0') return oracle::kDefaultBudget;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v >= 1.0) || v > 1.8e19) {
    throw UsageError(std::string("OPIAL_BUDGET=\"") + env + "\" is not a positive count");
  }
  return static_cast<std::uint64_t>(v);
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.tol && !(*config.tol > 0.0)) throw UsageError("--tol must be positive");
    if (!(config.oracle_tol > 0.0)) throw UsageError("--oracle-tol must be positive");
    if (config.m == 0) throw UsageError("--m must be positive");
    switch (config.command) {
      case Command::verify: return run_verify(config, out);
      case Command::oracle_diff: return run_oracle_diff(config, out);
      case Command::sharpness: return run_sharpness(config, out);
      case Command::converge: return run_converge(config, out);
      case Command::search: return run_search(config, out, err);
    }
  } catch (const Error& e) {
    err << "opial: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "opial: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Opial/Wirtinger inequality evaluator"};
  app.require_subcommand(1, 1);

  RunConfig config;
  std::string grids;
  std::string format = "json";
  double tol = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dist", config.dist_path, "distribution spec (JSON)");
    sub->add_option("--psi", config.psi_spec, "psi: family name, inline JSON or path");
    sub->add_option("--chi", config.chi_spec, "chi: family name, inline JSON or path");
    sub->add_option("--functional", config.functional, "functional id");
    sub->add_option("--n", config.n, "order for thm2");
    sub->add_option("--c", config.c, "corollary split point");
    sub->add_option("--m", config.m, "quantization resolution");
    sub->add_option("--grids", grids, "comma-separated resolutions");
    sub->add_option("--tol", tol, "violation and equality tolerance (relative)");
    sub->add_option("--oracle-tol", config.oracle_tol, "oracle agreement tolerance (relative)");
    sub->add_option("--seed", config.seed, "master seed");
    sub->add_option("--out", config.out_path, "output file (default stdout)");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--p", config.p, "Troy exponent");
    sub->add_option("--k", config.k, "lower block size for r4-split");
    sub->add_option("--trials", config.trials, "search trials");
    sub->add_option("--m-max", config.m_max, "largest node count in search");
    sub->add_flag("--project-zero-mean", config.project_zero_mean,
                  "Wirtinger: subtract the mean instead of failing");
  };
  std::vector<CLI::App*> subs;
  for (Command c : {Command::verify, Command::oracle_diff, Command::sharpness, Command::converge,
                    Command::search}) {
    CLI::App* sub = app.add_subcommand(std::string(to_string(c)));
    add_common(sub);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) {
      config.command = *parse_command(subs[i]->get_name());
      if (subs[i]->count("--tol") > 0) config.tol = tol;
      if (subs[i]->count("--grids") > 0) {
        try {
          config.grids = parse_grids(grids);
        } catch (const Error& e) {
          std::cerr << "opial: " << e.what() << '\n';
          return kExitUsage;
        }
      }
    }
  }
  config.format = format == "csv" ? Format::csv : Format::json;
  return run(config, std::cout, std::cerr);
}

}  // namespace opial::cli
