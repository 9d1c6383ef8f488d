#include "jamopt/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace jamopt {

ConfigError::ConfigError(std::string message, std::string field, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + field + ": " + message
                                  : field + ": " + message),
      message_(std::move(message)),
      field_(std::move(field)),
      line_(line) {}

std::vector<double> SweepRange::grid() const {
  std::vector<double> out;
  const double span = (max_db - min_db) / step_db;
  const auto count = static_cast<long>(std::floor(span + 1e-9));
  for (long i = 0; i <= count; ++i) out.push_back(min_db + static_cast<double>(i) * step_db);
  return out;
}

std::vector<double> ScenarioSpec::jammer_grid_db() const {
  if (const auto* s = std::get_if<SweepRange>(&jammer)) return s->grid();
  return {std::get<double>(jammer)};
}

bool operator==(const ScenarioSpec& a, const ScenarioSpec& b) {
  return a.block_len == b.block_len && a.users == b.users && a.jammer == b.jammer &&
         a.mc.samples == b.mc.samples && a.mc.seed == b.mc.seed && a.output == b.output;
}

SystemConfig ScenarioSpec::system() const {
  if (users.empty()) throw ConfigError("at least one user is required", "users", 0);
  int total_train = 0;
  for (const auto& u : users) total_train += u.train_len;
  const int data_len = block_len - total_train;
  if (data_len < 1) {
    throw ConfigError("sum of train_len (" + std::to_string(total_train) +
                          ") must be smaller than block_len (" + std::to_string(block_len) + ")",
                      "users", 0);
  }
  std::vector<UserParams> params;
  for (std::size_t k = 0; k < users.size(); ++k) {
    const auto& u = users[k];
    const std::string field = "users[" + std::to_string(k) + "]";
    try {
      if (const auto* e = std::get_if<ExplicitPower>(&u.power)) {
        params.emplace_back(db_to_linear(e->train_power_db), db_to_linear(e->data_power_db),
                            u.train_len);
      } else {
        const auto& b = std::get<BudgetPower>(u.power);
        const auto split =
            budget_split(db_to_linear(b.avg_power_db), u.train_len, block_len, data_len);
        params.emplace_back(split.train_power, split.data_power, u.train_len);
      }
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what(), field, 0);
    }
  }
  return SystemConfig(block_len, std::move(params));
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

int line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.is_null() ? 0 : mark.line + 1;
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "'", where.empty() ? key : where + "." + key,
                        line_of(kv.first));
    }
  }
}

YAML::Node require(const YAML::Node& map, const std::string& key, const std::string& where) {
  const auto node = map[key];
  if (!node) {
    throw ConfigError("missing required field '" + key + "'", where.empty() ? key : where + "." + key,
                      line_of(map));
  }
  return node;
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ConfigError("expected a scalar value", field, line_of(node));
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("cannot convert '" + node.Scalar() + "'", field, line_of(node));
  }
}

double finite_db(const YAML::Node& node, const std::string& field, bool allow_neg_inf) {
  const double v = scalar<double>(node, field);
  if (std::isnan(v) || v == std::numeric_limits<double>::infinity() ||
      (!allow_neg_inf && std::isinf(v))) {
    throw ConfigError("value must be finite", field, line_of(node));
  }
  return v;
}

UserSpec parse_user(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) throw ConfigError("user entry must be a mapping", where, line_of(node));
  check_keys(node, {"train_len", "train_power_db", "data_power_db", "avg_power_db"}, where);
  UserSpec u;
  u.train_len = scalar<int>(require(node, "train_len", where), where + ".train_len");
  if (u.train_len < 1) {
    throw ConfigError("train_len must be at least 1", where + ".train_len", line_of(node["train_len"]));
  }
  const bool has_avg = static_cast<bool>(node["avg_power_db"]);
  const bool has_train = static_cast<bool>(node["train_power_db"]);
  const bool has_data = static_cast<bool>(node["data_power_db"]);
  if (has_avg && (has_train || has_data)) {
    throw ConfigError("give either avg_power_db or train_power_db/data_power_db, not both", where,
                      line_of(node));
  }
  if (has_avg) {
    u.power = BudgetPower{finite_db(node["avg_power_db"], where + ".avg_power_db", false)};
  } else {
    const double pt = finite_db(require(node, "train_power_db", where), where + ".train_power_db", false);
    const double pd = finite_db(require(node, "data_power_db", where), where + ".data_power_db", true);
    u.power = ExplicitPower{pt, pd};
  }
  return u;
}

std::variant<double, SweepRange> parse_jammer(const YAML::Node& node) {
  if (!node.IsMap()) throw ConfigError("jammer must be a mapping", "jammer", line_of(node));
  check_keys(node, {"power_db", "sweep"}, "jammer");
  const bool has_power = static_cast<bool>(node["power_db"]);
  const bool has_sweep = static_cast<bool>(node["sweep"]);
  if (has_power == has_sweep) {
    throw ConfigError("exactly one of power_db or sweep is required", "jammer", line_of(node));
  }
  if (has_power) return finite_db(node["power_db"], "jammer.power_db", true);

  const auto sw = node["sweep"];
  if (!sw.IsMap()) throw ConfigError("sweep must be a mapping", "jammer.sweep", line_of(sw));
  check_keys(sw, {"min_db", "max_db", "step_db"}, "jammer.sweep");
  SweepRange r{finite_db(require(sw, "min_db", "jammer.sweep"), "jammer.sweep.min_db", false),
               finite_db(require(sw, "max_db", "jammer.sweep"), "jammer.sweep.max_db", false),
               finite_db(require(sw, "step_db", "jammer.sweep"), "jammer.sweep.step_db", false)};
  if (!(r.step_db > 0.0)) {
    throw ConfigError("step_db must be positive", "jammer.sweep.step_db", line_of(sw["step_db"]));
  }
  if (!(r.min_db <= r.max_db)) {
    throw ConfigError("min_db must not exceed max_db", "jammer.sweep", line_of(sw));
  }
  return r;
}

MonteCarloSettings parse_mc(const YAML::Node& node) {
  if (!node.IsMap()) throw ConfigError("mc must be a mapping", "mc", line_of(node));
  check_keys(node, {"samples", "seed"}, "mc");
  MonteCarloSettings mc;
  if (node["samples"]) {
    const auto samples = scalar<long long>(node["samples"], "mc.samples");
    if (samples < 1) throw ConfigError("samples must be at least 1", "mc.samples", line_of(node["samples"]));
    mc.samples = static_cast<std::uint64_t>(samples);
  }
  if (node["seed"]) mc.seed = scalar<std::uint64_t>(node["seed"], "mc.seed");
  return mc;
}

}  // namespace

ScenarioSpec parse_scenario(std::string_view text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& ex) {
    throw ConfigError(ex.msg, source, ex.mark.line + 1);
  }
  if (!root.IsMap()) throw ConfigError("scenario must be a mapping", source, line_of(root));
  check_keys(root, {"block_len", "users", "jammer", "mc", "output"}, "");

  ScenarioSpec spec;
  spec.block_len = scalar<int>(require(root, "block_len", ""), "block_len");
  if (spec.block_len < 2) {
    throw ConfigError("block_len must be at least 2", "block_len", line_of(root["block_len"]));
  }
  const auto users = require(root, "users", "");
  if (!users.IsSequence() || users.size() == 0) {
    throw ConfigError("users must be a non-empty list", "users", line_of(users));
  }
  for (std::size_t k = 0; k < users.size(); ++k) {
    spec.users.push_back(parse_user(users[k], "users[" + std::to_string(k) + "]"));
  }
  spec.jammer = parse_jammer(require(root, "jammer", ""));
  if (root["mc"]) spec.mc = parse_mc(root["mc"]);
  if (root["output"]) {
    spec.output = scalar<std::string>(root["output"], "output");
  } else {
    const auto stem = std::filesystem::path(source).stem().string();
    spec.output = stem.empty() || stem.front() == '<' ? "scenario" : stem;
  }

  try {
    (void)spec.system();
  } catch (const ConfigError& ex) {
    throw ConfigError(ex.message(), ex.field(), ex.line() > 0 ? ex.line() : line_of(users));
  }
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file", path.string(), 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string serialize_scenario(const ScenarioSpec& spec) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "block_len" << YAML::Value << spec.block_len;
  out << YAML::Key << "users" << YAML::Value << YAML::BeginSeq;
  for (const auto& u : spec.users) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "train_len" << YAML::Value << u.train_len;
    if (const auto* e = std::get_if<ExplicitPower>(&u.power)) {
      out << YAML::Key << "train_power_db" << YAML::Value << e->train_power_db;
      out << YAML::Key << "data_power_db" << YAML::Value << e->data_power_db;
    } else {
      out << YAML::Key << "avg_power_db" << YAML::Value << std::get<BudgetPower>(u.power).avg_power_db;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "jammer" << YAML::Value << YAML::BeginMap;
  if (const auto* s = std::get_if<SweepRange>(&spec.jammer)) {
    out << YAML::Key << "sweep" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "min_db" << YAML::Value << s->min_db;
    out << YAML::Key << "max_db" << YAML::Value << s->max_db;
    out << YAML::Key << "step_db" << YAML::Value << s->step_db;
    out << YAML::EndMap;
  } else {
    out << YAML::Key << "power_db" << YAML::Value << std::get<double>(spec.jammer);
  }
  out << YAML::EndMap;
  out << YAML::Key << "mc" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "samples" << YAML::Value << spec.mc.samples;
  out << YAML::Key << "seed" << YAML::Value << spec.mc.seed;
  out << YAML::EndMap;
  out << YAML::Key << "output" << YAML::Value << spec.output;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Power split

double split_objective(double train_fraction, double avg_power, int block_len, int data_len) {
  const double energy = avg_power * block_len;
  const double pilot_energy = train_fraction * energy;
  const double data_power = (1.0 - train_fraction) * energy / data_len;
  const double rho = data_power * pilot_energy / (1.0 + pilot_energy + data_power);
  return static_cast<double>(data_len) / block_len *
         std::log2(1.0 + rho * std::exp(-kEulerGamma));
}

PowerSplit budget_split(double avg_power, int train_len, int block_len, int data_len,
                        SplitMode mode) {
  if (!(avg_power > 0.0) || !std::isfinite(avg_power)) {
    throw std::invalid_argument("average power budget must be positive and finite");
  }
  if (train_len < 1 || data_len < 1 || block_len < train_len + data_len) {
    throw std::invalid_argument("inconsistent block structure for budget split");
  }
  const double energy = avg_power * block_len;
  if (mode == SplitMode::equal_power) {
    // P_t T_t + P_d T_d = P (T_t + T_d); the identity needs T = T_t + T_d,
    // otherwise scale to meet the block energy exactly.
    const double scale = static_cast<double>(block_len) / (train_len + data_len);
    const double p = avg_power * scale;
    return {p, p, p * train_len / energy};
  }
  auto negated = [&](double f) {
    return -split_objective(f, avg_power, block_len, data_len);
  };
  const auto [fraction, value] =
      boost::math::tools::brent_find_minima(negated, 0.0, 1.0, std::numeric_limits<double>::digits);
  (void)value;
  return {fraction * energy / train_len, (1.0 - fraction) * energy / data_len, fraction};
}

JammerAllocation uniform_allocation(const SystemConfig& cfg) {
  std::vector<double> zeta_t;
  for (const auto& u : cfg.users()) {
    zeta_t.push_back(static_cast<double>(u.train_len()) / cfg.block_len());
  }
  return JammerAllocation(std::move(zeta_t),
                          static_cast<double>(cfg.data_len()) / cfg.block_len());
}

JammerAllocation load_allocation(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot open file", path.string(), 0);
  } catch (const YAML::ParserException& ex) {
    throw ConfigError(ex.msg, path.string(), ex.mark.line + 1);
  }
  if (!root.IsMap()) throw ConfigError("allocation must be a mapping", path.string(), line_of(root));
  check_keys(root, {"zeta_t", "zeta_d"}, "");
  const auto zt = require(root, "zeta_t", "");
  if (!zt.IsSequence()) throw ConfigError("zeta_t must be a list", "zeta_t", line_of(zt));
  std::vector<double> zeta_t;
  for (std::size_t k = 0; k < zt.size(); ++k) {
    zeta_t.push_back(scalar<double>(zt[k], "zeta_t[" + std::to_string(k) + "]"));
  }
  const double zeta_d = scalar<double>(require(root, "zeta_d", ""), "zeta_d");
  try {
    return JammerAllocation(std::move(zeta_t), zeta_d);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what(), "zeta_t", line_of(zt));
  }
}

}  // namespace jamopt
