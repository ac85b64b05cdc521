#include "ringmix/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ringmix/seeding.hpp"

namespace ringmix {
namespace {

using LineMap = std::map<std::string, int, std::less<>>;

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

int line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

/// Walks one mapping, records field lines and rejects keys it was not asked about.
class Section {
 public:
  Section(const YAML::Node& node, std::string prefix, LineMap& lines)
      : node_(node), prefix_(std::move(prefix)), lines_(lines) {
    if (!node_.IsMap()) {
      throw ConfigError(prefix_.empty() ? "<root>" : prefix_, line_of(node_), "expected a mapping");
    }
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      keys_.emplace(key, line_of(kv.first));
      lines_[field(key)] = line_of(kv.first);
    }
  }

  std::string field(std::string_view key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

  bool has(std::string_view key) {
    known_.emplace(key);
    return keys_.count(std::string(key)) != 0;
  }

  YAML::Node get(std::string_view key) const { return node_[std::string(key)]; }

  int line(std::string_view key) const {
    auto it = keys_.find(std::string(key));
    return it == keys_.end() ? line_of(node_) : it->second;
  }

  void reject_unknown() const {
    for (const auto& [key, line] : keys_) {
      if (!known_.count(key)) throw ConfigError(field(key), line, "unknown key");
    }
  }

  std::string scalar(std::string_view key) {
    const YAML::Node n = get(key);
    if (!n.IsScalar()) throw ConfigError(field(key), line(key), "expected a scalar value");
    return n.Scalar();
  }

  double real(std::string_view key) {
    const std::string text = scalar(key);
    double v = 0.0;
    try {
      v = get(key).as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError(field(key), line(key), "cannot parse '" + text + "' as a number");
    }
    if (!std::isfinite(v)) throw ConfigError(field(key), line(key), "must be finite");
    return v;
  }

  long long integer(const YAML::Node& n, const std::string& name, int at) {
    if (!n.IsScalar()) throw ConfigError(name, at, "expected an integer");
    try {
      return n.as<long long>();
    } catch (const YAML::Exception&) {
      throw ConfigError(name, at, "cannot parse '" + n.Scalar() + "' as an integer");
    }
  }

  std::size_t count(std::string_view key, long long min_value) {
    const long long v = integer(get(key), field(key), line(key));
    if (v < min_value) {
      throw ConfigError(field(key), line(key), "must be >= " + std::to_string(min_value));
    }
    return static_cast<std::size_t>(v);
  }

  std::uint64_t unsigned64(std::string_view key) {
    const std::string text = scalar(key);
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
      throw ConfigError(field(key), line(key), "expected a non-negative 64-bit integer, got '" + text + "'");
    }
    return v;
  }

  // Scalar or sequence of scalars.
  std::vector<std::pair<std::string, int>> list(std::string_view key) {
    const YAML::Node n = get(key);
    std::vector<std::pair<std::string, int>> out;
    if (n.IsScalar()) {
      out.emplace_back(n.Scalar(), line(key));
    } else if (n.IsSequence()) {
      for (const auto& item : n) {
        if (!item.IsScalar()) throw ConfigError(field(key), line_of(item), "expected scalar list items");
        out.emplace_back(item.Scalar(), line_of(item));
      }
    } else {
      throw ConfigError(field(key), line(key), "expected a scalar or a list");
    }
    return out;
  }

 private:
  YAML::Node node_;
  std::string prefix_;
  LineMap& lines_;
  std::map<std::string, int> keys_;
  std::set<std::string, std::less<>> known_;
};

int lookup(const LineMap& lines, std::string_view field) {
  auto it = lines.find(field);
  return it == lines.end() ? 0 : it->second;
}

void require(bool ok, const LineMap& lines, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, lookup(lines, field), message);
}

bool needs_ring(Strategy s) {
  return s == Strategy::DPSGD_FIXED || s == Strategy::ADPSGD_FIXED || s == Strategy::RAND_PSGD;
}

void check(const ExperimentConfig& c, const LineMap& lines) {
  require(!c.strategies.empty(), lines, "strategy", "at least one strategy is required");
  require(!c.learners.empty(), lines, "learners", "at least one learner count is required");
  bool ring = false;
  for (Strategy s : c.strategies) ring = ring || needs_ring(s);
  for (std::size_t l : c.learners) {
    require(l >= 1, lines, "learners", "learner counts must be >= 1");
    require(!ring || l >= 3, lines, "learners", "ring strategies need at least 3 learners, got " + std::to_string(l));
    if (c.batch_mode == BatchMode::TotalFixed) {
      require(c.batch_size % l == 0 && c.batch_size >= l, lines, "batch.size",
              "total batch " + std::to_string(c.batch_size) + " is not divisible by " +
                  std::to_string(l) + " learners");
    }
  }
  require(c.iterations >= 1, lines, "iterations", "must be >= 1");
  require(c.trials >= 1, lines, "trials", "must be >= 1");
  require(std::isfinite(c.lr) && c.lr >= 0.0, lines, "lr", "learning rate must be >= 0");
  require(c.log_interval >= 1, lines, "log_interval", "must be >= 1");
  require(c.batch_size >= 1, lines, "batch.size", "must be >= 1");
  require(c.oracle.dimension >= 1, lines, "oracle.dimension", "must be >= 1");
  require(c.oracle.condition_number >= 1.0, lines, "oracle.condition_number", "must be >= 1");
  require(c.oracle.noise_scale >= 0.0, lines, "oracle.noise_scale", "must be >= 0");
  require(c.oracle.samples >= 2, lines, "oracle.samples", "must be >= 2");
  require(c.oracle.separation >= 0.0, lines, "oracle.separation", "must be >= 0");
  require(c.init_scale >= 0.0, lines, "init.scale", "must be >= 0");
  require(c.init_spread >= 0.0, lines, "init.spread", "must be >= 0");
  require(c.cost.message_size_bytes > 0.0, lines, "cost.message_size_bytes", "must be > 0");
  require(c.cost.bandwidth_bytes_per_s > 0.0, lines, "cost.bandwidth_bytes_per_s", "must be > 0");
  require(c.cost.compute_log_sigma >= 0.0, lines, "cost.compute_log_sigma", "must be >= 0");
  std::size_t min_learners = c.learners.empty() ? 0 : c.learners.front();
  for (std::size_t l : c.learners) min_learners = std::min(min_learners, l);
  for (const auto& s : c.cost.stragglers) {
    require(s.learner < min_learners, lines, "cost.stragglers", "learner index " + std::to_string(s.learner) + " exceeds the smallest learner count");
    require(s.slowdown > 0.0, lines, "cost.stragglers", "slowdown must be > 0");
  }
  for (const auto& s : c.cost.slow_links) {
    require(s.learner < min_learners, lines, "cost.slow_links", "learner index " + std::to_string(s.learner) + " exceeds the smallest learner count");
    require(s.bandwidth_bytes_per_s > 0.0, lines, "cost.slow_links", "bandwidth must be > 0");
  }
}

template <class Spec, class Fill>
std::vector<Spec> read_entries(Section& parent, std::string_view key, LineMap& lines, Fill fill) {
  std::vector<Spec> out;
  const YAML::Node n = parent.get(key);
  if (!n.IsSequence()) throw ConfigError(parent.field(key), parent.line(key), "expected a list");
  for (const auto& item : n) {
    Section entry(item, parent.field(key), lines);
    out.push_back(fill(entry));
    entry.reject_unknown();
  }
  return out;
}

BatchMode parse_batch_mode(const std::string& mode, int line) {
  if (mode == "total-fixed") return BatchMode::TotalFixed;
  if (mode == "per-learner-fixed") return BatchMode::PerLearnerFixed;
  throw ConfigError("batch.mode", line,
                    "expected total-fixed or per-learner-fixed, got '" + mode + "'");
}

}  // namespace

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         "field '" + field + "': " + message),
      field_(std::move(field)),
      line_(line) {}

CostModel CostSpec::model(std::size_t learners) const {
  CostModel m;
  m.message_size_bytes = message_size_bytes;
  m.compute_log_mean = compute_log_mean;
  m.compute_log_sigma = compute_log_sigma;
  if (slow_links.empty()) {
    m.link_bandwidth = {bandwidth_bytes_per_s};
  } else {
    m.link_bandwidth.assign(learners, bandwidth_bytes_per_s);
    for (const auto& s : slow_links) m.link_bandwidth.at(s.learner) = s.bandwidth_bytes_per_s;
  }
  if (!stragglers.empty()) {
    m.compute_slowdown.assign(learners, 1.0);
    for (const auto& s : stragglers) m.compute_slowdown.at(s.learner) = s.slowdown;
  }
  return m;
}

ExperimentConfig parse_config_text(std::string_view text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<document>", e.mark.line + 1, e.msg);
  }
  if (!doc.IsDefined() || doc.IsNull()) throw ConfigError("<document>", 0, "empty configuration");

  ExperimentConfig c;
  LineMap lines;
  Section root(doc, "", lines);

  for (const char* key : {"strategy", "learners", "iterations"}) {
    if (!root.has(key)) throw ConfigError(key, 0, "missing required field");
  }
  for (const auto& [name, line] : root.list("strategy")) {
    const auto s = parse_strategy(name);
    if (!s) throw ConfigError("strategy", line, "unknown strategy '" + name + "'");
    c.strategies.push_back(*s);
  }
  for (const auto& [text_value, line] : root.list("learners")) {
    long long v = 0;
    const auto res = std::from_chars(text_value.data(), text_value.data() + text_value.size(), v);
    if (res.ec != std::errc{} || res.ptr != text_value.data() + text_value.size() || v < 1) {
      throw ConfigError("learners", line, "expected a positive integer, got '" + text_value + "'");
    }
    c.learners.push_back(static_cast<std::size_t>(v));
  }
  c.iterations = root.count("iterations", 1);
  if (root.has("seed")) c.seed = root.unsigned64("seed");
  if (root.has("trials")) c.trials = root.count("trials", 1);
  if (root.has("lr")) c.lr = root.real("lr");
  if (root.has("warmup_iterations")) c.warmup_iterations = root.count("warmup_iterations", 0);
  if (root.has("log_interval")) c.log_interval = root.count("log_interval", 1);
  if (root.has("staleness")) {
    const auto s = parse_staleness(root.scalar("staleness"));
    if (!s) throw ConfigError("staleness", root.line("staleness"), "expected sync or async");
    c.staleness = *s;
  }
  if (root.has("data")) {
    const std::string mode = root.scalar("data");
    if (mode == "shared") c.data = DataMode::Shared;
    else if (mode == "sharded") c.data = DataMode::Sharded;
    else throw ConfigError("data", root.line("data"), "expected shared or sharded");
  }
  if (root.has("batch")) {
    const YAML::Node n = root.get("batch");
    if (n.IsScalar()) {
      // Short form: "total-fixed 8192".
      std::istringstream in(n.Scalar());
      std::string mode;
      long long size = -1;
      if (!(in >> mode >> size) || size < 1) {
        throw ConfigError("batch", root.line("batch"), "expected '<mode> <size>' with size >= 1");
      }
      c.batch_mode = parse_batch_mode(mode, root.line("batch"));
      c.batch_size = static_cast<std::size_t>(size);
    } else {
      Section batch(n, "batch", lines);
      if (batch.has("mode")) {
        c.batch_mode = parse_batch_mode(batch.scalar("mode"), batch.line("mode"));
      }
      if (batch.has("size")) c.batch_size = batch.count("size", 1);
      batch.reject_unknown();
    }
  }
  if (root.has("oracle")) {
    Section o(root.get("oracle"), "oracle", lines);
    if (o.has("kind")) {
      const std::string kind = o.scalar("kind");
      if (kind == "quadratic") c.oracle.kind = ObjectiveKind::Quadratic;
      else if (kind == "logistic") c.oracle.kind = ObjectiveKind::Logistic;
      else throw ConfigError("oracle.kind", o.line("kind"), "expected quadratic or logistic");
    }
    if (o.has("dimension")) c.oracle.dimension = o.count("dimension", 1);
    if (o.has("condition_number")) c.oracle.condition_number = o.real("condition_number");
    if (o.has("noise_scale")) c.oracle.noise_scale = o.real("noise_scale");
    if (o.has("samples")) c.oracle.samples = o.count("samples", 2);
    if (o.has("separation")) c.oracle.separation = o.real("separation");
    o.reject_unknown();
  }
  if (root.has("init")) {
    Section init(root.get("init"), "init", lines);
    if (init.has("scale")) c.init_scale = init.real("scale");
    if (init.has("spread")) c.init_spread = init.real("spread");
    init.reject_unknown();
  }
  if (root.has("cost")) {
    Section cost(root.get("cost"), "cost", lines);
    if (cost.has("message_size_bytes")) c.cost.message_size_bytes = cost.real("message_size_bytes");
    if (cost.has("bandwidth_bytes_per_s")) c.cost.bandwidth_bytes_per_s = cost.real("bandwidth_bytes_per_s");
    if (cost.has("compute_log_mean")) c.cost.compute_log_mean = cost.real("compute_log_mean");
    if (cost.has("compute_log_sigma")) c.cost.compute_log_sigma = cost.real("compute_log_sigma");
    if (cost.has("stragglers")) {
      c.cost.stragglers = read_entries<StragglerSpec>(cost, "stragglers", lines, [](Section& e) {
        StragglerSpec s;
        if (!e.has("learner") || !e.has("slowdown")) {
          throw ConfigError(e.field("learner"), e.line("learner"), "straggler needs learner and slowdown");
        }
        s.learner = e.count("learner", 0);
        s.slowdown = e.real("slowdown");
        return s;
      });
    }
    if (cost.has("slow_links")) {
      c.cost.slow_links = read_entries<SlowLinkSpec>(cost, "slow_links", lines, [](Section& e) {
        SlowLinkSpec s;
        if (!e.has("learner") || !e.has("bandwidth_bytes_per_s")) {
          throw ConfigError(e.field("learner"), e.line("learner"), "slow link needs learner and bandwidth_bytes_per_s");
        }
        s.learner = e.count("learner", 0);
        s.bandwidth_bytes_per_s = e.real("bandwidth_bytes_per_s");
        return s;
      });
    }
    cost.reject_unknown();
  }
  if (root.has("output")) c.output = root.scalar("output");
  root.reject_unknown();

  check(c, lines);
  return c;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", 0, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

void validate_config(const ExperimentConfig& config) { check(config, LineMap{}); }

std::string echo_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "strategy: [";
  for (std::size_t i = 0; i < c.strategies.size(); ++i) out << (i ? ", " : "") << to_string(c.strategies[i]);
  out << "]\nlearners: [";
  for (std::size_t i = 0; i < c.learners.size(); ++i) out << (i ? ", " : "") << c.learners[i];
  out << "]\n";
  out << "iterations: " << c.iterations << "\n";
  out << "seed: " << c.seed << "\n";
  out << "trials: " << c.trials << "\n";
  out << "lr: " << format_number(c.lr) << "\n";
  out << "warmup_iterations: " << c.warmup_iterations << "\n";
  out << "log_interval: " << c.log_interval << "\n";
  out << "staleness: " << to_string(c.staleness) << "\n";
  out << "data: " << to_string(c.data) << "\n";
  out << "batch:\n  mode: " << to_string(c.batch_mode) << "\n  size: " << c.batch_size << "\n";
  out << "oracle:\n";
  out << "  kind: " << to_string(c.oracle.kind) << "\n";
  out << "  dimension: " << c.oracle.dimension << "\n";
  out << "  condition_number: " << format_number(c.oracle.condition_number) << "\n";
  out << "  noise_scale: " << format_number(c.oracle.noise_scale) << "\n";
  out << "  samples: " << c.oracle.samples << "\n";
  out << "  separation: " << format_number(c.oracle.separation) << "\n";
  out << "init:\n  scale: " << format_number(c.init_scale) << "\n  spread: "
      << format_number(c.init_spread) << "\n";
  out << "cost:\n";
  out << "  message_size_bytes: " << format_number(c.cost.message_size_bytes) << "\n";
  out << "  bandwidth_bytes_per_s: " << format_number(c.cost.bandwidth_bytes_per_s) << "\n";
  out << "  compute_log_mean: " << format_number(c.cost.compute_log_mean) << "\n";
  out << "  compute_log_sigma: " << format_number(c.cost.compute_log_sigma) << "\n";
  out << "  stragglers: [";
  for (std::size_t i = 0; i < c.cost.stragglers.size(); ++i) {
    out << (i ? ", " : "") << "{learner: " << c.cost.stragglers[i].learner
        << ", slowdown: " << format_number(c.cost.stragglers[i].slowdown) << "}";
  }
  out << "]\n  slow_links: [";
  for (std::size_t i = 0; i < c.cost.slow_links.size(); ++i) {
    out << (i ? ", " : "") << "{learner: " << c.cost.slow_links[i].learner
        << ", bandwidth_bytes_per_s: " << format_number(c.cost.slow_links[i].bandwidth_bytes_per_s) << "}";
  }
  out << "]\n";
  out << "output: " << quote(c.output) << "\n";
  return out.str();
}

std::size_t per_learner_batch(const ExperimentConfig& config, std::size_t learners) {
  if (config.batch_mode == BatchMode::PerLearnerFixed) return config.batch_size;
  if (learners == 0 || config.batch_size % learners != 0 || config.batch_size < learners) {
    throw ConfigError("batch.size", 0,
                      "total batch " + std::to_string(config.batch_size) +
                          " is not divisible by " + std::to_string(learners) + " learners");
  }
  return config.batch_size / learners;
}

std::unique_ptr<GradientOracle> make_oracle(const OracleSpec& spec, std::uint64_t master_seed) {
  const std::uint64_t seed = derive_seed(master_seed, {stream_tag::kOracle});
  if (spec.kind == ObjectiveKind::Logistic) {
    return logistic_oracle(spec.dimension, spec.samples, spec.separation, seed);
  }
  auto rng = make_stream(derive_seed(seed, {1}));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd optimum(static_cast<Eigen::Index>(spec.dimension));
  for (Eigen::Index i = 0; i < optimum.size(); ++i) optimum[i] = normal(rng);
  return quadratic_oracle(spec.dimension, spec.condition_number, std::move(optimum),
                          spec.noise_scale, seed);
}

TrainingConfig training_config(const ExperimentConfig& config, std::size_t learners,
                               std::size_t trial) {
  TrainingConfig t;
  t.learners = learners;
  t.iterations = config.iterations;
  t.lr = config.lr;
  t.warmup_iterations = config.warmup_iterations;
  t.batch_size = per_learner_batch(config, learners);
  t.seed = derive_seed(config.seed, {learners, trial});
  t.init_seed = derive_seed(config.seed, {stream_tag::kInit, trial});
  t.staleness = config.staleness;
  t.sharded_data = config.data == DataMode::Sharded;
  t.log_interval = config.log_interval;
  t.init_scale = config.init_scale;
  t.init_spread = config.init_spread;
  t.cost = config.cost.model(learners);
  return t;
}

std::vector<std::size_t> parse_learner_list(std::string_view text) {
  auto parse_one = [&](std::string_view part) {
    std::size_t v = 0;
    const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || res.ec != std::errc{} || res.ptr != part.data() + part.size()) {
      throw std::invalid_argument("invalid learner count '" + std::string(part) + "'");
    }
    return v;
  };
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view part = text.substr(start, comma - start);
    const std::size_t dash = part.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(parse_one(part));
    } else {
      const std::size_t lo = parse_one(part.substr(0, dash));
      const std::size_t hi = parse_one(part.substr(dash + 1));
      if (lo > hi) throw std::invalid_argument("empty learner range '" + std::string(part) + "'");
      for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
    }
    start = comma + 1;
  }
  return out;
}

std::string_view to_string(BatchMode mode) {
  return mode == BatchMode::TotalFixed ? "total-fixed" : "per-learner-fixed";
}

std::string_view to_string(DataMode mode) { return mode == DataMode::Sharded ? "sharded" : "shared"; }

}  // namespace ringmix
