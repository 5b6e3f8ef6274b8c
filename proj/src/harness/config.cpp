#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "steersman/error.hpp"
#include "steersman/harness.hpp"

namespace steersman::harness {

env::LibraryOptions ExperimentConfig::library_options() const {
    env::LibraryOptions o;
    o.plate = plate;
    o.conditions = conditions;
    o.modes = modes;
    o.sensors = sensors;
    o.delta = correlation_length;
    o.c2 = noise;
    return o;
}

env::EnvConfig ExperimentConfig::env_config() const {
    env::EnvConfig e;
    e.conditions = train_conditions;
    e.sensors = sensors;
    e.modes = modes;
    e.episode_length = episode_length;
    e.observe_condition = observe_condition;
    e.seed = seed;
    return e;
}

agent::TrainConfig ExperimentConfig::train_config() const {
    agent::TrainConfig t = agent;
    t.seed = seed;
    return t;
}

std::vector<std::string> ExperimentConfig::labels() const {
    std::vector<std::string> out;
    for (const auto& c : conditions) out.push_back(c.label);
    return out;
}

namespace {

class Reader {
public:
    std::vector<std::string> errors;

    void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> known) {
        if (!node.IsMap()) return;
        std::set<std::string> allowed(known.begin(), known.end());
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) errors.push_back(fmt::format("unknown key '{}{}'", where, key));
        }
    }

    template <typename T>
    void required(const YAML::Node& node, const std::string& where, const char* key, T& out) {
        if (!node.IsMap() || !node[key]) {
            errors.push_back(fmt::format("missing required field '{}{}'", where, key));
            return;
        }
        read(node[key], where + key, out);
    }

    template <typename T>
    void optional(const YAML::Node& node, const std::string& where, const char* key, T& out) {
        if (node.IsMap() && node[key]) read(node[key], where + key, out);
    }

    template <typename T>
    void read(const YAML::Node& value, const std::string& name, T& out) {
        try {
            out = value.as<T>();
        } catch (const YAML::Exception&) {
            errors.push_back(fmt::format("field '{}' has an invalid value", name));
        }
    }

    YAML::Node section(const YAML::Node& node, const char* key, bool needed) {
        if (!node.IsMap() || !node[key]) {
            if (needed) errors.push_back(fmt::format("missing required field '{}'", key));
            return YAML::Node(YAML::NodeType::Map);
        }
        if (!node[key].IsMap()) {
            errors.push_back(fmt::format("field '{}' must be a mapping", key));
            return YAML::Node(YAML::NodeType::Map);
        }
        return node[key];
    }
};

void read_plate(Reader& r, const YAML::Node& n, modal::PlateSpec& p) {
    r.check_keys(n, "plate.", {"length", "width", "thickness", "clamp_depth", "density", "youngs_modulus",
                               "poisson_ratio", "grid_cols", "grid_rows"});
    r.optional(n, "plate.", "length", p.length);
    r.optional(n, "plate.", "width", p.width);
    r.optional(n, "plate.", "thickness", p.thickness);
    r.optional(n, "plate.", "clamp_depth", p.clamp_depth);
    r.optional(n, "plate.", "density", p.density);
    r.optional(n, "plate.", "youngs_modulus", p.youngs_modulus);
    r.optional(n, "plate.", "poisson_ratio", p.poisson_ratio);
    r.required(n, "plate.", "grid_cols", p.grid_cols);
    r.required(n, "plate.", "grid_rows", p.grid_rows);
}

void read_conditions(Reader& r, const YAML::Node& root, std::vector<modal::ConditionSpec>& out) {
    if (!root.IsMap() || !root["conditions"]) {
        r.errors.emplace_back("missing required field 'conditions'");
        return;
    }
    const auto list = root["conditions"];
    if (!list.IsSequence() || list.size() == 0) {
        r.errors.emplace_back("field 'conditions' must be a non-empty list");
        return;
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto where = fmt::format("conditions[{}].", i);
        const auto& item = list[i];
        if (!item.IsMap()) {
            r.errors.push_back(fmt::format("'conditions[{}]' must be a mapping", i));
            continue;
        }
        r.check_keys(item, where, {"label", "masses"});
        modal::ConditionSpec c;
        r.required(item, where, "label", c.label);
        if (item["masses"]) {
            const auto masses = item["masses"];
            if (!masses.IsSequence()) {
                r.errors.push_back(fmt::format("field '{}masses' must be a list", where));
            } else {
                for (std::size_t k = 0; k < masses.size(); ++k) {
                    const auto mw = fmt::format("{}masses[{}].", where, k);
                    r.check_keys(masses[k], mw, {"mass", "x", "y"});
                    modal::PointMass pm;
                    r.required(masses[k], mw, "mass", pm.mass);
                    r.required(masses[k], mw, "x", pm.x);
                    r.required(masses[k], mw, "y", pm.y);
                    c.masses.push_back(pm);
                }
            }
        }
        out.push_back(std::move(c));
    }
}

void read_agent(Reader& r, const YAML::Node& n, agent::TrainConfig& a) {
    r.check_keys(n, "agent.", {"gamma", "target_sync_period", "learning_rate", "adam_epsilon", "max_grad_norm",
                               "epsilon_start", "epsilon_final", "epsilon_anneal_steps", "epochs", "epoch_steps",
                               "test_episodes", "test_epsilon", "batch_size", "buffer_capacity", "warmup_steps",
                               "priority_exponent", "beta_start", "beta_final", "multi_step", "hidden", "support",
                               "checkpoint_every"});
    r.optional(n, "agent.", "gamma", a.gamma);
    r.optional(n, "agent.", "target_sync_period", a.target_sync_period);
    r.required(n, "agent.", "learning_rate", a.learning_rate);
    r.optional(n, "agent.", "adam_epsilon", a.adam_epsilon);
    r.optional(n, "agent.", "max_grad_norm", a.max_grad_norm);
    r.optional(n, "agent.", "epsilon_start", a.epsilon_start);
    r.optional(n, "agent.", "epsilon_final", a.epsilon_final);
    r.optional(n, "agent.", "epsilon_anneal_steps", a.epsilon_anneal_steps);
    r.required(n, "agent.", "epochs", a.epochs);
    r.optional(n, "agent.", "epoch_steps", a.epoch_steps);
    r.optional(n, "agent.", "test_episodes", a.test_episodes);
    r.optional(n, "agent.", "test_epsilon", a.test_epsilon);
    r.optional(n, "agent.", "batch_size", a.batch_size);
    r.optional(n, "agent.", "buffer_capacity", a.buffer_capacity);
    r.optional(n, "agent.", "warmup_steps", a.warmup_steps);
    r.required(n, "agent.", "priority_exponent", a.priority_exponent);
    r.optional(n, "agent.", "beta_start", a.beta_start);
    r.optional(n, "agent.", "beta_final", a.beta_final);
    r.required(n, "agent.", "multi_step", a.multi_step);
    r.required(n, "agent.", "hidden", a.hidden);
    r.optional(n, "agent.", "checkpoint_every", a.checkpoint_every);
    if (n.IsMap() && n["support"]) {
        const auto s = n["support"];
        r.check_keys(s, "agent.support.", {"atoms", "v_min", "v_max"});
        r.optional(s, "agent.support.", "atoms", a.support.atom_count);
        r.optional(s, "agent.support.", "v_min", a.support.v_min);
        r.optional(s, "agent.support.", "v_max", a.support.v_max);
    }
}

void validate(const ExperimentConfig& c, std::vector<std::string>& errors) {
    try {
        c.plate.validate();
    } catch (const Error& e) {
        errors.push_back(e.what());
    }
    if (c.sensors < 1) errors.emplace_back("sensors must be at least 1");
    if (c.modes < 1) errors.emplace_back("modes must be at least 1");
    if (c.sensors > c.plate.grid_cols)
        errors.push_back(fmt::format("sensors ({}) exceeds grid columns ({})", c.sensors, c.plate.grid_cols));
    if (c.sensors >= 1 && c.modes > c.sensors)
        errors.push_back(fmt::format("modes ({}) exceeds sensors ({}): every placement would be rank deficient",
                                     c.modes, c.sensors));
    if (!(c.correlation_length > 0.0)) errors.emplace_back("covariance.correlation_length must be positive");
    if (c.noise < 0.0) errors.emplace_back("covariance.noise must be non-negative");
    if (c.episode_length < 1) errors.emplace_back("env.episode_length must be positive");

    std::set<std::string> labels;
    for (const auto& cond : c.conditions) {
        if (cond.label.empty()) errors.emplace_back("condition label must not be empty");
        if (!labels.insert(cond.label).second) errors.push_back(fmt::format("condition '{}' defined more than once", cond.label));
        for (const auto& m : cond.masses) {
            if (!(m.mass > 0.0)) errors.push_back(fmt::format("condition '{}': mass must be positive", cond.label));
            if (m.x <= c.plate.clamp_depth || m.x > c.plate.length || m.y < 0.0 || m.y > c.plate.width)
                errors.push_back(fmt::format("condition '{}': mass at ({}, {}) lies outside the free plate region",
                                             cond.label, m.x, m.y));
        }
    }
    for (const auto& l : c.train_conditions)
        if (!labels.count(l)) errors.push_back(fmt::format("env.conditions references undefined condition '{}'", l));

    try {
        c.agent.validate();
    } catch (const Error& e) {
        errors.push_back(e.what());
    }
    if (c.agent.hidden.empty()) errors.emplace_back("agent.hidden must list at least one layer width");
    for (int h : c.agent.hidden)
        if (h < 1) errors.emplace_back("agent.hidden widths must be positive");
    if (c.agent.checkpoint_every < 1) errors.emplace_back("agent.checkpoint_every must be positive");
    if (c.eval.greedy_episodes < 1) errors.emplace_back("eval.greedy_episodes must be positive");
    if (c.eval.random_seeds < 1) errors.emplace_back("eval.random_seeds must be positive");
    if (c.eval.steps < 1) errors.emplace_back("eval.steps must be positive");
    for (int s : c.eval.snapshot_steps)
        if (s < 0 || s > c.eval.steps) errors.push_back(fmt::format("eval.snapshot_steps entry {} outside [0, eval.steps]", s));
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(fmt::format("{}: malformed YAML: {}", origin, e.what()));
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError(origin + ": top level must be a mapping");

    Reader r;
    ExperimentConfig c;
    r.check_keys(root, "", {"name", "seed", "plate", "conditions", "sensors", "modes", "covariance", "env", "agent",
                            "run", "eval", "output"});
    r.optional(root, "", "name", c.name);
    r.required(root, "", "seed", c.seed);
    read_plate(r, r.section(root, "plate", true), c.plate);
    read_conditions(r, root, c.conditions);
    r.required(root, "", "sensors", c.sensors);
    r.required(root, "", "modes", c.modes);

    const auto cov = r.section(root, "covariance", false);
    r.check_keys(cov, "covariance.", {"correlation_length", "noise"});
    r.optional(cov, "covariance.", "correlation_length", c.correlation_length);
    r.optional(cov, "covariance.", "noise", c.noise);

    const auto env = r.section(root, "env", false);
    r.check_keys(env, "env.", {"episode_length", "observe_condition", "conditions"});
    r.optional(env, "env.", "episode_length", c.episode_length);
    r.optional(env, "env.", "observe_condition", c.observe_condition);
    r.optional(env, "env.", "conditions", c.train_conditions);

    read_agent(r, r.section(root, "agent", true), c.agent);

    const auto run = r.section(root, "run", false);
    r.check_keys(run, "run.", {"record_wall_time"});
    r.optional(run, "run.", "record_wall_time", c.record_wall_time);

    const auto ev = r.section(root, "eval", false);
    r.check_keys(ev, "eval.", {"greedy_episodes", "random_seeds", "steps", "snapshot_steps"});
    r.optional(ev, "eval.", "greedy_episodes", c.eval.greedy_episodes);
    r.optional(ev, "eval.", "random_seeds", c.eval.random_seeds);
    r.optional(ev, "eval.", "steps", c.eval.steps);
    r.optional(ev, "eval.", "snapshot_steps", c.eval.snapshot_steps);
    r.optional(root, "", "output", c.output);

    if (r.errors.empty()) validate(c, r.errors);
    if (!r.errors.empty()) {
        std::string msg = fmt::format("{}: {} configuration problem{}:", origin, r.errors.size(),
                                      r.errors.size() == 1 ? "" : "s");
        for (const auto& e : r.errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    c.agent.seed = c.seed;
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.string());
}

namespace {

void emit_network_fields(YAML::Emitter& out, const ExperimentConfig& c) {
    out << YAML::Key << "plate" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "length" << YAML::Value << format_double(c.plate.length);
    out << YAML::Key << "width" << YAML::Value << format_double(c.plate.width);
    out << YAML::Key << "thickness" << YAML::Value << format_double(c.plate.thickness);
    out << YAML::Key << "clamp_depth" << YAML::Value << format_double(c.plate.clamp_depth);
    out << YAML::Key << "density" << YAML::Value << format_double(c.plate.density);
    out << YAML::Key << "youngs_modulus" << YAML::Value << format_double(c.plate.youngs_modulus);
    out << YAML::Key << "poisson_ratio" << YAML::Value << format_double(c.plate.poisson_ratio);
    out << YAML::Key << "grid_cols" << YAML::Value << c.plate.grid_cols;
    out << YAML::Key << "grid_rows" << YAML::Value << c.plate.grid_rows;
    out << YAML::EndMap;

    out << YAML::Key << "conditions" << YAML::Value << YAML::BeginSeq;
    for (const auto& cond : c.conditions) {
        out << YAML::BeginMap << YAML::Key << "label" << YAML::Value << cond.label;
        out << YAML::Key << "masses" << YAML::Value << YAML::BeginSeq;
        for (const auto& m : cond.masses) {
            out << YAML::Flow << YAML::BeginMap;
            out << YAML::Key << "mass" << YAML::Value << format_double(m.mass);
            out << YAML::Key << "x" << YAML::Value << format_double(m.x);
            out << YAML::Key << "y" << YAML::Value << format_double(m.y);
            out << YAML::EndMap;
        }
        out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "sensors" << YAML::Value << c.sensors;
    out << YAML::Key << "modes" << YAML::Value << c.modes;
    out << YAML::Key << "covariance" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "correlation_length" << YAML::Value << format_double(c.correlation_length);
    out << YAML::Key << "noise" << YAML::Value << format_double(c.noise);
    out << YAML::EndMap;
    out << YAML::Key << "env" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "episode_length" << YAML::Value << c.episode_length;
    out << YAML::Key << "observe_condition" << YAML::Value << c.observe_condition;
    out << YAML::Key << "conditions" << YAML::Value << YAML::Flow << c.train_conditions;
    out << YAML::EndMap;

    const auto& a = c.agent;
    out << YAML::Key << "agent" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "gamma" << YAML::Value << format_double(a.gamma);
    out << YAML::Key << "target_sync_period" << YAML::Value << a.target_sync_period;
    out << YAML::Key << "learning_rate" << YAML::Value << format_double(a.learning_rate);
    out << YAML::Key << "adam_epsilon" << YAML::Value << format_double(a.adam_epsilon);
    out << YAML::Key << "max_grad_norm" << YAML::Value << format_double(a.max_grad_norm);
    out << YAML::Key << "epsilon_start" << YAML::Value << format_double(a.epsilon_start);
    out << YAML::Key << "epsilon_final" << YAML::Value << format_double(a.epsilon_final);
    out << YAML::Key << "epsilon_anneal_steps" << YAML::Value << a.epsilon_anneal_steps;
    out << YAML::Key << "epochs" << YAML::Value << a.epochs;
    out << YAML::Key << "epoch_steps" << YAML::Value << a.epoch_steps;
    out << YAML::Key << "test_episodes" << YAML::Value << a.test_episodes;
    out << YAML::Key << "test_epsilon" << YAML::Value << format_double(a.test_epsilon);
    out << YAML::Key << "batch_size" << YAML::Value << a.batch_size;
    out << YAML::Key << "buffer_capacity" << YAML::Value << a.buffer_capacity;
    out << YAML::Key << "warmup_steps" << YAML::Value << a.warmup_steps;
    out << YAML::Key << "priority_exponent" << YAML::Value << format_double(a.priority_exponent);
    out << YAML::Key << "beta_start" << YAML::Value << format_double(a.beta_start);
    out << YAML::Key << "beta_final" << YAML::Value << format_double(a.beta_final);
    out << YAML::Key << "multi_step" << YAML::Value << a.multi_step;
    out << YAML::Key << "hidden" << YAML::Value << YAML::Flow << a.hidden;
    out << YAML::Key << "support" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "atoms" << YAML::Value << a.support.atom_count;
    out << YAML::Key << "v_min" << YAML::Value << format_double(a.support.v_min);
    out << YAML::Key << "v_max" << YAML::Value << format_double(a.support.v_max);
    out << YAML::EndMap;
    out << YAML::Key << "checkpoint_every" << YAML::Value << a.checkpoint_every;
    out << YAML::EndMap;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

}  // namespace

std::string canonical_text(const ExperimentConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    if (!c.name.empty()) out << YAML::Key << "name" << YAML::Value << c.name;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    emit_network_fields(out, c);
    out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "record_wall_time" << YAML::Value << c.record_wall_time;
    out << YAML::EndMap;
    out << YAML::Key << "eval" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "greedy_episodes" << YAML::Value << c.eval.greedy_episodes;
    out << YAML::Key << "random_seeds" << YAML::Value << c.eval.random_seeds;
    out << YAML::Key << "steps" << YAML::Value << c.eval.steps;
    out << YAML::Key << "snapshot_steps" << YAML::Value << YAML::Flow << c.eval.snapshot_steps;
    out << YAML::EndMap;
    if (!c.output.empty()) out << YAML::Key << "output" << YAML::Value << c.output;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::string config_digest(const ExperimentConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    emit_network_fields(out, c);
    out << YAML::EndMap;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : std::string(out.c_str())) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return hex64(h);
}

}  // namespace steersman::harness
