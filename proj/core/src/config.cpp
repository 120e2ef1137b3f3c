#include "pcc/config.hpp"

#include "pcc/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace pcc {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    constexpr std::string_view kSpace = " \t\r\n";
    const auto first = s.find_first_not_of(kSpace);
    if (first == std::string_view::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(kSpace) - first + 1);
}

std::string unquote(std::string_view v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
        return std::string(v.substr(1, v.size() - 2));
    }
    return std::string(v);
}

// Strips a trailing '#' comment that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote != 0) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string scalar_text(const json& v) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    return v.dump();
}

void flatten(const json& node, const std::string& prefix, std::map<std::string, std::string>& out) {
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            flatten(value, prefix.empty() ? key : prefix + "." + key, out);
        }
    } else if (node.is_array()) {
        std::string joined;
        for (const auto& v : node) {
            if (!joined.empty()) joined += ",";
            joined += scalar_text(v);
        }
        out[prefix] = joined;
    } else {
        out[prefix] = scalar_text(node);
    }
}

std::string strip_list_brackets(std::string_view v) {
    v = trim(v);
    if (v.size() >= 2 && v.front() == '[' && v.back() == ']') {
        v = v.substr(1, v.size() - 2);
    }
    std::string out;
    std::string_view rest = v;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = trim(rest.substr(0, comma));
        if (!item.empty()) {
            if (!out.empty()) out += ",";
            out += unquote(item);
        }
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

class Reader {
public:
    explicit Reader(const ConfigMap& config) : config_(config) {}

    template <typename T>
    void number(const std::string& key, T& target) {
        const auto v = take(key);
        if (!v) return;
        T parsed{};
        const auto res = std::from_chars(v->data(), v->data() + v->size(), parsed);
        if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
            throw InvalidInput("config: '" + key + "' expects a number, got '" + *v + "'");
        }
        target = parsed;
    }

    void flag(const std::string& key, bool& target) {
        const auto v = take(key);
        if (!v) return;
        if (*v == "true" || *v == "1") {
            target = true;
        } else if (*v == "false" || *v == "0") {
            target = false;
        } else {
            throw InvalidInput("config: '" + key + "' expects true or false, got '" + *v + "'");
        }
    }

    std::optional<std::string> take(const std::string& key) {
        used_.insert(key);
        return config_.get(key);
    }

    void reject_unknown() const {
        for (const auto& [key, value] : config_.values()) {
            if (!used_.contains(key)) {
                throw InvalidInput("config: unknown key '" + key + "'");
            }
        }
    }

private:
    const ConfigMap& config_;
    std::set<std::string> used_;
};

void read_synth(Reader& r, SynthConfig& c) {
    r.number("synth.num_items", c.num_items);
    r.number("synth.latent_dim", c.latent_dim);
    r.number("synth.feature_dim", c.feature_dim);
    r.number("synth.observation_noise", c.observation_noise);
    r.number("synth.score_noise", c.score_noise);
    r.number("synth.num_pairs", c.num_pairs);
    r.number("synth.seed", c.seed);
    r.number("synth.dev_fraction", c.dev_fraction);
    r.number("synth.test_fraction", c.test_fraction);
    r.number("synth.positive_threshold", c.positive_threshold);
    r.number("synth.negative_threshold", c.negative_threshold);
    r.number("synth.secondary_scale_fraction", c.secondary_scale_fraction);
    r.number("synth.secondary_scale_gamma", c.secondary_scale_gamma);
}

void read_stage(Reader& r, const std::string& prefix, StageConfig& c) {
    r.number(prefix + ".learning_rate", c.learning_rate);
    r.number(prefix + ".batch_size", c.batch_size);
    r.number(prefix + ".epochs", c.epochs);
    r.number(prefix + ".seed", c.seed);
    r.number(prefix + ".eval_every", c.eval_every);
    r.flag(prefix + ".keep_last_batch", c.keep_last_batch);
    if (const auto t = r.take(prefix + ".temperature")) {
        double value = 0.0;
        const auto res = std::from_chars(t->data(), t->data() + t->size(), value);
        if (res.ec != std::errc() || res.ptr != t->data() + t->size()) {
            throw InvalidInput("config: '" + prefix + ".temperature' expects a number");
        }
        c.temperature = value;
    }
    if (const auto g = r.take(prefix + ".variance_guard")) {
        if (*g == "strict") {
            c.variance_guard = VarianceGuard::Strict;
        } else if (*g == "training") {
            c.variance_guard = VarianceGuard::Training;
        } else {
            throw InvalidInput("config: '" + prefix + ".variance_guard' must be strict or training");
        }
    }
}

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_stage(ConfigMap& m, const std::string& prefix, const StageConfig& c) {
    m.set(prefix + ".learning_rate", fmt(c.learning_rate));
    m.set(prefix + ".batch_size", std::to_string(c.batch_size));
    m.set(prefix + ".epochs", std::to_string(c.epochs));
    m.set(prefix + ".seed", std::to_string(c.seed));
    m.set(prefix + ".eval_every", std::to_string(c.eval_every));
    m.set(prefix + ".keep_last_batch", c.keep_last_batch ? "true" : "false");
    m.set(prefix + ".variance_guard", c.variance_guard == VarianceGuard::Strict ? "strict" : "training");
    if (c.temperature) {
        m.set(prefix + ".temperature", fmt(*c.temperature));
    }
}

} // namespace

ConfigMap ConfigMap::parse(std::string_view text, const std::string& source_name) {
    ConfigMap out;
    const auto body = trim(text);
    if (!body.empty() && body.front() == '{') {
        try {
            flatten(json::parse(body), "", out.values_);
        } catch (const json::parse_error& e) {
            throw ParseError(source_name, 0, std::string("invalid JSON config: ") + e.what());
        }
        return out;
    }

    std::string section;
    std::size_t number = 0;
    std::string_view rest = text;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        ++number;

        line = trim(strip_comment(line));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError(source_name, number, "unterminated section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(source_name, number, "expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ParseError(source_name, number, "empty key");
        }
        const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        out.values_[full] = (!value.empty() && value.front() == '[') ? strip_list_brackets(value) : unquote(value);
    }
    return out;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path.string(), 0, "cannot open config file");
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(text, path.string());
}

void ConfigMap::set_assignment(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw InvalidInput("expected key=value, got '" + std::string(assignment) + "'");
    }
    set(std::string(trim(assignment.substr(0, eq))), unquote(trim(assignment.substr(eq + 1))));
}

void ConfigMap::merge(const ConfigMap& overrides) {
    for (const auto& [key, value] : overrides.values_) {
        values_[key] = value;
    }
}

std::optional<std::string> ConfigMap::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::string ConfigMap::to_json() const { return json(values_).dump(2); }

SynthConfig synth_config_from(const ConfigMap& config, SynthConfig base) {
    Reader r(config);
    read_synth(r, base);
    return base;
}

StageConfig stage_config_from(const ConfigMap& config, const std::string& prefix, StageConfig base) {
    Reader r(config);
    read_stage(r, prefix, base);
    return base;
}

ExperimentConfig experiment_config_from(const ConfigMap& config) {
    ExperimentConfig c = default_experiment_config();
    Reader r(config);
    read_synth(r, c.synth);
    r.number("encoder.hidden_dim", c.encoder.hidden_dim);
    r.number("encoder.embed_dim", c.encoder.embed_dim);
    read_stage(r, "stage1", c.stage1);
    read_stage(r, "continuation", c.continuation);
    read_stage(r, "stage2", c.stage2);
    r.number("experiment.continuation_threshold", c.continuation_threshold);
    r.number("experiment.threads", c.threads);
    if (const auto seeds = r.take("experiment.seeds")) {
        c.seeds.clear();
        std::string_view rest = *seeds;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const auto item = trim(rest.substr(0, comma));
            std::uint64_t seed = 0;
            const auto res = std::from_chars(item.data(), item.data() + item.size(), seed);
            if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
                throw InvalidInput("config: 'experiment.seeds' must be a comma-separated list of integers");
            }
            c.seeds.push_back(seed);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
    }
    r.reject_unknown();

    c.encoder.input_dim = static_cast<Eigen::Index>(c.synth.feature_dim);
    c.stage1.stage = Stage::I;
    c.continuation.stage = Stage::I;
    c.stage2.stage = Stage::II;
    validate(c.stage1);
    validate(c.continuation);
    validate(c.stage2);
    if (c.seeds.empty()) {
        throw InvalidInput("config: 'experiment.seeds' is empty");
    }
    return c;
}

ConfigMap to_config_map(const ExperimentConfig& c) {
    ConfigMap m;
    m.set("synth.num_items", std::to_string(c.synth.num_items));
    m.set("synth.latent_dim", std::to_string(c.synth.latent_dim));
    m.set("synth.feature_dim", std::to_string(c.synth.feature_dim));
    m.set("synth.observation_noise", fmt(c.synth.observation_noise));
    m.set("synth.score_noise", fmt(c.synth.score_noise));
    m.set("synth.num_pairs", std::to_string(c.synth.num_pairs));
    m.set("synth.seed", std::to_string(c.synth.seed));
    m.set("synth.dev_fraction", fmt(c.synth.dev_fraction));
    m.set("synth.test_fraction", fmt(c.synth.test_fraction));
    m.set("synth.positive_threshold", fmt(c.synth.positive_threshold));
    m.set("synth.negative_threshold", fmt(c.synth.negative_threshold));
    m.set("synth.secondary_scale_fraction", fmt(c.synth.secondary_scale_fraction));
    m.set("synth.secondary_scale_gamma", fmt(c.synth.secondary_scale_gamma));
    m.set("encoder.hidden_dim", std::to_string(c.encoder.hidden_dim));
    m.set("encoder.embed_dim", std::to_string(c.encoder.embed_dim));
    write_stage(m, "stage1", c.stage1);
    write_stage(m, "continuation", c.continuation);
    write_stage(m, "stage2", c.stage2);
    m.set("experiment.continuation_threshold", fmt(c.continuation_threshold));
    m.set("experiment.threads", std::to_string(c.threads));
    std::string seeds;
    for (auto s : c.seeds) {
        if (!seeds.empty()) seeds += ",";
        seeds += std::to_string(s);
    }
    m.set("experiment.seeds", seeds);
    return m;
}

} // namespace pcc
