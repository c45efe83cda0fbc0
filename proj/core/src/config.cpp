#include "linflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace linflow {

namespace {

struct Value {
    enum class Type { boolean, integer, real, string, array };
    Type type = Type::string;
    bool b = false;
    long long i = 0;
    double d = 0.0;
    std::string s;
    std::vector<Value> items;
};

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Strips a trailing comment, honouring quoted strings.
std::string strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
    }
    return std::string(line);
}

Value parse_value(std::string_view raw, const std::string& where);

Value parse_array(std::string_view raw, const std::string& where) {
    Value v;
    v.type = Value::Type::array;
    std::string_view inner = raw.substr(1, raw.size() - 2);
    int depth = 0;
    bool quoted = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= inner.size(); ++i) {
        const bool at_end = i == inner.size();
        const char c = at_end ? ',' : inner[i];
        if (!at_end && c == '"') quoted = !quoted;
        if (quoted) continue;
        if (c == '[') ++depth;
        if (c == ']') --depth;
        if (c == ',' && depth == 0) {
            std::string item = trim(inner.substr(start, i - start));
            if (!item.empty()) v.items.push_back(parse_value(item, where));
            start = i + 1;
        }
    }
    return v;
}

Value parse_value(std::string_view raw, const std::string& where) {
    std::string text = trim(raw);
    if (text.empty()) throw ConfigError(where + ": empty value");
    if (text.front() == '[') {
        if (text.back() != ']') throw ConfigError(where + ": unterminated array");
        return parse_array(text, where);
    }
    Value v;
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"') throw ConfigError(where + ": unterminated string");
        v.type = Value::Type::string;
        v.s = text.substr(1, text.size() - 2);
        return v;
    }
    if (text == "true" || text == "false") {
        v.type = Value::Type::boolean;
        v.b = text == "true";
        return v;
    }
    {
        long long out = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
        if (ec == std::errc() && ptr == text.data() + text.size()) {
            v.type = Value::Type::integer;
            v.i = out;
            return v;
        }
    }
    {
        char* end = nullptr;
        const double out = std::strtod(text.c_str(), &end);
        if (end == text.c_str() + text.size()) {
            v.type = Value::Type::real;
            v.d = out;
            return v;
        }
    }
    v.type = Value::Type::string;
    v.s = std::move(text);
    return v;
}

long long as_int(const Value& v, const std::string& key) {
    if (v.type != Value::Type::integer) throw ConfigError(key + ": expected an integer");
    return v.i;
}

double as_real(const Value& v, const std::string& key) {
    if (v.type == Value::Type::integer) return static_cast<double>(v.i);
    if (v.type != Value::Type::real) throw ConfigError(key + ": expected a number");
    return v.d;
}

bool as_bool(const Value& v, const std::string& key) {
    if (v.type != Value::Type::boolean) throw ConfigError(key + ": expected true or false");
    return v.b;
}

std::string as_string(const Value& v, const std::string& key) {
    if (v.type != Value::Type::string) throw ConfigError(key + ": expected a string");
    return v.s;
}

// Raw entries in file/override order, keyed "section.key" ("" section for
// top-level keys). Later entries win.
using EntryMap = std::map<std::string, Value>;

void parse_into(std::string_view text, EntryMap& entries) {
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view raw_line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        std::string line = trim(strip_comment(raw_line));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": missing key");
        std::string full = section.empty() ? key : section + "." + key;
        entries[full] = parse_value(std::string_view(line).substr(eq + 1), where + " (" + full + ")");
    }
}

const Value* find(const EntryMap& entries, const std::string& key) {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
}

ContextSchema parse_context(const std::string& text) {
    if (text == "none") return {};
    constexpr std::string_view prefix = "categorical:";
    if (text.rfind(prefix, 0) == 0) {
        const std::string count = text.substr(prefix.size());
        char* end = nullptr;
        const long k = std::strtol(count.c_str(), &end, 10);
        if (end != count.c_str() + count.size() || k < 2) {
            throw ConfigError("context: categorical needs a category count >= 2");
        }
        return {ContextSchema::Kind::categorical, static_cast<int>(k)};
    }
    throw ConfigError("context: expected \"none\" or \"categorical:<k>\"");
}

ParsedConfig build(const EntryMap& entries) {
    ParsedConfig parsed;
    ExperimentConfig& cfg = parsed.experiment;

    static const std::vector<std::string> known = {
        "pages", "candidates", "context", "alpha1", "alpha_c", "alpha2", "base_rate", "steps",
        "batch_size", "runs", "seed", "agents", "learner_beta", "regret_mode",
        "dump_ground_truth", "dump_run_state", "workers",
        "bandits.prior_mean", "bandits.prior_var", "bandits.context_main_on_later_pages",
        "q_learning.learning_rate", "q_learning.discount", "q_learning.epsilon_start",
        "q_learning.epsilon_end",
        "forms.page1", "forms.page_i", "forms.incompatible",
        "sweep.axis", "sweep.values"};
    for (const auto& [key, value] : entries) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown key '" + key + "'");
        }
    }

    // Flow shape: scalar candidates replicate per page; an explicit list
    // also fixes the page count.
    int pages = 3;
    if (const Value* v = find(entries, "pages")) pages = static_cast<int>(as_int(*v, "pages"));
    std::vector<int> candidates;
    if (const Value* v = find(entries, "candidates")) {
        if (v->type == Value::Type::array) {
            for (const Value& item : v->items) {
                candidates.push_back(static_cast<int>(as_int(item, "candidates")));
            }
            if (find(entries, "pages") && static_cast<int>(candidates.size()) != pages) {
                throw ConfigError("candidates: list length must equal pages");
            }
            pages = static_cast<int>(candidates.size());
        } else {
            candidates.assign(static_cast<std::size_t>(std::max(pages, 0)),
                              static_cast<int>(as_int(*v, "candidates")));
        }
    } else {
        candidates.assign(static_cast<std::size_t>(std::max(pages, 0)), 3);
    }
    cfg.shape = {pages, std::move(candidates)};

    if (const Value* v = find(entries, "context")) cfg.ctx = parse_context(as_string(*v, "context"));
    if (const Value* v = find(entries, "alpha1")) cfg.alpha1 = as_real(*v, "alpha1");
    if (const Value* v = find(entries, "alpha_c")) cfg.alpha_c = as_real(*v, "alpha_c");
    if (const Value* v = find(entries, "alpha2")) cfg.alpha2 = as_real(*v, "alpha2");
    if (const Value* v = find(entries, "base_rate")) cfg.base_rate = as_real(*v, "base_rate");
    if (const Value* v = find(entries, "steps")) cfg.steps = static_cast<int>(as_int(*v, "steps"));
    if (const Value* v = find(entries, "batch_size")) cfg.batch_size = static_cast<int>(as_int(*v, "batch_size"));
    if (const Value* v = find(entries, "runs")) cfg.runs = static_cast<int>(as_int(*v, "runs"));
    if (const Value* v = find(entries, "seed")) cfg.seed = static_cast<std::uint64_t>(as_int(*v, "seed"));
    if (const Value* v = find(entries, "workers")) cfg.workers = static_cast<int>(as_int(*v, "workers"));
    if (const Value* v = find(entries, "learner_beta")) cfg.bandit_options.beta = as_real(*v, "learner_beta");
    if (const Value* v = find(entries, "dump_ground_truth")) cfg.dump_ground_truth = as_bool(*v, "dump_ground_truth");
    if (const Value* v = find(entries, "dump_run_state")) cfg.dump_run_state = as_bool(*v, "dump_run_state");

    if (const Value* v = find(entries, "regret_mode")) {
        const std::string mode = as_string(*v, "regret_mode");
        if (mode == "realized") {
            cfg.regret_mode = RegretMode::realized;
        } else if (mode == "expected") {
            cfg.regret_mode = RegretMode::expected;
        } else {
            throw ConfigError("regret_mode: expected \"realized\" or \"expected\"");
        }
    }

    if (const Value* v = find(entries, "agents")) {
        if (v->type != Value::Type::array) throw ConfigError("agents: expected an array of names");
        cfg.agents.clear();
        for (const Value& item : v->items) {
            try {
                cfg.agents.push_back(parse_agent_kind(as_string(item, "agents")));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("agents: ") + e.what());
            }
        }
    }

    if (const Value* v = find(entries, "bandits.prior_mean")) {
        cfg.bandit_options.prior_mean = as_real(*v, "bandits.prior_mean");
    }
    if (const Value* v = find(entries, "bandits.prior_var")) {
        cfg.bandit_options.prior_variance = as_real(*v, "bandits.prior_var");
    }
    if (const Value* v = find(entries, "bandits.context_main_on_later_pages")) {
        cfg.bandit_options.form_options.context_main_on_later_pages =
            as_bool(*v, "bandits.context_main_on_later_pages");
    }

    if (const Value* v = find(entries, "q_learning.learning_rate")) {
        cfg.q_config.learning_rate = as_real(*v, "q_learning.learning_rate");
    }
    if (const Value* v = find(entries, "q_learning.discount")) {
        cfg.q_config.discount = as_real(*v, "q_learning.discount");
    }
    if (const Value* v = find(entries, "q_learning.epsilon_start")) {
        cfg.q_config.epsilon_start = as_real(*v, "q_learning.epsilon_start");
    }
    if (const Value* v = find(entries, "q_learning.epsilon_end")) {
        cfg.q_config.epsilon_end = as_real(*v, "q_learning.epsilon_end");
    }

    for (const char* key : {"forms.page1", "forms.page_i"}) {
        if (const Value* v = find(entries, key)) {
            try {
                TermSet terms = parse_formula(as_string(*v, key));
                if (std::string_view(key) == "forms.page1") {
                    cfg.bandit_options.form_options.page1_terms = terms;
                } else {
                    cfg.bandit_options.form_options.later_terms = terms;
                }
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string(key) + ": " + e.what());
            }
        }
    }

    if (const Value* v = find(entries, "forms.incompatible")) {
        if (v->type != Value::Type::array) {
            throw ConfigError("forms.incompatible: expected [[prev, cur], ...] with 1-based indices");
        }
        std::vector<std::pair<int, int>> pairs;
        for (const Value& item : v->items) {
            if (item.type != Value::Type::array || item.items.size() != 2) {
                throw ConfigError("forms.incompatible: each entry needs exactly [prev, cur]");
            }
            const int prev = static_cast<int>(as_int(item.items[0], "forms.incompatible"));
            const int cur = static_cast<int>(as_int(item.items[1], "forms.incompatible"));
            if (prev < 1 || cur < 1) throw ConfigError("forms.incompatible: indices are 1-based");
            pairs.emplace_back(prev - 1, cur - 1);
        }
        if (!pairs.empty()) {
            cfg.constraints.incompatible.assign(static_cast<std::size_t>(cfg.shape.pages), {});
            for (int page = 1; page < cfg.shape.pages; ++page) {
                cfg.constraints.incompatible[static_cast<std::size_t>(page)] = pairs;
            }
        }
    }

    if (const Value* axis = find(entries, "sweep.axis")) {
        SweepAxis sweep_axis;
        const std::string name = as_string(*axis, "sweep.axis");
        if (name == "pages") {
            sweep_axis.kind = SweepAxis::Kind::pages;
            sweep_axis.values = {2, 3, 4, 5, 6};
        } else if (name == "alpha2") {
            sweep_axis.kind = SweepAxis::Kind::alpha2;
            sweep_axis.values = {0, 1, 2, 3};
        } else {
            throw ConfigError("sweep.axis: expected \"pages\" or \"alpha2\"");
        }
        if (const Value* v = find(entries, "sweep.values")) {
            if (v->type != Value::Type::array || v->items.empty()) {
                throw ConfigError("sweep.values: expected a nonempty array");
            }
            sweep_axis.values.clear();
            for (const Value& item : v->items) {
                sweep_axis.values.push_back(as_real(item, "sweep.values"));
            }
        }
        parsed.sweep = std::move(sweep_axis);
    } else if (find(entries, "sweep.values")) {
        throw ConfigError("sweep.values: needs sweep.axis");
    }

    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return parsed;
}

}  // namespace

ParsedConfig parse_config(std::string_view text, std::span<const std::string> overrides) {
    EntryMap entries;
    parse_into(text, entries);
    for (const std::string& assignment : overrides) {
        auto eq = assignment.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + assignment + "': expected key=value");
        }
        const std::string key = trim(std::string_view(assignment).substr(0, eq));
        if (key.empty()) throw ConfigError("override '" + assignment + "': missing key");
        entries[key] = parse_value(std::string_view(assignment).substr(eq + 1),
                                   "override " + key);
    }
    return build(entries);
}

ParsedConfig load_config(const std::optional<std::filesystem::path>& path,
                         std::span<const std::string> overrides) {
    std::string text;
    if (path) {
        std::ifstream in(*path);
        if (!in) throw ConfigError("cannot read config file " + path->string());
        std::ostringstream buffer;
        buffer << in.rdbuf();
        text = buffer.str();
    }
    return parse_config(text, overrides);
}

}  // namespace linflow
