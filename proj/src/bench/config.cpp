#include "gridcast/bench/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gridcast/bench/toml.hpp"

namespace gridcast::bench {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& why) {
    throw ConfigError("config: " + context + ": " + why);
}

const json& expect_table(const json& doc, const std::string& context) {
    if (!doc.is_object()) fail(context, "expected a table");
    return doc;
}

void check_keys(const json& obj, const std::string& context, std::set<std::string> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) fail(context, "unknown key '" + it.key() + "'");
    }
}

std::string as_string(const json& v, const std::string& context) {
    if (!v.is_string()) fail(context, "expected a string");
    return v.get<std::string>();
}

double as_double(const json& v, const std::string& context) {
    if (!v.is_number()) fail(context, "expected a number");
    return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& context) {
    if (!v.is_number_integer()) fail(context, "expected an integer");
    return v.get<std::int64_t>();
}

std::size_t as_size(const json& v, const std::string& context) {
    auto i = as_int(v, context);
    if (i < 0) fail(context, "must be non-negative");
    return static_cast<std::size_t>(i);
}

bool as_bool(const json& v, const std::string& context) {
    if (!v.is_boolean()) fail(context, "expected true or false");
    return v.get<bool>();
}

template <typename T, typename Fn>
void maybe(const json& obj, const std::string& key, const std::string& context, T& out, Fn cast) {
    if (obj.contains(key)) out = cast(obj.at(key), context + "." + key);
}

SynthSpec parse_channel(const json& entry, const std::string& context) {
    expect_table(entry, context);
    check_keys(entry, context,
               {"name", "n_hours", "base_level", "noise_std", "seed", "seasonal", "trend",
                "jumps"});
    SynthSpec spec;
    if (!entry.contains("name")) fail(context, "missing 'name'");
    spec.name = as_string(entry.at("name"), context + ".name");
    if (!entry.contains("n_hours")) fail(context, "missing 'n_hours'");
    spec.n_hours = as_size(entry.at("n_hours"), context + ".n_hours");
    maybe(entry, "base_level", context, spec.base_level, as_double);
    maybe(entry, "noise_std", context, spec.noise_std, as_double);
    if (entry.contains("seed"))
        spec.seed = static_cast<std::uint64_t>(as_int(entry.at("seed"), context + ".seed"));

    if (entry.contains("seasonal")) {
        const auto& arr = entry.at("seasonal");
        if (!arr.is_array()) fail(context + ".seasonal", "expected an array of tables");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string sctx = context + ".seasonal[" + std::to_string(i) + "]";
            expect_table(arr[i], sctx);
            check_keys(arr[i], sctx, {"period", "amplitude", "phase"});
            Seasonal s;
            maybe(arr[i], "period", sctx, s.period, as_double);
            maybe(arr[i], "amplitude", sctx, s.amplitude, as_double);
            maybe(arr[i], "phase", sctx, s.phase, as_double);
            spec.seasonals.push_back(s);
        }
    }
    if (entry.contains("trend")) {
        const auto& arr = entry.at("trend");
        if (!arr.is_array()) fail(context + ".trend", "expected an array of tables");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string tctx = context + ".trend[" + std::to_string(i) + "]";
            expect_table(arr[i], tctx);
            check_keys(arr[i], tctx, {"length", "slope"});
            TrendSegment t;
            if (!arr[i].contains("length")) fail(tctx, "missing 'length'");
            t.length = as_size(arr[i].at("length"), tctx + ".length");
            maybe(arr[i], "slope", tctx, t.slope, as_double);
            spec.trend_segments.push_back(t);
        }
    }
    if (entry.contains("jumps")) {
        const auto& j = entry.at("jumps");
        const std::string jctx = context + ".jumps";
        expect_table(j, jctx);
        check_keys(j, jctx, {"rate", "magnitude_mean", "magnitude_std", "half_life"});
        maybe(j, "rate", jctx, spec.jumps.rate, as_double);
        maybe(j, "magnitude_mean", jctx, spec.jumps.magnitude_mean, as_double);
        maybe(j, "magnitude_std", jctx, spec.jumps.magnitude_std, as_double);
        maybe(j, "half_life", jctx, spec.jumps.half_life, as_double);
    }
    return spec;
}

ModelEntry parse_model(const json& entry, const std::string& context) {
    expect_table(entry, context);
    check_keys(entry, context,
               {"name", "kind", "kernel_size", "n_blocks", "hidden_dim", "patch_len", "stride",
                "d_model", "n_layers", "n_heads", "ff_dim", "p", "d", "q", "command", "timeout"});
    ModelEntry m;
    if (!entry.contains("kind")) fail(context, "missing 'kind'");
    m.kind = as_string(entry.at("kind"), context + ".kind");
    m.name = entry.contains("name") ? as_string(entry.at("name"), context + ".name") : m.kind;

    maybe(entry, "kernel_size", context, m.kernel_size, as_size);
    maybe(entry, "n_blocks", context, m.n_blocks, as_size);
    maybe(entry, "hidden_dim", context, m.hidden_dim, as_size);
    maybe(entry, "patch_len", context, m.patch_len, as_size);
    maybe(entry, "stride", context, m.patch_stride, as_size);
    maybe(entry, "d_model", context, m.d_model, as_size);
    maybe(entry, "n_layers", context, m.n_layers, as_size);
    maybe(entry, "n_heads", context, m.n_heads, as_size);
    maybe(entry, "ff_dim", context, m.ff_dim, as_size);
    maybe(entry, "p", context, m.order.p, as_size);
    maybe(entry, "d", context, m.order.d, as_size);
    maybe(entry, "q", context, m.order.q, as_size);

    if (entry.contains("command")) {
        const auto& arr = entry.at("command");
        if (!arr.is_array() || arr.empty()) fail(context + ".command", "expected a string array");
        for (const auto& part : arr)
            m.external.command.push_back(as_string(part, context + ".command"));
    }
    maybe(entry, "timeout", context, m.external.timeout_seconds, as_double);
    m.external.name = m.name;
    return m;
}

bool known_kind(const std::string& kind) {
    static const std::set<std::string> kinds = {"nlinear", "dlinear",  "tsmixer", "patchtst",
                                                "arima",   "external", "naive"};
    return kinds.count(kind) > 0;
}

json synth_to_json(const SynthSpec& spec) {
    json j{{"name", spec.name},
           {"n_hours", spec.n_hours},
           {"base_level", spec.base_level},
           {"noise_std", spec.noise_std},
           {"seed", spec.seed}};
    json seasonals = json::array();
    for (const auto& s : spec.seasonals)
        seasonals.push_back({{"period", s.period}, {"amplitude", s.amplitude}, {"phase", s.phase}});
    j["seasonal"] = std::move(seasonals);
    json trends = json::array();
    for (const auto& t : spec.trend_segments)
        trends.push_back({{"length", t.length}, {"slope", t.slope}});
    j["trend"] = std::move(trends);
    j["jumps"] = {{"rate", spec.jumps.rate},
                  {"magnitude_mean", spec.jumps.magnitude_mean},
                  {"magnitude_std", spec.jumps.magnitude_std},
                  {"half_life", spec.jumps.half_life}};
    return j;
}

json model_to_json(const ModelEntry& m) {
    json j{{"name", m.name}, {"kind", m.kind}};
    if (m.kind == "dlinear") j["kernel_size"] = m.kernel_size;
    if (m.kind == "tsmixer") {
        j["n_blocks"] = m.n_blocks;
        j["hidden_dim"] = m.hidden_dim;
    }
    if (m.kind == "patchtst") {
        j["patch_len"] = m.patch_len;
        j["stride"] = m.patch_stride;
        j["d_model"] = m.d_model;
        j["n_layers"] = m.n_layers;
        j["n_heads"] = m.n_heads;
        j["ff_dim"] = m.ff_dim;
    }
    if (m.kind == "arima") {
        j["p"] = m.order.p;
        j["d"] = m.order.d;
        j["q"] = m.order.q;
    }
    if (m.kind == "external") {
        j["command"] = m.external.command;
        j["timeout"] = m.external.timeout_seconds;
    }
    return j;
}

}  // namespace

std::vector<SynthSpec> parse_synth_channels(const json& doc) {
    expect_table(doc, "synth spec");
    if (!doc.contains("channel")) throw ConfigError("config: synth spec has no [[channel]]");
    const auto& arr = doc.at("channel");
    if (!arr.is_array() || arr.empty())
        throw ConfigError("config: [[channel]] must be a non-empty array");
    std::vector<SynthSpec> specs;
    for (std::size_t i = 0; i < arr.size(); ++i)
        specs.push_back(parse_channel(arr[i], "channel[" + std::to_string(i) + "]"));
    return specs;
}

BenchConfig parse_bench_config(const json& doc) {
    expect_table(doc, "bench");
    check_keys(doc, "bench", {"seed", "precision", "jobs", "data", "plan", "eval", "train",
                              "models"});
    BenchConfig config;
    if (doc.contains("seed"))
        config.seed = static_cast<std::uint64_t>(as_int(doc.at("seed"), "bench.seed"));
    if (doc.contains("precision")) {
        auto p = as_int(doc.at("precision"), "bench.precision");
        config.precision = static_cast<int>(p);
    }
    maybe(doc, "jobs", "bench", config.jobs, as_size);

    if (!doc.contains("data")) fail("bench", "missing [data]");
    const auto& data = expect_table(doc.at("data"), "data");
    check_keys(data, "data", {"panel", "csv", "fill", "start", "channel"});
    if (data.contains("panel")) config.data.panel_path = as_string(data.at("panel"), "data.panel");
    if (data.contains("csv")) config.data.csv_path = as_string(data.at("csv"), "data.csv");
    if (data.contains("fill"))
        config.data.csv_fill = parse_gap_policy(as_string(data.at("fill"), "data.fill"));
    if (data.contains("start")) {
        // Either an ISO 8601 timestamp or a raw epoch-seconds integer.
        const json& start = data.at("start");
        config.data.synth_start = start.is_number_integer()
                                      ? start.get<std::int64_t>()
                                      : parse_iso8601(as_string(start, "data.start"));
    }
    if (data.contains("channel")) config.data.synth = parse_synth_channels(data);

    if (doc.contains("plan")) {
        const auto& plan = expect_table(doc.at("plan"), "plan");
        check_keys(plan, "plan", {"train_len", "test_len", "n_folds", "stride"});
        maybe(plan, "train_len", "plan", config.train_len, as_size);
        maybe(plan, "test_len", "plan", config.test_len, as_size);
        maybe(plan, "n_folds", "plan", config.n_folds, as_size);
        maybe(plan, "stride", "plan", config.fold_stride, as_size);
    }
    if (doc.contains("eval")) {
        const auto& eval = expect_table(doc.at("eval"), "eval");
        check_keys(eval, "eval", {"input_len", "horizon", "stride"});
        maybe(eval, "input_len", "eval", config.input_len, as_size);
        maybe(eval, "horizon", "eval", config.horizon, as_size);
        maybe(eval, "stride", "eval", config.eval_stride, as_size);
    }
    if (doc.contains("train")) {
        const auto& train = expect_table(doc.at("train"), "train");
        check_keys(train, "train",
                   {"max_epochs", "early_stop_delta", "min_epochs", "batch_size", "learning_rate",
                    "shuffle"});
        maybe(train, "max_epochs", "train", config.train.max_epochs, as_size);
        maybe(train, "early_stop_delta", "train", config.train.early_stop_delta, as_double);
        maybe(train, "min_epochs", "train", config.train.min_epochs, as_size);
        maybe(train, "batch_size", "train", config.train.batch_size, as_size);
        maybe(train, "learning_rate", "train", config.train.learning_rate, as_double);
        maybe(train, "shuffle", "train", config.train.shuffle, as_bool);
    }

    if (!doc.contains("models")) fail("bench", "missing [[models]]");
    const auto& models = doc.at("models");
    if (!models.is_array()) fail("models", "expected an array of tables");
    for (std::size_t i = 0; i < models.size(); ++i)
        config.roster.push_back(parse_model(models[i], "models[" + std::to_string(i) + "]"));
    return config;
}

void validate(const BenchConfig& config) {
    if (config.roster.empty()) throw ConfigError("config: model roster must not be empty");
    std::set<std::string> names;
    for (const auto& m : config.roster) {
        if (m.name.empty()) throw ConfigError("config: model name must not be empty");
        if (!names.insert(m.name).second)
            throw ConfigError("config: duplicate model name '" + m.name + "'");
        if (!known_kind(m.kind))
            throw ConfigError("config: unknown model kind '" + m.kind + "'");
        if (m.kind == "external") {
            external::validate(m.external);
            const std::string& prog = m.external.command.front();
            if (prog.find('/') != std::string::npos && !std::filesystem::exists(prog))
                throw ConfigError("config: external command '" + prog + "' does not exist");
        }
        if (m.kind == "arima") models::validate(m.order);
    }

    int sources = 0;
    if (!config.data.panel_path.empty()) ++sources;
    if (!config.data.csv_path.empty()) ++sources;
    if (!config.data.synth.empty()) ++sources;
    if (sources != 1)
        throw ConfigError("config: [data] needs exactly one of panel, csv, or [[data.channel]]");
    for (const std::string& path : {config.data.panel_path, config.data.csv_path}) {
        if (!path.empty() && !std::filesystem::exists(path))
            throw ConfigError("config: data file '" + path + "' does not exist");
    }

    if (config.n_folds == 0) throw ConfigError("config: plan.n_folds must be positive");
    if (config.train_len == 0 || config.test_len == 0)
        throw ConfigError("config: plan lengths must be positive");
    if (config.input_len == 0 || config.horizon == 0 || config.eval_stride == 0)
        throw ConfigError("config: eval lengths must be positive");
    if (config.precision != 32 && config.precision != 64)
        throw ConfigError("config: precision must be 32 or 64");
    if (config.jobs == 0) throw ConfigError("config: jobs must be at least 1");
    if (config.output_dir.empty()) throw ConfigError("config: output directory not set");
    models::validate(config.train);
}

json config_to_json(const BenchConfig& config) {
    json data;
    if (!config.data.panel_path.empty()) {
        data["panel"] = config.data.panel_path;
    } else if (!config.data.csv_path.empty()) {
        data["csv"] = config.data.csv_path;
        data["fill"] = std::string(to_string(config.data.csv_fill));
    } else {
        data["start"] = config.data.synth_start;
        json channels = json::array();
        for (const auto& spec : config.data.synth) channels.push_back(synth_to_json(spec));
        data["channel"] = std::move(channels);
    }

    json roster = json::array();
    for (const auto& m : config.roster) roster.push_back(model_to_json(m));

    return json{
        {"data", std::move(data)},
        {"models", std::move(roster)},
        {"plan",
         {{"train_len", config.train_len},
          {"test_len", config.test_len},
          {"n_folds", config.n_folds},
          {"stride", config.fold_stride}}},
        {"eval",
         {{"input_len", config.input_len},
          {"horizon", config.horizon},
          {"stride", config.eval_stride}}},
        {"train",
         {{"max_epochs", config.train.max_epochs},
          {"early_stop_delta", config.train.early_stop_delta},
          {"min_epochs", config.train.min_epochs},
          {"batch_size", config.train.batch_size},
          {"learning_rate", config.train.learning_rate},
          {"shuffle", config.train.shuffle}}},
        {"seed", config.seed},
        {"precision", config.precision},
    };
}

std::uint64_t config_hash(const BenchConfig& config) {
    return fnv1a64(config_to_json(config).dump());
}

BenchConfig load_bench_config(const std::string& path) {
    const std::string text = read_text_file(path);
    json doc;
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        doc = json::parse(text, nullptr, false);
        if (doc.is_discarded()) throw ConfigError("config: '" + path + "' is not valid JSON");
    } else {
        doc = parse_toml(text);
    }
    return parse_bench_config(doc);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("failed to read '" + path + "'");
    return buffer.str();
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("failed to write '" + path + "'");
}

}  // namespace gridcast::bench
