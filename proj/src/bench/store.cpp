#include "gridcast/bench/store.hpp"

#include <algorithm>
#include <filesystem>
#include <tuple>

#include <json.hpp>

#include "gridcast/bench/config.hpp"
#include "gridcast/common.hpp"

namespace gridcast::bench {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t parse_hash_hex(const std::string& text) {
    return std::stoull(text, nullptr, 16);
}

json meta_to_json(const RunMeta& meta) {
    return json{{"config_hash", hash_hex(meta.config_hash)},
                {"seed", meta.seed},
                {"precision", meta.precision},
                {"created", meta.created},
                {"models", meta.models},
                {"countries", meta.countries},
                {"n_folds", meta.n_folds},
                {"windows_per_fold", meta.windows_per_fold}};
}

RunMeta meta_from_json(const json& j) {
    RunMeta meta;
    meta.config_hash = parse_hash_hex(j.at("config_hash").get<std::string>());
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.precision = j.at("precision").get<int>();
    meta.created = j.at("created").get<std::string>();
    meta.models = j.at("models").get<std::vector<std::string>>();
    meta.countries = j.at("countries").get<std::vector<std::string>>();
    meta.n_folds = j.at("n_folds").get<std::size_t>();
    meta.windows_per_fold = j.at("windows_per_fold").get<std::size_t>();
    return meta;
}

json record_to_json(const StoredRecord& r) {
    return json{{"model", r.model},   {"country", r.country},    {"fold", r.fold},
                {"window", r.window}, {"origin", r.origin},      {"smape", r.metrics.smape},
                {"mae", r.metrics.mae}, {"mse", r.metrics.mse},  {"rmse", r.metrics.rmse}};
}

StoredRecord record_from_json(const json& j) {
    StoredRecord r;
    r.model = j.at("model").get<std::string>();
    r.country = j.at("country").get<std::string>();
    r.fold = j.at("fold").get<std::size_t>();
    r.window = j.at("window").get<std::size_t>();
    r.origin = j.at("origin").get<std::size_t>();
    r.metrics.smape = j.at("smape").get<double>();
    r.metrics.mae = j.at("mae").get<double>();
    r.metrics.mse = j.at("mse").get<double>();
    r.metrics.rmse = j.at("rmse").get<double>();
    return r;
}

/// Parse an ndjson file, tolerating a torn fragment after the last newline
/// (crash mid-append). Anything before the last newline must be valid.
std::vector<json> load_ndjson(const std::string& path) {
    std::vector<json> docs;
    if (!fs::exists(path)) return docs;
    const std::string text = read_text_file(path);
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) break;  // torn tail: no terminating newline
        const std::string_view line(text.data() + start, nl - start);
        start = nl + 1;
        if (line.empty()) continue;
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded())
            throw DataError("corrupt store line in '" + path + "'");
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::string csv_row(const std::string& prefix, const MetricSet& m) {
    return prefix + "," + format_double(m.smape) + "," + format_double(m.mae) + "," +
           format_double(m.mse) + "," + format_double(m.rmse) + "," +
           format_double(performance_indicator(m)) + "\n";
}

MetricSet mean_of(const std::vector<MetricSet>& sets) {
    MetricSet out;
    for (const auto& m : sets) {
        out.smape += m.smape;
        out.mae += m.mae;
        out.mse += m.mse;
        out.rmse += m.rmse;
    }
    const double n = double(sets.size());
    out.smape /= n;
    out.mae /= n;
    out.mse /= n;
    out.rmse /= n;
    return out;
}

}  // namespace

ResultStore::ResultStore(const std::string& dir, const RunMeta& meta) : dir_(dir), meta_(meta) {
    std::error_code ec;
    fs::create_directories(fs::path(dir_) / "checkpoints", ec);
    if (ec) throw IoError("cannot create run directory '" + dir_ + "'");

    const std::string meta_path = (fs::path(dir_) / "meta.json").string();
    if (fs::exists(meta_path)) {
        RunMeta existing = meta_from_json(json::parse(read_text_file(meta_path)));
        if (existing.config_hash != meta_.config_hash) {
            throw ConfigError("run directory '" + dir_ +
                              "' was created with a different configuration");
        }
        meta_ = existing;  // keep the original creation timestamp
        load_existing(true);
    } else {
        write_text_file(meta_path, meta_to_json(meta_).dump(2) + "\n");
    }
    open_streams();
}

ResultStore::ResultStore(const std::string& dir) : dir_(dir) {
    const std::string meta_path = (fs::path(dir_) / "meta.json").string();
    if (!fs::exists(meta_path))
        throw IoError("'" + dir_ + "' is not a run directory (no meta.json)");
    meta_ = meta_from_json(json::parse(read_text_file(meta_path)));
    load_existing(false);
}

void ResultStore::load_existing(bool writable) {
    const auto path = [&](const char* name) { return (fs::path(dir_) / name).string(); };

    done_.clear();
    complete_ = false;
    for (const auto& doc : load_ndjson(path("log.ndjson"))) {
        const std::string event = doc.at("event").get<std::string>();
        if (event == "unit_done")
            done_.insert({doc.at("model").get<std::string>(), doc.at("fold").get<std::size_t>()});
        else if (event == "run_complete")
            complete_ = true;
    }

    records_.clear();
    for (const auto& doc : load_ndjson(path("records.ndjson"))) {
        StoredRecord r = record_from_json(doc);
        if (done_.count({r.model, r.fold})) records_.push_back(std::move(r));
    }
    losses_.clear();
    for (const auto& doc : load_ndjson(path("losses.ndjson"))) {
        std::pair<std::string, std::size_t> key{doc.at("model").get<std::string>(),
                                                doc.at("fold").get<std::size_t>()};
        if (done_.count(key)) losses_[key] = doc.at("loss").get<std::vector<double>>();
    }

    if (!writable) return;

    // Compact: drop records of interrupted units, torn tails, and stale
    // failure markers (those units will be retried).
    std::string records_text, losses_text, log_text;
    for (const auto& r : records_) records_text += record_to_json(r).dump() + "\n";
    for (const auto& [key, loss] : losses_)
        losses_text +=
            json{{"model", key.first}, {"fold", key.second}, {"loss", loss}}.dump() + "\n";
    for (const auto& [model, fold] : done_)
        log_text += json{{"event", "unit_done"}, {"model", model}, {"fold", fold}}.dump() + "\n";
    if (complete_)
        log_text += json{{"event", "run_complete"}, {"failed", 0}}.dump() + "\n";

    const auto replace = [&](const char* name, const std::string& text) {
        const std::string tmp = path(name) + ".tmp";
        write_text_file(tmp, text);
        fs::rename(tmp, path(name));
    };
    replace("records.ndjson", records_text);
    replace("losses.ndjson", losses_text);
    replace("log.ndjson", log_text);
}

void ResultStore::open_streams() {
    const auto open = [&](std::ofstream& out, const char* name) {
        out.open((fs::path(dir_) / name).string(), std::ios::binary | std::ios::app);
        if (!out) throw IoError("cannot open '" + std::string(name) + "' in '" + dir_ + "'");
    };
    open(records_out_, "records.ndjson");
    open(losses_out_, "losses.ndjson");
    open(log_out_, "log.ndjson");
}

bool ResultStore::unit_done(const std::string& model, std::size_t fold) const {
    std::lock_guard lock(mutex_);
    return done_.count({model, fold}) > 0;
}

void ResultStore::append_unit(const std::string& model, std::size_t fold,
                              const std::vector<StoredRecord>& records,
                              const std::vector<double>& losses) {
    std::lock_guard lock(mutex_);
    if (done_.count({model, fold})) return;
    for (const auto& r : records) {
        records_out_ << record_to_json(r).dump() << "\n";
        records_.push_back(r);
    }
    if (!losses.empty()) {
        losses_out_ << json{{"model", model}, {"fold", fold}, {"loss", losses}}.dump() << "\n";
        losses_[{model, fold}] = losses;
    }
    records_out_.flush();
    losses_out_.flush();
    log_out_ << json{{"event", "unit_done"}, {"model", model}, {"fold", fold}}.dump() << "\n";
    log_out_.flush();
    if (!records_out_ || !losses_out_ || !log_out_)
        throw IoError("failed to append to run directory '" + dir_ + "'");
    done_.insert({model, fold});
}

void ResultStore::record_unit_failure(const std::string& model, std::size_t fold,
                                      const std::string& why) {
    std::lock_guard lock(mutex_);
    log_out_ << json{{"event", "unit_failed"}, {"model", model}, {"fold", fold}, {"error", why}}
                    .dump()
             << "\n";
    log_out_.flush();
    failures_.push_back(model + "/fold" + std::to_string(fold) + ": " + why);
}

void ResultStore::finish() {
    std::lock_guard lock(mutex_);
    write_summaries();
    log_out_ << json{{"event", "run_complete"}, {"failed", failures_.size()}}.dump() << "\n";
    log_out_.flush();
    complete_ = true;
}

std::vector<StoredRecord> ResultStore::sorted_records() const {
    std::vector<StoredRecord> sorted;
    {
        std::lock_guard lock(mutex_);
        sorted = records_;
    }
    std::sort(sorted.begin(), sorted.end(), [](const StoredRecord& a, const StoredRecord& b) {
        return std::tie(a.model, a.country, a.fold, a.window) <
               std::tie(b.model, b.country, b.fold, b.window);
    });
    return sorted;
}

std::string ResultStore::checkpoint_path(const std::string& model, std::size_t fold) const {
    const fs::path dir = fs::path(dir_) / "checkpoints" / model;
    std::error_code ec;
    fs::create_directories(dir, ec);
    return (dir / ("fold" + std::to_string(fold) + ".gckp")).string();
}

void ResultStore::write_summaries() const {
    const auto folds = fold_means(records_);
    std::string fold_csv = "model,country,fold,smape,mae,mse,rmse,indicator\n";
    for (const auto& [key, metrics] : folds) {
        fold_csv += csv_row(std::get<0>(key) + "," + std::get<1>(key) + "," +
                                std::to_string(std::get<2>(key)),
                            metrics);
    }
    write_text_file((fs::path(dir_) / "fold_summary.csv").string(), fold_csv);

    const auto summary = model_country_means(records_);
    std::string csv = "model,country,smape,mae,mse,rmse,indicator\n";
    for (const auto& [key, metrics] : summary)
        csv += csv_row(key.first + "," + key.second, metrics);
    write_text_file((fs::path(dir_) / "summary.csv").string(), csv);
}

std::map<std::tuple<std::string, std::string, std::size_t>, MetricSet> fold_means(
    const std::vector<StoredRecord>& records) {
    std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<MetricSet>> groups;
    for (const auto& r : records)
        groups[{r.model, r.country, r.fold}].push_back(r.metrics);
    std::map<std::tuple<std::string, std::string, std::size_t>, MetricSet> out;
    for (const auto& [key, sets] : groups) out[key] = mean_of(sets);
    return out;
}

std::map<std::pair<std::string, std::string>, MetricSet> model_country_means(
    const std::vector<StoredRecord>& records) {
    std::map<std::pair<std::string, std::string>, std::vector<MetricSet>> groups;
    for (const auto& [key, metrics] : fold_means(records))
        groups[{std::get<0>(key), std::get<1>(key)}].push_back(metrics);
    std::map<std::pair<std::string, std::string>, MetricSet> out;
    for (const auto& [key, sets] : groups) out[key] = mean_of(sets);
    return out;
}

}  // namespace gridcast::bench
