#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "gridcast/metrics.hpp"

namespace gridcast::bench {

/// One scored benchmark cell, keyed (model, country, fold, window).
/// `origin` is the forecast origin (first target hour) for leakage audits.
struct StoredRecord {
    std::string model;
    std::string country;
    std::size_t fold = 0;
    std::size_t window = 0;
    std::size_t origin = 0;
    MetricSet metrics;

    bool operator==(const StoredRecord&) const = default;
};

struct RunMeta {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    int precision = 32;
    std::string created;  // ISO-8601, informational only
    std::vector<std::string> models;
    std::vector<std::string> countries;
    std::size_t n_folds = 0;
    std::size_t windows_per_fold = 0;
};

/// Append-only run directory:
///   meta.json          run metadata
///   records.ndjson     one JSON object per scored cell
///   losses.ndjson      per-(model, fold) training loss history
///   log.ndjson         unit_done / unit_failed / run_complete markers
///   summary.csv        per (model, country): window means per fold, then fold means
///   fold_summary.csv   per (model, country, fold): window means
///   checkpoints/       <model>/fold<k>.gckp parameter snapshots
///
/// The unit of persistence is one (model, fold): its records and losses are
/// appended and flushed together, then the done marker. Reopening an existing
/// directory keeps exactly the records of done units (tolerating a torn final
/// line from a crash) and compacts the files, so an interrupted run resumes
/// where it stopped.
class ResultStore {
public:
    /// Open-or-create for writing. An existing directory must carry the same
    /// config hash; its completed units are loaded for resume.
    ResultStore(const std::string& dir, const RunMeta& meta);

    /// Read-only open for reporting; loads meta and completed-unit records.
    explicit ResultStore(const std::string& dir);

    const std::string& dir() const { return dir_; }
    const RunMeta& meta() const { return meta_; }

    bool unit_done(const std::string& model, std::size_t fold) const;
    std::size_t units_done() const { return done_.size(); }

    /// Persist one completed unit. Thread-safe; the store is the single
    /// point of mutation in a concurrent run.
    void append_unit(const std::string& model, std::size_t fold,
                     const std::vector<StoredRecord>& records, const std::vector<double>& losses);

    /// Log a failed unit; the run continues and exits nonzero.
    void record_unit_failure(const std::string& model, std::size_t fold, const std::string& why);

    /// Write summary.csv / fold_summary.csv and the run_complete marker.
    void finish();

    bool complete() const { return complete_; }
    const std::vector<std::string>& failures() const { return failures_; }

    /// Records in load/append order.
    const std::vector<StoredRecord>& records() const { return records_; }
    /// Records in canonical (model, country, fold, window) order.
    std::vector<StoredRecord> sorted_records() const;
    /// Loss histories keyed (model, fold).
    const std::map<std::pair<std::string, std::size_t>, std::vector<double>>& losses() const {
        return losses_;
    }

    std::string checkpoint_path(const std::string& model, std::size_t fold) const;

private:
    void load_existing(bool writable);
    void open_streams();
    void write_summaries() const;

    std::string dir_;
    RunMeta meta_;
    mutable std::mutex mutex_;
    std::vector<StoredRecord> records_;
    std::map<std::pair<std::string, std::size_t>, std::vector<double>> losses_;
    std::set<std::pair<std::string, std::size_t>> done_;
    std::vector<std::string> failures_;
    bool complete_ = false;
    std::ofstream records_out_;
    std::ofstream losses_out_;
    std::ofstream log_out_;
};

/// Window means within each (model, country, fold).
std::map<std::tuple<std::string, std::string, std::size_t>, MetricSet> fold_means(
    const std::vector<StoredRecord>& records);

/// Fold means of `fold_means` per (model, country) — the aggregation used for
/// ranking and summaries.
std::map<std::pair<std::string, std::string>, MetricSet> model_country_means(
    const std::vector<StoredRecord>& records);

}  // namespace gridcast::bench
