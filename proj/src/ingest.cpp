#include "gridcast/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gridcast {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == name) return i;
    }
    throw DataError("missing required column '" + name + "' in CSV header");
}

}  // namespace

PricePanel parse_price_csv(std::string_view bytes, const IngestOptions& options) {
    std::vector<PriceRecord> records;
    std::size_t line_number = 0;
    std::size_t pos = 0;

    std::vector<std::string> header;
    std::size_t dt_col = 0, country_col = 0, price_col = 0;
    bool any_zone = false, any_naive = false;

    while (pos <= bytes.size()) {
        std::size_t nl = bytes.find('\n', pos);
        std::string_view line = bytes.substr(pos, nl == std::string_view::npos ? bytes.size() - pos
                                                                               : nl - pos);
        pos = nl == std::string_view::npos ? bytes.size() + 1 : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_number;
        if (line.empty()) continue;

        if (header.empty()) {
            header = split_csv_line(line);
            dt_col = find_column(header, options.datetime_column);
            country_col = find_column(header, options.country_column);
            price_col = find_column(header, options.price_column);
            continue;
        }

        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError("row " + std::to_string(line_number) + ": expected " +
                            std::to_string(header.size()) + " fields, found " +
                            std::to_string(fields.size()));
        }
        PriceRecord record;
        bool had_zone = false;
        try {
            record.timestamp = parse_iso8601(fields[dt_col], &had_zone);
        } catch (const DataError& e) {
            throw DataError("row " + std::to_string(line_number) + ": " + e.what());
        }
        (had_zone ? any_zone : any_naive) = true;
        record.channel = trim(fields[country_col]);
        if (record.channel.empty()) {
            throw DataError("row " + std::to_string(line_number) + ": empty country field");
        }
        try {
            record.price = parse_double(fields[price_col]);
        } catch (const DataError& e) {
            throw DataError("row " + std::to_string(line_number) + ": " + e.what());
        }

        if (options.time_range &&
            (record.timestamp < options.time_range->first ||
             record.timestamp >= options.time_range->second)) {
            continue;
        }
        if (options.country_filter &&
            std::find(options.country_filter->begin(), options.country_filter->end(),
                      record.channel) == options.country_filter->end()) {
            continue;
        }
        records.push_back(std::move(record));
    }

    if (header.empty()) throw DataError("CSV input is empty");
    if (any_zone && any_naive) {
        throw DataError("mixed time zones: some timestamps carry a zone designator and others "
                        "are naive");
    }
    if (records.empty()) {
        throw DataError("no rows survived the time range / country filters");
    }
    PricePanel panel = build_panel(records, "csv");
    auto [repaired, count] = repair_gaps(panel, options.gap_policy);
    (void)count;
    return std::move(repaired);
}

PricePanel load_price_csv(const std::string& path, const IngestOptions& options) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open CSV file '" + path + "'");
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return parse_price_csv(buffer.str(), options);
}

std::string serialize_price_csv(const PricePanel& panel, const IngestOptions& options) {
    std::string out = options.datetime_column + "," + options.country_column + "," +
                      options.price_column + "\n";
    for (std::size_t h = 0; h < panel.n_hours(); ++h) {
        const std::string ts = format_iso8601(panel.timestamp(h));
        for (std::size_t c = 0; c < panel.n_channels(); ++c) {
            out += ts;
            out += ',';
            out += panel.channels()[c];
            out += ',';
            out += format_double(panel.at(h, c));
            out += '\n';
        }
    }
    return out;
}

std::string serialize_wide_csv(const PricePanel& panel) {
    std::string out = "datetime";
    for (const auto& name : panel.channels()) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (std::size_t h = 0; h < panel.n_hours(); ++h) {
        out += format_iso8601(panel.timestamp(h));
        for (std::size_t c = 0; c < panel.n_channels(); ++c) {
            out += ',';
            out += format_double(panel.at(h, c));
        }
        out += '\n';
    }
    return out;
}

}  // namespace gridcast
