#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lasercoh/correlations.hpp"
#include "lasercoh/distribution.hpp"
#include "lasercoh/model.hpp"

namespace lasercoh {

inline constexpr const char* kVersion = "0.1.0";

// Shortest round-trip decimal form; byte-stable for identical inputs.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Ordered key/value metadata written as '#' comment lines ahead of CSV data
// and mirrored into the JSON documents.
struct Metadata {
    std::vector<std::pair<std::string, std::string>> kv;

    void add(const std::string& key, const std::string& value) { kv.emplace_back(key, value); }
    void add(const std::string& key, double value) { kv.emplace_back(key, format_double(value)); }
    void add(const std::string& key, int value) { kv.emplace_back(key, std::to_string(value)); }
    void add(const std::string& key, long value) { kv.emplace_back(key, std::to_string(value)); }
    void add(const std::string& key, unsigned value) { kv.emplace_back(key, std::to_string(value)); }
};

inline Metadata model_metadata(const LaserModel& m) {
    Metadata md;
    md.add("version", std::string(kVersion));
    md.add("family", m.family_name());
    md.add("D", m.dim);
    md.add("mu", m.mu());
    md.add("p", m.p);
    if (m.family == Family::PLambda) md.add("lambda", m.lambda);
    if (m.family == Family::PQ) md.add("q", m.q);
    md.add("flux", m.flux);
    md.add("k", m.k());
    return md;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline void write_csv(const std::string& path, const Metadata& md, const Table& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    for (const auto& [k, v] : md.kv) out << "# " << k << " = " << v << "\n";
    for (size_t c = 0; c < t.columns.size(); ++c)
        out << t.columns[c] << (c + 1 < t.columns.size() ? "," : "");
    out << "\n";
    for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c)
            out << format_double(row[c]) << (c + 1 < row.size() ? "," : "");
        out << "\n";
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

inline nlohmann::ordered_json json_document(const Metadata& md, const Table& t) {
    nlohmann::ordered_json doc;
    for (const auto& [k, v] : md.kv) doc["metadata"][k] = v;
    doc["columns"] = t.columns;
    auto& data = doc["data"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) data.push_back(row);
    return doc;
}

inline void write_json(const std::string& path, const Metadata& md, const Table& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << json_document(md, t).dump(2) << "\n";
    if (!out) throw std::runtime_error("failed writing " + path);
}

inline void write_table(const std::string& path, const std::string& format, const Metadata& md,
                        const Table& t) {
    if (format == "csv")
        write_csv(path, md, t);
    else if (format == "json")
        write_json(path, md, t);
    else
        throw std::domain_error("unknown output format '" + format + "'");
}

inline Table series_table(const CorrelationSeries& s, const std::string& x_name,
                          const std::string& y_name) {
    Table t;
    t.columns = {x_name, y_name};
    t.rows.reserve(s.grid.size());
    for (size_t i = 0; i < s.grid.size(); ++i) t.rows.push_back({s.grid[i], s.values[i]});
    return t;
}

inline Table distribution_table(const NumberDistribution& d) {
    Table t;
    t.columns = {"n", "weight"};
    for (int n = 0; n < d.dim(); ++n) t.rows.push_back({double(n), d.weights[n]});
    return t;
}

// Chunked index-parallel loop with deterministic output placement: worker i
// handles a contiguous index block, results land in caller-indexed slots.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int workers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace lasercoh
