#include "prodisp/panel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prodisp/errors.hpp"

namespace prodisp {

std::size_t Panel::record_count() const {
    std::size_t n = 0;
    for (const auto& [year, recs] : by_year) n += recs.size();
    return n;
}

std::map<int, std::size_t> Panel::year_counts() const {
    std::map<int, std::size_t> out;
    for (const auto& [year, recs] : by_year) out[year] = recs.size();
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

} // namespace

IngestResult ingest_panel_text(const std::string& text, const IngestOptions& opts) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("panel: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv(line);
    const std::vector<std::string> expected = {"firm_id", "year", "output", "workers", "sector"};
    if (header != expected) {
        std::string got;
        for (const auto& h : header) got += (got.empty() ? "" : ",") + h;
        throw ValidationError("panel: header must be firm_id,year,output,workers,sector (got \"" +
                              got + "\")");
    }

    IngestResult result;
    long line_no = 1;
    long data_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        ++data_rows;
        const std::vector<std::string> f = split_csv(line);
        auto reject = [&](const std::string& reason) {
            result.rejected.push_back({line_no, reason});
        };
        if (f.size() != 5) {
            reject("expected 5 fields, got " + std::to_string(f.size()));
            continue;
        }
        FirmRecord rec;
        rec.firm_id = f[0];
        rec.sector = f[4];
        if (rec.firm_id.empty()) {
            reject("empty firm_id");
            continue;
        }
        if (!parse_int(f[1], rec.year)) {
            reject("unparseable year \"" + f[1] + "\"");
            continue;
        }
        if (!parse_double(f[2], rec.output) || !(rec.output > 0.0)) {
            reject("output must be a positive number, got \"" + f[2] + "\"");
            continue;
        }
        if (!parse_double(f[3], rec.workers) || !(rec.workers >= 1.0)) {
            reject("workers must be a number >= 1, got \"" + f[3] + "\"");
            continue;
        }
        rec.productivity = rec.output / rec.workers;
        result.panel.by_year[rec.year].push_back(std::move(rec));
    }
    if (data_rows > 0 &&
        static_cast<double>(result.rejected.size()) > opts.rejection_ceiling *
                                                          static_cast<double>(data_rows)) {
        std::string sample;
        for (std::size_t i = 0; i < result.rejected.size() && i < 5; ++i)
            sample += "\n  line " + std::to_string(result.rejected[i].line) + ": " +
                      result.rejected[i].reason;
        throw ValidationError("panel: " + std::to_string(result.rejected.size()) + " of " +
                              std::to_string(data_rows) + " rows rejected (ceiling " +
                              std::to_string(opts.rejection_ceiling) + ");" + sample);
    }
    return result;
}

IngestResult ingest_panel(const std::string& path, const IngestOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("panel: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_panel_text(buf.str(), opts);
}

TrimResult trim_outliers(const Panel& panel, long trim_top) {
    if (trim_top < 0) throw ValidationError("trim_outliers: trim_top must be >= 0");
    TrimResult result;
    for (const auto& [year, recs] : panel.by_year) {
        std::vector<std::size_t> idx(recs.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&recs](std::size_t a, std::size_t b) {
            return recs[a].productivity > recs[b].productivity;
        });
        const std::size_t cut = std::min<std::size_t>(static_cast<std::size_t>(trim_top),
                                                      idx.size());
        std::vector<bool> removed(recs.size(), false);
        for (std::size_t i = 0; i < cut; ++i) {
            removed[idx[i]] = true;
            result.audit.push_back({year, recs[idx[i]].firm_id, recs[idx[i]].productivity});
        }
        auto& kept = result.panel.by_year[year];
        for (std::size_t i = 0; i < recs.size(); ++i)
            if (!removed[i]) kept.push_back(recs[i]);
        if (kept.empty()) result.panel.by_year.erase(year);
    }
    return result;
}

WeightedSample worker_weighted_sample(const Panel& panel) {
    WeightedSample out;
    for (const auto& [year, recs] : panel.by_year) {
        for (const auto& r : recs) {
            out.values.push_back(r.productivity);
            out.weights.push_back(r.workers);
            out.total_weight += r.workers;
        }
    }
    return out;
}

std::vector<double> firm_sample(const Panel& panel) {
    std::vector<double> out;
    for (const auto& [year, recs] : panel.by_year)
        for (const auto& r : recs) out.push_back(r.productivity);
    return out;
}

std::vector<double> sector_sample(const Panel& panel) {
    std::vector<double> out;
    for (const auto& [year, recs] : panel.by_year) {
        std::map<std::string, std::pair<double, double>> acc; // sector -> (sum Y, sum L)
        for (const auto& r : recs) {
            auto& [y, l] = acc[r.sector];
            y += r.output;
            l += r.workers;
        }
        for (const auto& [sector, yl] : acc)
            if (yl.second > 0.0) out.push_back(yl.first / yl.second);
    }
    return out;
}

void write_panel_csv(const Panel& panel, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "firm_id,year,output,workers,sector\n";
    char buf[64];
    for (const auto& [year, recs] : panel.by_year) {
        for (const auto& r : recs) {
            std::snprintf(buf, sizeof buf, "%.12g", r.output);
            out << r.firm_id << ',' << r.year << ',' << buf << ',';
            std::snprintf(buf, sizeof buf, "%.12g", r.workers);
            out << buf << ',' << r.sector << '\n';
        }
    }
    if (!out) throw Error("write failed for " + path);
}

} // namespace prodisp
