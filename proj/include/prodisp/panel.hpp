#ifndef PRODISP_PANEL_HPP
#define PRODISP_PANEL_HPP

#include <map>
#include <string>
#include <vector>

namespace prodisp {

// One firm-year observation; output in 10^6 yen, workers in persons,
// productivity = output / workers exactly as stored.
struct FirmRecord {
    std::string firm_id;
    int year = 0;
    double output = 0.0;
    double workers = 0.0;
    std::string sector;
    double productivity = 0.0;
};

struct Panel {
    std::map<int, std::vector<FirmRecord>> by_year;

    std::size_t record_count() const;
    std::map<int, std::size_t> year_counts() const;
};

struct RejectedRow {
    long line = 0;
    std::string reason;
};

struct IngestResult {
    Panel panel;
    std::vector<RejectedRow> rejected;
};

struct IngestOptions {
    // fatal once rejected rows exceed this fraction of data rows
    double rejection_ceiling = 0.2;
};

// CSV with exact header firm_id,year,output,workers,sector. Malformed rows
// are collected with line numbers; missing columns are fatal.
IngestResult ingest_panel(const std::string& path, const IngestOptions& opts = {});
IngestResult ingest_panel_text(const std::string& text, const IngestOptions& opts = {});

struct TrimEntry {
    int year = 0;
    std::string firm_id;
    double productivity = 0.0;
};

struct TrimResult {
    Panel panel;
    std::vector<TrimEntry> audit;
};

// removes the trim_top highest-productivity firms per year
TrimResult trim_outliers(const Panel& panel, long trim_top);

struct WeightedSample {
    std::vector<double> values;  // productivity
    std::vector<double> weights; // workers
    double total_weight = 0.0;
};

// each firm contributes weight L at productivity c
WeightedSample worker_weighted_sample(const Panel& panel);
// unweighted firm-level productivity sample
std::vector<double> firm_sample(const Panel& panel);
// one value per (year, sector): sum Y / sum L within the sector
std::vector<double> sector_sample(const Panel& panel);

void write_panel_csv(const Panel& panel, const std::string& path);

} // namespace prodisp

#endif
