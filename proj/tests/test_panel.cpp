#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "prodisp/errors.hpp"
#include "prodisp/fitting.hpp"
#include "prodisp/panel.hpp"

using namespace prodisp;

namespace {

const char* kSmall =
    "firm_id,year,output,workers,sector\n"
    "f1,2005,100,10,s01\n"
    "f2,2005,500,20,s02\n"
    "f3,2006,30,3,s01\n";

} // namespace

TEST_CASE("ingest well-formed rows") {
    const IngestResult r = ingest_panel_text(kSmall);
    CHECK(r.rejected.empty());
    CHECK(r.panel.record_count() == 3);
    REQUIRE(r.panel.by_year.count(2005) == 1);
    const FirmRecord& f1 = r.panel.by_year.at(2005)[0];
    CHECK(f1.firm_id == "f1");
    CHECK(f1.productivity == doctest::Approx(10.0)); // c = Y/L per row
    CHECK(r.panel.by_year.at(2006)[0].productivity == doctest::Approx(10.0));
    const auto counts = r.panel.year_counts();
    CHECK(counts.at(2005) == 2);
    CHECK(counts.at(2006) == 1);
}

TEST_CASE("ingest rejects invariant violations with line numbers") {
    const std::string text =
        "firm_id,year,output,workers,sector\n"
        "f1,2005,100,10,s01\n"
        "f2,2005,100,0,s01\n"      // workers < 1
        "f3,2005,-5,10,s01\n"      // output <= 0
        "f4,notayear,5,1,s01\n"    // bad year
        "f5,2005,5,1\n"            // missing field
        "f6,2005,100,10,s01\n";
    IngestOptions opts;
    opts.rejection_ceiling = 0.9;
    const IngestResult r = ingest_panel_text(text, opts);
    CHECK(r.panel.record_count() == 2);
    REQUIRE(r.rejected.size() == 4);
    CHECK(r.rejected[0].line == 3);
    CHECK(r.rejected[1].line == 4);
    CHECK(r.rejected[2].line == 5);
    CHECK(r.rejected[3].line == 6);

    // ceiling makes heavy corruption fatal
    IngestOptions strict;
    strict.rejection_ceiling = 0.2;
    CHECK_THROWS_AS(ingest_panel_text(text, strict), ValidationError);
}

TEST_CASE("missing or wrong header is fatal") {
    CHECK_THROWS_AS(ingest_panel_text("id,year,output,workers,sector\nf1,2005,1,1,s\n"),
                    ValidationError);
    CHECK_THROWS_AS(ingest_panel_text("firm_id,year,output,workers\nf1,2005,1,1\n"),
                    ValidationError);
    CHECK_THROWS_AS(ingest_panel_text(""), ValidationError);
}

TEST_CASE("trim outliers") {
    // identity at trim_top = 0
    const Panel panel = ingest_panel_text(kSmall).panel;
    const TrimResult same = trim_outliers(panel, 0);
    CHECK(same.panel.record_count() == 3);
    CHECK(same.audit.empty());

    // year with 100 firms: the 10 largest-c go, 90 remain
    std::string text = "firm_id,year,output,workers,sector\n";
    for (int i = 1; i <= 100; ++i)
        text += "f" + std::to_string(i) + ",2000," + std::to_string(i * 10) + ",10,s01\n";
    const Panel big = ingest_panel_text(text).panel;
    const TrimResult cut = trim_outliers(big, 10);
    CHECK(cut.panel.by_year.at(2000).size() == 90);
    CHECK(cut.audit.size() == 10);
    double max_kept = 0.0;
    for (const auto& r : cut.panel.by_year.at(2000))
        max_kept = std::max(max_kept, r.productivity);
    double min_removed = 1e300;
    for (const auto& e : cut.audit) min_removed = std::min(min_removed, e.productivity);
    CHECK(max_kept <= min_removed); // trimming never raises the maximum
    CHECK_THROWS_AS(trim_outliers(big, -1), ValidationError);
}

TEST_CASE("worker weighted sample") {
    // one firm with 5 workers at c = 2
    const WeightedSample one =
        worker_weighted_sample(ingest_panel_text("firm_id,year,output,workers,sector\n"
                                                 "f1,2001,10,5,s01\n")
                                   .panel);
    REQUIRE(one.values.size() == 1);
    CHECK(one.values[0] == doctest::Approx(2.0));
    CHECK(one.weights[0] == doctest::Approx(5.0));
    CHECK(one.total_weight == doctest::Approx(5.0));

    // two firms (L=1,c=1), (L=3,c=2): cumulative weight at c = 2 is 3/4
    const WeightedSample two =
        worker_weighted_sample(ingest_panel_text("firm_id,year,output,workers,sector\n"
                                                 "f1,2001,1,1,s01\n"
                                                 "f2,2001,6,3,s01\n")
                                   .panel);
    CHECK(two.total_weight == doctest::Approx(4.0));
    const auto rs = rank_size_weighted(two.values, two.weights);
    CHECK(rs[0].c == doctest::Approx(2.0));
    CHECK(rs[0].cumulative == doctest::Approx(0.75));
    CHECK(rs[1].cumulative == doctest::Approx(1.0));

    // conservation: total weight equals the panel's summed workers exactly
    const Panel p = ingest_panel_text(kSmall).panel;
    CHECK(worker_weighted_sample(p).total_weight == 33.0);
}

TEST_CASE("panel csv roundtrip") {
    const Panel p = ingest_panel_text(kSmall).panel;
    write_panel_csv(p, "/tmp/prodisp_test_panel.csv");
    const IngestResult back = ingest_panel("/tmp/prodisp_test_panel.csv");
    CHECK(back.panel.record_count() == 3);
    CHECK(back.rejected.empty());
    CHECK(back.panel.by_year.at(2005)[1].productivity == doctest::Approx(25.0));
}
