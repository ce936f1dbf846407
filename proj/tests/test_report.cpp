#include "doctest.h"

#include "json.hpp"

#include "equicomp/report.hpp"
#include "support/tempdir.hpp"

using namespace equicomp;

namespace {

Report sample_report() {
    Report r;
    r.set("experiment", std::string("demo"));
    r.set("alpha", 0.25);
    r.set("n", static_cast<long long>(42));
    r.set("flag", true);
    r.columns = {"n", "value", "label"};
    auto& row1 = r.add_row();
    row1[0] = static_cast<long long>(1);
    row1[1] = 0.1234567890123456;
    row1[2] = std::string("a,b \"quoted\"");
    auto& row2 = r.add_row();
    row2[0] = static_cast<long long>(2);
    row2[1] = 3.0;
    // row2[2] left absent
    return r;
}

} // namespace

TEST_CASE("json rendering sorts keys and is stable") {
    const auto text = render_report(sample_report(), ReportFormat::json);
    CHECK(text ==
          "{\"alpha\":0.25,\"experiment\":\"demo\",\"flag\":true,\"n\":42,"
          "\"rows\":[{\"label\":\"a,b \\\"quoted\\\"\",\"n\":1,\"value\":0.123456789012},"
          "{\"label\":null,\"n\":2,\"value\":3}]}\n");
    CHECK(render_report(sample_report(), ReportFormat::json) == text);
}

TEST_CASE("csv rendering quotes and stays header-only when empty") {
    const auto text = render_report(sample_report(), ReportFormat::csv);
    CHECK(text == "n,value,label\n1,0.123456789012,\"a,b \"\"quoted\"\"\"\n2,3,\n");

    Report empty;
    empty.columns = {"a", "b"};
    CHECK(render_report(empty, ReportFormat::csv) == "a,b\n");
}

TEST_CASE("emit twice produces byte-identical files") {
    testsupport::TempDir dir;
    const auto r = sample_report();
    emit_report(r, dir.file("one.json"), ReportFormat::json);
    emit_report(r, dir.file("two.json"), ReportFormat::json);
    CHECK(testsupport::TempDir::slurp(dir.file("one.json")) ==
          testsupport::TempDir::slurp(dir.file("two.json")));
    emit_report(r, dir.file("one.csv"), ReportFormat::csv);
    emit_report(r, dir.file("two.csv"), ReportFormat::csv);
    CHECK(testsupport::TempDir::slurp(dir.file("one.csv")) ==
          testsupport::TempDir::slurp(dir.file("two.csv")));
}

TEST_CASE("json round-trip reproduces numbers at 12 significant digits") {
    Report r;
    r.set("tiny", 1.2345678901234e-7);
    r.set("big", 9.87654321e12);
    r.set("negative", -0.5);
    r.columns = {"v"};
    for (double v : {3.141592653589793, 1e-300, 2.718281828459045, 0.1}) {
        auto& row = r.add_row();
        row[0] = v;
    }
    const std::string text = render_report(r, ReportFormat::json);
    const auto parsed = nlohmann::json::parse(text);
    auto fmt = [](double v) { return detail::format_double(v); };
    CHECK(fmt(parsed["tiny"].get<double>()) == fmt(1.2345678901234e-7));
    CHECK(fmt(parsed["big"].get<double>()) == fmt(9.87654321e12));
    CHECK(fmt(parsed["negative"].get<double>()) == fmt(-0.5));
    for (size_t i = 0; i < parsed["rows"].size(); ++i) {
        const double original = std::get<double>(r.rows[i][0]);
        CHECK(fmt(parsed["rows"][i]["v"].get<double>()) == fmt(original));
    }
}

TEST_CASE("unknown format string is rejected") {
    CHECK_THROWS_AS(parse_report_format("xml"), validation_error);
    CHECK(parse_report_format("json") == ReportFormat::json);
    CHECK(parse_report_format("csv") == ReportFormat::csv);
}

TEST_CASE("unwritable path raises io_error") {
    CHECK_THROWS_AS(emit_report(Report{}, "/nonexistent-dir/report.json", ReportFormat::json),
                    io_error);
}
