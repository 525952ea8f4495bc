#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dualmind/errors.hpp"
#include "dualmind/experiments.hpp"

using namespace dualmind;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("dualmind-exp-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RecordRow make_row(const char* exp, int fold, int trial, double load,
                   double frame, double g, double pb, BeliefLabel label) {
    RecordRow row;
    row.fold = fold;
    row.trial = trial;
    row.rec.experiment = exp;
    row.rec.context = make_context({1.0, 0.5, 0.7}, load, frame);
    row.rec.agent = NodeKind::Sally;
    row.rec.g = g;
    row.rec.p1 = {0.9, 0.1};
    row.rec.p2 = {0.05, 0.95};
    row.rec.blended = {1.0 - pb, pb};
    row.rec.predicted = predict_label(row.rec.blended);
    row.rec.label = label;
    row.rec.correct = row.rec.predicted == label;
    return row;
}

ExperimentReport synthetic_fatigue_report() {
    ExperimentReport r;
    r.name = "fatigue";
    const double loads[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
    const double gates[5] = {0.5, 0.35, 0.2, 0.08, 0.02};
    const double pbs[5] = {0.9, 0.8, 0.5, 0.2, 0.05};
    int trial = 0;
    for (int i = 0; i < 5; ++i) {
        r.records.push_back(make_row("fatigue/ambiguous", 0, trial++, loads[i],
                                     0.0, gates[i], pbs[i],
                                     BeliefLabel::Basket));
        r.records.push_back(make_row("fatigue/easy", 0, trial++, loads[i], 0.0,
                                     gates[i], 0.02, BeliefLabel::Box));
    }
    r.aggregates = compute_aggregates(r.name, r.records);
    r.phase1_loss = {0.7, 0.1};
    r.phase2_loss = {0.9, 0.2, 0.05};
    r.info.emplace_back("seed", "17");
    return r;
}

}  // namespace

TEST_CASE("records csv header is exact and stable") {
    CHECK(std::string(kRecordsCsvHeader) ==
          "experiment,fold,trial,agent,env0,env1,env2,load,frame,g,p1_box,"
          "p1_basket,p2_box,p2_basket,pb_box,pb_basket,predicted,label,"
          "correct");
}

TEST_CASE("emit_report writes the fixed layout byte-identically") {
    const ExperimentReport report = synthetic_fatigue_report();
    TempDir dir;
    const std::string out1 = (dir.path / "a").string();
    const std::string out2 = (dir.path / "b").string();
    emit_report(report, out1);
    emit_report(report, out2);

    for (const char* file :
         {"records.csv", "aggregates.csv", "figure-fatigue-ambiguous.svg",
          "figure-fatigue-easy.svg", "figure-error-rate.svg",
          "manifest.json"}) {
        CAPTURE(file);
        const std::string a = slurp(fs::path(out1) / file);
        const std::string b = slurp(fs::path(out2) / file);
        CHECK_FALSE(a.empty());
        CHECK(a == b);
    }

    const std::string csv = slurp(fs::path(out1) / "records.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == kRecordsCsvHeader);

    // one polyline per series: g, blended, p1, p2
    const std::string svg = slurp(fs::path(out1) / "figure-fatigue-ambiguous.svg");
    std::size_t polylines = 0;
    for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
         pos = svg.find("<polyline", pos + 1)) {
        ++polylines;
    }
    CHECK(polylines == 4);
}

TEST_CASE("aggregates recompute exactly from records") {
    const ExperimentReport report = synthetic_fatigue_report();
    const auto again = compute_aggregates(report.name, report.records);
    CHECK(again == report.aggregates);
    CHECK(report.aggregates.at("ambiguous_g_strictly_decreasing") == 1.0);
    CHECK(report.aggregates.at("easy_all_correct") == 1.0);
    CHECK(report.aggregates.at("ambiguous_pb_0") == 0.9);
    CHECK(report.aggregates.at("records") == 10.0);
}

TEST_CASE("leave-one-out curricula exclude the held-out context") {
    for (std::size_t fold : {0u, 3u, 7u}) {
        const Curricula c = loo_curricula(fold);
        CHECK(c.phase2.size() == 21);  // 7 contexts x 3 agents
        const Context held = enumerate_contexts()[fold];
        for (const Trial& t : c.phase2) {
            CHECK(t.context.env != held.env);
            CHECK(t.semantics == CueSemantics::boolean_observation);
        }
        for (const Trial& t : c.phase1) {
            CHECK(t.label == BeliefLabel::Box);
        }
        CHECK(c.phase1.size() <= c.phase2.size());
    }
    CHECK_THROWS_AS(loo_curricula(8), ValidationError);
}

TEST_CASE("parallel_for touches every index exactly once") {
    std::vector<int> hits(257, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    // degenerate settings
    parallel_for(0, 4, [&](std::size_t) { FAIL("must not be called"); });
    std::vector<int> serial(5, 0);
    parallel_for(serial.size(), 1, [&](std::size_t i) { serial[i] = 1; });
    for (int h : serial) CHECK(h == 1);
}

TEST_CASE("unknown experiment names are rejected with the valid list") {
    try {
        run_experiment_by_name("nosuch", 0, false, 1);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        for (const std::string& name : experiment_names()) {
            CHECK(msg.find(name) != std::string::npos);
        }
    }
}
