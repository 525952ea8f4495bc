#include "dualmind/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dualmind/errors.hpp"
#include "dualmind/kernels.hpp"
#include "dualmind/svg.hpp"

namespace dualmind {

const char* const kRecordsCsvHeader =
    "experiment,fold,trial,agent,env0,env1,env2,load,frame,g,p1_box,"
    "p1_basket,p2_box,p2_basket,pb_box,pb_basket,predicted,label,correct";

namespace {

constexpr const char* kVersion = "1.0.0";

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double pct(std::size_t correct, std::size_t total) {
    return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

Trial ev_trial(const ScenarioGraph& g, std::array<double, 3> env, double frame,
               BeliefLabel label) {
    return Trial{g, make_context(env, 0.0, frame), NodeKind::Sally, label,
                 CueSemantics::evidence};
}

void repeat(std::vector<Trial>& out, const Trial& t, int times) {
    for (int i = 0; i < times; ++i) out.push_back(t);
}

/// Phase-2 recipes for the bias experiments. All share the anchored phase 1;
/// what differs is which evidence contexts the controller and gate get to
/// see, which is what each protocol manipulates.
std::vector<Trial> anchor_phase2(const ScenarioGraph& g) {
    // The ambiguous context stays a pure probe. A canonical variant near the
    // anchor keeps the gate surface low on that side so the probe lands as
    // a partial rather than a full override.
    std::vector<Trial> out;
    repeat(out, ev_trial(g, kAnchorEnv, 0.0, BeliefLabel::Box), 3);
    repeat(out, ev_trial(g, {1.0, 0.8, 0.3}, 0.0, BeliefLabel::Box), 1);
    repeat(out, ev_trial(g, kConflictEnv, 0.0, BeliefLabel::Basket), 5);
    return out;
}

std::vector<Trial> prime_phase2(const ScenarioGraph& g) {
    // Canonical-heavy, and the ambiguous probe is pinned to the habitual
    // answer so the unprimed baseline stays on Box.
    std::vector<Trial> out;
    repeat(out, ev_trial(g, kAnchorEnv, 0.0, BeliefLabel::Box), 2);
    repeat(out, ev_trial(g, kConflictEnv, 0.0, BeliefLabel::Basket), 2);
    repeat(out, ev_trial(g, kAmbiguousEnv, 0.0, BeliefLabel::Box), 2);
    return out;
}

std::vector<Trial> fatigue_phase2(const ScenarioGraph& g) {
    std::vector<Trial> out;
    repeat(out, ev_trial(g, kAnchorEnv, 0.0, BeliefLabel::Box), 2);
    repeat(out, ev_trial(g, kConflictEnv, 0.0, BeliefLabel::Basket), 2);
    repeat(out, ev_trial(g, kAmbiguousEnv, 0.0, BeliefLabel::Basket), 2);
    return out;
}

std::vector<Trial> frame_phase2(const ScenarioGraph& g) {
    std::vector<Trial> out;
    repeat(out, ev_trial(g, kAnchorEnv, 0.0, BeliefLabel::Box), 2);
    repeat(out, ev_trial(g, kAnchorEnv, -1.0, BeliefLabel::Box), 1);
    repeat(out, ev_trial(g, kConflictEnv, 0.0, BeliefLabel::Basket), 2);
    repeat(out, ev_trial(g, kAmbiguousEnv, -1.0, BeliefLabel::Box), 1);
    repeat(out, ev_trial(g, kAmbiguousEnv, 0.0, BeliefLabel::Basket), 1);
    repeat(out, ev_trial(g, kAmbiguousEnv, 1.0, BeliefLabel::Basket), 2);
    return out;
}

TrainConfig bias_config(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.phase1_epochs = 60;
    cfg.phase2_epochs = 200;
    return cfg;
}

/// Trainer settings of the leave-one-out generalization family. Phase 1
/// stops while the habitual answer is still overridable, meta-vectors hold
/// the phase-1 agent identities, and the phase-2 inner loop runs cool
/// enough to keep the controller's hidden layer alive.
TrainConfig generalization_config(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.phase1_epochs = 20;
    cfg.phase2_epochs = 300;
    cfg.phase2_lr = 0.001;
    cfg.freeze_meta_in_phase2 = true;
    return cfg;
}

TrainedModel train_bias_model(
    std::uint64_t seed,
    const std::function<std::vector<Trial>(const ScenarioGraph&)>& phase2) {
    Curricula curricula;
    curricula.phase1 = make_curriculum(CurriculumKind::anchor);
    curricula.phase2 = phase2(curricula.phase1.front().graph);
    return run_variant(Variant::full, curricula, bias_config(seed));
}

bool env_close(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(a[i] - b[i]) > 1e-12) return false;
    }
    return true;
}

void append_info(ExperimentReport& r, const std::string& k,
                 const std::string& v) {
    r.info.emplace_back(k, v);
}

}  // namespace

void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (jobs == 0) {
        jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    jobs = std::min(jobs, n);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < n;
                 i = next.fetch_add(1)) {
                fn(i);
            }
        });
    }
    for (std::thread& t : workers) t.join();
}

Curricula loo_curricula(std::size_t held_out_index) {
    if (held_out_index >= 8) {
        throw ValidationError("loo_curricula: fold index must be < 8");
    }
    const ScenarioGraph g = build_graph(true);
    const std::vector<Context> contexts = enumerate_contexts();
    Curricula out;
    for (std::size_t ci = 0; ci < contexts.size(); ++ci) {
        if (ci == held_out_index) continue;
        for (NodeKind agent : {NodeKind::Sally, NodeKind::Anne, NodeKind::Bob}) {
            Trial t{g, contexts[ci], agent,
                    ground_truth_belief(contexts[ci], agent,
                                        CueSemantics::boolean_observation),
                    CueSemantics::boolean_observation};
            if (t.label == BeliefLabel::Box) out.phase1.push_back(t);
            out.phase2.push_back(std::move(t));
        }
    }
    return out;
}

std::vector<std::uint64_t> default_ablation_seeds() { return {2, 18, 11, 43, 59}; }

// ------------------------------------------------------------- ablation

ExperimentReport run_ablation(const std::vector<std::uint64_t>& seeds,
                              std::size_t jobs) {
    const std::vector<Variant> variants{Variant::full, Variant::no_meta,
                                        Variant::meta_only,
                                        Variant::controller_only};
    struct Run {
        std::vector<RecordRow> rows;
        LossCurve phase1, phase2;
    };
    const std::size_t grid = seeds.size() * variants.size();
    std::vector<Run> runs(grid);

    parallel_for(grid, jobs, [&](std::size_t gi) {
        const std::size_t si = gi / variants.size();
        const Variant variant = variants[gi % variants.size()];
        const std::uint64_t seed = seeds[si];
        const std::size_t fold = static_cast<std::size_t>(seed % 8);

        Curricula curricula = loo_curricula(fold);
        TrainedModel trained =
            run_variant(variant, curricula, generalization_config(seed));

        const ScenarioGraph g = build_graph(true);
        const std::vector<Context> contexts = enumerate_contexts();
        Run& run = runs[gi];
        run.phase1 = std::move(trained.phase1_loss);
        run.phase2 = std::move(trained.phase2_loss);
        int trial = 0;
        for (std::size_t ci = 0; ci < contexts.size(); ++ci) {
            const bool held = ci == fold;
            for (NodeKind agent :
                 {NodeKind::Sally, NodeKind::Anne, NodeKind::Bob}) {
                const BeliefLabel label = ground_truth_belief(
                    contexts[ci], agent, CueSemantics::boolean_observation);
                TrialRecord rec = infer(g, agent, contexts[ci], trained.state,
                                        label);
                rec.experiment = std::string("ablation/") +
                                 variant_name(variant) + "/" +
                                 (held ? "held" : "seen");
                run.rows.push_back(
                    RecordRow{static_cast<int>(si), trial++, std::move(rec)});
            }
        }
    });

    ExperimentReport report;
    report.name = "ablation";
    for (Run& run : runs) {
        for (RecordRow& row : run.rows) report.records.push_back(std::move(row));
    }
    report.phase1_loss = runs.front().phase1;
    report.phase2_loss = runs.front().phase2;
    report.aggregates = compute_aggregates(report.name, report.records);
    std::ostringstream seeds_str;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (i) seeds_str << " ";
        seeds_str << seeds[i];
    }
    append_info(report, "seeds", seeds_str.str());
    append_info(report, "fold_rule", "seed mod 8");
    append_info(report, "trainer",
                "phase1_epochs=20 phase2_epochs=300 lr=0.01 phase2_lr=0.001 "
                "freeze_meta_in_phase2=true");
    return report;
}

// ---------------------------------------------------------- false belief

ExperimentReport run_falsebelief_loo(std::uint64_t seed, std::size_t jobs) {
    struct Fold {
        std::vector<RecordRow> rows;
        LossCurve phase1, phase2;
    };
    std::vector<Fold> folds(8);

    parallel_for(8, jobs, [&](std::size_t fi) {
        Curricula curricula = loo_curricula(fi);
        TrainedModel trained =
            run_variant(Variant::full, curricula, generalization_config(seed));

        const ScenarioGraph g = build_graph(true);
        const Context held = enumerate_contexts()[fi];
        int trial = 0;
        for (NodeKind agent : {NodeKind::Sally, NodeKind::Anne, NodeKind::Bob}) {
            const BeliefLabel label = ground_truth_belief(
                held, agent, CueSemantics::boolean_observation);
            TrialRecord rec = infer(g, agent, held, trained.state, label);
            rec.experiment = "falsebelief";
            folds[fi].rows.push_back(
                RecordRow{static_cast<int>(fi), trial++, std::move(rec)});
        }
        folds[fi].phase1 = std::move(trained.phase1_loss);
        folds[fi].phase2 = std::move(trained.phase2_loss);
    });

    ExperimentReport report;
    report.name = "falsebelief";
    for (Fold& f : folds) {
        for (RecordRow& row : f.rows) report.records.push_back(std::move(row));
    }
    report.phase1_loss = folds.front().phase1;
    report.phase2_loss = folds.front().phase2;
    report.aggregates = compute_aggregates(report.name, report.records);
    append_info(report, "seed", std::to_string(seed));
    append_info(report, "trainer",
                "phase1_epochs=20 phase2_epochs=300 lr=0.01 phase2_lr=0.001 "
                "freeze_meta_in_phase2=true");
    return report;
}

// ---------------------------------------------------------------- anchor

ExperimentReport run_anchor(std::uint64_t seed) {
    TrainedModel trained = train_bias_model(seed, anchor_phase2);
    const ScenarioGraph g = build_graph(false);

    ExperimentReport report;
    report.name = "anchor";
    report.phase1_loss = std::move(trained.phase1_loss);
    report.phase2_loss = std::move(trained.phase2_loss);

    int trial = 0;
    // Fifteen reinforcing presentations of the anchor; inference only.
    for (int i = 0; i < 15; ++i) {
        TrialRecord rec = infer(g, NodeKind::Sally, make_context(kAnchorEnv),
                                trained.state, BeliefLabel::Box);
        rec.experiment = "anchor/presentation";
        report.records.push_back(RecordRow{0, trial++, std::move(rec)});
    }
    const std::array<std::pair<std::array<double, 3>, BeliefLabel>, 3> evals{
        {{kAnchorEnv, BeliefLabel::Box},
         {kConflictEnv, BeliefLabel::Basket},
         {kAmbiguousEnv, BeliefLabel::Basket}}};
    for (const auto& [env, label] : evals) {
        TrialRecord rec = infer(g, NodeKind::Sally, make_context(env),
                                trained.state, label);
        rec.experiment = "anchor/eval";
        report.records.push_back(RecordRow{0, trial++, std::move(rec)});
    }
    report.aggregates = compute_aggregates(report.name, report.records);
    append_info(report, "seed", std::to_string(seed));
    append_info(report, "trainer",
                "phase1_epochs=60 phase2_epochs=200 lr=0.01");
    append_info(report, "phase1_final_loss",
                num(report.phase1_loss.back()));
    return report;
}

// ----------------------------------------------------------------- prime

ExperimentReport run_prime(std::uint64_t seed) {
    TrainedModel trained = train_bias_model(seed, prime_phase2);
    const ScenarioGraph g = build_graph(false);
    const Context probe = make_context(kAmbiguousEnv);
    const Context prime_ctx = make_context(kConflictEnv);
    WorkingMemory memory;

    ExperimentReport report;
    report.name = "prime";
    report.phase1_loss = std::move(trained.phase1_loss);
    report.phase2_loss = std::move(trained.phase2_loss);

    auto probe_record = [&](int trial) {
        TrialRecord rec = infer(g, NodeKind::Sally, probe, trained.state,
                                BeliefLabel::Basket, &memory);
        rec.experiment = "prime/probe";
        report.records.push_back(RecordRow{0, trial, std::move(rec)});
    };

    probe_record(0);  // baseline

    // Priming presentation: recorded but not scored as a probe. The
    // controller's delta for the high-certainty context is stored for
    // exactly one later trial.
    {
        Tape tape;
        InferOutput out = run_inference(tape, g, NodeKind::Sally, prime_ctx,
                                        trained.state, BeliefLabel::Basket);
        out.record.experiment = "prime/presentation";
        memory.store(std::vector<double>(out.delta.values().begin(),
                                         out.delta.values().end()));
        report.records.push_back(RecordRow{0, 1, std::move(out.record)});
    }

    probe_record(2);  // primed
    probe_record(3);  // memory consumed, back to baseline

    report.aggregates = compute_aggregates(report.name, report.records);
    append_info(report, "seed", std::to_string(seed));
    append_info(report, "trainer",
                "phase1_epochs=60 phase2_epochs=200 lr=0.01");
    return report;
}

// --------------------------------------------------------------- fatigue

ExperimentReport run_fatigue(const std::vector<double>& load_grid,
                             std::uint64_t seed) {
    TrainedModel trained = train_bias_model(seed, fatigue_phase2);
    const ScenarioGraph g = build_graph(false);

    ExperimentReport report;
    report.name = "fatigue";
    report.phase1_loss = std::move(trained.phase1_loss);
    report.phase2_loss = std::move(trained.phase2_loss);

    int trial = 0;
    for (double load : load_grid) {
        TrialRecord amb = infer(g, NodeKind::Sally,
                                make_context(kAmbiguousEnv, load),
                                trained.state, BeliefLabel::Basket);
        amb.experiment = "fatigue/ambiguous";
        report.records.push_back(RecordRow{0, trial++, std::move(amb)});

        TrialRecord easy = infer(g, NodeKind::Sally,
                                 make_context(kAnchorEnv, load), trained.state,
                                 BeliefLabel::Box);
        easy.experiment = "fatigue/easy";
        report.records.push_back(RecordRow{0, trial++, std::move(easy)});
    }
    report.aggregates = compute_aggregates(report.name, report.records);
    append_info(report, "seed", std::to_string(seed));
    append_info(report, "trainer",
                "phase1_epochs=60 phase2_epochs=200 lr=0.01");
    return report;
}

// --------------------------------------------------------------- framing

ExperimentReport run_framing(std::uint64_t seed) {
    TrainedModel trained = train_bias_model(seed, frame_phase2);
    const ScenarioGraph g = build_graph(false);

    ExperimentReport report;
    report.name = "frame";
    report.phase1_loss = std::move(trained.phase1_loss);
    report.phase2_loss = std::move(trained.phase2_loss);

    int trial = 0;
    for (double frame : {-1.0, 0.0, 1.0}) {
        TrialRecord rec = infer(g, NodeKind::Sally,
                                make_context(kAmbiguousEnv, 0.0, frame),
                                trained.state, BeliefLabel::Basket);
        rec.experiment = "frame";
        report.records.push_back(RecordRow{0, trial++, std::move(rec)});
    }
    report.aggregates = compute_aggregates(report.name, report.records);
    append_info(report, "seed", std::to_string(seed));
    append_info(report, "trainer",
                "phase1_epochs=60 phase2_epochs=200 lr=0.01");
    return report;
}

// ------------------------------------------------------------ aggregates

namespace {

void ablation_aggregates(const std::vector<RecordRow>& records,
                         std::map<std::string, double>& out) {
    // accuracy per (variant, split, run), then mean/std over runs
    std::map<std::string, std::map<int, std::pair<std::size_t, std::size_t>>>
        tally;  // key -> run -> (correct, total)
    for (const RecordRow& row : records) {
        auto& cell = tally[row.rec.experiment][row.fold];
        cell.first += row.rec.correct ? 1 : 0;
        cell.second += 1;
    }
    for (const auto& [key, runs] : tally) {
        // key is "ablation/<variant>/<split>"
        std::string name = key.substr(std::string("ablation/").size());
        std::replace(name.begin(), name.end(), '/', '_');
        std::vector<double> accs;
        std::size_t total_trials = 0;
        for (const auto& [run, cell] : runs) {
            accs.push_back(pct(cell.first, cell.second));
            total_trials += cell.second;
        }
        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= static_cast<double>(accs.size());
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        var /= static_cast<double>(accs.size());
        out[name + "_mean"] = mean;
        out[name + "_std"] = std::sqrt(var);
        out[name + "_trials"] = static_cast<double>(total_trials);
    }
}

void falsebelief_aggregates(const std::vector<RecordRow>& records,
                            std::map<std::string, double>& out) {
    std::size_t correct = 0;
    std::map<int, bool> fold_all_correct;
    std::size_t s1_correct = 0;
    std::size_t override_rows = 0;
    double gate_min = 1.0;
    double gate_max = 0.0;
    for (const RecordRow& row : records) {
        correct += row.rec.correct ? 1 : 0;
        auto [it, inserted] = fold_all_correct.try_emplace(row.fold, true);
        it->second = it->second && row.rec.correct;
        if (row.rec.label == BeliefLabel::Basket) {
            ++override_rows;
            if (predict_label(row.rec.p1) == row.rec.label) ++s1_correct;
            gate_min = std::min(gate_min, row.rec.g);
            gate_max = std::max(gate_max, row.rec.g);
        }
    }
    std::size_t all_correct = 0;
    for (const auto& [fold, ok] : fold_all_correct) all_correct += ok ? 1 : 0;
    out["full_held_accuracy"] = pct(correct, records.size());
    out["folds_all_correct"] = static_cast<double>(all_correct);
    out["override_rows"] = static_cast<double>(override_rows);
    out["s1_false_belief_accuracy"] =
        override_rows ? pct(s1_correct, override_rows) : 0.0;
    out["override_gate_min"] = gate_min;
    out["override_gate_max"] = gate_max;
}

void anchor_aggregates(const std::vector<RecordRow>& records,
                       std::map<std::string, double>& out) {
    double presentation_pb = 0.0;
    std::size_t presentations = 0;
    for (const RecordRow& row : records) {
        if (row.rec.experiment == "anchor/presentation") {
            presentation_pb += row.rec.blended[1];
            ++presentations;
            continue;
        }
        const auto& env = row.rec.context.env;
        std::string which = env_close(env, kAnchorEnv)     ? "anchor"
                            : env_close(env, kConflictEnv) ? "conflict"
                                                           : "ambiguous";
        out[which + "_g"] = row.rec.g;
        out[which + "_p_basket"] = row.rec.blended[1];
    }
    if (presentations) {
        out["presentation_p_basket_mean"] =
            presentation_pb / static_cast<double>(presentations);
        out["presentations"] = static_cast<double>(presentations);
    }
}

void prime_aggregates(const std::vector<RecordRow>& records,
                      std::map<std::string, double>& out) {
    int probe = 0;
    double first = 0.0;
    double last = 0.0;
    for (const RecordRow& row : records) {
        if (row.rec.experiment != "prime/probe") continue;
        ++probe;
        out["probe_" + std::to_string(probe) + "_p_basket"] =
            row.rec.blended[1];
        out["probe_" + std::to_string(probe) + "_g"] = row.rec.g;
        if (probe == 1) first = row.rec.blended[1];
        last = row.rec.blended[1];
    }
    out["probe_revert_diff"] = std::abs(last - first);
}

void fatigue_aggregates(const std::vector<RecordRow>& records,
                        std::map<std::string, double>& out) {
    std::vector<const RecordRow*> amb;
    std::vector<const RecordRow*> easy;
    for (const RecordRow& row : records) {
        (row.rec.experiment == "fatigue/ambiguous" ? amb : easy)
            .push_back(&row);
    }
    auto by_load = [](const RecordRow* a, const RecordRow* b) {
        return a->rec.context.load < b->rec.context.load;
    };
    std::sort(amb.begin(), amb.end(), by_load);
    std::sort(easy.begin(), easy.end(), by_load);

    bool monotone = true;
    double p2_min = 1.0;
    double p2_max = 0.0;
    for (std::size_t i = 0; i < amb.size(); ++i) {
        const TrialRecord& r = amb[i]->rec;
        const std::string k = std::to_string(i);
        out["ambiguous_g_" + k] = r.g;
        out["ambiguous_pb_" + k] = r.blended[1];
        out["ambiguous_p2b_" + k] = r.p2[1];
        if (i && !(r.g < amb[i - 1]->rec.g)) monotone = false;
        p2_min = std::min(p2_min, r.p2[1]);
        p2_max = std::max(p2_max, r.p2[1]);
    }
    bool easy_ok = true;
    for (std::size_t i = 0; i < easy.size(); ++i) {
        const TrialRecord& r = easy[i]->rec;
        out["easy_pb_" + std::to_string(i)] = r.blended[1];
        out["easy_correct_" + std::to_string(i)] = r.correct ? 1.0 : 0.0;
        easy_ok = easy_ok && r.correct;
    }
    out["ambiguous_g_strictly_decreasing"] = monotone ? 1.0 : 0.0;
    out["ambiguous_p2_range"] = p2_max - p2_min;
    out["easy_all_correct"] = easy_ok ? 1.0 : 0.0;
}

void frame_aggregates(const std::vector<RecordRow>& records,
                      std::map<std::string, double>& out) {
    double p1_min = 1.0, p1_max = 0.0, p2_min = 1.0, p2_max = 0.0;
    for (const RecordRow& row : records) {
        const double f = row.rec.context.frame;
        const std::string which = f < 0 ? "negative" : f > 0 ? "positive"
                                                             : "neutral";
        out["gate_" + which] = row.rec.g;
        out["pb_" + which] = row.rec.blended[1];
        p1_min = std::min(p1_min, row.rec.p1[1]);
        p1_max = std::max(p1_max, row.rec.p1[1]);
        p2_min = std::min(p2_min, row.rec.p2[1]);
        p2_max = std::max(p2_max, row.rec.p2[1]);
    }
    out["p1_basket_range"] = p1_max - p1_min;
    out["p2_basket_range"] = p2_max - p2_min;
    out["gate_ordered"] = (out["gate_negative"] < out["gate_neutral"] &&
                           out["gate_neutral"] < out["gate_positive"])
                              ? 1.0
                              : 0.0;
}

}  // namespace

std::map<std::string, double> compute_aggregates(
    const std::string& name, const std::vector<RecordRow>& records) {
    std::map<std::string, double> out;
    out["records"] = static_cast<double>(records.size());
    if (name == "ablation") ablation_aggregates(records, out);
    else if (name == "falsebelief") falsebelief_aggregates(records, out);
    else if (name == "anchor") anchor_aggregates(records, out);
    else if (name == "prime") prime_aggregates(records, out);
    else if (name == "fatigue") fatigue_aggregates(records, out);
    else if (name == "frame") frame_aggregates(records, out);
    return out;
}

// ------------------------------------------------------------------ emit

namespace {

std::string records_csv(const std::vector<RecordRow>& records) {
    std::ostringstream os;
    os << kRecordsCsvHeader << "\n";
    for (const RecordRow& row : records) {
        const TrialRecord& r = row.rec;
        os << r.experiment << "," << row.fold << "," << row.trial << ","
           << node_kind_name(r.agent) << "," << num(r.context.env[0]) << ","
           << num(r.context.env[1]) << "," << num(r.context.env[2]) << ","
           << num(r.context.load) << "," << num(r.context.frame) << ","
           << num(r.g) << "," << num(r.p1[0]) << "," << num(r.p1[1]) << ","
           << num(r.p2[0]) << "," << num(r.p2[1]) << "," << num(r.blended[0])
           << "," << num(r.blended[1]) << "," << label_name(r.predicted) << ","
           << label_name(r.label) << "," << (r.correct ? 1 : 0) << "\n";
    }
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw IoError("emit: cannot write " + path.string());
    out << body;
    if (!out) throw IoError("emit: write failed for " + path.string());
}

svg::Series series_of(const std::string& label, std::vector<double> x,
                      std::vector<double> y) {
    return svg::Series{label, std::move(x), std::move(y)};
}

void emit_figures(const ExperimentReport& report,
                  const std::filesystem::path& dir) {
    const auto& agg = report.aggregates;
    auto get = [&](const std::string& k) {
        auto it = agg.find(k);
        return it == agg.end() ? 0.0 : it->second;
    };

    if (report.name == "ablation") {
        std::vector<svg::Bar> held, seen;
        for (const char* v :
             {"full", "no-meta", "meta-only", "controller-only"}) {
            std::string key(v);
            std::replace(key.begin(), key.end(), '/', '_');
            held.push_back({v, get(key + "_held_mean"), get(key + "_held_std")});
            seen.push_back({v, get(key + "_seen_mean"), get(key + "_seen_std")});
        }
        write_file(dir / "figure-heldout.svg",
                   svg::bar_chart("Held-out accuracy by variant",
                                  "accuracy (%)", held));
        write_file(dir / "figure-seen.svg",
                   svg::bar_chart("Seen accuracy by variant", "accuracy (%)",
                                  seen));
    } else if (report.name == "falsebelief") {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < report.phase2_loss.size(); ++i) {
            x.push_back(static_cast<double>(i));
            y.push_back(report.phase2_loss[i]);
        }
        write_file(dir / "figure-loss.svg",
                   svg::line_chart("Meta-controller training loss (fold 0)",
                                   "epoch", "mean cross-entropy",
                                   {series_of("loss", x, y)}));
        std::vector<svg::Bar> gates;
        for (const RecordRow& row : report.records) {
            if (row.rec.label != BeliefLabel::Basket) continue;
            gates.push_back({"f" + std::to_string(row.fold) + "/" +
                                 node_kind_name(row.rec.agent),
                             row.rec.g, 0.0});
        }
        write_file(dir / "figure-gate.svg",
                   svg::bar_chart("Gate on held-out override rows", "gate",
                                  gates));
    } else if (report.name == "anchor") {
        std::vector<double> x{0, 1, 2};
        std::vector<double> gv{get("anchor_g"), get("conflict_g"),
                               get("ambiguous_g")};
        std::vector<double> pb{get("anchor_p_basket"), get("conflict_p_basket"),
                               get("ambiguous_p_basket")};
        write_file(dir / "figure-anchor.svg",
                   svg::line_chart(
                       "Anchor / conflict / ambiguous evaluation",
                       "phase (0 anchor, 1 conflict, 2 ambiguous)", "value",
                       {series_of("gate", x, gv), series_of("P(Basket)", x, pb)}));
    } else if (report.name == "prime") {
        std::vector<double> x{1, 2, 3};
        std::vector<double> pb{get("probe_1_p_basket"), get("probe_2_p_basket"),
                               get("probe_3_p_basket")};
        write_file(dir / "figure-priming.svg",
                   svg::line_chart("One-shot priming on the ambiguous probe",
                                   "probe", "P(Basket)",
                                   {series_of("P(Basket)", x, pb)}));
    } else if (report.name == "fatigue") {
        std::vector<double> loads;
        std::vector<double> g, pb, p1b, p2b, err_amb, err_easy, pb_easy;
        for (const RecordRow& row : report.records) {
            if (row.rec.experiment == "fatigue/ambiguous") {
                loads.push_back(row.rec.context.load);
                g.push_back(row.rec.g);
                pb.push_back(row.rec.blended[1]);
                p1b.push_back(row.rec.p1[1]);
                p2b.push_back(row.rec.p2[1]);
                err_amb.push_back(row.rec.correct ? 0.0 : 1.0);
            } else {
                pb_easy.push_back(row.rec.blended[1]);
                err_easy.push_back(row.rec.correct ? 0.0 : 1.0);
            }
        }
        write_file(
            dir / "figure-fatigue-ambiguous.svg",
            svg::line_chart("Ambiguous context under cognitive load", "load",
                            "value",
                            {series_of("g", loads, g),
                             series_of("blended", loads, pb),
                             series_of("p1", loads, p1b),
                             series_of("p2", loads, p2b)}));
        write_file(dir / "figure-fatigue-easy.svg",
                   svg::line_chart("Easy context under cognitive load", "load",
                                   "P(Basket)",
                                   {series_of("blended", loads, pb_easy)}));
        write_file(dir / "figure-error-rate.svg",
                   svg::line_chart("Error rate under cognitive load", "load",
                                   "error rate",
                                   {series_of("ambiguous", loads, err_amb),
                                    series_of("easy", loads, err_easy)}));
    } else if (report.name == "frame") {
        std::vector<double> x{-1, 0, 1};
        std::vector<double> gv{get("gate_negative"), get("gate_neutral"),
                               get("gate_positive")};
        std::vector<double> pb{get("pb_negative"), get("pb_neutral"),
                               get("pb_positive")};
        write_file(dir / "figure-framing.svg",
                   svg::line_chart("Framing shift with facts fixed", "frame",
                                   "value",
                                   {series_of("gate", x, gv),
                                    series_of("P(Basket)", x, pb)}));
    }
}

}  // namespace

void emit_report(const ExperimentReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("emit: cannot create " + out_dir + ": " + ec.message());
    const fs::path dir(out_dir);

    const std::string csv = records_csv(report.records);
    write_file(dir / "records.csv", csv);

    std::ostringstream agg;
    agg << "metric,value\n";
    for (const auto& [k, v] : report.aggregates) {
        agg << k << "," << num(v) << "\n";
    }
    write_file(dir / "aggregates.csv", agg.str());

    emit_figures(report, dir);

    nlohmann::json manifest;
    manifest["experiment"] = report.name;
    manifest["version"] = kVersion;
    manifest["kernels"] = kernels::backend_name(kernels::active_backend());
    nlohmann::json info;
    for (const auto& [k, v] : report.info) info[k] = v;
    manifest["config"] = info;
    manifest["records"] = report.records.size();
    // FNV-1a over the emitted CSV bytes
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : csv) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char checksum[32];
    std::snprintf(checksum, sizeof(checksum), "%016llx",
                  static_cast<unsigned long long>(h));
    manifest["records_checksum"] = checksum;
    manifest["phase1_epochs"] = report.phase1_loss.size();
    manifest["phase2_epochs"] = report.phase2_loss.size();
    write_file(dir / "manifest.json", manifest.dump(1) + "\n");
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "ablation", "falsebelief", "anchor", "prime", "fatigue", "frame"};
    return names;
}

ExperimentReport run_experiment_by_name(const std::string& name,
                                        std::uint64_t seed_override,
                                        bool has_seed_override,
                                        std::size_t jobs) {
    if (name == "ablation") {
        std::vector<std::uint64_t> seeds = default_ablation_seeds();
        if (has_seed_override) {
            seeds.clear();
            for (std::uint64_t i = 0; i < 5; ++i) {
                seeds.push_back(seed_override + i);
            }
        }
        return run_ablation(seeds, jobs);
    }
    if (name == "falsebelief") {
        return run_falsebelief_loo(
            has_seed_override ? seed_override : kFalsebeliefSeed, jobs);
    }
    if (name == "anchor") {
        return run_anchor(has_seed_override ? seed_override : kAnchorSeed);
    }
    if (name == "prime") {
        return run_prime(has_seed_override ? seed_override : kPrimeSeed);
    }
    if (name == "fatigue") {
        return run_fatigue({0.0, 0.25, 0.5, 0.75, 1.0},
                           has_seed_override ? seed_override : kFatigueSeed);
    }
    if (name == "frame") {
        return run_framing(has_seed_override ? seed_override : kFrameSeed);
    }
    std::string valid;
    for (const std::string& n : experiment_names()) {
        valid += valid.empty() ? n : ", " + n;
    }
    throw ValidationError("unknown experiment '" + name + "' (valid: " + valid +
                          ")");
}

}  // namespace dualmind
