#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dualmind/training.hpp"

namespace dualmind {

/// One evaluation row with its fold and position.
struct RecordRow {
    int fold = 0;
    int trial = 0;
    TrialRecord rec;
};

/// Output of one experimental protocol. Aggregates are a pure function of
/// the records (compute_aggregates); training curves and manifest extras
/// ride alongside.
struct ExperimentReport {
    std::string name;
    std::vector<RecordRow> records;
    std::map<std::string, double> aggregates;
    LossCurve phase1_loss;  // representative run
    LossCurve phase2_loss;
    std::vector<std::pair<std::string, std::string>> info;
};

/// Recompute the aggregate map from raw records; emit-time aggregates must
/// match this exactly.
std::map<std::string, double> compute_aggregates(
    const std::string& name, const std::vector<RecordRow>& records);

/// Leave-one-out curricula over the boolean contexts (Bob roster): phase 1
/// holds the canonical trials of the seven training contexts, phase 2 all of
/// their agent-context pairs.
Curricula loo_curricula(std::size_t held_out_index);

std::vector<std::uint64_t> default_ablation_seeds();
inline constexpr std::uint64_t kFalsebeliefSeed = 11;
inline constexpr std::uint64_t kAnchorSeed = 11;
inline constexpr std::uint64_t kPrimeSeed = 13;
inline constexpr std::uint64_t kFatigueSeed = 17;
inline constexpr std::uint64_t kFrameSeed = 19;

/// Seen/held-out accuracy of the four variants over five seeds; the held-out
/// context of a run is its seed mod 8.
ExperimentReport run_ablation(
    const std::vector<std::uint64_t>& seeds = default_ablation_seeds(),
    std::size_t jobs = 0);

/// Eight leave-one-out folds of the full model, evaluated on every agent of
/// the held-out context.
ExperimentReport run_falsebelief_loo(std::uint64_t seed = kFalsebeliefSeed,
                                     std::size_t jobs = 0);

/// Anchor induction (60 epochs on the anchor context), fifteen reinforcing
/// presentations, then evaluation on the anchor, conflicting and ambiguous
/// contexts.
ExperimentReport run_anchor(std::uint64_t seed = kAnchorSeed);

/// Baseline probe, priming presentation whose delta is stored in working
/// memory, primed probe, and a post-prime probe.
ExperimentReport run_prime(std::uint64_t seed = kPrimeSeed);

/// Ambiguous and easy contexts evaluated across a cognitive-load grid on a
/// model trained at load zero.
ExperimentReport run_fatigue(
    const std::vector<double>& load_grid = {0.0, 0.25, 0.5, 0.75, 1.0},
    std::uint64_t seed = kFatigueSeed);

/// Fixed ambiguous facts evaluated under negative, neutral and positive
/// frames.
ExperimentReport run_framing(std::uint64_t seed = kFrameSeed);

ExperimentReport run_experiment_by_name(const std::string& name,
                                        std::uint64_t seed_override,
                                        bool has_seed_override,
                                        std::size_t jobs);

const std::vector<std::string>& experiment_names();

/// Write records.csv, aggregates.csv, per-experiment SVG figures and
/// manifest.json under out_dir. Byte-identical for identical reports.
void emit_report(const ExperimentReport& report, const std::string& out_dir);

/// Fixed schema of records.csv.
extern const char* const kRecordsCsvHeader;

/// Minimal index-parallel runner used for seed/fold grids; jobs == 0 picks
/// the hardware concurrency. Results must be written to pre-sized slots.
void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace dualmind
