#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vlmc/estimators.hpp"
#include "vlmc/model.hpp"

namespace vlmc {

enum class KlSmoothing { add_half, raw };
enum class Chi2Mode { two_sample, normalized };

/// One Monte-Carlo comparison: two true sources, their true partition, sample
/// sizes and replication/seeding parameters.
struct ExperimentConfig {
    ProbabilisticContextTree model_x, model_y;
    JointPartition true_partition;
    std::uint64_t n = 0, m = 0;
    int reps = 1;
    std::uint64_t base_seed = 1;
    double lambda = 1.0;
    std::vector<double> lambda_grid = {0.25, 0.5, 1.0, 2.0, 4.0};
    std::vector<double> threshold_grid = {0.0, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8};
    int depth = -1; // -1: default bound for (n, m)
    KlSmoothing kl_smoothing = KlSmoothing::add_half;
    Chi2Mode chi2_mode = Chi2Mode::two_sample;

    int effective_depth() const;
    void validate() const; // throws on inconsistent configuration
};

struct FreqStat {
    double freq = 0.0;
    double moe = 0.0; // 1.96 * sqrt(f(1-f)/reps)
};

struct MethodReport {
    FreqStat tau_x, tau_y, both, sigma0, sigma1, sigma2;
    double mean_kl_x = 0.0, mean_kl_y = 0.0;
    int kl_x_infinite = 0, kl_y_infinite = 0; // raw smoothing only
};

struct ExperimentReport {
    MethodReport joint, separate;
    double chosen_threshold = 0.0;
    double separate_correct_freq = 0.0; // full-triple frequency at the chosen threshold
    int reps = 0;
    KlSmoothing kl_smoothing = KlSmoothing::add_half;
};

/// Two-sample chi-squared homogeneity statistic against the pooled
/// conditional; cells with zero pooled probability contribute 0.
double chi2_stat(std::span<const std::uint32_t> counts_x, std::span<const std::uint32_t> counts_y);

/// Chi-squared distance between the two normalized empirical conditionals
/// (selectable alternative to the homogeneity statistic).
double chi2_normalized(std::span<const std::uint32_t> counts_x,
                       std::span<const std::uint32_t> counts_y);

/// Baseline: independent single-tree fits, then contexts present in both
/// fitted trees whose chi-squared statistic is strictly below the threshold
/// are pooled into sigma0.
EstimationResult fit_separate_with_sharing(const CountTrie& tx, const CountTrie& ty,
                                           const PenaltyConfig& pen, double threshold, int depth,
                                           Chi2Mode mode = Chi2Mode::two_sample);

/// Threshold maximizing the baseline's frequency of recovering the full true
/// triple, evaluated over the grid with common seeds; ties pick the smallest
/// threshold. Returns (threshold, frequency).
std::pair<double, double> tune_threshold(const ExperimentConfig& config, int jobs = 1);

/// Full comparative study: per replication, samples both sequences and runs
/// the joint fit plus the tuned baseline; deterministic given base_seed and
/// independent of the worker count.
ExperimentReport run_experiment(const ExperimentConfig& config, int jobs = 1,
                                std::ostream* per_rep_csv = nullptr);

/// Joint-method frequency of recovering the full true triple per penalty
/// multiplier, with common seeds across grid points.
std::vector<std::pair<double, double>> sweep_lambda(const ExperimentConfig& config, int jobs = 1);

/// Aligned text table: one row per method, columns in the order
/// tau_X, tau_Y, both, sigma0, sigma1, sigma2, KL_X, KL_Y.
std::string report_table(const ExperimentReport& report);

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
ExperimentConfig config_from_json(const nlohmann::ordered_json& j);

} // namespace vlmc
