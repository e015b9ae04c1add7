#include "vlmc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "vlmc/model_json.hpp"

namespace vlmc {

using nlohmann::ordered_json;

int ExperimentConfig::effective_depth() const {
    return depth >= 0 ? depth : default_depth_bound(n, m);
}

void ExperimentConfig::validate() const {
    if (n < 1 || m < 1) throw std::runtime_error("experiment config: n and m must be >= 1");
    if (reps < 1) throw std::runtime_error("experiment config: reps must be >= 1");
    if (lambda <= 0.0) throw std::runtime_error("experiment config: lambda must be positive");
    if (threshold_grid.empty() || lambda_grid.empty())
        throw std::runtime_error("experiment config: grids must be non-empty");
    for (double t : threshold_grid)
        if (t < 0.0) throw std::runtime_error("experiment config: thresholds must be >= 0");
    if (model_x.alphabet != model_y.alphabet)
        throw std::runtime_error("experiment config: models use different alphabets");
    const int alpha = model_x.alphabet.size();
    require_valid(true_partition, alpha);

    ContextSet tau_x, tau_y;
    for (const auto& [ctx, row] : model_x.theta) tau_x.insert(ctx);
    for (const auto& [ctx, row] : model_y.theta) tau_y.insert(ctx);
    ContextSet want_x = true_partition.sigma0;
    want_x.insert(true_partition.sigma1.begin(), true_partition.sigma1.end());
    ContextSet want_y = true_partition.sigma0;
    want_y.insert(true_partition.sigma2.begin(), true_partition.sigma2.end());
    if (tau_x != want_x || tau_y != want_y)
        throw std::runtime_error("experiment config: true partition does not match the model trees");
    for (const Context& s : true_partition.sigma0) {
        const auto& rx = model_x.theta.at(s);
        const auto& ry = model_y.theta.at(s);
        for (int a = 0; a < alpha; ++a)
            if (std::abs(rx[a] - ry[a]) > 1e-12)
                throw std::runtime_error(
                    "experiment config: shared context has different distributions: '" +
                    context_display(s, model_x.alphabet) + "'");
    }
    const int d = effective_depth();
    if (tree_depth(tau_x) > d || tree_depth(tau_y) > d)
        throw std::runtime_error("experiment config: depth bound below the true tree depth");
}

double chi2_stat(std::span<const std::uint32_t> counts_x, std::span<const std::uint32_t> counts_y) {
    if (counts_x.size() != counts_y.size())
        throw std::invalid_argument("count vectors of different sizes");
    double nx = 0.0, ny = 0.0;
    for (std::uint32_t c : counts_x) nx += c;
    for (std::uint32_t c : counts_y) ny += c;
    if (nx <= 0.0 || ny <= 0.0)
        throw std::invalid_argument("chi-squared statistic requires positive totals on both sides");
    double t = 0.0;
    for (std::size_t a = 0; a < counts_x.size(); ++a) {
        const double pooled = (counts_x[a] + static_cast<double>(counts_y[a])) / (nx + ny);
        if (pooled <= 0.0) continue;
        const double ex = nx * pooled, ey = ny * pooled;
        const double dx = counts_x[a] - ex, dy = counts_y[a] - ey;
        t += dx * dx / ex + dy * dy / ey;
    }
    return t;
}

double chi2_normalized(std::span<const std::uint32_t> counts_x,
                       std::span<const std::uint32_t> counts_y) {
    if (counts_x.size() != counts_y.size())
        throw std::invalid_argument("count vectors of different sizes");
    double nx = 0.0, ny = 0.0;
    for (std::uint32_t c : counts_x) nx += c;
    for (std::uint32_t c : counts_y) ny += c;
    if (nx <= 0.0 || ny <= 0.0)
        throw std::invalid_argument("chi-squared statistic requires positive totals on both sides");
    double t = 0.0;
    for (std::size_t a = 0; a < counts_x.size(); ++a) {
        const double px = counts_x[a] / nx, py = counts_y[a] / ny;
        if (px + py <= 0.0) continue;
        t += (px - py) * (px - py) / (px + py);
    }
    return t;
}

namespace {

double stat_for(Chi2Mode mode, std::span<const std::uint32_t> cx,
                std::span<const std::uint32_t> cy) {
    return mode == Chi2Mode::two_sample ? chi2_stat(cx, cy) : chi2_normalized(cx, cy);
}

using CountMap = std::map<Context, std::vector<std::uint32_t>, ContextOrder>;

std::vector<double> smooth_row(const std::vector<std::uint32_t>& cx,
                               const std::vector<std::uint32_t>* cy, KlSmoothing mode) {
    const std::size_t alpha = cx.size();
    std::vector<double> row(alpha, 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < alpha; ++a) {
        double c = cx[a];
        if (cy) c += (*cy)[a];
        row[a] = c;
        total += c;
    }
    if (mode == KlSmoothing::add_half) {
        for (std::size_t a = 0; a < alpha; ++a) row[a] = (row[a] + 0.5) / (total + 0.5 * alpha);
    } else if (total > 0.0) {
        for (std::size_t a = 0; a < alpha; ++a) row[a] /= total;
    } // raw mode with zero counts keeps an all-zero row: KL against it is infinite
    return row;
}

struct MethodBits {
    bool tau_x = false, tau_y = false, s0 = false, s1 = false, s2 = false;
    double kl_x = 0.0, kl_y = 0.0;
    bool triple() const { return s0 && s1 && s2; }
};

struct RepRecord {
    MethodBits joint;
    CountMap tree_x;                  // baseline fitted tree for X with X-counts
    CountMap tree_y;                  // baseline fitted tree for Y with Y-counts
    std::map<Context, double, ContextOrder> shared_stat; // defined statistics only
};

struct Truth {
    ContextSet tau_x, tau_y;
    const JointPartition* part;
};

MethodBits score_partition(const JointPartition& got, const Truth& truth) {
    MethodBits bits;
    ContextSet tau_x = got.sigma0;
    tau_x.insert(got.sigma1.begin(), got.sigma1.end());
    ContextSet tau_y = got.sigma0;
    tau_y.insert(got.sigma2.begin(), got.sigma2.end());
    bits.tau_x = tau_x == truth.tau_x;
    bits.tau_y = tau_y == truth.tau_y;
    bits.s0 = got.sigma0 == truth.part->sigma0;
    bits.s1 = got.sigma1 == truth.part->sigma1;
    bits.s2 = got.sigma2 == truth.part->sigma2;
    return bits;
}

// Model induced on one source by a fitted partition: source-specific contexts
// use that sample's counts, shared contexts the pooled counts.
ProbabilisticContextTree fitted_model(const Alphabet& alphabet, const ContextSet& shared,
                                      const ContextSet& specific, const CountTrie& own,
                                      const CountTrie& other, KlSmoothing smoothing) {
    ProbabilisticContextTree model;
    model.alphabet = alphabet;
    for (const Context& s : shared) {
        const auto cx = own.counts_of(s);
        const auto cy = other.counts_of(s);
        model.theta.emplace(s, smooth_row(cx, &cy, smoothing));
    }
    for (const Context& s : specific) model.theta.emplace(s, smooth_row(own.counts_of(s), nullptr, smoothing));
    return model;
}

void fill_kls(MethodBits& bits, const ExperimentConfig& config, const JointPartition& part,
              const CountTrie& tx, const CountTrie& ty) {
    const auto fitted_x = fitted_model(config.model_x.alphabet, part.sigma0, part.sigma1, tx, ty,
                                       config.kl_smoothing);
    const auto fitted_y = fitted_model(config.model_y.alphabet, part.sigma0, part.sigma2, ty, tx,
                                       config.kl_smoothing);
    bits.kl_x = kl_rate(config.model_x, fitted_x);
    bits.kl_y = kl_rate(config.model_y, fitted_y);
}

JointPartition baseline_partition(const RepRecord& rec, double threshold) {
    JointPartition part;
    for (const auto& [s, stat] : rec.shared_stat)
        if (stat < threshold) part.sigma0.insert(s);
    for (const auto& [s, counts] : rec.tree_x)
        if (!part.sigma0.count(s)) part.sigma1.insert(s);
    for (const auto& [s, counts] : rec.tree_y)
        if (!part.sigma0.count(s)) part.sigma2.insert(s);
    return part;
}

struct StudyOptions {
    bool with_joint = true;
    bool with_baseline = true;
};

std::vector<RepRecord> run_study(const ExperimentConfig& config, int jobs,
                                 const StudyOptions& opts) {
    config.validate();
    const int alpha = config.model_x.alphabet.size();
    const int depth = config.effective_depth();
    const PenaltyConfig pen{config.lambda};
    const ModelSampler sampler_x(config.model_x);
    const ModelSampler sampler_y(config.model_y);

    Truth truth;
    truth.part = &config.true_partition;
    truth.tau_x = config.true_partition.sigma0;
    truth.tau_x.insert(config.true_partition.sigma1.begin(), config.true_partition.sigma1.end());
    truth.tau_y = config.true_partition.sigma0;
    truth.tau_y.insert(config.true_partition.sigma2.begin(), config.true_partition.sigma2.end());

    std::vector<RepRecord> recs(static_cast<std::size_t>(config.reps));

    auto run_rep = [&](int r) {
        std::mt19937_64 rng(config.base_seed + static_cast<std::uint64_t>(r));
        const Sequence x = sampler_x.draw(config.n, rng);
        const Sequence y = sampler_y.draw(config.m, rng);
        const CountTrie tx(x, alpha, depth);
        const CountTrie ty(y, alpha, depth);
        RepRecord& rec = recs[static_cast<std::size_t>(r)];

        if (opts.with_joint) {
            const EstimationResult fit = fit_joint(tx, ty, pen, depth);
            rec.joint = score_partition(fit.partition, truth);
            fill_kls(rec.joint, config, fit.partition, tx, ty);
        }
        if (opts.with_baseline) {
            const SingleFit fx = fit_single(tx, pen, depth);
            const SingleFit fy = fit_single(ty, pen, depth);
            for (const Context& s : fx.tree) rec.tree_x.emplace(s, tx.counts_of(s));
            for (const Context& s : fy.tree) rec.tree_y.emplace(s, ty.counts_of(s));
            for (const Context& s : fx.tree) {
                if (!fy.tree.count(s)) continue;
                const auto& cx = rec.tree_x.at(s);
                const auto& cy = rec.tree_y.at(s);
                std::uint64_t nx = 0, ny = 0;
                for (std::uint32_t c : cx) nx += c;
                for (std::uint32_t c : cy) ny += c;
                if (nx > 0 && ny > 0)
                    rec.shared_stat.emplace(s, stat_for(config.chi2_mode, cx, cy));
            }
        }
    };

    const int workers = std::max(1, std::min(jobs, config.reps));
    if (workers == 1) {
        for (int r = 0; r < config.reps; ++r) run_rep(r);
        return recs;
    }
    std::atomic<int> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int r = cursor.fetch_add(1);
                if (r >= config.reps) return;
                try {
                    run_rep(r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return recs;
}

std::pair<double, double> best_threshold(const ExperimentConfig& config,
                                         const std::vector<RepRecord>& recs) {
    std::vector<double> grid = config.threshold_grid;
    std::sort(grid.begin(), grid.end());
    double best_thr = grid.front();
    double best_freq = -1.0;
    for (double thr : grid) {
        int correct = 0;
        for (const RepRecord& rec : recs) {
            JointPartition part = baseline_partition(rec, thr);
            if (part.sigma0 == config.true_partition.sigma0 &&
                part.sigma1 == config.true_partition.sigma1 &&
                part.sigma2 == config.true_partition.sigma2)
                ++correct;
        }
        const double freq = static_cast<double>(correct) / config.reps;
        if (freq > best_freq) {
            best_freq = freq;
            best_thr = thr;
        }
    }
    return {best_thr, best_freq};
}

FreqStat freq_stat(int hits, int reps) {
    const double f = static_cast<double>(hits) / reps;
    return {f, 1.96 * std::sqrt(f * (1.0 - f) / reps)};
}

MethodReport aggregate(const std::vector<MethodBits>& bits, int reps) {
    MethodReport rep;
    int tx = 0, ty = 0, both = 0, s0 = 0, s1 = 0, s2 = 0;
    double klx = 0.0, kly = 0.0;
    int klx_n = 0, kly_n = 0;
    for (const MethodBits& b : bits) {
        tx += b.tau_x;
        ty += b.tau_y;
        both += b.tau_x && b.tau_y;
        s0 += b.s0;
        s1 += b.s1;
        s2 += b.s2;
        if (std::isinf(b.kl_x)) ++rep.kl_x_infinite;
        else { klx += b.kl_x; ++klx_n; }
        if (std::isinf(b.kl_y)) ++rep.kl_y_infinite;
        else { kly += b.kl_y; ++kly_n; }
    }
    rep.tau_x = freq_stat(tx, reps);
    rep.tau_y = freq_stat(ty, reps);
    rep.both = freq_stat(both, reps);
    rep.sigma0 = freq_stat(s0, reps);
    rep.sigma1 = freq_stat(s1, reps);
    rep.sigma2 = freq_stat(s2, reps);
    rep.mean_kl_x = klx_n > 0 ? klx / klx_n : 0.0;
    rep.mean_kl_y = kly_n > 0 ? kly / kly_n : 0.0;
    return rep;
}

void write_csv_row(std::ostream& os, int r, const char* method, const MethodBits& b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%s,%d,%d,%d,%d,%d,%d,%.10g,%.10g\n", r, method,
                  static_cast<int>(b.tau_x), static_cast<int>(b.tau_y),
                  static_cast<int>(b.tau_x && b.tau_y), static_cast<int>(b.s0),
                  static_cast<int>(b.s1), static_cast<int>(b.s2), b.kl_x, b.kl_y);
    os << buf;
}

} // namespace

EstimationResult fit_separate_with_sharing(const CountTrie& tx, const CountTrie& ty,
                                           const PenaltyConfig& pen, double threshold, int depth,
                                           Chi2Mode mode) {
    if (threshold < 0.0) throw std::invalid_argument("threshold must be >= 0");
    const SingleFit fx = fit_single(tx, pen, depth);
    const SingleFit fy = fit_single(ty, pen, depth);

    EstimationResult out;
    for (const Context& s : fx.tree) {
        if (!fy.tree.count(s)) continue;
        const auto cx = tx.counts_of(s);
        const auto cy = ty.counts_of(s);
        std::uint64_t nx = 0, ny = 0;
        for (std::uint32_t c : cx) nx += c;
        for (std::uint32_t c : cy) ny += c;
        if (nx == 0 || ny == 0) continue; // statistic undefined, never pooled
        if (stat_for(mode, cx, cy) < threshold) out.partition.sigma0.insert(s);
    }
    for (const Context& s : fx.tree)
        if (!out.partition.sigma0.count(s)) out.partition.sigma1.insert(s);
    for (const Context& s : fy.tree)
        if (!out.partition.sigma0.count(s)) out.partition.sigma2.insert(s);

    for (const Context& s : out.partition.sigma0) {
        const auto cx = tx.counts_of(s);
        const auto cy = ty.counts_of(s);
        std::vector<double> row(cx.size());
        std::uint64_t total = 0;
        for (std::size_t a = 0; a < cx.size(); ++a) total += cx[a] + static_cast<std::uint64_t>(cy[a]);
        for (std::size_t a = 0; a < cx.size(); ++a)
            row[a] = (cx[a] + static_cast<double>(cy[a])) / static_cast<double>(total);
        out.theta0[s] = std::move(row);
    }
    for (const Context& s : out.partition.sigma1) out.theta1[s] = fx.theta.at(s);
    for (const Context& s : out.partition.sigma2) out.theta2[s] = fy.theta.at(s);
    out.score = criterion(out.partition, tx, ty, pen);
    return out;
}

std::pair<double, double> tune_threshold(const ExperimentConfig& config, int jobs) {
    StudyOptions opts;
    opts.with_joint = false;
    const auto recs = run_study(config, jobs, opts);
    return best_threshold(config, recs);
}

ExperimentReport run_experiment(const ExperimentConfig& config, int jobs,
                                std::ostream* per_rep_csv) {
    const auto recs = run_study(config, jobs, StudyOptions{});
    const auto [threshold, tuned_freq] = best_threshold(config, recs);

    // Baseline metrics at the tuned threshold. Pooled rows need both samples'
    // counts; contexts absent from the other fitted tree carry zero counts
    // there only if never observed, so re-deriving from the stored count maps
    // is exact.
    const int alpha = config.model_x.alphabet.size();
    const int depth = config.effective_depth();
    Truth truth;
    truth.part = &config.true_partition;
    truth.tau_x = config.true_partition.sigma0;
    truth.tau_x.insert(config.true_partition.sigma1.begin(), config.true_partition.sigma1.end());
    truth.tau_y = config.true_partition.sigma0;
    truth.tau_y.insert(config.true_partition.sigma2.begin(), config.true_partition.sigma2.end());

    const ModelSampler sampler_x(config.model_x);
    const ModelSampler sampler_y(config.model_y);
    std::vector<MethodBits> joint_bits(recs.size()), sep_bits(recs.size());
    for (std::size_t r = 0; r < recs.size(); ++r) {
        joint_bits[r] = recs[r].joint;
        const JointPartition part = baseline_partition(recs[r], threshold);
        sep_bits[r] = score_partition(part, truth);
        // Resample deterministically to evaluate the baseline's KL at the
        // tuned threshold from the same sequences.
        std::mt19937_64 rng(config.base_seed + static_cast<std::uint64_t>(r));
        const Sequence x = sampler_x.draw(config.n, rng);
        const Sequence y = sampler_y.draw(config.m, rng);
        const CountTrie tx(x, alpha, depth);
        const CountTrie ty(y, alpha, depth);
        fill_kls(sep_bits[r], config, part, tx, ty);
    }

    ExperimentReport report;
    report.reps = config.reps;
    report.kl_smoothing = config.kl_smoothing;
    report.chosen_threshold = threshold;
    report.separate_correct_freq = tuned_freq;
    report.joint = aggregate(joint_bits, config.reps);
    report.separate = aggregate(sep_bits, config.reps);

    if (per_rep_csv) {
        *per_rep_csv << "rep,method,tau_x,tau_y,both,sigma0,sigma1,sigma2,kl_x,kl_y\n";
        for (std::size_t r = 0; r < recs.size(); ++r) {
            write_csv_row(*per_rep_csv, static_cast<int>(r), "joint", joint_bits[r]);
            write_csv_row(*per_rep_csv, static_cast<int>(r), "separate", sep_bits[r]);
        }
    }
    return report;
}

std::vector<std::pair<double, double>> sweep_lambda(const ExperimentConfig& config, int jobs) {
    std::vector<std::pair<double, double>> curve;
    StudyOptions opts;
    opts.with_baseline = false;
    for (double lambda : config.lambda_grid) {
        ExperimentConfig c = config;
        c.lambda = lambda;
        const auto recs = run_study(c, jobs, opts);
        int correct = 0;
        for (const RepRecord& rec : recs) correct += rec.joint.triple();
        curve.emplace_back(lambda, static_cast<double>(correct) / config.reps);
    }
    return curve;
}

std::string report_table(const ExperimentReport& report) {
    char line[256];
    std::string out;
    std::snprintf(line, sizeof line, "%-11s %7s %7s %7s %7s %7s %7s %10s %10s\n", "method",
                  "tau_X", "tau_Y", "both", "sigma0", "sigma1", "sigma2", "KL_X", "KL_Y");
    out += line;
    auto row = [&](const char* name, const MethodReport& m) {
        std::snprintf(line, sizeof line,
                      "%-11s %6.1f%% %6.1f%% %6.1f%% %6.1f%% %6.1f%% %6.1f%% %10.2e %10.2e\n",
                      name, 100.0 * m.tau_x.freq, 100.0 * m.tau_y.freq, 100.0 * m.both.freq,
                      100.0 * m.sigma0.freq, 100.0 * m.sigma1.freq, 100.0 * m.sigma2.freq,
                      m.mean_kl_x, m.mean_kl_y);
        out += line;
    };
    row("sep. est.", report.separate);
    row("joint est.", report.joint);
    return out;
}

namespace {

ordered_json method_json(const MethodReport& m, KlSmoothing smoothing) {
    ordered_json j;
    auto stat = [](const FreqStat& f) {
        ordered_json s;
        s["freq"] = round_sig(f.freq);
        s["moe"] = round_sig(f.moe);
        return s;
    };
    j["tau_x"] = stat(m.tau_x);
    j["tau_y"] = stat(m.tau_y);
    j["both"] = stat(m.both);
    j["sigma0"] = stat(m.sigma0);
    j["sigma1"] = stat(m.sigma1);
    j["sigma2"] = stat(m.sigma2);
    j["mean_kl_x"] = round_sig(m.mean_kl_x);
    j["mean_kl_y"] = round_sig(m.mean_kl_y);
    if (smoothing == KlSmoothing::raw) {
        j["kl_x_infinite"] = m.kl_x_infinite;
        j["kl_y_infinite"] = m.kl_y_infinite;
    }
    return j;
}

} // namespace

ordered_json report_to_json(const ExperimentReport& report) {
    ordered_json j;
    j["reps"] = report.reps;
    j["kl_smoothing"] = report.kl_smoothing == KlSmoothing::add_half ? "add_half" : "raw";
    j["chosen_threshold"] = round_sig(report.chosen_threshold);
    j["separate_correct_freq"] = round_sig(report.separate_correct_freq);
    j["separate"] = method_json(report.separate, report.kl_smoothing);
    j["joint"] = method_json(report.joint, report.kl_smoothing);
    return j;
}

ExperimentConfig config_from_json(const ordered_json& j) {
    ExperimentConfig config;
    config.model_x = to_model(model_file_from_json(j.at("model_x")));
    config.model_y = to_model(model_file_from_json(j.at("model_y")));
    const auto& part = j.at("true_partition");
    auto parse_set = [&](const char* key) {
        ContextSet set;
        for (const auto& s : part.at(key))
            set.insert(context_parse(s.get<std::string>(), config.model_x.alphabet));
        return set;
    };
    config.true_partition.sigma0 = parse_set("sigma0");
    config.true_partition.sigma1 = parse_set("sigma1");
    config.true_partition.sigma2 = parse_set("sigma2");
    config.n = j.at("n").get<std::uint64_t>();
    config.m = j.at("m").get<std::uint64_t>();
    config.reps = j.at("reps").get<int>();
    config.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("lambda")) config.lambda = j.at("lambda").get<double>();
    if (j.contains("depth")) config.depth = j.at("depth").get<int>();
    if (j.contains("threshold_grid"))
        config.threshold_grid = j.at("threshold_grid").get<std::vector<double>>();
    if (j.contains("lambda_grid"))
        config.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    if (j.contains("kl_smoothing")) {
        const std::string s = j.at("kl_smoothing").get<std::string>();
        if (s == "add_half") config.kl_smoothing = KlSmoothing::add_half;
        else if (s == "raw") config.kl_smoothing = KlSmoothing::raw;
        else throw std::runtime_error("experiment config: unknown kl_smoothing '" + s + "'");
    }
    if (j.contains("chi2_mode")) {
        const std::string s = j.at("chi2_mode").get<std::string>();
        if (s == "two_sample") config.chi2_mode = Chi2Mode::two_sample;
        else if (s == "normalized") config.chi2_mode = Chi2Mode::normalized;
        else throw std::runtime_error("experiment config: unknown chi2_mode '" + s + "'");
    }
    config.validate();
    return config;
}

} // namespace vlmc
